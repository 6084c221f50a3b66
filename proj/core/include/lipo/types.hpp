#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lipo {

// One joint-space configuration sample, radians. Length is the session's
// joint count and is fixed at construction of the containing stream.
using JointVector = Eigen::VectorXd;

// A configuration value violates a documented invariant (rates, windows,
// bound ordering, solver parameters).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data is malformed or inconsistent (parse failures, misaligned step
// indices, dimension mismatches). Messages carry the offending location.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Step-count geometry of the execution loop. All windows are expressed in
// integer action steps; seconds appear only at I/O boundaries.
//
// The freeze window of a segment covers step indices [0, delay_steps]
// inclusive, the blend window covers (delay_steps, delay_steps + blend_steps],
// and the remaining path covers everything after that.
struct TimingConfig {
  int chunk_len_steps = 50;
  int delay_steps = 5;
  int blend_steps = 10;
  double action_rate_hz = 30.0;
  double control_rate_hz = 400.0;
  // Steps consumed from each chunk before the next one takes over. The
  // remaining tail overlaps the next segment's freeze and blend windows.
  int execute_horizon_steps = 35;

  int blend_end() const { return delay_steps + blend_steps; }
  int overlap_steps() const { return chunk_len_steps - execute_horizon_steps; }
  double action_dt() const { return 1.0 / action_rate_hz; }
};

// Per-step perturbation limits for the jerk optimizer, radians.
// The blend bound is looser than the path bound: chunk boundaries carry more
// policy uncertainty than the settled remainder of a chunk.
struct BoundsConfig {
  double eps_blend = 0.02;
  double eps_path = 0.003;
};

// A fixed-length sequence of joint commands predicted by one policy
// inference, plus the timing metadata the scheduler needs. One row per
// action step, one column per joint.
struct Chunk {
  Eigen::MatrixXd samples;
  std::int64_t start_step = 0;            // global step of row 0
  std::int64_t inference_issue_step = 0;  // when inference was requested
  std::int64_t arrival_step = 0;          // when the chunk became available

  Eigen::Index length() const { return samples.rows(); }
  Eigen::Index joints() const { return samples.cols(); }
};

// A uniformly sampled joint trajectory. One row per step at `rate_hz`;
// row 0 corresponds to global step index `start_step` at that rate.
struct Trajectory {
  Eigen::MatrixXd samples;
  double rate_hz = 0.0;
  std::int64_t start_step = 0;

  Eigen::Index length() const { return samples.rows(); }
  Eigen::Index joints() const { return samples.cols(); }
};

// steps / rate_hz. Throws ConfigError when rate_hz is not positive.
double steps_to_seconds(std::int64_t steps, double rate_hz);

// Throws ConfigError naming the violated invariant; returns normally when
// every invariant of TimingConfig and BoundsConfig holds. Total: any input,
// including non-finite values, either validates or produces a named error.
void validate_config(const TimingConfig& timing, const BoundsConfig& bounds);

// Structural checks used at module boundaries. Throw DataError.
void validate(const Chunk& chunk);
void validate(const Trajectory& trajectory);

}  // namespace lipo
