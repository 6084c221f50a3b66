#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lipo/blending.hpp"
#include "lipo/jerk_qp.hpp"
#include "lipo/policy_stub.hpp"
#include "lipo/quintic.hpp"
#include "lipo/types.hpp"

namespace lipo {

// How a session turns chunk streams into executable trajectories.
enum class ExecutionMode : std::uint8_t {
  kLiPoQuintic,       // blend + jerk QP, quintic upsampling
  kLiPoLinear,        // blend + jerk QP, linear upsampling
  kRawQuintic,        // chunks executed as-is, quintic upsampling
  kRawLinear,         // chunks executed as-is, linear upsampling
  kTemporalEnsemble,  // per-step exponential averaging of all live predictions
};

std::string to_string(ExecutionMode mode);
ExecutionMode parse_execution_mode(const std::string& name);  // throws ConfigError
const std::vector<ExecutionMode>& all_execution_modes();

// Exponentially weighted average of overlapping predictions for one step.
// Index in the vector is the prediction age i (0 = newest); weights are
// exp(-m * i). Throws DataError on an empty set.
JointVector temporal_ensemble(const std::vector<JointVector>& predictions_newest_first,
                              double m);

// Issue step for the chunk beginning at next_chunk_start: early enough that
// under the worst-case latency its arrival precedes the switch by at least
// delay_steps + blend_steps, clamped to now when that moment already passed.
std::int64_t schedule_inference(std::int64_t next_chunk_start, std::int64_t now_step,
                                const TimingConfig& timing, int worst_case_latency);

struct SegmentStats {
  std::int64_t segment = 0;
  std::int64_t issue_step = 0;
  std::int64_t arrival_step = 0;
  std::int64_t start_step = 0;
  int delay_end = 0;
  int blend_end = 0;
  int qp_iterations = 0;     // summed over joints
  bool qp_converged = true;  // all joints
  double qp_objective = 0.0; // summed per-joint jerk energy after optimization
  double solve_time = 0.0;   // wall clock; never serialized
  bool degraded = false;     // blended reference executed because the QP failed
  bool late = false;         // arrived after its freeze window had begun
};

// Per-chunk provenance: the raw prediction, the blended reference (absent in
// raw modes), and the samples that entered the committed stream.
struct SegmentRecord {
  Eigen::MatrixXd raw;
  std::optional<ReferenceTrajectory> reference;
  Eigen::MatrixXd optimized;
  SegmentStats stats;
};

struct SessionConfig {
  TimingConfig timing;
  BoundsConfig bounds;
  ExecutionMode mode = ExecutionMode::kLiPoQuintic;
  StubConfig stub;
  std::int64_t chunks = 100;
  double ensemble_decay = 0.1;  // m in the exponential ensemble weights
  SolverOptions solver;
  // Run chunk inference + optimization on a producer thread, handing
  // finished segments to the executing consumer. Output is bit-identical to
  // the sequential mode.
  bool threaded = false;
};

struct SessionResult {
  Trajectory committed;  // action rate; exactly chunks * horizon rows
  Trajectory executed;   // control rate
  std::vector<SegmentRecord> segments;
  std::vector<std::string> event_log;  // one deterministic line per event
  int stall_count = 0;
  std::int64_t inference_count = 0;
  int degraded_segments = 0;
  bool config_warning = false;
};

// Streaming control-rate emitter shared by sessions and offline smoothing.
//
// Control samples are appended as soon as every action sample they depend on
// is final: a quintic piece over knots [e, e+1] uses central-difference
// derivative estimates, so it needs knots e-1 .. e+2; the linear variant
// needs only the two knots. The session start is treated as at rest
// (zero velocity and acceleration at knot 0). flush() finishes the stream
// with one-sided stencils at the last knot and appends that knot bitwise.
class ControlEmitter {
 public:
  ControlEmitter(double action_rate_hz, double control_rate_hz, bool quintic,
                 Eigen::Index joints);

  // Emits every control sample that became final given that committed rows
  // [0, final_rows) are immutable. Returns the newly emitted samples.
  Eigen::MatrixXd advance(const Eigen::MatrixXd& committed, Eigen::Index final_rows);
  Eigen::MatrixXd flush(const Eigen::MatrixXd& committed, Eigen::Index total_rows);

  Eigen::Index emitted_rows() const { return rows_used_; }
  Eigen::MatrixXd take_output();

 private:
  Eigen::MatrixXd emit_until(const Eigen::MatrixXd& committed, Eigen::Index limit_rows,
                             bool flushing);
  void knot_state(const Eigen::MatrixXd& committed, Eigen::Index knot,
                  Eigen::Index total_rows, bool flushing, Eigen::RowVectorXd& vel,
                  Eigen::RowVectorXd& acc) const;
  void append_row(const Eigen::RowVectorXd& row);

  RationalRate ratio_;
  double dt_;
  bool quintic_;
  Eigen::Index joints_;
  std::int64_t next_index_ = 0;
  bool finished_ = false;
  Eigen::MatrixXd out_;
  Eigen::Index rows_used_ = 0;
  // cached segment for consecutive samples inside one knot interval
  std::int64_t cached_segment_ = -1;
  QuinticSegment segment_;
};

// Convenience wrapper: run the emitter over a complete action-rate
// trajectory. This is the session's executable output for a given spline
// choice.
Trajectory upsample_for_execution(const Trajectory& action, double control_rate_hz,
                                  bool quintic);

// Inference-aware execution loop over a policy stub: chunks are issued
// early, absorb their simulated latency, and are folded into the committed
// trajectory (blend + QP for LiPo modes, direct concatenation for raw modes,
// per-step averaging for the temporal ensemble). The committed prefix at or
// before the execution step is immutable; a step with no committed sample
// holds the last position and records a stall event.
class Session {
 public:
  explicit Session(SessionConfig config);
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  bool done() const { return exec_ >= total_steps_; }
  // Advances one action step; returns the control samples finalized by it.
  Eigen::MatrixXd step();
  // Flushes the control stream and assembles the result. Call once, after
  // the loop.
  SessionResult finish();

 private:
  struct Plan;
  struct PlanQueue;

  Plan make_plan(std::int64_t k);
  Plan obtain_plan(std::int64_t k);
  void integrate(Plan&& plan, std::int64_t now);
  void integrate_pending(std::int64_t now);
  void step_temporal_ensemble();
  void build_lipo_segment(const Eigen::MatrixXd& past_rows, std::int64_t past_start,
                          const Chunk& chunk, int delay_steps, int blend_steps,
                          SegmentRecord& rec) const;
  void log_segment(const SegmentRecord& rec, std::int64_t now);

  SessionConfig config_;
  PolicyStub stub_;
  std::int64_t horizon_ = 0;
  std::int64_t total_steps_ = 0;
  std::vector<std::int64_t> issue_steps_;
  std::vector<std::int64_t> arrival_steps_;

  Eigen::MatrixXd committed_;
  Eigen::Index committed_rows_ = 0;
  std::int64_t exec_ = 0;
  std::int64_t next_segment_ = 0;
  ControlEmitter emitter_;

  // producer-chain state: the provisional tail of the previous plan
  Eigen::MatrixXd chain_tail_;
  std::int64_t chain_tail_start_ = 0;

  std::vector<SegmentRecord> segments_;
  std::vector<std::string> events_;
  std::vector<Eigen::MatrixXd> te_chunks_;  // ring of recent predictions
  int stall_count_ = 0;
  std::int64_t inference_count_ = 0;
  int degraded_segments_ = 0;
  bool config_warning_ = false;
  bool finished_ = false;

  std::unique_ptr<PlanQueue> queue_;
};

SessionResult run_session(const SessionConfig& config);

// Offline smoothing of an explicit chunk stream with arbitrary boundaries:
// the same blend + QP pipeline, where each chunk executes until the next
// one's start and the last chunk runs to its end.
struct OfflineResult {
  Trajectory committed;  // action rate
  Trajectory executed;   // control rate (quintic)
  std::vector<SegmentRecord> segments;
  int degraded_segments = 0;
};

OfflineResult smooth_stream(const std::vector<Chunk>& chunks, const TimingConfig& timing,
                            const BoundsConfig& bounds, double control_rate_hz,
                            const SolverOptions& solver = {});

}  // namespace lipo
