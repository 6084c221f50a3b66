#pragma once

#include <span>
#include <string>
#include <vector>

#include "lipo/scheduler.hpp"
#include "lipo/types.hpp"

namespace lipo {

// Quantitative smoothness and fidelity statistics of an executed trajectory.
// All derivative statistics are finite differences at the trajectory's own
// rate; jerk uses the optimizer's third-difference stencil, so optimizer and
// metrics cannot disagree on what jerk means.
struct SmoothnessReport {
  std::int64_t steps = 0;
  double rate_hz = 0.0;

  double max_velocity = 0.0;      // rad/s
  double max_acceleration = 0.0;  // rad/s^2
  double rms_acceleration = 0.0;
  double max_jerk = 0.0;          // rad/s^3
  double rms_jerk = 0.0;

  std::vector<double> boundary_jumps;  // |dq|_inf at each chunk switch, rad
  double max_boundary_jump = 0.0;

  // deviation from the blended reference per regime, action rate, rad
  bool has_reference_stats = false;
  double max_dev_delay = 0.0;
  double max_dev_blend = 0.0;
  double max_dev_path = 0.0;

  int stall_count = 0;
  std::int64_t inference_count = 0;
  int degraded_segments = 0;
};

SmoothnessReport compute_report(const Trajectory& executed);

// Adds chunk-boundary and deviation statistics measured on the action-rate
// committed trajectory against each segment's reference over its executed
// span.
SmoothnessReport compute_report(const Trajectory& executed, const Trajectory& committed,
                                std::span<const SegmentRecord> segments);

// Full report for a finished session, counters included.
SmoothnessReport session_report(const SessionResult& result);

// Flat key-value block.
std::string to_text(const SmoothnessReport& report);
// One row per run for cross-run aggregation.
std::string report_csv_header();
std::string to_csv_row(const SmoothnessReport& report, const std::string& label);

}  // namespace lipo
