#include "lipo/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lipo/jerk_qp.hpp"
#include "lipo/trajectory_io.hpp"

namespace lipo {

SmoothnessReport compute_report(const Trajectory& executed) {
  validate(executed);
  SmoothnessReport report;
  report.steps = executed.length();
  report.rate_hz = executed.rate_hz;

  const Eigen::Index n = executed.length();
  const Eigen::Index joints = executed.joints();
  const double dt = 1.0 / executed.rate_hz;
  const Eigen::MatrixXd& x = executed.samples;

  if (n >= 3) {
    double sum_acc_sq = 0.0;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      const Eigen::RowVectorXd vel = (x.row(i + 1) - x.row(i - 1)) / (2.0 * dt);
      const Eigen::RowVectorXd acc = (x.row(i + 1) - 2.0 * x.row(i) + x.row(i - 1)) / (dt * dt);
      report.max_velocity = std::max(report.max_velocity, vel.cwiseAbs().maxCoeff());
      report.max_acceleration = std::max(report.max_acceleration, acc.cwiseAbs().maxCoeff());
      sum_acc_sq += acc.squaredNorm();
    }
    report.rms_acceleration =
        std::sqrt(sum_acc_sq / static_cast<double>((n - 2) * joints));
  }
  if (n >= 4) {
    const JerkOperator op{n, dt};
    const Eigen::MatrixXd jerk = op.apply(x);
    report.max_jerk = jerk.cwiseAbs().maxCoeff();
    report.rms_jerk =
        std::sqrt(jerk.squaredNorm() / static_cast<double>(jerk.rows() * joints));
  }
  return report;
}

SmoothnessReport compute_report(const Trajectory& executed, const Trajectory& committed,
                                std::span<const SegmentRecord> segments) {
  SmoothnessReport report = compute_report(executed);
  validate(committed);

  const std::int64_t base = committed.start_step;
  const Eigen::Index rows = committed.length();

  for (std::size_t k = 0; k < segments.size(); ++k) {
    const SegmentRecord& seg = segments[k];
    const std::int64_t start = seg.stats.start_step;

    if (k > 0) {
      const std::int64_t s = start - base;
      if (s > 0 && s < rows) {
        const double jump =
            (committed.samples.row(s) - committed.samples.row(s - 1)).cwiseAbs().maxCoeff();
        report.boundary_jumps.push_back(jump);
        report.max_boundary_jump = std::max(report.max_boundary_jump, jump);
      }
    }

    if (!seg.reference.has_value()) {
      continue;
    }
    report.has_reference_stats = true;
    const ReferenceTrajectory& ref = *seg.reference;
    const std::int64_t span_end =
        k + 1 < segments.size() ? segments[k + 1].stats.start_step : base + rows;
    for (std::int64_t g = start; g < std::min(span_end, base + rows); ++g) {
      const std::int64_t local = g - start;
      if (local >= ref.length()) {
        break;
      }
      const double dev = (committed.samples.row(g - base) - ref.samples.row(local))
                             .cwiseAbs()
                             .maxCoeff();
      switch (ref.regimes[static_cast<std::size_t>(local)]) {
        case Regime::kDelay:
          report.max_dev_delay = std::max(report.max_dev_delay, dev);
          break;
        case Regime::kBlend:
          report.max_dev_blend = std::max(report.max_dev_blend, dev);
          break;
        case Regime::kPath:
          report.max_dev_path = std::max(report.max_dev_path, dev);
          break;
      }
    }
  }
  return report;
}

SmoothnessReport session_report(const SessionResult& result) {
  SmoothnessReport report = compute_report(result.executed, result.committed,
                                           std::span<const SegmentRecord>(result.segments));
  report.stall_count = result.stall_count;
  report.inference_count = result.inference_count;
  report.degraded_segments = result.degraded_segments;
  return report;
}

std::string to_text(const SmoothnessReport& r) {
  std::string out;
  out += "steps: " + std::to_string(r.steps) + "\n";
  out += "rate_hz: " + format_double(r.rate_hz) + "\n";
  out += "max_velocity_rad_s: " + format_double(r.max_velocity) + "\n";
  out += "max_acceleration_rad_s2: " + format_double(r.max_acceleration) + "\n";
  out += "rms_acceleration_rad_s2: " + format_double(r.rms_acceleration) + "\n";
  out += "max_jerk_rad_s3: " + format_double(r.max_jerk) + "\n";
  out += "rms_jerk_rad_s3: " + format_double(r.rms_jerk) + "\n";
  out += "chunk_switches: " + std::to_string(r.boundary_jumps.size()) + "\n";
  out += "max_boundary_jump_rad: " + format_double(r.max_boundary_jump) + "\n";
  if (r.has_reference_stats) {
    out += "max_dev_delay_rad: " + format_double(r.max_dev_delay) + "\n";
    out += "max_dev_blend_rad: " + format_double(r.max_dev_blend) + "\n";
    out += "max_dev_path_rad: " + format_double(r.max_dev_path) + "\n";
  }
  out += "stall_count: " + std::to_string(r.stall_count) + "\n";
  out += "inference_count: " + std::to_string(r.inference_count) + "\n";
  out += "degraded_segments: " + std::to_string(r.degraded_segments) + "\n";
  return out;
}

std::string report_csv_header() {
  return "label,steps,rate_hz,max_velocity_rad_s,max_acceleration_rad_s2,"
         "rms_acceleration_rad_s2,max_jerk_rad_s3,rms_jerk_rad_s3,chunk_switches,"
         "max_boundary_jump_rad,max_dev_delay_rad,max_dev_blend_rad,max_dev_path_rad,"
         "stall_count,inference_count,degraded_segments";
}

std::string to_csv_row(const SmoothnessReport& r, const std::string& label) {
  std::string out = label;
  out += "," + std::to_string(r.steps);
  out += "," + format_double(r.rate_hz);
  out += "," + format_double(r.max_velocity);
  out += "," + format_double(r.max_acceleration);
  out += "," + format_double(r.rms_acceleration);
  out += "," + format_double(r.max_jerk);
  out += "," + format_double(r.rms_jerk);
  out += "," + std::to_string(r.boundary_jumps.size());
  out += "," + format_double(r.max_boundary_jump);
  if (r.has_reference_stats) {
    out += "," + format_double(r.max_dev_delay);
    out += "," + format_double(r.max_dev_blend);
    out += "," + format_double(r.max_dev_path);
  } else {
    out += ",,,";
  }
  out += "," + std::to_string(r.stall_count);
  out += "," + std::to_string(r.inference_count);
  out += "," + std::to_string(r.degraded_segments);
  return out;
}

}  // namespace lipo
