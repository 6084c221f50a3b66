#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lipo/kinematics.hpp"
#include "lipo/metrics.hpp"
#include "lipo/scheduler.hpp"
#include "lipo/trajectory_io.hpp"
#include "lipo/types.hpp"

namespace fs = std::filesystem;

namespace {

struct SharedOptions {
  lipo::TimingConfig timing;
  lipo::BoundsConfig bounds;
  std::vector<double> dh;  // flattened a,alpha,d,theta_offset rows
  lipo::SolverOptions solver;
  double ensemble_decay = 0.1;
};

struct SmoothOptions {
  std::string input;
  std::string output;
  std::string report;
  std::string csv;
  std::string plot;
};

struct SimulateOptions {
  std::string out_dir;
  std::uint64_t seed = 0;
  std::int64_t chunks = 100;
  std::string mode = "LiPoQuintic";
  std::string family = "steps";
  std::string replay_input;
  int joints = 6;
  double noise = 0.0;
  int latency = 5;
  int latency_min = -1;
  int latency_max = -1;
  bool threaded = false;
};

struct BoundOptions {
  std::string input;
  std::string output;
  double eps = 0.0;
};

lipo::KinematicChain chain_from_options(const SharedOptions& shared) {
  if (shared.dh.empty()) {
    return lipo::default_six_dof_chain();
  }
  if (shared.dh.size() % 4 != 0) {
    throw lipo::ConfigError("--dh expects 4 values per joint: a,alpha,d,theta_offset");
  }
  lipo::KinematicChain chain;
  for (std::size_t i = 0; i < shared.dh.size(); i += 4) {
    chain.links.push_back(
        lipo::DhParam{shared.dh[i], shared.dh[i + 1], shared.dh[i + 2], shared.dh[i + 3]});
  }
  return chain;
}

std::string joint_name_or(const std::vector<std::string>& names, Eigen::Index j) {
  return j < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(j)]
                                                     : "j" + std::to_string(j + 1);
}

// Per-step curve families of the pipeline: raw prediction, blended
// reference, perturbation envelope, optimized segment, and the executed
// (committed) sample, which differs from `opt` where a later chunk took
// over. One row per action step of the committed span.
std::string plot_csv(const lipo::OfflineResult& result, const lipo::BoundsConfig& bounds,
                     const std::vector<std::string>& names) {
  const Eigen::Index joints = result.committed.joints();
  std::string out = "step,time_s";
  for (Eigen::Index j = 0; j < joints; ++j) {
    const std::string n = joint_name_or(names, j);
    out += ",raw_" + n + ",blend_" + n + ",lo_" + n + ",hi_" + n + ",opt_" + n + ",exec_" + n;
  }
  out += "\n";

  const std::int64_t base = result.committed.start_step;
  const Eigen::Index rows = result.committed.length();
  for (std::size_t k = 0; k < result.segments.size(); ++k) {
    const lipo::SegmentRecord& seg = result.segments[k];
    const std::int64_t start = seg.stats.start_step;
    const std::int64_t span_end = k + 1 < result.segments.size()
                                      ? result.segments[k + 1].stats.start_step
                                      : base + rows;
    for (std::int64_t g = start; g < span_end; ++g) {
      const Eigen::Index local = g - start;
      if (local >= seg.raw.rows()) {
        break;
      }
      out += std::to_string(g) + "," +
             lipo::format_double(lipo::steps_to_seconds(g, result.committed.rate_hz));
      for (Eigen::Index j = 0; j < joints; ++j) {
        const double raw = seg.raw(local, j);
        const double blend = seg.reference ? seg.reference->samples(local, j) : raw;
        double band = 0.0;
        if (seg.reference) {
          switch (seg.reference->regimes[static_cast<std::size_t>(local)]) {
            case lipo::Regime::kDelay:
              band = 0.0;
              break;
            case lipo::Regime::kBlend:
              band = bounds.eps_blend;
              break;
            case lipo::Regime::kPath:
              band = bounds.eps_path;
              break;
          }
        }
        out += "," + lipo::format_double(raw) + "," + lipo::format_double(blend) + "," +
               lipo::format_double(blend - band) + "," + lipo::format_double(blend + band) +
               "," + lipo::format_double(seg.optimized(local, j)) + "," +
               lipo::format_double(result.committed.samples(g - base, j));
      }
      out += "\n";
    }
  }
  return out;
}

int run_smooth(const SharedOptions& shared, const SmoothOptions& opt) {
  const lipo::ChunkedFileContent input = lipo::read_chunked_file(opt.input);

  lipo::TimingConfig timing = shared.timing;
  timing.action_rate_hz = input.rate_hz;  // the file defines its own rate
  lipo::validate_config(timing, shared.bounds);

  const lipo::OfflineResult result = lipo::smooth_stream(
      input.chunks, timing, shared.bounds, timing.control_rate_hz, shared.solver);

  lipo::write_trajectory_file(opt.output, result.executed, input.joint_names);

  lipo::SmoothnessReport report =
      lipo::compute_report(result.executed, result.committed,
                           std::span<const lipo::SegmentRecord>(result.segments));
  report.degraded_segments = result.degraded_segments;
  if (!opt.report.empty()) {
    lipo::atomic_write_file(opt.report, lipo::to_text(report));
  }
  if (!opt.csv.empty()) {
    lipo::atomic_write_file(opt.csv,
                            lipo::report_csv_header() + "\n" +
                                lipo::to_csv_row(report, "smooth") + "\n");
  }
  if (!opt.plot.empty()) {
    lipo::atomic_write_file(opt.plot, plot_csv(result, shared.bounds, input.joint_names));
  }
  return 0;
}

void write_session_artifacts(const fs::path& dir, const lipo::SessionResult& result) {
  fs::create_directories(dir);
  std::string events;
  for (const std::string& line : result.event_log) {
    events += line;
    events += "\n";
  }
  lipo::atomic_write_file(dir / "events.log", events);
  lipo::write_trajectory_file(dir / "committed.traj", result.committed);
  lipo::write_trajectory_file(dir / "executed.traj", result.executed);
}

int run_simulate(const SharedOptions& shared, const SimulateOptions& opt) {
  lipo::SessionConfig config;
  config.timing = shared.timing;
  config.bounds = shared.bounds;
  config.chunks = opt.chunks;
  config.solver = shared.solver;
  config.ensemble_decay = shared.ensemble_decay;
  config.threaded = opt.threaded;

  config.stub.seed = opt.seed;
  config.stub.joints = opt.joints;
  config.stub.noise_mag = opt.noise;
  if (opt.family == "sinusoid") {
    config.stub.family = lipo::StubFamily::kSinusoid;
  } else if (opt.family == "steps") {
    config.stub.family = lipo::StubFamily::kSteps;
  } else if (opt.family == "replay") {
    config.stub.family = lipo::StubFamily::kReplay;
    if (opt.replay_input.empty()) {
      throw lipo::ConfigError("--family replay requires --replay-input");
    }
    config.stub.replay = lipo::read_chunked_file(opt.replay_input).chunks;
  } else {
    throw lipo::ConfigError("unknown stub family: " + opt.family);
  }
  const int lat_min = opt.latency_min >= 0 ? opt.latency_min : opt.latency;
  const int lat_max = opt.latency_max >= 0 ? opt.latency_max : opt.latency;
  config.stub.latency = lipo::LatencyModel{lat_min, lat_max};

  lipo::validate_config(config.timing, config.bounds);

  std::vector<lipo::ExecutionMode> modes;
  if (opt.mode == "all") {
    modes = lipo::all_execution_modes();
  } else {
    modes.push_back(lipo::parse_execution_mode(opt.mode));
  }

  const fs::path out_root(opt.out_dir);
  std::string summary = lipo::report_csv_header() + "\n";
  for (const lipo::ExecutionMode mode : modes) {
    config.mode = mode;
    const lipo::SessionResult result = lipo::run_session(config);
    const lipo::SmoothnessReport report = lipo::session_report(result);

    const fs::path dir = modes.size() > 1 ? out_root / lipo::to_string(mode) : out_root;
    write_session_artifacts(dir, result);
    lipo::atomic_write_file(dir / "report.txt", lipo::to_text(report));
    lipo::atomic_write_file(dir / "report.csv",
                            lipo::report_csv_header() + "\n" +
                                lipo::to_csv_row(report, lipo::to_string(mode)) + "\n");
    summary += lipo::to_csv_row(report, lipo::to_string(mode)) + "\n";

    if (result.config_warning) {
      std::cerr << "warning: scheduling margin is infeasible for mode "
                << lipo::to_string(mode) << "; stalls recorded: " << result.stall_count
                << "\n";
    }
  }
  if (modes.size() > 1) {
    lipo::atomic_write_file(out_root / "summary.csv", summary);
  }
  return 0;
}

int run_bound(const SharedOptions& shared, const BoundOptions& opt) {
  const lipo::TrajectoryFileContent input = lipo::read_trajectory_file(opt.input);
  const lipo::KinematicChain chain = chain_from_options(shared);
  const lipo::DeviationReport report =
      lipo::task_space_bound(chain, input.trajectory, opt.eps);

  std::string out = "# convention=" + lipo::to_string(report.convention) + "\n";
  out += "# session_max_m=" + lipo::format_double(report.session_max) + "\n";
  out += "step,time_s,jacobian_norm_m_per_rad,dx_max_m\n";
  for (std::size_t i = 0; i < report.bounds.size(); ++i) {
    const std::int64_t step = input.trajectory.start_step + static_cast<std::int64_t>(i);
    out += std::to_string(step) + "," +
           lipo::format_double(lipo::steps_to_seconds(step, input.trajectory.rate_hz)) +
           "," + lipo::format_double(report.jacobian_norms[i]) + "," +
           lipo::format_double(report.bounds[i]) + "\n";
  }
  lipo::atomic_write_file(opt.output, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lipo: post-optimization of chunked joint trajectories\n"
               "Blends overlapping action chunks, minimizes jerk inside bounded\n"
               "perturbation windows, and upsamples to the control rate."};
  app.require_subcommand(1);
  app.set_config("--config", "", "configuration file (key=value lines; flags win)");
  app.fallthrough();

  SharedOptions shared;
  app.add_option("--chunk-len", shared.timing.chunk_len_steps, "chunk length in action steps")
      ->capture_default_str();
  app.add_option("--delay-steps", shared.timing.delay_steps,
                 "inference delay window t_d in action steps")
      ->capture_default_str();
  app.add_option("--blend-steps", shared.timing.blend_steps,
                 "blend window length in action steps")
      ->capture_default_str();
  app.add_option("--action-rate", shared.timing.action_rate_hz, "action rate, Hz")
      ->capture_default_str();
  app.add_option("--control-rate", shared.timing.control_rate_hz, "control rate, Hz")
      ->capture_default_str();
  app.add_option("--horizon", shared.timing.execute_horizon_steps,
                 "steps executed per chunk before the next takes over")
      ->capture_default_str();
  app.add_option("--eps-blend", shared.bounds.eps_blend,
                 "perturbation bound in the blend window, rad")
      ->capture_default_str();
  app.add_option("--eps-path", shared.bounds.eps_path,
                 "perturbation bound on the remaining path, rad")
      ->capture_default_str();
  app.add_option("--dh", shared.dh,
                 "kinematic chain as flattened DH rows: a,alpha,d,theta_offset per joint")
      ->delimiter(',');
  app.add_option("--qp-tol", shared.solver.tol, "QP projected-gradient tolerance")
      ->capture_default_str();
  app.add_option("--qp-max-iter", shared.solver.max_iter,
                 "QP iteration cap (0 selects 10x the segment length)")
      ->capture_default_str();
  app.add_option("--te-m", shared.ensemble_decay,
                 "temporal-ensemble exponential weight decay m")
      ->capture_default_str();

  SmoothOptions smooth;
  CLI::App* smooth_cmd =
      app.add_subcommand("smooth", "smooth a chunked trajectory file offline");
  smooth_cmd->add_option("--input", smooth.input, "chunked trajectory file")
      ->required()
      ->check(CLI::ExistingFile);
  smooth_cmd->add_option("--output", smooth.output, "control-rate output trajectory file")
      ->required();
  smooth_cmd->add_option("--report", smooth.report, "smoothness report (key-value text)");
  smooth_cmd->add_option("--csv", smooth.csv, "smoothness report as a CSV row");
  smooth_cmd->add_option("--plot", smooth.plot,
                         "per-step curve families (raw/blend/envelope/optimized) as CSV");

  SimulateOptions simulate;
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "run a seeded inference-delay execution session");
  simulate_cmd->add_option("--out-dir", simulate.out_dir, "output directory")->required();
  simulate_cmd->add_option("--seed", simulate.seed, "session seed (required for reproducibility)")
      ->required();
  simulate_cmd->add_option("--chunks", simulate.chunks, "number of chunks to execute")
      ->capture_default_str();
  simulate_cmd
      ->add_option("--mode", simulate.mode,
                   "LiPoQuintic|LiPoLinear|RawQuintic|RawLinear|TemporalEnsemble|all")
      ->capture_default_str();
  simulate_cmd->add_option("--family", simulate.family, "stub family: sinusoid|steps|replay")
      ->capture_default_str();
  simulate_cmd->add_option("--replay-input", simulate.replay_input,
                           "chunked trajectory file for --family replay");
  simulate_cmd->add_option("--joints", simulate.joints, "joint count of the stub")
      ->capture_default_str();
  simulate_cmd->add_option("--noise", simulate.noise,
                           "per-chunk offset magnitude, rad (0 selects the family default)")
      ->capture_default_str();
  simulate_cmd->add_option("--latency", simulate.latency, "fixed inference latency, steps")
      ->capture_default_str();
  simulate_cmd->add_option("--latency-min", simulate.latency_min,
                           "minimum latency for a seeded-random range");
  simulate_cmd->add_option("--latency-max", simulate.latency_max,
                           "maximum latency for a seeded-random range");
  simulate_cmd->add_flag("--threaded", simulate.threaded,
                         "optimize segments on a producer thread (identical output)");

  BoundOptions bound;
  CLI::App* bound_cmd = app.add_subcommand(
      "bound", "task-space deviation bound of a joint perturbation budget");
  bound_cmd->add_option("--input", bound.input, "plain trajectory file")
      ->required()
      ->check(CLI::ExistingFile);
  bound_cmd->add_option("--eps", bound.eps, "joint perturbation bound, rad")->required();
  bound_cmd->add_option("--output", bound.output, "per-step bound CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1, help exits 0
  }

  try {
    if (app.got_subcommand(smooth_cmd)) {
      return run_smooth(shared, smooth);
    }
    if (app.got_subcommand(simulate_cmd)) {
      return run_simulate(shared, simulate);
    }
    if (app.got_subcommand(bound_cmd)) {
      return run_bound(shared, bound);
    }
  } catch (const lipo::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
