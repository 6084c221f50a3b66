// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit status is the number of
// failed criteria.
//
// Usage: lipo_acceptance --cli <path-to-lipo-binary> [--tmp <dir>]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lipo/blending.hpp"
#include "lipo/jerk_qp.hpp"
#include "lipo/kinematics.hpp"
#include "lipo/metrics.hpp"
#include "lipo/quintic.hpp"
#include "lipo/scheduler.hpp"
#include "lipo/trajectory_io.hpp"
#include "qp_oracle.hpp"

namespace fs = std::filesystem;
using namespace lipo;

namespace {

int g_failures = 0;

void report_line(const std::string& label, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " " << label;
  if (!detail.empty()) {
    std::cout << " (" << detail << ")";
  }
  std::cout << std::endl;
  if (!pass) {
    ++g_failures;
  }
}

void report(int number, const std::string& name, bool pass, const std::string& detail) {
  report_line("criterion " + std::to_string(number) + ": " + name, pass, detail);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (static_cast<double>(rng() >> 11) * 0x1.0p-53) * (hi - lo);
}

std::string fmt(double v) { return format_double(v); }

// --------------------------------------------------------------------------

void criterion_1_blending() {
  Trajectory past;
  past.samples = Eigen::MatrixXd::Constant(20, 1, 1.0);
  past.rate_hz = 30.0;
  Chunk chunk;
  chunk.samples = Eigen::MatrixXd::Zero(50, 1);

  const ReferenceTrajectory ref = build_reference(past, chunk, TimingConfig{});
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    double expected;
    if (i <= 5) {
      expected = 1.0;
    } else if (i <= 15) {
      const double alpha = (i - 5.0) / 10.0;
      expected = (1.0 - alpha) * 1.0 + alpha * 0.0;
    } else {
      expected = 0.0;
    }
    worst = std::max(worst, std::abs(ref.samples(i, 0) - expected));
  }
  const bool midpoint_exact = ref.samples(10, 0) == 0.5;
  report(1, "blending matches the piecewise closed form", worst <= 1e-12 && midpoint_exact,
         "max deviation " + fmt(worst) + ", step 10 = " + fmt(ref.samples(10, 0)));
}

void criterion_2_oracle() {
  std::mt19937_64 rng(12345);
  int matched = 0;
  double worst = 0.0;
  constexpr int kTrials = 200;
  for (int trial = 0; trial < kTrials; ++trial) {
    const int n = 6 + static_cast<int>(rng() % 7);  // N <= 12
    const QpProblem p = testing::random_instance(rng, n);
    const QpSolution sol = solve(p);
    const Eigen::VectorXd expected = testing::enumerate_box_qp(p);
    const double err = (sol.epsilon - expected).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
    if (sol.converged && err < 1e-6) {
      ++matched;
    }
  }
  report(2, "solver matches exhaustive active-set enumeration", matched == kTrials,
         std::to_string(matched) + "/" + std::to_string(kTrials) +
             " matched, worst componentwise error " + fmt(worst));
}

void criterion_3_regimes() {
  std::mt19937_64 rng(777);
  double worst_violation = 0.0;
  double worst_excess = 0.0;
  bool all_ok = true;
  constexpr int kTrials = 1000;
  for (int trial = 0; trial < kTrials; ++trial) {
    const QpProblem p = testing::random_paper_instance(rng);
    const QpSolution sol = solve(p);
    all_ok = all_ok && sol.converged;
    for (int i = 0; i < 50; ++i) {
      worst_violation = std::max({worst_violation, p.lower[i] - sol.epsilon[i],
                                  sol.epsilon[i] - p.upper[i]});
    }
    worst_excess =
        std::max(worst_excess, sol.objective_value - jerk_energy(p.q_ref, p.dt));
  }
  report(3, "regime constraints hold and jerk never increases",
         all_ok && worst_violation <= 1e-9 && worst_excess <= 0.0,
         "worst violation " + fmt(worst_violation) + ", worst energy excess " +
             fmt(worst_excess));
}

void criterion_4_latency() {
  // A representative 6-joint segment in the default parameter regime.
  StubConfig stub_cfg;
  stub_cfg.seed = 42;
  stub_cfg.joints = 6;
  stub_cfg.family = StubFamily::kSteps;
  const TimingConfig timing;
  const PolicyStub stub(stub_cfg, timing);
  const Chunk first = stub.predict(0, 0, -5);
  const Chunk second = stub.predict(1, 35, 15);
  Trajectory past;
  past.samples = first.samples.bottomRows(15);
  past.rate_hz = timing.action_rate_hz;
  past.start_step = 35;

  std::vector<double> times_ms;
  constexpr int kRuns = 101;
  for (int run = 0; run < kRuns; ++run) {
    const auto t0 = std::chrono::steady_clock::now();
    const ReferenceTrajectory ref = build_reference(past, second, timing);
    const auto problems = build_problems(ref, BoundsConfig{}, timing.action_dt());
    bool converged = true;
    for (const auto& p : problems) {
      converged = converged && solve(p).converged;
    }
    const auto t1 = std::chrono::steady_clock::now();
    if (!converged) {
      report(4, "six-joint segment optimized within 10 ms", false, "solver did not converge");
      return;
    }
    times_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::nth_element(times_ms.begin(), times_ms.begin() + kRuns / 2, times_ms.end());
  const double median = times_ms[kRuns / 2];
  report(4, "six-joint segment optimized within 10 ms", median < 10.0,
         "median " + fmt(median) + " ms over " + std::to_string(kRuns) + " runs");
}

void criterion_5_spline() {
  SessionConfig cfg;
  cfg.mode = ExecutionMode::kLiPoQuintic;
  cfg.chunks = 290;  // 10150 action steps
  cfg.stub.seed = 3;
  cfg.stub.joints = 2;
  cfg.stub.family = StubFamily::kSteps;
  const SessionResult result = run_session(cfg);

  const double dt = 1.0 / result.committed.rate_hz;
  const QuinticSpline spline = build_spline(result.committed.samples, dt);
  double knot_err = 0.0;
  double c2_err = 0.0;
  for (std::size_t s = 0; s < spline.segments.size(); ++s) {
    const auto& seg = spline.segments[s];
    knot_err = std::max(
        knot_err,
        (seg.position(0.0).transpose() - result.committed.samples.row(s)).cwiseAbs().maxCoeff());
    knot_err = std::max(knot_err, (seg.position(dt).transpose() -
                                   result.committed.samples.row(s + 1))
                                      .cwiseAbs()
                                      .maxCoeff());
    if (s + 1 < spline.segments.size()) {
      const auto& next = spline.segments[s + 1];
      c2_err = std::max(c2_err, (seg.position(dt) - next.position(0.0)).cwiseAbs().maxCoeff());
      c2_err = std::max(c2_err, (seg.velocity(dt) - next.velocity(0.0)).cwiseAbs().maxCoeff());
      c2_err = std::max(
          c2_err, (seg.acceleration(dt) - next.acceleration(0.0)).cwiseAbs().maxCoeff());
    }
  }

  // quadratic reproduction at every 400 Hz sample
  Eigen::MatrixXd quad(50, 1);
  for (int i = 0; i < 50; ++i) {
    const double t = i * dt;
    quad(i, 0) = 0.8 * t * t - 0.3 * t + 0.1;
  }
  const Trajectory out = sample_spline(build_spline(quad, dt), 400.0);
  double quad_err = 0.0;
  for (Eigen::Index m = 0; m < out.length(); ++m) {
    const double t = std::min(static_cast<double>(m) / 400.0, 49.0 * dt);
    quad_err = std::max(quad_err, std::abs(out.samples(m, 0) - (0.8 * t * t - 0.3 * t + 0.1)));
  }

  report(5, "spline continuity and reproduction across a long session",
         knot_err <= 1e-10 && c2_err <= 1e-8 && quad_err <= 1e-10,
         std::to_string(spline.segments.size() + 1) + " knots, interpolation error " +
             fmt(knot_err) + ", C2 mismatch " + fmt(c2_err) + ", quadratic error " +
             fmt(quad_err));
}

void criterion_6_end_to_end() {
  SessionConfig cfg;
  cfg.chunks = 100;
  cfg.stub.seed = 42;
  cfg.stub.joints = 6;
  cfg.stub.family = StubFamily::kSteps;  // 0.3 rad chunk offsets

  cfg.mode = ExecutionMode::kLiPoQuintic;
  const SessionResult lipo_run = run_session(cfg);
  cfg.mode = ExecutionMode::kRawLinear;
  const SessionResult raw_run = run_session(cfg);

  const SmoothnessReport lipo = session_report(lipo_run);
  const SmoothnessReport raw = session_report(raw_run);

  const double jerk_cut = 1.0 - lipo.max_jerk / raw.max_jerk;
  const double acc_cut = 1.0 - lipo.max_acceleration / raw.max_acceleration;
  const bool bounds_ok = lipo.max_dev_delay == 0.0 &&
                         lipo.max_dev_blend <= 0.02 + 1e-9 &&
                         lipo.max_dev_path <= 0.003 + 1e-9;
  report(6, "smoothing cuts jerk >= 50% and acceleration >= 30% within the budgets",
         jerk_cut >= 0.5 && acc_cut >= 0.3 && bounds_ok,
         "jerk cut " + fmt(100.0 * jerk_cut) + "%, acceleration cut " +
             fmt(100.0 * acc_cut) + "%, blend dev " + fmt(lipo.max_dev_blend) +
             ", path dev " + fmt(lipo.max_dev_path));
}

void criterion_7_liveness() {
  SessionConfig cfg;
  cfg.mode = ExecutionMode::kLiPoQuintic;
  cfg.chunks = 286;  // 10010 action steps
  cfg.stub.seed = 9;
  cfg.stub.joints = 3;
  cfg.stub.family = StubFamily::kSteps;
  cfg.stub.latency = LatencyModel{5, 5};
  const SessionResult result = run_session(cfg);

  bool delay_bitwise = true;
  const int horizon = cfg.timing.execute_horizon_steps;
  for (std::size_t k = 1; k < result.segments.size(); ++k) {
    const SegmentRecord& seg = result.segments[k];
    const SegmentRecord& prev = result.segments[k - 1];
    for (int i = 0; i <= seg.reference->delay_end; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double committed =
            result.committed.samples(seg.stats.start_step + i, j);
        delay_bitwise = delay_bitwise && committed == seg.reference->samples(i, j) &&
                        committed == prev.optimized(horizon + i, j);
      }
    }
  }
  report(7, "10k-step session has zero stalls and bitwise delay windows",
         result.stall_count == 0 && delay_bitwise,
         std::to_string(result.committed.length()) + " steps, " +
             std::to_string(result.stall_count) + " stalls, delay windows bitwise: " +
             (delay_bitwise ? "yes" : "no"));
}

void criterion_8_task_space() {
  const KinematicChain chain = default_six_dof_chain();
  std::mt19937_64 rng(31);
  const double eps_bar = 0.003;
  const double slack = 10.0 * 6.0 * eps_bar * eps_bar;
  double worst_margin = -1e9;
  bool sound = true;
  for (int trial = 0; trial < 1000; ++trial) {
    JointVector q(6), eps(6);
    for (int i = 0; i < 6; ++i) {
      q[i] = uniform(rng, -3.0, 3.0);
      eps[i] = uniform(rng, -eps_bar, eps_bar);
    }
    const double true_dev =
        (forward_kinematics(chain, q + eps) - forward_kinematics(chain, q)).norm();
    const double bound = induced_norm_inf_to_2(jacobian(chain, q)) * eps_bar;
    sound = sound && true_dev <= bound + slack;
    worst_margin = std::max(worst_margin, true_dev - bound);
  }

  KinematicChain one_link;
  one_link.links = {DhParam{0.5, 0, 0, 0}};
  Trajectory zero;
  zero.samples = Eigen::MatrixXd::Zero(3, 1);
  zero.rate_hz = 30.0;
  const DeviationReport single = task_space_bound(one_link, zero, 0.02);
  const bool exact = single.session_max == 0.01 && single.bounds[0] == 0.01;

  report(8, "task-space bound is sound; single-link case reports exactly 0.01 m",
         sound && exact,
         "worst first-order margin " + fmt(worst_margin) + " m (slack " + fmt(slack) +
             "), single-link bound " + fmt(single.session_max) + " m");
}

void criterion_9_temporal_ensemble(const fs::path& tmp) {
  JointVector a(1), b(1);
  a << 0.4;
  const bool identity = temporal_ensemble({a}, 0.9)[0] == 0.4;
  a << 0.0;
  b << 1.0;
  const double third = temporal_ensemble({a, b}, std::log(2.0))[0];
  const bool weighted = std::abs(third - 1.0 / 3.0) <= 1e-15;

  SessionConfig cfg;
  cfg.chunks = 12;
  cfg.stub.seed = 7;
  cfg.stub.joints = 3;
  cfg.stub.family = StubFamily::kSteps;
  std::string summary = report_csv_header() + "\n";
  bool te_ran = false;
  for (const ExecutionMode mode : all_execution_modes()) {
    cfg.mode = mode;
    const SessionResult result = run_session(cfg);
    summary += to_csv_row(session_report(result), to_string(mode)) + "\n";
    if (mode == ExecutionMode::kTemporalEnsemble) {
      te_ran = result.committed.length() == cfg.chunks * cfg.timing.execute_horizon_steps &&
               result.inference_count == result.committed.length();
    }
  }
  const fs::path csv = tmp / "mode_comparison.csv";
  atomic_write_file(csv, summary);
  const bool in_csv = summary.find("TemporalEnsemble,") != std::string::npos;

  report(9, "temporal-ensemble unit cases pass and the mode joins the comparison",
         identity && weighted && te_ran && in_csv,
         "two-prediction case " + fmt(third) + ", comparison at " + csv.string());
}

int run_cli(const std::string& command) {
  const int status = std::system(command.c_str());
  if (status == -1) {
    return -1;
  }
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool trees_identical(const fs::path& a, const fs::path& b, std::string& detail) {
  std::vector<fs::path> rel;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (entry.is_regular_file()) {
      rel.push_back(fs::relative(entry.path(), a));
    }
  }
  std::sort(rel.begin(), rel.end());
  if (rel.empty()) {
    detail = "no output files under " + a.string();
    return false;
  }
  for (const auto& r : rel) {
    if (!fs::exists(b / r)) {
      detail = "missing " + (b / r).string();
      return false;
    }
    if (slurp(a / r) != slurp(b / r)) {
      detail = "byte mismatch in " + r.string();
      return false;
    }
  }
  detail = std::to_string(rel.size()) + " files byte-identical";
  return true;
}

// Not a numbered criterion: the command-line contract (exit codes 0/1/2,
// --help, config file with flag precedence) backing the harness invariants.
void cli_contract(const std::string& cli, const fs::path& tmp) {
  if (cli.empty()) {
    report_line("command-line contract", false, "pass --cli <path-to-lipo>");
    return;
  }
  bool ok = true;
  std::string detail;

  if (run_cli(cli + " --help > /dev/null") != 0) {
    ok = false;
    detail += "--help should exit 0; ";
  }
  if (run_cli(cli + " --no-such-flag > /dev/null 2>&1") != 1) {
    ok = false;
    detail += "unknown flag should exit 1; ";
  }
  if (run_cli(cli + " smooth --input /nonexistent.traj --output /tmp/x.traj"
                    " > /dev/null 2>&1") != 1) {
    ok = false;
    detail += "missing input should exit 1 (usage); ";
  }

  const fs::path bad = tmp / "malformed.traj";
  atomic_write_file(bad, "# traj v1 rate_hz=30 joints=2 names=a,b\n0,0.1\n");
  if (run_cli(cli + " smooth --input " + bad.string() +
              " --output /tmp/x.traj > /dev/null 2>&1") != 2) {
    ok = false;
    detail += "malformed data should exit 2; ";
  }

  // config file values apply, and explicit flags win over them
  KinematicChain one_link;
  one_link.links = {DhParam{0.5, 0, 0, 0}};
  Trajectory zero;
  zero.samples = Eigen::MatrixXd::Zero(4, 1);
  zero.rate_hz = 30.0;
  const fs::path traj = tmp / "one_joint.traj";
  write_trajectory_file(traj, zero);
  const fs::path cfg = tmp / "session.cfg";
  atomic_write_file(cfg, "dh=0.5,0,0,0\n");

  const fs::path by_cfg = tmp / "bound_cfg.csv";
  const fs::path by_flag = tmp / "bound_flag.csv";
  const fs::path flag_wins = tmp / "bound_flagwins.csv";
  ok = ok &&
       run_cli(cli + " --config " + cfg.string() + " bound --input " + traj.string() +
               " --eps 0.02 --output " + by_cfg.string() + " > /dev/null 2>&1") == 0;
  ok = ok && run_cli(cli + " bound --input " + traj.string() +
                     " --eps 0.02 --output " + by_flag.string() +
                     " --dh 0.5,0,0,0 > /dev/null 2>&1") == 0;
  // config carries a different chain; the --dh flag must override it
  const fs::path cfg2 = tmp / "session2.cfg";
  atomic_write_file(cfg2, "dh=9.0,0,0,0\n");
  ok = ok && run_cli(cli + " --config " + cfg2.string() + " bound --input " +
                     traj.string() + " --eps 0.02 --output " + flag_wins.string() +
                     " --dh 0.5,0,0,0 > /dev/null 2>&1") == 0;
  if (ok) {
    const std::string a = slurp(by_cfg);
    if (a != slurp(by_flag) || a != slurp(flag_wins)) {
      ok = false;
      detail += "config/flag precedence output mismatch; ";
    }
    if (a.find("0.01") == std::string::npos) {
      ok = false;
      detail += "expected the 0.01 m bound in the output; ";
    }
  } else {
    detail += "a bound invocation failed; ";
  }

  report_line("command-line contract", ok,
              detail.empty() ? "exit codes and config precedence" : detail);
}

void criterion_10_determinism(const std::string& cli, const fs::path& tmp) {
  if (cli.empty()) {
    report(10, "CLI outputs are byte-identical across reruns", false,
           "pass --cli <path-to-lipo>");
    return;
  }

  // fixture: a chunked stream from the stub
  StubConfig stub_cfg;
  stub_cfg.seed = 5;
  stub_cfg.joints = 2;
  stub_cfg.family = StubFamily::kSteps;
  const TimingConfig timing;
  const PolicyStub stub(stub_cfg, timing);
  std::vector<Chunk> chunks;
  for (int k = 0; k < 5; ++k) {
    chunks.push_back(stub.predict(k, k * 35, k * 35 - 20));
  }
  const fs::path fixture = tmp / "fixture.traj";
  write_chunked_file(fixture, chunks, 30.0);

  bool all_ok = true;
  std::string detail;
  for (const char run : {'A', 'B'}) {
    const fs::path dir = tmp / (std::string("run") + run);
    fs::create_directories(dir);
    const std::string base = cli + " ";
    const std::string smooth_cmd =
        base + "smooth --input " + fixture.string() + " --output " +
        (dir / "out.traj").string() + " --report " + (dir / "report.txt").string() +
        " --csv " + (dir / "report.csv").string() + " --plot " + (dir / "plot.csv").string() +
        " > /dev/null";
    const std::string sim_cmd = base + "simulate --out-dir " + (dir / "sim").string() +
                                " --seed 7 --chunks 12 --joints 3 --mode all > /dev/null";
    all_ok = all_ok && run_cli(smooth_cmd) == 0 && run_cli(sim_cmd) == 0;
    const std::string bound_cmd =
        base + "bound --input " + (dir / "sim/LiPoQuintic/committed.traj").string() +
        " --eps 0.003 --output " + (dir / "bound.csv").string() +
        " --dh 0.3,0,0,0,0.25,0,0,0,0.2,0,0,0 > /dev/null";
    all_ok = all_ok && run_cli(bound_cmd) == 0;
  }
  if (!all_ok) {
    report(10, "CLI outputs are byte-identical across reruns", false,
           "a CLI invocation failed");
    return;
  }
  const bool identical = trees_identical(tmp / "runA", tmp / "runB", detail);
  report(10, "CLI outputs are byte-identical across reruns", identical, detail);
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  fs::path tmp = fs::temp_directory_path() / "lipo-acceptance";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") {
      cli = argv[i + 1];
    } else if (flag == "--tmp") {
      tmp = argv[i + 1];
    }
  }
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);

  criterion_1_blending();
  criterion_2_oracle();
  criterion_3_regimes();
  criterion_4_latency();
  criterion_5_spline();
  criterion_6_end_to_end();
  criterion_7_liveness();
  criterion_8_task_space();
  criterion_9_temporal_ensemble(tmp);
  cli_contract(cli, tmp);
  criterion_10_determinism(cli, tmp);

  std::cout << (g_failures == 0 ? "all criteria passed"
                                : std::to_string(g_failures) + " criteria failed")
            << std::endl;
  return g_failures;
}
