#include <doctest.h>

#include <cmath>
#include <random>

#include "lipo/jerk_qp.hpp"
#include "lipo/metrics.hpp"

using namespace lipo;

TEST_CASE("constant trajectories score zero on every metric") {
  Trajectory traj;
  traj.samples = Eigen::MatrixXd::Constant(100, 3, 0.7);
  traj.rate_hz = 400.0;
  const SmoothnessReport report = compute_report(traj);
  CHECK(report.max_velocity == 0.0);
  CHECK(report.max_acceleration == 0.0);
  CHECK(report.rms_acceleration == 0.0);
  CHECK(report.max_jerk == 0.0);
  CHECK(report.rms_jerk == 0.0);
}

TEST_CASE("a pure sinusoid reports its analytic derivative peaks") {
  Trajectory traj;
  const double rate = 400.0;
  const int n = static_cast<int>(rate * 3.0);
  traj.samples.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    traj.samples(i, 0) = std::sin(2.0 * M_PI * i / rate);
  }
  traj.rate_hz = rate;
  const SmoothnessReport report = compute_report(traj);
  CHECK(report.max_velocity == doctest::Approx(2.0 * M_PI).epsilon(0.01));
  CHECK(report.max_acceleration == doctest::Approx(4.0 * M_PI * M_PI).epsilon(0.01));
}

TEST_CASE("metric jerk agrees with the optimizer energy after normalization") {
  std::mt19937_64 rng(3);
  Trajectory traj;
  traj.samples.resize(50, 2);
  for (Eigen::Index i = 0; i < 50; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      traj.samples(i, j) = (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 0.5;
    }
  }
  traj.rate_hz = 30.0;
  const SmoothnessReport report = compute_report(traj);
  const double dt = 1.0 / traj.rate_hz;
  const double rows = static_cast<double>(traj.length() - 3);
  const double from_rms = report.rms_jerk * report.rms_jerk * rows * 2.0 * dt;
  const double energy = jerk_energy(traj.samples, dt);
  CHECK(from_rms == doctest::Approx(energy).epsilon(1e-9));
}

TEST_CASE("metrics are invariant to a constant offset") {
  std::mt19937_64 rng(5);
  Trajectory traj;
  traj.samples.resize(80, 2);
  for (Eigen::Index i = 0; i < 80; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      traj.samples(i, j) = std::sin(0.1 * static_cast<double>(i) + static_cast<double>(j));
    }
  }
  traj.rate_hz = 100.0;
  Trajectory shifted = traj;
  shifted.samples.array() += 17.25;

  const SmoothnessReport a = compute_report(traj);
  const SmoothnessReport b = compute_report(shifted);
  CHECK(b.max_velocity == doctest::Approx(a.max_velocity).epsilon(1e-12));
  CHECK(b.max_acceleration == doctest::Approx(a.max_acceleration).epsilon(1e-9));
  CHECK(b.max_jerk == doctest::Approx(a.max_jerk).epsilon(1e-9));
  CHECK(b.rms_jerk == doctest::Approx(a.rms_jerk).epsilon(1e-9));
}

TEST_CASE("serializations stay in field agreement") {
  SmoothnessReport report;
  report.steps = 10;
  report.rate_hz = 400.0;
  report.boundary_jumps = {0.1, 0.2};
  report.max_boundary_jump = 0.2;
  report.has_reference_stats = true;

  const std::string header = report_csv_header();
  const std::string row = to_csv_row(report, "test");
  const auto count = [](const std::string& s) {
    std::size_t n = 1;
    for (const char c : s) {
      n += c == ',';
    }
    return n;
  };
  CHECK(count(header) == count(row));
  CHECK(row.substr(0, 5) == "test,");

  SmoothnessReport bare;
  bare.steps = 4;
  bare.rate_hz = 30.0;
  CHECK(count(to_csv_row(bare, "x")) == count(header));

  const std::string text = to_text(report);
  CHECK(text.find("max_jerk_rad_s3: ") != std::string::npos);
  CHECK(text.find("stall_count: 0") != std::string::npos);
  CHECK(text.find("max_dev_blend_rad: ") != std::string::npos);
  CHECK(to_text(bare).find("max_dev_blend_rad") == std::string::npos);
}
