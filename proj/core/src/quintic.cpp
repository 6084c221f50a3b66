#include "lipo/quintic.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>

namespace lipo {

namespace {

void check_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("dt must be positive and finite");
  }
}

}  // namespace

Derivatives estimate_derivatives(const Eigen::MatrixXd& samples, double dt) {
  check_dt(dt);
  const Eigen::Index n = samples.rows();
  if (n < 5) {
    throw DataError("too short for derivative estimation: need at least 5 samples");
  }

  Derivatives d;
  d.velocity.resize(n, samples.cols());
  d.acceleration.resize(n, samples.cols());

  const double inv_2dt = 1.0 / (2.0 * dt);
  const double inv_dt2 = 1.0 / (dt * dt);

  // Stencils are grouped into sample differences so that constant inputs
  // produce exact zeros.
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    d.velocity.row(i) = (samples.row(i + 1) - samples.row(i - 1)) * inv_2dt;
    d.acceleration.row(i) = ((samples.row(i + 1) - samples.row(i)) -
                             (samples.row(i) - samples.row(i - 1))) *
                            inv_dt2;
  }
  // one-sided second-order ends: {-3,4,-1}/2dt and {2,-5,4,-1}/dt^2
  d.velocity.row(0) = (3.0 * (samples.row(1) - samples.row(0)) +
                       (samples.row(1) - samples.row(2))) *
                      inv_2dt;
  d.velocity.row(n - 1) = (3.0 * (samples.row(n - 1) - samples.row(n - 2)) +
                           (samples.row(n - 3) - samples.row(n - 2))) *
                          inv_2dt;
  d.acceleration.row(0) = (2.0 * (samples.row(0) - samples.row(1)) -
                           3.0 * (samples.row(1) - samples.row(2)) +
                           (samples.row(2) - samples.row(3))) *
                          inv_dt2;
  d.acceleration.row(n - 1) = (2.0 * (samples.row(n - 1) - samples.row(n - 2)) -
                               3.0 * (samples.row(n - 2) - samples.row(n - 3)) +
                               (samples.row(n - 3) - samples.row(n - 4))) *
                              inv_dt2;
  return d;
}

Eigen::VectorXd QuinticSegment::position(double tau) const {
  Eigen::RowVectorXd acc = coeffs.row(5);
  for (int k = 4; k >= 0; --k) {
    acc = acc * tau + coeffs.row(k);
  }
  return acc.transpose();
}

Eigen::VectorXd QuinticSegment::velocity(double tau) const {
  Eigen::RowVectorXd acc = 5.0 * coeffs.row(5);
  for (int k = 4; k >= 1; --k) {
    acc = acc * tau + static_cast<double>(k) * coeffs.row(k);
  }
  return acc.transpose();
}

Eigen::VectorXd QuinticSegment::acceleration(double tau) const {
  Eigen::RowVectorXd acc = 20.0 * coeffs.row(5);
  for (int k = 4; k >= 2; --k) {
    acc = acc * tau + static_cast<double>(k * (k - 1)) * coeffs.row(k);
  }
  return acc.transpose();
}

QuinticSegment hermite_segment(const Eigen::RowVectorXd& p0, const Eigen::RowVectorXd& v0,
                               const Eigen::RowVectorXd& a0, const Eigen::RowVectorXd& p1,
                               const Eigen::RowVectorXd& v1, const Eigen::RowVectorXd& a1,
                               double h) {
  check_dt(h);
  const double h2 = h * h;
  const double h3 = h2 * h;

  QuinticSegment seg;
  seg.duration = h;
  seg.coeffs.resize(6, p0.cols());
  seg.coeffs.row(0) = p0;
  seg.coeffs.row(1) = v0;
  seg.coeffs.row(2) = 0.5 * a0;
  const Eigen::RowVectorXd dp = p1 - p0;
  seg.coeffs.row(3) =
      (20.0 * dp - (8.0 * v1 + 12.0 * v0) * h - (3.0 * a0 - a1) * h2) / (2.0 * h3);
  seg.coeffs.row(4) =
      (-30.0 * dp + (14.0 * v1 + 16.0 * v0) * h + (3.0 * a0 - 2.0 * a1) * h2) / (2.0 * h3 * h);
  seg.coeffs.row(5) =
      (12.0 * dp - 6.0 * (v1 + v0) * h + (a1 - a0) * h2) / (2.0 * h3 * h2);
  return seg;
}

QuinticSpline build_spline(const Eigen::MatrixXd& samples, double dt,
                           const Derivatives& derivatives) {
  check_dt(dt);
  const Eigen::Index n = samples.rows();
  if (n < 2) {
    throw DataError("too short for spline construction: need at least 2 samples");
  }
  if (derivatives.velocity.rows() != n || derivatives.acceleration.rows() != n ||
      derivatives.velocity.cols() != samples.cols() ||
      derivatives.acceleration.cols() != samples.cols()) {
    throw DataError("derivative estimates do not match the sample shape");
  }

  QuinticSpline spline;
  spline.knots = samples;
  spline.knot_dt = dt;
  spline.segments.reserve(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    spline.segments.push_back(hermite_segment(
        samples.row(i), derivatives.velocity.row(i), derivatives.acceleration.row(i),
        samples.row(i + 1), derivatives.velocity.row(i + 1),
        derivatives.acceleration.row(i + 1), dt));
  }
  return spline;
}

QuinticSpline build_spline(const Eigen::MatrixXd& samples, double dt) {
  return build_spline(samples, dt, estimate_derivatives(samples, dt));
}

RationalRate rate_ratio(double control_rate_hz, double knot_rate_hz) {
  if (!(control_rate_hz > 0.0) || !(knot_rate_hz > 0.0)) {
    throw ConfigError("rates must be positive");
  }
  if (control_rate_hz < knot_rate_hz) {
    throw ConfigError("control rate must be >= the knot rate");
  }
  const double x = control_rate_hz / knot_rate_hz;

  // Continued-fraction expansion with snapping of near-integer terms, so a
  // quotient like 400/30 recovers 40/3 despite the rounded division.
  std::int64_t p_prev = 0, q_prev = 1;
  std::int64_t p = 1, q = 0;
  double r = x;
  for (int it = 0; it < 64; ++it) {
    const double a_real = std::floor(r + 1e-9);
    const auto a = static_cast<std::int64_t>(a_real);
    const std::int64_t p_next = a * p + p_prev;
    const std::int64_t q_next = a * q + q_prev;
    if (q_next > 1'000'000 || q_next <= 0) {
      break;
    }
    p_prev = p;
    q_prev = q;
    p = p_next;
    q = q_next;
    if (std::abs(static_cast<double>(p) / static_cast<double>(q) - x) <= 1e-9 * x) {
      return {p, q};
    }
    const double frac = r - a_real;
    if (frac < 1e-12) {
      break;
    }
    r = 1.0 / frac;
  }
  // No small exact rational: freeze a fixed-denominator approximation. The
  // stepping then stays drift-free against that frozen ratio.
  const std::int64_t den = 1 << 20;
  const auto num = static_cast<std::int64_t>(std::llround(x * static_cast<double>(den)));
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

Trajectory sample_spline(const QuinticSpline& spline, double control_rate_hz) {
  if (spline.segments.empty()) {
    throw DataError("cannot sample an empty spline");
  }
  const double knot_rate = 1.0 / spline.knot_dt;
  const RationalRate ratio = rate_ratio(control_rate_hz, knot_rate);

  const auto n_segments = static_cast<std::int64_t>(spline.segments.size());
  // Control samples strictly inside [0, span), then the end knot appended.
  const std::int64_t interior = (n_segments * ratio.num + ratio.den - 1) / ratio.den;
  const std::int64_t total = interior + 1;

  Trajectory out;
  out.rate_hz = control_rate_hz;
  out.start_step = 0;
  out.samples.resize(total, spline.joints());
  for (std::int64_t m = 0; m < interior; ++m) {
    const std::int64_t pos = m * ratio.den;  // knot position * num
    const std::int64_t seg = pos / ratio.num;
    const std::int64_t rem = pos % ratio.num;
    if (rem == 0) {
      out.samples.row(m) = spline.knots.row(seg);
    } else {
      const double tau =
          (static_cast<double>(rem) / static_cast<double>(ratio.num)) * spline.knot_dt;
      out.samples.row(m) = spline.segments[static_cast<std::size_t>(seg)].position(tau);
    }
  }
  out.samples.row(total - 1) = spline.knots.row(spline.knots.rows() - 1);
  return out;
}

Trajectory sample_linear(const Trajectory& action, double control_rate_hz) {
  validate(action);
  if (action.length() < 2) {
    throw DataError("too short for resampling: need at least 2 samples");
  }
  const RationalRate ratio = rate_ratio(control_rate_hz, action.rate_hz);

  const std::int64_t n_segments = action.length() - 1;
  const std::int64_t interior = (n_segments * ratio.num + ratio.den - 1) / ratio.den;
  const std::int64_t total = interior + 1;

  Trajectory out;
  out.rate_hz = control_rate_hz;
  out.start_step = 0;
  out.samples.resize(total, action.joints());
  for (std::int64_t m = 0; m < interior; ++m) {
    const std::int64_t pos = m * ratio.den;
    const std::int64_t seg = pos / ratio.num;
    const std::int64_t rem = pos % ratio.num;
    if (rem == 0) {
      out.samples.row(m) = action.samples.row(seg);
    } else {
      const double t = static_cast<double>(rem) / static_cast<double>(ratio.num);
      out.samples.row(m) =
          action.samples.row(seg) + t * (action.samples.row(seg + 1) - action.samples.row(seg));
    }
  }
  out.samples.row(total - 1) = action.samples.row(action.length() - 1);
  return out;
}

}  // namespace lipo
