#pragma once

#include <cstdint>
#include <vector>

#include "lipo/types.hpp"

namespace lipo {

// Per-knot velocity and acceleration estimates, same shape as the samples.
struct Derivatives {
  Eigen::MatrixXd velocity;
  Eigen::MatrixXd acceleration;
};

// Second-order finite-difference estimates: central stencils at interior
// knots, one-sided second-order stencils at the two ends. Exact for
// polynomials of degree <= 2. Requires at least 5 samples.
Derivatives estimate_derivatives(const Eigen::MatrixXd& samples, double dt);

// One degree-5 polynomial piece over local time tau in [0, duration],
// matching position, velocity and acceleration at both ends.
struct QuinticSegment {
  Eigen::MatrixXd coeffs;  // 6 x joints; coeffs.row(k) multiplies tau^k
  double duration = 0.0;

  Eigen::VectorXd position(double tau) const;
  Eigen::VectorXd velocity(double tau) const;
  Eigen::VectorXd acceleration(double tau) const;
};

QuinticSegment hermite_segment(const Eigen::RowVectorXd& p0, const Eigen::RowVectorXd& v0,
                               const Eigen::RowVectorXd& a0, const Eigen::RowVectorXd& p1,
                               const Eigen::RowVectorXd& v1, const Eigen::RowVectorXd& a1,
                               double h);

// A chain of quintic segments over uniformly spaced knots. Adjacent segments
// share their boundary conditions, so the chain is C2 by construction.
struct QuinticSpline {
  std::vector<QuinticSegment> segments;
  Eigen::MatrixXd knots;  // the interpolated samples, kept bitwise
  double knot_dt = 0.0;

  Eigen::Index joints() const { return knots.cols(); }
};

// Builds with explicit per-knot derivatives (at least 2 samples)...
QuinticSpline build_spline(const Eigen::MatrixXd& samples, double dt,
                           const Derivatives& derivatives);
// ...or with finite-difference estimates (at least 5 samples).
QuinticSpline build_spline(const Eigen::MatrixXd& samples, double dt);

// Exact ratio used by the resamplers: control steps per knot step, reduced.
// Reconstructed from the floating-point quotient by a continued-fraction
// expansion so 400/30 becomes exactly 40/3 and long sessions accumulate no
// phase drift.
struct RationalRate {
  std::int64_t num = 1;
  std::int64_t den = 1;
};
RationalRate rate_ratio(double control_rate_hz, double knot_rate_hz);

// Uniform resampling at the control rate. Control sample m sits at knot
// position m * den / num, evaluated with integer arithmetic; samples landing
// on knots reproduce the knot values bitwise, and the final sample is the
// last knot appended exactly. Output size over K segments is
// ceil(K * num / den) + 1.
Trajectory sample_spline(const QuinticSpline& spline, double control_rate_hz);

// Piecewise-linear counterpart over raw action samples, same stepping.
Trajectory sample_linear(const Trajectory& action, double control_rate_hz);

}  // namespace lipo
