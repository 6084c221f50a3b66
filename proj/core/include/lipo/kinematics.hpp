#pragma once

#include <string>
#include <vector>

#include "lipo/types.hpp"

namespace lipo {

// Standard Denavit-Hartenberg row of one revolute joint:
// A = RotZ(theta + theta_offset) TransZ(d) TransX(a) RotX(alpha).
struct DhParam {
  double a = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double theta_offset = 0.0;
};

struct KinematicChain {
  std::vector<DhParam> links;

  Eigen::Index dof() const { return static_cast<Eigen::Index>(links.size()); }
};

// Nominal 6-DOF arm used when no chain is configured. The link values are
// placeholders in a plausible tabletop-arm range, not calibrated to any
// physical robot; supply measured DH rows for real deviation budgets.
KinematicChain default_six_dof_chain();

// End-effector position (origin of the final frame), meters.
// Throws DataError on a joint-count mismatch.
Eigen::Vector3d forward_kinematics(const KinematicChain& chain, const JointVector& q);

// Positional Jacobian of the end effector, 3 x n, meters/radian.
Eigen::Matrix3Xd jacobian(const KinematicChain& chain, const JointVector& q);

// Which operator norm produced a deviation bound.
enum class NormConvention {
  kHypercubeVertexExact,  // exact inf->2 induced norm via vertex enumeration
  kSqrtNSpectral,         // sqrt(n) * sigma_max(J), used when dof > 20
};

std::string to_string(NormConvention convention);

// Exact induced inf->2 norm: max over sign vectors s of ||J s||_2. The
// feasible perturbations form a hypercube whose image's largest 2-norm is
// attained at a vertex. Enumerates 2^(n-1) vertices (sign symmetry) with a
// Gray-code update; requires dof <= 20.
double induced_norm_inf_to_2(const Eigen::Matrix3Xd& jac);

// Per-step worst-case task-space deviation |f(q + e) - f(q)| for
// ||e||_inf <= eps_bar, to first order: ||J(q)|| * eps_bar.
struct DeviationReport {
  std::vector<double> jacobian_norms;  // per step, meters/radian
  std::vector<double> bounds;          // per step, meters
  double session_max = 0.0;
  NormConvention convention = NormConvention::kHypercubeVertexExact;
};

DeviationReport task_space_bound(const KinematicChain& chain, const Trajectory& trajectory,
                                 double eps_bar);

}  // namespace lipo
