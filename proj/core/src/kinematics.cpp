#include "lipo/kinematics.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <cmath>

namespace lipo {

namespace {

Eigen::Matrix4d dh_transform(const DhParam& link, double theta) {
  const double ct = std::cos(theta + link.theta_offset);
  const double st = std::sin(theta + link.theta_offset);
  const double ca = std::cos(link.alpha);
  const double sa = std::sin(link.alpha);

  Eigen::Matrix4d t;
  t << ct, -st * ca, st * sa, link.a * ct,  //
      st, ct * ca, -ct * sa, link.a * st,   //
      0.0, sa, ca, link.d,                  //
      0.0, 0.0, 0.0, 1.0;
  return t;
}

void check_dof(const KinematicChain& chain, const JointVector& q) {
  if (chain.dof() < 1) {
    throw DataError("kinematic chain has no links");
  }
  if (q.size() != chain.dof()) {
    throw DataError("joint vector length does not match the chain dof");
  }
}

}  // namespace

KinematicChain default_six_dof_chain() {
  KinematicChain chain;
  chain.links = {
      DhParam{0.0, -M_PI / 2.0, 0.25, 0.0}, DhParam{0.30, 0.0, 0.0, -M_PI / 2.0},
      DhParam{0.05, -M_PI / 2.0, 0.0, 0.0}, DhParam{0.0, M_PI / 2.0, 0.30, 0.0},
      DhParam{0.0, -M_PI / 2.0, 0.0, 0.0},  DhParam{0.0, 0.0, 0.08, 0.0},
  };
  return chain;
}

Eigen::Vector3d forward_kinematics(const KinematicChain& chain, const JointVector& q) {
  check_dof(chain, q);
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (Eigen::Index i = 0; i < chain.dof(); ++i) {
    t = t * dh_transform(chain.links[static_cast<std::size_t>(i)], q[i]);
  }
  return t.block<3, 1>(0, 3);
}

Eigen::Matrix3Xd jacobian(const KinematicChain& chain, const JointVector& q) {
  check_dof(chain, q);
  const Eigen::Index n = chain.dof();

  // Joint i rotates about the z axis of frame i-1.
  std::vector<Eigen::Vector3d> axes(static_cast<std::size_t>(n));
  std::vector<Eigen::Vector3d> origins(static_cast<std::size_t>(n));
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (Eigen::Index i = 0; i < n; ++i) {
    axes[static_cast<std::size_t>(i)] = t.block<3, 1>(0, 2);
    origins[static_cast<std::size_t>(i)] = t.block<3, 1>(0, 3);
    t = t * dh_transform(chain.links[static_cast<std::size_t>(i)], q[i]);
  }
  const Eigen::Vector3d end = t.block<3, 1>(0, 3);

  Eigen::Matrix3Xd jac(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    jac.col(i) = axes[static_cast<std::size_t>(i)].cross(
        end - origins[static_cast<std::size_t>(i)]);
  }
  return jac;
}

std::string to_string(NormConvention convention) {
  switch (convention) {
    case NormConvention::kHypercubeVertexExact:
      return "inf_to_2_vertex_exact";
    case NormConvention::kSqrtNSpectral:
      return "sqrt_n_spectral";
  }
  return "unknown";
}

double induced_norm_inf_to_2(const Eigen::Matrix3Xd& jac) {
  const Eigen::Index n = jac.cols();
  if (n < 1 || n > 20) {
    throw DataError("vertex enumeration requires 1 <= dof <= 20");
  }

  // Start at the all-plus vertex, then walk the remaining sign patterns of
  // columns 1..n-1 in Gray-code order (column 0 fixed by sign symmetry);
  // each step flips one column's contribution.
  Eigen::Vector3d v = jac.rowwise().sum();
  double best = v.squaredNorm();
  if (n > 1) {
    const std::uint64_t count = 1ull << (n - 1);
    std::uint64_t gray_prev = 0;
    Eigen::VectorXd sign = Eigen::VectorXd::Ones(n);
    for (std::uint64_t k = 1; k < count; ++k) {
      const std::uint64_t gray = k ^ (k >> 1);
      const std::uint64_t diff = gray ^ gray_prev;
      gray_prev = gray;
      int bit = 0;
      while (((diff >> bit) & 1ull) == 0ull) {
        ++bit;
      }
      const Eigen::Index col = 1 + bit;
      v -= 2.0 * sign[col] * jac.col(col);
      sign[col] = -sign[col];
      best = std::max(best, v.squaredNorm());
    }
  }
  return std::sqrt(best);
}

DeviationReport task_space_bound(const KinematicChain& chain, const Trajectory& trajectory,
                                 double eps_bar) {
  validate(trajectory);
  if (!(eps_bar >= 0.0) || !std::isfinite(eps_bar)) {
    throw ConfigError("eps_bar must be finite and >= 0");
  }
  if (trajectory.joints() != chain.dof()) {
    throw DataError("trajectory joint count does not match the chain dof");
  }

  DeviationReport report;
  report.convention = chain.dof() <= 20 ? NormConvention::kHypercubeVertexExact
                                        : NormConvention::kSqrtNSpectral;
  const auto steps = static_cast<std::size_t>(trajectory.length());
  report.jacobian_norms.reserve(steps);
  report.bounds.reserve(steps);

  for (Eigen::Index i = 0; i < trajectory.length(); ++i) {
    const Eigen::Matrix3Xd jac = jacobian(chain, trajectory.samples.row(i).transpose());
    double norm = 0.0;
    if (report.convention == NormConvention::kHypercubeVertexExact) {
      norm = induced_norm_inf_to_2(jac);
    } else {
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
      norm = std::sqrt(static_cast<double>(chain.dof())) * svd.singularValues()[0];
    }
    const double bound = norm * eps_bar;
    report.jacobian_norms.push_back(norm);
    report.bounds.push_back(bound);
    report.session_max = std::max(report.session_max, bound);
  }
  return report;
}

}  // namespace lipo
