#pragma once

#include <vector>

#include "lipo/blending.hpp"
#include "lipo/types.hpp"

namespace lipo {

// Discrete third-derivative operator on a uniformly sampled sequence.
// Row i of the result is (x[i+3] - 3 x[i+2] + 3 x[i+1] - x[i]) / dt^3,
// interior rows only (N - 3 rows, no boundary padding). The stencil
// annihilates polynomials of degree <= 2 and is exact for cubics.
struct JerkOperator {
  Eigen::Index n_samples = 0;
  double dt = 1.0;

  Eigen::Index rows() const { return n_samples - 3; }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;  // column-wise
};

// Rectangle-rule discretization of the integrated squared jerk:
// sum_i ||(D x)_i||^2 * dt. For matrices the row norm runs across joints.
// Throws DataError for fewer than 4 samples.
double jerk_energy(const Eigen::VectorXd& samples, double dt);
double jerk_energy(const Eigen::MatrixXd& samples, double dt);

// One decoupled box-constrained jerk-minimization problem:
//
//   minimize    || D (q_ref + epsilon) ||^2
//   subject to  lower <= epsilon <= upper   (componentwise)
//
// Bounds encode the segment regimes: [0, 0] on delay steps, +-eps_blend on
// blend steps, +-eps_path on path steps, so epsilon = 0 is always feasible.
struct QpProblem {
  Eigen::VectorXd q_ref;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double dt = 1.0;

  Eigen::Index size() const { return q_ref.size(); }
};

struct QpSolution {
  Eigen::VectorXd epsilon;
  double objective_value = 0.0;  // jerk energy of q_ref + epsilon
  int iterations = 0;
  bool converged = false;
  double solve_time = 0.0;  // seconds, wall clock; never serialized
};

// Splits a reference segment into one problem per joint. The objective and
// the box constraints carry no cross-joint terms, so the split is exact.
// Throws DataError when the segment is too short for the jerk objective.
std::vector<QpProblem> build_problems(const ReferenceTrajectory& ref,
                                      const BoundsConfig& bounds, double dt);

struct SolverOptions {
  double tol = 1e-8;  // termination threshold on the projected-gradient norm
  int max_iter = 0;   // 0 selects 10 * N
};

// Deterministic box-QP solver specialized to the banded jerk Gram matrix.
//
// Equality-bounded entries (lower == upper, the frozen delay window) are
// eliminated from the problem rather than boxed. The remaining variables are
// solved by projected-Newton iterations: an active set is estimated from the
// current iterate, a Newton step is computed on the inactive set via a banded
// Cholesky factorization of the (bandwidth-3) reduced Gram matrix, and the
// step is globalized with a backtracking search along the projection arc.
// A final polish resolves the identified face exactly, so solutions on
// well-posed problems are accurate to machine precision.
//
// Internally the objective is scaled by dt^6 (pure third differences, no
// dt division), which leaves the minimizer unchanged and makes the
// projected-gradient tolerance meaningful across sample rates. The KKT
// residual is measured in that scaling.
//
// Same input always produces bit-identical output. Non-convergence within
// max_iter is reported through converged = false with the best iterate.
QpSolution solve(const QpProblem& problem, const SolverOptions& options = {});

}  // namespace lipo
