#include "lipo/jerk_qp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

namespace lipo {

namespace {

// Stencil weights of row r over x[r..r+3].
constexpr double kStencil[4] = {-1.0, 3.0, -3.0, 1.0};

// Unnormalized third difference (no dt division), evaluated as paired
// differences so constant sequences map to exact zeros.
Eigen::VectorXd third_difference(const Eigen::VectorXd& x) {
  const Eigen::Index m = x.size() - 3;
  Eigen::VectorXd d(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    d[i] = (x[i + 3] - x[i]) + 3.0 * (x[i + 1] - x[i + 2]);
  }
  return d;
}

// Symmetric band matrix, lower storage: ab(k, j) = A(j + k, j).
struct BandSym {
  Eigen::Index n = 0;
  int kd = 0;
  Eigen::MatrixXd ab;

  void resize(Eigen::Index size, int bandwidth) {
    n = size;
    kd = bandwidth;
    ab = Eigen::MatrixXd::Zero(bandwidth + 1, size);
  }

  double at(Eigen::Index i, Eigen::Index j) const {  // requires |i - j| <= kd
    return i >= j ? ab(i - j, j) : ab(j - i, i);
  }

  Eigen::VectorXd matvec(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      y[j] += ab(0, j) * x[j];
      const Eigen::Index top = std::min<Eigen::Index>(kd, n - 1 - j);
      for (Eigen::Index k = 1; k <= top; ++k) {
        y[j + k] += ab(k, j) * x[j];
        y[j] += ab(k, j) * x[j + k];
      }
    }
    return y;
  }

  // Principal submatrix on sorted index subset. Index distances can only
  // shrink under compaction, so the band width is preserved.
  BandSym submatrix(const std::vector<Eigen::Index>& idx) const {
    BandSym s;
    s.resize(static_cast<Eigen::Index>(idx.size()), kd);
    for (std::size_t p = 0; p < idx.size(); ++p) {
      for (std::size_t q = p; q < idx.size() && q <= p + static_cast<std::size_t>(kd); ++q) {
        if (idx[q] - idx[p] <= kd) {
          s.ab(q - p, static_cast<Eigen::Index>(p)) = at(idx[q], idx[p]);
        }
      }
    }
    return s;
  }
};

// L L^T factorization of a positive definite band matrix.
struct BandCholesky {
  Eigen::Index n = 0;
  int kd = 0;
  Eigen::MatrixXd lb;  // lb(k, j) = L(j + k, j)

  bool factor(const BandSym& a, double shift) {
    n = a.n;
    kd = a.kd;
    lb = Eigen::MatrixXd::Zero(kd + 1, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = a.ab(0, j) + shift;
      const Eigen::Index lo = std::max<Eigen::Index>(0, j - kd);
      for (Eigen::Index m = lo; m < j; ++m) {
        const double ljm = lb(j - m, m);
        s -= ljm * ljm;
      }
      if (!(s > 0.0)) {
        return false;
      }
      const double ljj = std::sqrt(s);
      lb(0, j) = ljj;
      const Eigen::Index top = std::min<Eigen::Index>(j + kd, n - 1);
      for (Eigen::Index i = j + 1; i <= top; ++i) {
        double t = a.at(i, j);
        const Eigen::Index lo2 = std::max<Eigen::Index>(0, i - kd);
        for (Eigen::Index m = lo2; m < j; ++m) {
          t -= lb(i - m, m) * lb(j - m, m);
        }
        lb(i - j, j) = t / ljj;
      }
    }
    return true;
  }

  Eigen::VectorXd solve(Eigen::VectorXd b) const {
    for (Eigen::Index i = 0; i < n; ++i) {  // forward L y = b
      const Eigen::Index lo = std::max<Eigen::Index>(0, i - kd);
      for (Eigen::Index m = lo; m < i; ++m) {
        b[i] -= lb(i - m, m) * b[m];
      }
      b[i] /= lb(0, i);
    }
    for (Eigen::Index i = n - 1; i >= 0; --i) {  // backward L^T x = y
      const Eigen::Index top = std::min<Eigen::Index>(i + kd, n - 1);
      for (Eigen::Index m = i + 1; m <= top; ++m) {
        b[i] -= lb(m - i, i) * b[m];
      }
      b[i] /= lb(0, i);
    }
    return b;
  }
};

// Factors with escalating diagonal shifts; the reduced Gram matrix can be
// singular when fewer than three samples are frozen.
bool factor_with_shift(const BandSym& a, BandCholesky& chol) {
  if (a.n == 0) {
    chol.n = 0;
    chol.kd = a.kd;
    return true;
  }
  double max_diag = 0.0;
  for (Eigen::Index j = 0; j < a.n; ++j) {
    max_diag = std::max(max_diag, a.ab(0, j));
  }
  double shift = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    if (chol.factor(a, shift)) {
      return true;
    }
    shift = shift == 0.0 ? 1e-13 * std::max(max_diag, 1.0) : shift * 100.0;
  }
  return false;
}

struct ReducedProblem {
  std::vector<Eigen::Index> free_pos;  // positions of free variables in the segment
  Eigen::VectorXd d;                   // third difference of q_ref with fixed entries applied
  BandSym gram;                        // A^T A over free columns
  Eigen::VectorXd g0;                  // A^T d
  Eigen::VectorXd lower, upper;        // bounds of the free variables
  double dd = 0.0;                     // ||d||^2

  // f(z) = ||d + A z||^2 = dd + 2 g0.z + z.(G z); gradient = 2 (G z + g0).
  double objective(const Eigen::VectorXd& z, const Eigen::VectorXd& gz) const {
    return dd + 2.0 * g0.dot(z) + z.dot(gz);
  }
};

ReducedProblem reduce(const QpProblem& p) {
  const Eigen::Index n = p.size();
  ReducedProblem r;

  Eigen::VectorXd x0 = p.q_ref;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (p.lower[i] == p.upper[i]) {
      x0[i] += p.lower[i];
    } else {
      r.free_pos.push_back(i);
    }
  }
  r.d = third_difference(x0);
  r.dd = r.d.squaredNorm();

  const auto nf = static_cast<Eigen::Index>(r.free_pos.size());
  r.lower.resize(nf);
  r.upper.resize(nf);
  r.g0 = Eigen::VectorXd::Zero(nf);
  r.gram.resize(nf, 3);

  const Eigen::Index m = r.d.size();
  for (Eigen::Index pidx = 0; pidx < nf; ++pidx) {
    const Eigen::Index pj = r.free_pos[static_cast<std::size_t>(pidx)];
    r.lower[pidx] = p.lower[pj];
    r.upper[pidx] = p.upper[pj];

    const Eigen::Index row_lo = std::max<Eigen::Index>(0, pj - 3);
    const Eigen::Index row_hi = std::min<Eigen::Index>(m - 1, pj);
    for (Eigen::Index row = row_lo; row <= row_hi; ++row) {
      r.g0[pidx] += kStencil[pj - row] * r.d[row];
    }
    for (Eigen::Index qidx = pidx; qidx < nf; ++qidx) {
      const Eigen::Index qj = r.free_pos[static_cast<std::size_t>(qidx)];
      if (qj - pj > 3) {
        break;
      }
      double g = 0.0;
      const Eigen::Index lo = std::max<Eigen::Index>({0, pj - 3, qj - 3});
      const Eigen::Index hi = std::min<Eigen::Index>(m - 1, pj);
      for (Eigen::Index row = lo; row <= hi; ++row) {
        g += kStencil[pj - row] * kStencil[qj - row];
      }
      if (qidx - pidx <= 3) {
        r.gram.ab(qidx - pidx, pidx) = g;
      }
    }
  }
  return r;
}

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

Eigen::VectorXd JerkOperator::apply(const Eigen::VectorXd& x) const {
  if (x.size() != n_samples) {
    throw DataError("jerk operator applied to a sequence of mismatched length");
  }
  if (n_samples < 4) {
    throw DataError("too short for jerk objective: need at least 4 samples");
  }
  return third_difference(x) / (dt * dt * dt);
}

Eigen::MatrixXd JerkOperator::apply(const Eigen::MatrixXd& x) const {
  if (x.rows() != n_samples) {
    throw DataError("jerk operator applied to a sequence of mismatched length");
  }
  if (n_samples < 4) {
    throw DataError("too short for jerk objective: need at least 4 samples");
  }
  Eigen::MatrixXd out(n_samples - 3, x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    out.col(j) = third_difference(x.col(j)) / (dt * dt * dt);
  }
  return out;
}

double jerk_energy(const Eigen::VectorXd& samples, double dt) {
  if (!(dt > 0.0)) {
    throw ConfigError("dt must be positive");
  }
  const JerkOperator op{samples.size(), dt};
  return op.apply(samples).squaredNorm() * dt;
}

double jerk_energy(const Eigen::MatrixXd& samples, double dt) {
  if (!(dt > 0.0)) {
    throw ConfigError("dt must be positive");
  }
  const JerkOperator op{samples.rows(), dt};
  return op.apply(samples).squaredNorm() * dt;
}

std::vector<QpProblem> build_problems(const ReferenceTrajectory& ref,
                                      const BoundsConfig& bounds, double dt) {
  if (ref.length() < 4) {
    throw DataError("too short for jerk objective: need at least 4 samples");
  }
  if (!(dt > 0.0)) {
    throw ConfigError("dt must be positive");
  }
  if (ref.regimes.size() != static_cast<std::size_t>(ref.length())) {
    throw DataError("reference regimes do not match its sample count");
  }

  const Eigen::Index n = ref.length();
  Eigen::VectorXd lower(n);
  Eigen::VectorXd upper(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    switch (ref.regimes[static_cast<std::size_t>(i)]) {
      case Regime::kDelay:
        lower[i] = 0.0;
        upper[i] = 0.0;
        break;
      case Regime::kBlend:
        lower[i] = -bounds.eps_blend;
        upper[i] = bounds.eps_blend;
        break;
      case Regime::kPath:
        lower[i] = -bounds.eps_path;
        upper[i] = bounds.eps_path;
        break;
    }
  }

  std::vector<QpProblem> problems;
  problems.reserve(static_cast<std::size_t>(ref.joints()));
  for (Eigen::Index j = 0; j < ref.joints(); ++j) {
    problems.push_back(QpProblem{ref.samples.col(j), lower, upper, dt});
  }
  return problems;
}

QpSolution solve(const QpProblem& problem, const SolverOptions& options) {
  const auto t_start = std::chrono::steady_clock::now();
  const Eigen::Index n = problem.size();
  if (n < 4) {
    throw DataError("too short for jerk objective: need at least 4 samples");
  }
  if (problem.lower.size() != n || problem.upper.size() != n) {
    throw DataError("bound vectors do not match the sample count");
  }
  if ((problem.lower.array() > problem.upper.array()).any()) {
    throw DataError("lower bound exceeds upper bound");
  }
  if (!(problem.dt > 0.0)) {
    throw ConfigError("dt must be positive");
  }
  if (!(options.tol > 0.0)) {
    throw ConfigError("solver tolerance must be positive");
  }

  ReducedProblem red = reduce(problem);
  const auto nf = static_cast<Eigen::Index>(red.free_pos.size());

  QpSolution sol;
  sol.epsilon = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (problem.lower[i] == problem.upper[i]) {
      sol.epsilon[i] = problem.lower[i];
    }
  }

  const auto finish = [&](bool converged, int iters) {
    sol.converged = converged;
    sol.iterations = iters;
    Eigen::VectorXd x = problem.q_ref + sol.epsilon;
    sol.objective_value = jerk_energy(x, problem.dt);
    sol.solve_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return sol;
  };

  if (nf == 0) {
    return finish(true, 0);
  }

  const int max_iter = options.max_iter > 0 ? options.max_iter : static_cast<int>(10 * n);

  Eigen::VectorXd z = clamp(Eigen::VectorXd::Zero(nf), red.lower, red.upper);
  Eigen::VectorXd gz = red.gram.matvec(z);
  double fz = red.objective(z, gz);
  int iters = 0;
  bool converged = false;

  const auto kkt_residual = [&](const Eigen::VectorXd& point, const Eigen::VectorXd& grad) {
    return (point - clamp(point - grad, red.lower, red.upper)).cwiseAbs().maxCoeff();
  };

  while (iters < max_iter) {
    const Eigen::VectorXd grad = 2.0 * (gz + red.g0);
    if (kkt_residual(z, grad) <= options.tol) {
      converged = true;
      break;
    }
    ++iters;

    // Estimate the active face from exact bound membership; clamping makes
    // bound hits exact.
    std::vector<Eigen::Index> inactive;
    inactive.reserve(static_cast<std::size_t>(nf));
    for (Eigen::Index i = 0; i < nf; ++i) {
      const bool at_lo = z[i] <= red.lower[i] && grad[i] > 0.0;
      const bool at_hi = z[i] >= red.upper[i] && grad[i] < 0.0;
      if (!at_lo && !at_hi) {
        inactive.push_back(i);
      }
    }
    if (inactive.empty()) {
      break;  // KKT residual would be zero; unreachable with kkt > tol
    }

    const BandSym sub = red.gram.submatrix(inactive);
    BandCholesky chol;
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(nf);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(inactive.size()));
    for (std::size_t k = 0; k < inactive.size(); ++k) {
      rhs[static_cast<Eigen::Index>(k)] = -(gz[inactive[k]] + red.g0[inactive[k]]);
    }
    if (factor_with_shift(sub, chol)) {
      const Eigen::VectorXd step = chol.solve(rhs);
      for (std::size_t k = 0; k < inactive.size(); ++k) {
        dir[inactive[k]] = step[static_cast<Eigen::Index>(k)];
      }
    } else {
      for (std::size_t k = 0; k < inactive.size(); ++k) {
        dir[inactive[k]] = rhs[static_cast<Eigen::Index>(k)];  // gradient fallback
      }
    }

    // Backtracking along the projection arc.
    double alpha = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 45; ++bt) {
      const Eigen::VectorXd cand = clamp(z + alpha * dir, red.lower, red.upper);
      if (cand == z) {
        break;
      }
      const Eigen::VectorXd cand_gz = red.gram.matvec(cand);
      const double fc = red.objective(cand, cand_gz);
      if (fc <= fz + 1e-4 * grad.dot(cand - z)) {
        z = cand;
        gz = cand_gz;
        fz = fc;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) {
      break;
    }
  }

  // Polish: resolve the identified face exactly. Accepted only when the
  // result is feasible and certifies optimality, so a misidentified face
  // cannot make the answer worse.
  {
    std::vector<Eigen::Index> interior;
    Eigen::VectorXd zb = Eigen::VectorXd::Zero(nf);
    for (Eigen::Index i = 0; i < nf; ++i) {
      if (z[i] == red.lower[i] || z[i] == red.upper[i]) {
        zb[i] = z[i];
      } else {
        interior.push_back(i);
      }
    }
    Eigen::VectorXd zc = zb;
    bool ok = true;
    if (!interior.empty()) {
      const BandSym sub = red.gram.submatrix(interior);
      BandCholesky chol;
      if (factor_with_shift(sub, chol)) {
        const Eigen::VectorXd gzb = red.gram.matvec(zb);
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(interior.size()));
        for (std::size_t k = 0; k < interior.size(); ++k) {
          rhs[static_cast<Eigen::Index>(k)] = -(gzb[interior[k]] + red.g0[interior[k]]);
        }
        const Eigen::VectorXd w = chol.solve(rhs);
        for (std::size_t k = 0; k < interior.size(); ++k) {
          const Eigen::Index i = interior[k];
          const double v = w[static_cast<Eigen::Index>(k)];
          if (v < red.lower[i] || v > red.upper[i]) {
            ok = false;
            break;
          }
          zc[i] = v;
        }
      } else {
        ok = false;
      }
    }
    if (ok) {
      const Eigen::VectorXd gzc = red.gram.matvec(zc);
      const double fc = red.objective(zc, gzc);
      const Eigen::VectorXd grad_c = 2.0 * (gzc + red.g0);
      if (fc <= fz + options.tol && kkt_residual(zc, grad_c) <= options.tol) {
        z = zc;
        converged = true;
      }
    }
  }

  for (std::size_t k = 0; k < red.free_pos.size(); ++k) {
    sol.epsilon[red.free_pos[k]] = z[static_cast<Eigen::Index>(k)];
  }
  return finish(converged, iters);
}

}  // namespace lipo
