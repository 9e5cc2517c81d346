#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "ames/sparse_matrix.hpp"

namespace ames {

/// out = Op(in); both of length n.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

enum class PrecondSide { Left, Right };

struct GmresConfig {
  Index restart = 500;
  Index max_matvecs = 5000;  // products with A, including residual checks
  double rtol = 1e-12;
  PrecondSide side = PrecondSide::Right;

  void validate() const {
    if (restart < 1) throw Error("gmres: restart must be at least 1");
    if (!(rtol > 0.0)) throw Error("gmres: rtol must be positive");
    if (max_matvecs < 2) throw Error("gmres: matvec budget must be at least 2");
  }
};

/// Counters and residuals of one GMRES run. Residuals are relative to ||b - A x0||.
///
/// `residual_history` holds, per restart cycle, the true residual at the cycle
/// start followed by the least-squares estimate after each Arnoldi step;
/// `cycle_starts` indexes the first entry of each cycle.
struct GmresReport {
  Index iterations = 0;
  Index matvecs = 0;
  Index precond_applies = 0;
  bool converged = false;
  double initial_residual_norm = 0.0;
  double final_relative_residual = 0.0;  // recomputed from the returned x
  std::vector<double> residual_history;
  std::vector<Index> cycle_starts;
};

struct GmresResult {
  Vector x;
  GmresReport report;
};

/// Restarted GMRES: modified Gram-Schmidt Arnoldi, Givens least squares.
///
/// Inside a cycle the least-squares estimate decides when to stop; each cycle
/// ends by recomputing b - A x, and only that true residual can declare
/// convergence. With right preconditioning x = x0 + M^{-1} V y.
inline GmresResult gmres(const LinearOperator& a, std::span<const double> b,
                         const LinearOperator* m, const GmresConfig& cfg,
                         std::span<const double> x0 = {}) {
  cfg.validate();
  const Index n = b.size();
  GmresResult res;
  GmresReport& rep = res.report;
  res.x.assign(n, 0.0);
  if (!x0.empty()) {
    if (x0.size() != n) throw DimensionError("gmres: initial guess length mismatch");
    std::copy(x0.begin(), x0.end(), res.x.begin());
  }
  Vector& x = res.x;

  auto matvec = [&](std::span<const double> in, std::span<double> out) {
    a(in, out);
    ++rep.matvecs;
  };
  auto precond = [&](std::span<const double> in, std::span<double> out) {
    if (m) {
      (*m)(in, out);
      ++rep.precond_applies;
    } else {
      std::copy(in.begin(), in.end(), out.begin());
    }
  };
  auto check_finite = [&](double v, const char* what) {
    if (!std::isfinite(v)) {
      throw NumericalError(std::string("gmres: non-finite ") + what + " at iteration " +
                           std::to_string(rep.iterations));
    }
  };

  Vector r(n), w(n), z(n);
  auto true_residual = [&] {
    matvec(x, r);
    for (Index i = 0; i < n; ++i) r[i] = b[i] - r[i];
    return norm2(r);
  };

  const double beta0 = true_residual();
  check_finite(beta0, "initial residual");
  rep.initial_residual_norm = beta0;
  if (beta0 == 0.0) {
    rep.converged = true;
    rep.residual_history.push_back(0.0);
    rep.cycle_starts.push_back(0);
    return res;
  }

  const Index k_max = std::min(cfg.restart, n);
  std::vector<Vector> v(k_max + 1, Vector(n));
  std::vector<Vector> h(k_max, Vector(k_max + 1, 0.0));  // column j has j + 2 entries used
  Vector cs(k_max), sn(k_max), g(k_max + 1);
  double rel = 1.0;

  while (true) {
    rep.cycle_starts.push_back(rep.residual_history.size());
    rep.residual_history.push_back(rel);
    if (rel <= cfg.rtol) {
      rep.converged = true;
      break;
    }
    // Arnoldi needs one matvec per step and one to certify the cycle.
    if (rep.matvecs + 2 > cfg.max_matvecs) break;

    double beta;
    if (cfg.side == PrecondSide::Left) {
      precond(r, v[0]);
      beta = norm2(v[0]);
    } else {
      v[0] = r;
      beta = norm2(r);
    }
    check_finite(beta, "residual");
    if (beta == 0.0) break;  // preconditioner annihilated a nonzero residual
    for (double& t : v[0]) t /= beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    Index k = 0;
    while (k < k_max && rep.matvecs + 1 < cfg.max_matvecs) {
      if (cfg.side == PrecondSide::Left) {
        matvec(v[k], z);
        precond(z, w);
      } else {
        precond(v[k], z);
        matvec(z, w);
      }
      auto& hk = h[k];
      for (Index i = 0; i <= k; ++i) {
        double dot = 0.0;
        for (Index t = 0; t < n; ++t) dot += w[t] * v[i][t];
        hk[i] = dot;
        for (Index t = 0; t < n; ++t) w[t] -= dot * v[i][t];
      }
      const double hnext = norm2(w);
      check_finite(hnext, "Arnoldi norm");
      hk[k + 1] = hnext;
      for (Index i = 0; i < k; ++i) {
        const double t = cs[i] * hk[i] + sn[i] * hk[i + 1];
        hk[i + 1] = -sn[i] * hk[i] + cs[i] * hk[i + 1];
        hk[i] = t;
      }
      const double denom = std::hypot(hk[k], hk[k + 1]);
      if (denom == 0.0) {
        cs[k] = 1.0;
        sn[k] = 0.0;
      } else {
        cs[k] = hk[k] / denom;
        sn[k] = hk[k + 1] / denom;
      }
      hk[k] = cs[k] * hk[k] + sn[k] * hk[k + 1];
      hk[k + 1] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++k;
      ++rep.iterations;

      const double estimate = std::abs(g[k]) / beta * rel;
      rep.residual_history.push_back(estimate);
      const bool happy = hnext <= 1e-14 * beta;
      if (happy || estimate <= cfg.rtol) break;
      for (Index t = 0; t < n; ++t) v[k][t] = w[t] / hnext;
    }

    // Back substitution for y, then x += V y (left) or x += M^{-1} V y (right).
    Vector y(k, 0.0);
    for (Index i = k; i-- > 0;) {
      double s = g[i];
      for (Index j = i + 1; j < k; ++j) s -= h[j][i] * y[j];
      if (h[i][i] == 0.0) throw NumericalError("gmres: singular Hessenberg matrix");
      y[i] = s / h[i][i];
    }
    std::fill(z.begin(), z.end(), 0.0);
    for (Index j = 0; j < k; ++j) {
      for (Index t = 0; t < n; ++t) z[t] += y[j] * v[j][t];
    }
    if (cfg.side == PrecondSide::Right) {
      precond(z, w);
      for (Index t = 0; t < n; ++t) x[t] += w[t];
    } else {
      for (Index t = 0; t < n; ++t) x[t] += z[t];
    }
    rel = true_residual() / beta0;
    check_finite(rel, "residual");
  }
  rep.final_relative_residual = rel;
  return res;
}

/// b = A e with e the vector of ones.
inline Vector make_rhs(const SparseMatrix& a) {
  if (!a.square()) throw DimensionError("make_rhs: matrix must be square");
  return spmv(a, Vector(a.cols(), 1.0));
}

/// Operator wrapper around spmv.
inline LinearOperator matrix_operator(const SparseMatrix& a) {
  return [&a](std::span<const double> in, std::span<double> out) { spmv(a, in, out); };
}

}  // namespace ames
