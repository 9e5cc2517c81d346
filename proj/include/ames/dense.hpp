#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ames/types.hpp"

namespace ames::detail {

/// Column-major square matrix for the small local systems of FSAI.
class SmallDense {
 public:
  explicit SmallDense(Index n) : n_(n), a_(n * n, 0.0) {}
  Index size() const noexcept { return n_; }
  double& operator()(Index i, Index j) { return a_[i + j * n_]; }
  double operator()(Index i, Index j) const { return a_[i + j * n_]; }

  /// Gaussian elimination with partial pivoting; std::nullopt when a pivot
  /// falls below `floor` times the largest entry.
  std::optional<Vector> solve(std::span<const double> rhs, double floor = 1e-14) const {
    SmallDense lu = *this;
    Vector b(rhs.begin(), rhs.end());
    double scale = 0.0;
    for (double v : a_) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return std::nullopt;
    for (Index k = 0; k < n_; ++k) {
      Index piv = k;
      for (Index i = k + 1; i < n_; ++i) {
        if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
      }
      if (std::abs(lu(piv, k)) <= floor * scale) return std::nullopt;
      if (piv != k) {
        for (Index j = 0; j < n_; ++j) std::swap(lu(k, j), lu(piv, j));
        std::swap(b[k], b[piv]);
      }
      const double d = lu(k, k);
      for (Index i = k + 1; i < n_; ++i) {
        const double l = lu(i, k) / d;
        if (l == 0.0) continue;
        for (Index j = k + 1; j < n_; ++j) lu(i, j) -= l * lu(k, j);
        b[i] -= l * b[k];
      }
    }
    for (Index k = n_; k-- > 0;) {
      double s = b[k];
      for (Index j = k + 1; j < n_; ++j) s -= lu(k, j) * b[j];
      b[k] = s / lu(k, k);
    }
    return b;
  }

 private:
  Index n_;
  Vector a_;
};

}  // namespace ames::detail
