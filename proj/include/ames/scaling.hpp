#pragma once

#include <cmath>
#include <span>

#include "ames/sparse_matrix.hpp"

namespace ames {

/// Row factors `d1` and column factors `d2` of the equilibration
/// A_scaled = diag(d1) A diag(d2).
struct ScalingPair {
  Vector d1;
  Vector d2;
};

struct ScaledSystem {
  SparseMatrix matrix;
  Vector rhs;
  ScalingPair scaling;
};

/// Square-root equilibration by row and column maxima of A:
///   d1_i = 1 / sqrt(max_j |a_ij|),  d2_j = 1 / sqrt(max_i |a_ij|).
/// Every scaled entry satisfies |a_ij| / sqrt(r_i c_j) <= 1 because |a_ij| is
/// bounded by both its row maximum r_i and its column maximum c_j.
inline ScalingPair compute_scaling(const SparseMatrix& a) {
  if (!a.square()) throw DimensionError("scaling requires a square matrix");
  Vector row_max(a.rows(), 0.0), col_max(a.cols(), 0.0);
  for (const auto& t : a.triplets()) {
    const double v = std::abs(t.value);
    row_max[t.row] = std::max(row_max[t.row], v);
    col_max[t.col] = std::max(col_max[t.col], v);
  }
  ScalingPair s{Vector(a.rows()), Vector(a.cols())};
  for (Index i = 0; i < a.rows(); ++i) {
    if (!(row_max[i] > 0.0) || !std::isfinite(row_max[i])) {
      throw SingularScalingError("zero or non-finite row", i);
    }
    s.d1[i] = 1.0 / std::sqrt(row_max[i]);
  }
  for (Index j = 0; j < a.cols(); ++j) {
    if (!(col_max[j] > 0.0) || !std::isfinite(col_max[j])) {
      throw SingularScalingError("zero or non-finite column", j);
    }
    s.d2[j] = 1.0 / std::sqrt(col_max[j]);
  }
  return s;
}

inline SparseMatrix apply_scaling(const SparseMatrix& a, const ScalingPair& s) {
  std::vector<Triplet> t = a.triplets();
  for (auto& e : t) e.value *= s.d1[e.row] * s.d2[e.col];
  return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t), a.layout());
}

/// Scale phase. Solve A_scaled y = b_scaled, then recover x = diag(d2) y.
inline ScaledSystem scale_system(const SparseMatrix& a, std::span<const double> b) {
  if (b.size() != a.rows()) throw DimensionError("right-hand side length mismatch");
  ScaledSystem out;
  out.scaling = compute_scaling(a);
  out.matrix = apply_scaling(a, out.scaling);
  out.rhs.resize(b.size());
  for (Index i = 0; i < b.size(); ++i) out.rhs[i] = out.scaling.d1[i] * b[i];
  return out;
}

inline Vector unscale_solution(std::span<const double> y, const ScalingPair& s) {
  if (y.size() != s.d2.size()) throw DimensionError("solution length mismatch");
  Vector x(y.size());
  for (Index i = 0; i < y.size(); ++i) x[i] = s.d2[i] * y[i];
  return x;
}

}  // namespace ames
