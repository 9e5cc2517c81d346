#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "ames/ilu.hpp"
#include "ames/sparse_matrix.hpp"

namespace ames {

/// Biconjugation factors: W^T B Z ≈ D, so B^{-1} ≈ Z D^{-1} W^T.
/// Z is unit upper triangular, W unit lower triangular, both column-compressed.
class AinvFactors {
 public:
  AinvFactors() = default;
  AinvFactors(SparseMatrix z, SparseMatrix w, Vector d)
      : z_(std::move(z)), w_(std::move(w)), d_(std::move(d)) {}

  Index size() const noexcept { return d_.size(); }
  const SparseMatrix& z() const noexcept { return z_; }
  const SparseMatrix& w() const noexcept { return w_; }
  std::span<const double> d() const noexcept { return d_; }
  Index nnz() const noexcept { return z_.nnz() + w_.nnz() - size(); }

  void apply(std::span<const double> x, std::span<double> y) const {
    const Index n = size();
    if (x.size() != n || y.size() != n) throw DimensionError("ainv apply: length mismatch");
    Vector t(n);
    for (Index j = 0; j < n; ++j) {
      double s = 0.0;
      auto idx = w_.line_indices(j);
      auto val = w_.line_values(j);
      for (Index k = 0; k < idx.size(); ++k) s += val[k] * x[idx[k]];
      t[j] = s / d_[j];
    }
    spmv(z_, t, y);
  }

 private:
  SparseMatrix z_;
  SparseMatrix w_;
  Vector d_;
};

namespace detail {

using SparseColumn = std::vector<std::pair<Index, double>>;  // sorted by index

inline double sparse_dot(std::span<const Index> ai, std::span<const double> av,
                         const SparseColumn& z) {
  double s = 0.0;
  Index p = 0, q = 0;
  while (p < ai.size() && q < z.size()) {
    if (ai[p] < z[q].first) {
      ++p;
    } else if (z[q].first < ai[p]) {
      ++q;
    } else {
      s += av[p++] * z[q++].second;
    }
  }
  return s;
}

/// target -= alpha * source, then drop entries below droptol (keeping `keep`).
inline void axpy_drop(SparseColumn& target, double alpha, const SparseColumn& source,
                      double droptol, Index keep, SparseColumn& scratch) {
  scratch.clear();
  Index p = 0, q = 0;
  auto emit = [&](Index i, double v) {
    if (i == keep || (v != 0.0 && std::abs(v) >= droptol)) scratch.emplace_back(i, v);
  };
  while (p < target.size() || q < source.size()) {
    if (q == source.size() || (p < target.size() && target[p].first < source[q].first)) {
      emit(target[p].first, target[p].second);
      ++p;
    } else if (p == target.size() || source[q].first < target[p].first) {
      emit(source[q].first, -alpha * source[q].second);
      ++q;
    } else {
      emit(target[p].first, target[p].second - alpha * source[q].second);
      ++p;
      ++q;
    }
  }
  target.swap(scratch);
}

/// One side of the biconjugation: columns updated against the rows of
/// `rows` (B for Z, B^T for W). `occurs_` may hold stale entries; they only
/// cost a wasted dot product.
class BiconjugationSide {
 public:
  explicit BiconjugationSide(Index n) : cols_(n), occurs_(n), mark_(n, 0) {
    for (Index j = 0; j < n; ++j) {
      cols_[j].emplace_back(j, 1.0);
      occurs_[j].push_back(j);
    }
  }

  double pivot(const SparseMatrix& rows, Index i) const {
    return sparse_dot(rows.line_indices(i), rows.line_values(i), cols_[i]);
  }

  void eliminate(const SparseMatrix& rows, Index i, double pivot, double droptol) {
    auto ri = rows.line_indices(i);
    auto rv = rows.line_values(i);
    candidates_.clear();
    for (Index r : ri) {
      for (Index j : occurs_[r]) {
        if (j > i && !mark_[j]) {
          mark_[j] = 1;
          candidates_.push_back(j);
        }
      }
    }
    for (Index j : candidates_) {
      mark_[j] = 0;
      const double pj = sparse_dot(ri, rv, cols_[j]);
      if (pj == 0.0) continue;
      axpy_drop(cols_[j], pj / pivot, cols_[i], droptol, j, scratch_);
      // scratch_ now holds the previous column; register rows that are new.
      Index q = 0;
      for (const auto& [r, v] : cols_[j]) {
        (void)v;
        while (q < scratch_.size() && scratch_[q].first < r) ++q;
        if (q == scratch_.size() || scratch_[q].first != r) occurs_[r].push_back(j);
      }
    }
  }

  SparseMatrix assemble() const {
    const Index n = cols_.size();
    std::vector<Index> ptr{0}, idx;
    Vector val;
    for (const auto& c : cols_) {
      for (const auto& [r, v] : c) {
        idx.push_back(r);
        val.push_back(v);
      }
      ptr.push_back(idx.size());
    }
    return SparseMatrix::from_compressed(n, n, Layout::Column, std::move(ptr), std::move(idx),
                                         std::move(val));
  }

 private:
  std::vector<SparseColumn> cols_;
  std::vector<std::vector<Index>> occurs_;  // row index -> columns that may hold it
  std::vector<char> mark_;
  std::vector<Index> candidates_;
  SparseColumn scratch_;
};

}  // namespace detail

/// Right-looking two-sided biconjugation (AINV) with post-update dropping.
inline AinvFactors ainv_factorize(const SparseMatrix& b_in, const DropRule& rule) {
  if (!b_in.square()) throw DimensionError("ainv: matrix must be square");
  if (rule.droptol < 0.0) throw Error("ainv: droptol must be nonnegative");
  const SparseMatrix rows = b_in.with_layout(Layout::Row);
  const SparseMatrix cols = b_in.transpose().with_layout(Layout::Row);  // rows of B^T
  const Index n = rows.rows();
  const double floor = std::numeric_limits<double>::epsilon() * std::max(rows.norm_inf(), 1e-300);

  detail::BiconjugationSide z(n), w(n);
  Vector d(n);
  for (Index i = 0; i < n; ++i) {
    const double p = z.pivot(rows, i);
    const double q = w.pivot(cols, i);
    if (std::abs(p) <= floor || std::abs(q) <= floor) {
      throw BreakdownError("ainv: pivot below " + std::to_string(floor), i);
    }
    d[i] = p;
    z.eliminate(rows, i, p, rule.droptol);
    w.eliminate(cols, i, q, rule.droptol);
  }
  return AinvFactors(z.assemble(), w.assemble(), std::move(d));
}

}  // namespace ames
