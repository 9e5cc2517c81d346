#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "ames/dense.hpp"
#include "ames/sparse_matrix.hpp"

namespace ames {

/// Factorized sparse approximate inverse B^{-1} ≈ M_U M_L.
///
/// M_L is lower triangular with (M_L B)(i, i) = 1; M_U is unit upper
/// triangular. The diagonal of B^{-1} is therefore absorbed by M_L.
class FsaiFactors {
 public:
  FsaiFactors() = default;
  FsaiFactors(SparseMatrix m_lower, SparseMatrix m_upper, Index fallbacks)
      : m_lower_(std::move(m_lower)), m_upper_(std::move(m_upper)), fallbacks_(fallbacks) {}

  Index size() const noexcept { return m_lower_.rows(); }
  const SparseMatrix& m_lower() const noexcept { return m_lower_; }
  const SparseMatrix& m_upper() const noexcept { return m_upper_; }
  /// Rows/columns whose local system was singular and fell back to identity.
  Index fallbacks() const noexcept { return fallbacks_; }
  Index nnz() const noexcept { return m_lower_.nnz() + m_upper_.nnz() - size(); }

  void apply(std::span<const double> x, std::span<double> y) const {
    Vector t(size());
    spmv(m_lower_, x, t);
    spmv(m_upper_, t, y);
  }

 private:
  SparseMatrix m_lower_;
  SparseMatrix m_upper_;
  Index fallbacks_ = 0;
};

namespace detail {

/// Symmetric pattern of (|B| + |B|^T)^power including the diagonal.
inline std::vector<std::vector<Index>> symmetric_pattern_power(const SparseMatrix& b, int power) {
  const Index n = b.rows();
  std::vector<std::vector<Index>> base(n);
  for (Index i = 0; i < n; ++i) base[i].push_back(i);
  for (const auto& t : b.triplets()) {
    base[t.row].push_back(t.col);
    base[t.col].push_back(t.row);
  }
  for (auto& l : base) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  std::vector<std::vector<Index>> cur = base;
  for (int p = 1; p < power; ++p) {
    std::vector<std::vector<Index>> next(n);
    std::vector<char> mark(n, 0);
    for (Index i = 0; i < n; ++i) {
      for (Index k : cur[i]) {
        for (Index j : base[k]) {
          if (!mark[j]) {
            mark[j] = 1;
            next[i].push_back(j);
          }
        }
      }
      for (Index j : next[i]) mark[j] = 0;
      std::sort(next[i].begin(), next[i].end());
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace detail

/// FSAI on the static lower/upper pattern of (B + B^T)^pattern_power.
///
/// Row i of M_L solves B(J, J)^T m = e_i on J = {j <= i in the pattern};
/// column j of M_U fixes g_j = 1 and solves B(J', J') g = -B(J', j) on
/// J' = {i < j in the pattern}.
inline FsaiFactors fsai_factorize(const SparseMatrix& b_in, int pattern_power) {
  if (!b_in.square()) throw DimensionError("fsai: matrix must be square");
  if (pattern_power != 1 && pattern_power != 2) throw Error("fsai: pattern power must be 1 or 2");
  const SparseMatrix b = b_in.with_layout(Layout::Row);
  const Index n = b.rows();
  const auto pattern = detail::symmetric_pattern_power(b, pattern_power);
  Index fallbacks = 0;

  std::vector<Triplet> lower, upper;
  for (Index i = 0; i < n; ++i) {
    const auto& row = pattern[i];
    std::vector<Index> rows_lo(row.begin(), std::upper_bound(row.begin(), row.end(), i));
    const Index m = rows_lo.size();  // last element is i itself
    detail::SmallDense k(m);
    for (Index r = 0; r < m; ++r) {
      for (Index c = 0; c < m; ++c) k(r, c) = b.at(rows_lo[c], rows_lo[r]);
    }
    Vector rhs(m, 0.0);
    rhs[m - 1] = 1.0;
    if (auto sol = k.solve(rhs)) {
      for (Index c = 0; c < m; ++c) lower.push_back({i, rows_lo[c], (*sol)[c]});
    } else {
      ++fallbacks;
      const double d = b.at(i, i);
      lower.push_back({i, i, d != 0.0 ? 1.0 / d : 1.0});
    }

    // Column i of M_U.
    std::vector<Index> strict(row.begin(), std::lower_bound(row.begin(), row.end(), i));
    upper.push_back({i, i, 1.0});
    if (strict.empty()) continue;
    const Index s = strict.size();
    detail::SmallDense a(s);
    Vector rhs_u(s);
    for (Index r = 0; r < s; ++r) {
      for (Index c = 0; c < s; ++c) a(r, c) = b.at(strict[r], strict[c]);
      rhs_u[r] = -b.at(strict[r], i);
    }
    if (auto sol = a.solve(rhs_u)) {
      for (Index r = 0; r < s; ++r) upper.push_back({strict[r], i, (*sol)[r]});
    } else {
      ++fallbacks;
    }
  }
  return FsaiFactors(SparseMatrix::from_triplets(n, n, std::move(lower)),
                     SparseMatrix::from_triplets(n, n, std::move(upper)), fallbacks);
}

}  // namespace ames
