#pragma once

#include <cmath>
#include <functional>
#include <queue>
#include <span>
#include <vector>

#include "ames/sparse_matrix.hpp"

namespace ames {

/// Exact sparse LU with threshold partial pivoting, P B = L U.
///
/// Left-looking, column by column. Row pivoting prefers the diagonal entry
/// when it is within a factor 10 of the column maximum.
class SparseLu {
 public:
  static constexpr double pivot_threshold = 0.1;

  explicit SparseLu(const SparseMatrix& b_in) {
    if (!b_in.square()) throw DimensionError("sparse LU: matrix must be square");
    const SparseMatrix b = b_in.with_layout(Layout::Column);
    n_ = b.rows();
    constexpr Index unset = static_cast<Index>(-1);
    pivot_row_.assign(n_, unset);
    row_step_.assign(n_, unset);
    u_diag_.assign(n_, 0.0);
    l_ptr_.assign(1, 0);
    u_ptr_.assign(1, 0);
    const double floor = 1e-300 + 1e-15 * b.max_abs();

    Vector x(n_, 0.0);
    std::vector<char> marked(n_, 0), queued(n_, 0);
    std::vector<Index> nonzeros;
    std::priority_queue<Index, std::vector<Index>, std::greater<>> steps;

    for (Index j = 0; j < n_; ++j) {
      auto bi = b.line_indices(j);
      auto bv = b.line_values(j);
      for (Index k = 0; k < bi.size(); ++k) {
        const Index r = bi[k];
        x[r] = bv[k];
        marked[r] = 1;
        nonzeros.push_back(r);
        if (row_step_[r] != unset) {
          steps.push(row_step_[r]);
          queued[row_step_[r]] = 1;
        }
      }
      while (!steps.empty()) {
        const Index k = steps.top();
        steps.pop();
        queued[k] = 0;
        const double v = x[pivot_row_[k]];
        if (v == 0.0) continue;
        u_idx_.push_back(k);
        u_val_.push_back(v);
        for (Index t = l_ptr_[k]; t < l_ptr_[k + 1]; ++t) {
          const Index r = l_idx_[t];
          if (!marked[r]) {
            marked[r] = 1;
            nonzeros.push_back(r);
            x[r] = 0.0;
          }
          x[r] -= l_val_[t] * v;
          const Index s = row_step_[r];
          if (s != unset && !queued[s]) {
            steps.push(s);
            queued[s] = 1;
          }
        }
      }
      u_ptr_.push_back(u_idx_.size());

      Index pivot = unset;
      double best = 0.0;
      for (Index r : nonzeros) {
        if (row_step_[r] != unset) continue;
        const double a = std::abs(x[r]);
        if (a > best || (a == best && a > 0.0 && r < pivot)) {
          best = a;
          pivot = r;
        }
      }
      if (pivot == unset || best <= floor) {
        throw FactorizationError("sparse LU: matrix is numerically singular at column " +
                                 std::to_string(j));
      }
      if (marked[j] && row_step_[j] == unset && std::abs(x[j]) >= pivot_threshold * best) pivot = j;

      pivot_row_[j] = pivot;
      row_step_[pivot] = j;
      const double d = x[pivot];
      u_diag_[j] = d;
      for (Index r : nonzeros) {
        if (row_step_[r] == unset && x[r] != 0.0) {
          l_idx_.push_back(r);
          l_val_.push_back(x[r] / d);
        }
      }
      l_ptr_.push_back(l_idx_.size());

      for (Index r : nonzeros) {
        x[r] = 0.0;
        marked[r] = 0;
      }
      nonzeros.clear();
    }
  }

  Index size() const noexcept { return n_; }
  /// Strict L entries + strict U entries + diagonal.
  Index nnz() const noexcept { return l_idx_.size() + u_idx_.size() + n_; }
  std::span<const Index> pivot_rows() const noexcept { return pivot_row_; }

  /// Solves B x = y.
  void apply(std::span<const double> y, std::span<double> x) const {
    if (y.size() != n_ || x.size() != n_) throw DimensionError("sparse LU apply: length mismatch");
    Vector z(y.begin(), y.end());
    Vector c(n_);
    for (Index k = 0; k < n_; ++k) {
      const double v = z[pivot_row_[k]];
      c[k] = v;
      if (v == 0.0) continue;
      for (Index t = l_ptr_[k]; t < l_ptr_[k + 1]; ++t) z[l_idx_[t]] -= l_val_[t] * v;
    }
    for (Index j = n_; j-- > 0;) {
      const double xj = c[j] / u_diag_[j];
      x[j] = xj;
      if (xj == 0.0) continue;
      for (Index t = u_ptr_[j]; t < u_ptr_[j + 1]; ++t) c[u_idx_[t]] -= u_val_[t] * xj;
    }
  }

 private:
  Index n_ = 0;
  std::vector<Index> pivot_row_;  // step -> original row
  std::vector<Index> row_step_;   // original row -> step
  Vector u_diag_;
  // L by columns (step), row indices in the original numbering.
  std::vector<Index> l_ptr_, l_idx_;
  Vector l_val_;
  // Strict U by columns, row indices are elimination steps.
  std::vector<Index> u_ptr_, u_idx_;
  Vector u_val_;
};

}  // namespace ames
