#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "ames/sparse_matrix.hpp"

namespace ames {

/// Absolute dropping threshold plus an optional cap on kept entries per row.
struct DropRule {
  double droptol = 0.0;
  std::optional<Index> fill_cap;
};

/// Triangular factors of a threshold ILU: B ≈ L U.
///
/// `lower()` is unit lower triangular with the unit diagonal stored explicitly
/// as the last entry of each row; `upper()` keeps its diagonal as the first
/// entry of each row.
class IluFactors {
 public:
  IluFactors() = default;
  IluFactors(SparseMatrix lower, SparseMatrix upper, Index shifts)
      : lower_(std::move(lower)), upper_(std::move(upper)), shifts_(shifts) {}

  Index size() const noexcept { return lower_.rows(); }
  const SparseMatrix& lower() const noexcept { return lower_; }
  const SparseMatrix& upper() const noexcept { return upper_; }
  /// Number of diagonal shifts applied to rescue tiny pivots.
  Index shifts() const noexcept { return shifts_; }
  /// nnz(L + U): the unit diagonal of L is not counted twice.
  Index nnz() const noexcept { return lower_.nnz() + upper_.nnz() - size(); }

  /// y = U^{-1} L^{-1} x
  void apply(std::span<const double> x, std::span<double> y) const {
    const Index n = size();
    if (x.size() != n || y.size() != n) throw DimensionError("ilu apply: length mismatch");
    auto lp = lower_.ptr();
    auto li = lower_.indices();
    auto lv = lower_.values();
    for (Index i = 0; i < n; ++i) {
      double s = x[i];
      for (Index k = lp[i]; k + 1 < lp[i + 1]; ++k) s -= lv[k] * y[li[k]];
      y[i] = s;
    }
    auto up = upper_.ptr();
    auto ui = upper_.indices();
    auto uv = upper_.values();
    for (Index i = n; i-- > 0;) {
      double s = y[i];
      for (Index k = up[i] + 1; k < up[i + 1]; ++k) s -= uv[k] * y[ui[k]];
      y[i] = s / uv[up[i]];
    }
  }

 private:
  SparseMatrix lower_;
  SparseMatrix upper_;
  Index shifts_ = 0;
};

namespace detail {

inline void keep_largest(std::vector<std::pair<Index, double>>& entries,
                         const std::optional<Index>& cap) {
  if (cap && entries.size() > *cap) {
    std::nth_element(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(*cap),
                     entries.end(), [](const auto& a, const auto& b) {
                       return std::abs(a.second) > std::abs(b.second) ||
                              (std::abs(a.second) == std::abs(b.second) && a.first < b.first);
                     });
    entries.resize(*cap);
  }
  std::sort(entries.begin(), entries.end());
}

}  // namespace detail

/// Row-wise (IKJ) incomplete LU with absolute threshold dropping.
///
/// Multipliers and U entries with magnitude below `droptol` are discarded;
/// the diagonal is always kept. A pivot below 1e-14 ||row||_inf is shifted by
/// sigma = max(droptol, 1e-8) ||row||_inf (sign of the original diagonal),
/// escalating x10 up to three times.
inline IluFactors ilu_factorize(const SparseMatrix& b_in, const DropRule& rule) {
  if (!b_in.square()) throw DimensionError("ilu: matrix must be square");
  if (rule.droptol < 0.0) throw Error("ilu: droptol must be nonnegative");
  const SparseMatrix b = b_in.with_layout(Layout::Row);
  const Index n = b.rows();

  std::vector<std::vector<Index>> u_cols(n);
  std::vector<Vector> u_vals(n);
  std::vector<Index> l_ptr{0}, l_idx;
  Vector l_val;
  Index shifts = 0;

  Vector w(n, 0.0);
  std::vector<char> marked(n, 0), queued(n, 0);
  std::vector<Index> nonzeros;
  std::priority_queue<Index, std::vector<Index>, std::greater<>> pending;
  std::vector<std::pair<Index, double>> lower_part, upper_part;

  for (Index i = 0; i < n; ++i) {
    double row_norm = 0.0, diag = 0.0;
    auto bi = b.line_indices(i);
    auto bv = b.line_values(i);
    for (Index k = 0; k < bi.size(); ++k) {
      const Index j = bi[k];
      w[j] = bv[k];
      marked[j] = 1;
      nonzeros.push_back(j);
      row_norm = std::max(row_norm, std::abs(bv[k]));
      if (j == i) diag = bv[k];
      if (j < i) {
        pending.push(j);
        queued[j] = 1;
      }
    }
    if (!marked[i]) {
      marked[i] = 1;
      nonzeros.push_back(i);
      w[i] = 0.0;
    }

    lower_part.clear();
    while (!pending.empty()) {
      const Index k = pending.top();
      pending.pop();
      queued[k] = 0;
      if (w[k] == 0.0) continue;
      const double lik = w[k] / u_vals[k][0];
      w[k] = 0.0;
      if (std::abs(lik) < rule.droptol) continue;
      lower_part.emplace_back(k, lik);
      const auto& cols = u_cols[k];
      const auto& vals = u_vals[k];
      for (Index t = 1; t < cols.size(); ++t) {
        const Index j = cols[t];
        if (!marked[j]) {
          marked[j] = 1;
          nonzeros.push_back(j);
          w[j] = 0.0;
        }
        w[j] -= lik * vals[t];
        if (j < i && !queued[j]) {
          pending.push(j);
          queued[j] = 1;
        }
      }
    }

    upper_part.clear();
    for (Index j : nonzeros) {
      if (j > i && w[j] != 0.0 && std::abs(w[j]) >= rule.droptol) upper_part.emplace_back(j, w[j]);
    }
    detail::keep_largest(lower_part, rule.fill_cap);
    detail::keep_largest(upper_part, rule.fill_cap);

    double pivot = w[i];
    const double scale = row_norm > 0.0 ? row_norm : 1.0;
    if (std::abs(pivot) <= 1e-14 * scale) {
      const double sigma = std::max(rule.droptol, 1e-8) * scale;
      const double sign = diag < 0.0 ? -1.0 : 1.0;
      bool rescued = false;
      double factor = 1.0;
      for (int attempt = 0; attempt < 3 && !rescued; ++attempt, factor *= 10.0) {
        const double candidate = pivot + sign * sigma * factor;
        if (std::abs(candidate) > 1e-14 * scale) {
          pivot = candidate;
          rescued = true;
        }
      }
      if (!rescued) throw FactorizationError("ilu: zero pivot in row " + std::to_string(i));
      ++shifts;
    }

    for (const auto& [k, v] : lower_part) {
      l_idx.push_back(k);
      l_val.push_back(v);
    }
    l_idx.push_back(i);
    l_val.push_back(1.0);
    l_ptr.push_back(l_idx.size());

    u_cols[i].reserve(upper_part.size() + 1);
    u_vals[i].reserve(upper_part.size() + 1);
    u_cols[i].push_back(i);
    u_vals[i].push_back(pivot);
    for (const auto& [j, v] : upper_part) {
      u_cols[i].push_back(j);
      u_vals[i].push_back(v);
    }

    for (Index j : nonzeros) {
      w[j] = 0.0;
      marked[j] = 0;
    }
    nonzeros.clear();
  }

  std::vector<Index> u_ptr{0}, u_idx;
  Vector u_val;
  for (Index i = 0; i < n; ++i) {
    u_idx.insert(u_idx.end(), u_cols[i].begin(), u_cols[i].end());
    u_val.insert(u_val.end(), u_vals[i].begin(), u_vals[i].end());
    u_ptr.push_back(u_idx.size());
  }
  return IluFactors(SparseMatrix::from_compressed(n, n, Layout::Row, std::move(l_ptr),
                                                  std::move(l_idx), std::move(l_val)),
                    SparseMatrix::from_compressed(n, n, Layout::Row, std::move(u_ptr),
                                                  std::move(u_idx), std::move(u_val)),
                    shifts);
}

}  // namespace ames
