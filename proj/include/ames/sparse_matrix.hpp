#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "ames/types.hpp"

namespace ames {

/// Compression direction of a SparseMatrix.
///
/// Row-compressed storage is used for almost everything; the F blocks of the
/// block-bordered form are kept column-compressed because the Schur assembly
/// walks them one column at a time.
enum class Layout { Row, Column };

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Immutable compressed sparse matrix.
///
/// Invariants established by every factory:
///  - indices inside each compressed line are strictly increasing,
///  - no stored value is exactly zero,
///  - `ptr().size() == outer + 1` and `indices().size() == values().size()`.
class SparseMatrix {
 public:
  SparseMatrix() : ptr_(1, 0) {}

  /// Duplicates are summed; entries that sum to zero are dropped.
  static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets,
                                    Layout layout = Layout::Row) {
    for (const auto& t : triplets) {
      if (t.row >= rows || t.col >= cols) {
        throw DimensionError("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                             ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
      }
    }
    const bool by_row = layout == Layout::Row;
    auto outer_of = [by_row](const Triplet& t) { return by_row ? t.row : t.col; };
    auto inner_of = [by_row](const Triplet& t) { return by_row ? t.col : t.row; };
    std::sort(triplets.begin(), triplets.end(), [&](const Triplet& a, const Triplet& b) {
      return std::pair(outer_of(a), inner_of(a)) < std::pair(outer_of(b), inner_of(b));
    });

    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.layout_ = layout;
    const Index outer = by_row ? rows : cols;
    m.ptr_.assign(outer + 1, 0);
    m.idx_.reserve(triplets.size());
    m.val_.reserve(triplets.size());
    for (std::size_t k = 0; k < triplets.size();) {
      const Index o = outer_of(triplets[k]);
      const Index i = inner_of(triplets[k]);
      double sum = 0.0;
      for (; k < triplets.size() && outer_of(triplets[k]) == o && inner_of(triplets[k]) == i; ++k) {
        sum += triplets[k].value;
      }
      if (sum != 0.0) {
        m.idx_.push_back(i);
        m.val_.push_back(sum);
        ++m.ptr_[o + 1];
      }
    }
    std::partial_sum(m.ptr_.begin(), m.ptr_.end(), m.ptr_.begin());
    return m;
  }

  /// Adopts already-compressed arrays. Lines must be sorted; zeros are removed.
  static SparseMatrix from_compressed(Index rows, Index cols, Layout layout, std::vector<Index> ptr,
                                      std::vector<Index> idx, std::vector<double> val) {
    const Index outer = layout == Layout::Row ? rows : cols;
    const Index inner = layout == Layout::Row ? cols : rows;
    if (ptr.size() != outer + 1 || idx.size() != val.size() || ptr.front() != 0 ||
        ptr.back() != idx.size()) {
      throw DimensionError("inconsistent compressed arrays");
    }
    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.layout_ = layout;
    m.ptr_.assign(outer + 1, 0);
    m.idx_.reserve(idx.size());
    m.val_.reserve(val.size());
    for (Index o = 0; o < outer; ++o) {
      if (ptr[o] > ptr[o + 1]) throw DimensionError("decreasing pointer array");
      for (Index k = ptr[o]; k < ptr[o + 1]; ++k) {
        if (idx[k] >= inner) throw DimensionError("index out of range");
        if (k > ptr[o] && idx[k] <= idx[k - 1]) throw DimensionError("unsorted compressed line");
        if (val[k] != 0.0) {
          m.idx_.push_back(idx[k]);
          m.val_.push_back(val[k]);
        }
      }
      m.ptr_[o + 1] = m.idx_.size();
    }
    return m;
  }

  static SparseMatrix identity(Index n, Layout layout = Layout::Row) {
    std::vector<Index> ptr(n + 1), idx(n);
    std::iota(ptr.begin(), ptr.end(), Index{0});
    std::iota(idx.begin(), idx.end(), Index{0});
    return from_compressed(n, n, layout, std::move(ptr), std::move(idx), Vector(n, 1.0));
  }

  static SparseMatrix zero(Index rows, Index cols, Layout layout = Layout::Row) {
    const Index outer = layout == Layout::Row ? rows : cols;
    return from_compressed(rows, cols, layout, std::vector<Index>(outer + 1, 0), {}, {});
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index nnz() const noexcept { return val_.size(); }
  Layout layout() const noexcept { return layout_; }
  bool square() const noexcept { return rows_ == cols_; }
  Index outer_size() const noexcept { return ptr_.size() - 1; }

  std::span<const Index> ptr() const noexcept { return ptr_; }
  std::span<const Index> indices() const noexcept { return idx_; }
  std::span<const double> values() const noexcept { return val_; }

  std::span<const Index> line_indices(Index o) const {
    return {idx_.data() + ptr_[o], ptr_[o + 1] - ptr_[o]};
  }
  std::span<const double> line_values(Index o) const {
    return {val_.data() + ptr_[o], ptr_[o + 1] - ptr_[o]};
  }

  /// Entry lookup by binary search; returns 0 for structural zeros.
  double at(Index i, Index j) const {
    const Index o = layout_ == Layout::Row ? i : j;
    const Index in = layout_ == Layout::Row ? j : i;
    auto line = line_indices(o);
    auto it = std::lower_bound(line.begin(), line.end(), in);
    if (it == line.end() || *it != in) return 0.0;
    return val_[ptr_[o] + static_cast<Index>(it - line.begin())];
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (Index o = 0; o < outer_size(); ++o) {
      for (Index k = ptr_[o]; k < ptr_[o + 1]; ++k) {
        out.push_back(layout_ == Layout::Row ? Triplet{o, idx_[k], val_[k]}
                                             : Triplet{idx_[k], o, val_[k]});
      }
    }
    return out;
  }

  /// Same matrix, other compression direction.
  SparseMatrix with_layout(Layout target) const {
    if (target == layout_) return *this;
    // Transposing the compressed arrays swaps the compression direction.
    const Index new_outer = layout_ == Layout::Row ? cols_ : rows_;
    std::vector<Index> ptr(new_outer + 1, 0), idx(nnz());
    Vector val(nnz());
    for (Index k = 0; k < nnz(); ++k) ++ptr[idx_[k] + 1];
    std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
    std::vector<Index> next(ptr.begin(), ptr.end() - 1);
    for (Index o = 0; o < outer_size(); ++o) {
      for (Index k = ptr_[o]; k < ptr_[o + 1]; ++k) {
        const Index dst = next[idx_[k]]++;
        idx[dst] = o;
        val[dst] = val_[k];
      }
    }
    SparseMatrix m;
    m.rows_ = rows_;
    m.cols_ = cols_;
    m.layout_ = target;
    m.ptr_ = std::move(ptr);
    m.idx_ = std::move(idx);
    m.val_ = std::move(val);
    return m;
  }

  SparseMatrix transpose() const {
    SparseMatrix t = *this;
    std::swap(t.rows_, t.cols_);
    t.layout_ = layout_ == Layout::Row ? Layout::Column : Layout::Row;
    return t.with_layout(layout_);
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : val_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Largest absolute row sum.
  double norm_inf() const {
    Vector sums(rows_, 0.0);
    for (const auto& t : triplets()) sums[t.row] += std::abs(t.value);
    return sums.empty() ? 0.0 : *std::max_element(sums.begin(), sums.end());
  }

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
    const SparseMatrix& bb = b.layout_ == a.layout_ ? b : b.with_layout(a.layout_);
    return a.ptr_ == bb.ptr_ && a.idx_ == bb.idx_ && a.val_ == bb.val_;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  Layout layout_ = Layout::Row;
  std::vector<Index> ptr_;
  std::vector<Index> idx_;
  Vector val_;
};

/// y = A x (overwrites y).
inline void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.cols() || y.size() != a.rows()) {
    throw DimensionError("spmv: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " times vector of length " + std::to_string(x.size()));
  }
  auto ptr = a.ptr();
  auto idx = a.indices();
  auto val = a.values();
  if (a.layout() == Layout::Row) {
    for (Index i = 0; i < a.rows(); ++i) {
      double s = 0.0;
      for (Index k = ptr[i]; k < ptr[i + 1]; ++k) s += val[k] * x[idx[k]];
      y[i] = s;
    }
  } else {
    std::fill(y.begin(), y.end(), 0.0);
    for (Index j = 0; j < a.cols(); ++j) {
      const double xj = x[j];
      if (xj == 0.0) continue;
      for (Index k = ptr[j]; k < ptr[j + 1]; ++k) y[idx[k]] += val[k] * xj;
    }
  }
}

inline Vector spmv(const SparseMatrix& a, std::span<const double> x) {
  Vector y(a.rows());
  spmv(a, x, y);
  return y;
}

/// y -= A x
inline void spmv_subtract(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  Vector t(a.rows());
  spmv(a, x, t);
  for (Index i = 0; i < t.size(); ++i) y[i] -= t[i];
}

/// Result (i, j) = A(rows[i], cols[j]); output layout follows the input.
inline SparseMatrix extract_submatrix(const SparseMatrix& a, std::span<const Index> rows,
                                      std::span<const Index> cols) {
  constexpr Index absent = static_cast<Index>(-1);
  std::vector<Index> row_pos(a.rows(), absent), col_pos(a.cols(), absent);
  for (Index i = 0; i < rows.size(); ++i) {
    if (rows[i] >= a.rows()) throw DimensionError("row index out of range");
    if (row_pos[rows[i]] != absent) throw DimensionError("duplicate row index");
    row_pos[rows[i]] = i;
  }
  for (Index j = 0; j < cols.size(); ++j) {
    if (cols[j] >= a.cols()) throw DimensionError("column index out of range");
    if (col_pos[cols[j]] != absent) throw DimensionError("duplicate column index");
    col_pos[cols[j]] = j;
  }
  const bool by_row = a.layout() == Layout::Row;
  std::span<const Index> outer_sel = by_row ? rows : cols;
  const std::vector<Index>& inner_pos = by_row ? col_pos : row_pos;

  std::vector<Index> ptr(outer_sel.size() + 1, 0), idx;
  Vector val;
  std::vector<std::pair<Index, double>> line;
  for (Index o = 0; o < outer_sel.size(); ++o) {
    line.clear();
    auto li = a.line_indices(outer_sel[o]);
    auto lv = a.line_values(outer_sel[o]);
    for (Index k = 0; k < li.size(); ++k) {
      if (inner_pos[li[k]] != absent) line.emplace_back(inner_pos[li[k]], lv[k]);
    }
    std::sort(line.begin(), line.end());
    for (const auto& [i, v] : line) {
      idx.push_back(i);
      val.push_back(v);
    }
    ptr[o + 1] = idx.size();
  }
  return SparseMatrix::from_compressed(rows.size(), cols.size(), a.layout(), std::move(ptr),
                                       std::move(idx), std::move(val));
}

/// Contiguous index range [begin, begin + size).
inline std::vector<Index> index_range(Index begin, Index size) {
  std::vector<Index> r(size);
  std::iota(r.begin(), r.end(), begin);
  return r;
}

inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace ames
