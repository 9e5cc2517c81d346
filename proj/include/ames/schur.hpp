#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "ames/sparse_matrix.hpp"

namespace ames {

struct SchurStats {
  Index block_solves = 0;    // one per nonzero column of each F_i
  Index skipped_columns = 0; // zero columns of F_i
};

/// Solves B_i z = f approximately; arguments are (block index, f, z).
using BlockSolve = std::function<void(Index, std::span<const double>, std::span<double>)>;

/// S = C - sum_i E_i B_i^{-1} F_i, assembled one separator column at a time.
///
/// Entries with |s| < droptol are dropped except the diagonal. Zero columns of
/// F_i never reach `solve`. Summation order is fixed (children in order), so
/// the result does not depend on scheduling.
inline SparseMatrix compute_schur(const SparseMatrix& c, std::span<const SparseMatrix> e,
                                  std::span<const SparseMatrix> f, const BlockSolve& solve,
                                  double droptol, SchurStats* stats = nullptr) {
  const Index ns = c.rows();
  if (c.cols() != ns) throw DimensionError("schur: C must be square");
  if (e.size() != f.size()) throw DimensionError("schur: E and F lists differ in length");
  std::vector<SparseMatrix> f_csc, e_csr;
  for (Index i = 0; i < e.size(); ++i) {
    if (e[i].rows() != ns || f[i].cols() != ns || e[i].cols() != f[i].rows()) {
      throw DimensionError("schur: block " + std::to_string(i) + " does not conform");
    }
    f_csc.push_back(f[i].with_layout(Layout::Column));
    e_csr.push_back(e[i].with_layout(Layout::Row));
  }
  const SparseMatrix c_csc = c.with_layout(Layout::Column);

  std::vector<Triplet> out;
  Vector acc(ns, 0.0), rhs, z, ez;
  SchurStats local;
  for (Index col = 0; col < ns; ++col) {
    std::fill(acc.begin(), acc.end(), 0.0);
    auto ci = c_csc.line_indices(col);
    auto cv = c_csc.line_values(col);
    for (Index k = 0; k < ci.size(); ++k) acc[ci[k]] = cv[k];

    for (Index i = 0; i < f_csc.size(); ++i) {
      auto fi = f_csc[i].line_indices(col);
      if (fi.empty()) {
        ++local.skipped_columns;
        continue;
      }
      auto fv = f_csc[i].line_values(col);
      const Index ni = f_csc[i].rows();
      rhs.assign(ni, 0.0);
      for (Index k = 0; k < fi.size(); ++k) rhs[fi[k]] = fv[k];
      z.assign(ni, 0.0);
      solve(i, rhs, z);
      ++local.block_solves;
      ez.assign(ns, 0.0);
      spmv(e_csr[i], z, ez);
      for (Index r = 0; r < ns; ++r) acc[r] -= ez[r];
    }
    for (Index r = 0; r < ns; ++r) {
      const double v = acc[r];
      if (v != 0.0 && (r == col || std::abs(v) >= droptol)) out.push_back({r, col, v});
    }
  }
  if (stats) *stats = local;
  return SparseMatrix::from_triplets(ns, ns, std::move(out));
}

}  // namespace ames
