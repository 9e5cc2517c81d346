#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include "ames/partition.hpp"
#include "ames/sparse_matrix.hpp"

namespace ames {

/// Vertex sets of one level of overlapping, in original numbering.
///
/// `extended_parts[i]` lists the interior of part i (sorted) followed by its
/// separator successors (sorted); `extended_separator` lists the separator
/// (sorted) followed by the subdomain successors of all extension vertices.
struct ExtensionSets {
  std::vector<std::vector<Index>> ext;  // separator successors of each part
  std::vector<std::vector<Index>> extended_parts;
  std::vector<Index> extended_separator;
};

/// Successors follow the directed pattern of A: (u, v) is an edge iff a_uv != 0, u != v.
inline ExtensionSets compute_extension_sets(const SparseMatrix& a, const PartitionResult& pr) {
  if (!a.square() || pr.part_of.size() != a.rows()) {
    throw DimensionError("extension sets: matrix and partition disagree");
  }
  const SparseMatrix csr = a.with_layout(Layout::Row);
  const Index n = csr.rows();
  std::vector<char> in_sep(n, 0);
  for (Index v : pr.interface) in_sep[v] = 1;

  ExtensionSets out;
  out.ext.resize(pr.interior.size());
  out.extended_parts.resize(pr.interior.size());
  std::vector<char> in_ext_any(n, 0), mark(n, 0);
  for (Index i = 0; i < pr.interior.size(); ++i) {
    auto& ext = out.ext[i];
    for (Index u : pr.interior[i]) {
      for (Index v : csr.line_indices(u)) {
        if (v != u && in_sep[v] && !mark[v]) {
          mark[v] = 1;
          ext.push_back(v);
        }
      }
    }
    for (Index v : ext) {
      mark[v] = 0;
      in_ext_any[v] = 1;
    }
    std::sort(ext.begin(), ext.end());
    auto& hat = out.extended_parts[i];
    hat = pr.interior[i];
    std::sort(hat.begin(), hat.end());
    hat.insert(hat.end(), ext.begin(), ext.end());
  }

  std::vector<Index> added;
  for (Index u = 0; u < n; ++u) {
    if (!in_ext_any[u]) continue;
    for (Index v : csr.line_indices(u)) {
      if (v != u && !in_sep[v] && !mark[v]) {
        mark[v] = 1;
        added.push_back(v);
      }
    }
  }
  std::sort(added.begin(), added.end());
  out.extended_separator = pr.interface;
  std::sort(out.extended_separator.begin(), out.extended_separator.end());
  out.extended_separator.insert(out.extended_separator.end(), added.begin(), added.end());
  return out;
}

/// Bookkeeping between overlapped unknowns and original unknowns.
struct OverlapMap {
  static constexpr Index separator_tag = std::numeric_limits<Index>::max();

  std::vector<Index> original;  // copy -> original vertex
  std::vector<Index> tag;       // copy -> part id or separator_tag
  std::vector<std::vector<Index>> copies;  // original vertex -> its copies
  std::vector<Index> primary;   // original vertex -> designated copy

  Index overlapped_size() const noexcept { return original.size(); }
  Index original_size() const noexcept { return copies.size(); }
};

struct OverlappedSystem {
  SparseMatrix matrix;  // rows ordered: extended part 0, 1, ..., extended separator
  Vector rhs;
  OverlapMap map;
  std::vector<Index> part_sizes;
  Index separator_size = 0;

  /// Block structure of the overlapped matrix as a partition, for forcing the
  /// first reordering level.
  PartitionResult block_partition() const {
    PartitionResult r;
    r.parts = part_sizes.size();
    r.interior.resize(r.parts);
    r.part_of.assign(matrix.rows(), 0);
    Index pos = 0;
    for (Index i = 0; i < r.parts; ++i) {
      for (Index k = 0; k < part_sizes[i]; ++k, ++pos) {
        r.interior[i].push_back(pos);
        r.part_of[pos] = i;
      }
    }
    for (; pos < matrix.rows(); ++pos) r.interface.push_back(pos);
    return r;
  }
};

/// One level of overlapping on the partition `pr` of A.
///
/// Each part is extended by its separator successors, the separator by the
/// subdomain successors of those. An original entry (u, v) seen from a copy
/// u_k lands on v's copy inside the same block when one exists, otherwise on
/// v_s (from a part block) or on v's copy in v's own part (from the separator
/// block). Every overlapped row therefore has exactly the entries of its
/// original row.
inline OverlappedSystem build_overlapped(const SparseMatrix& a, std::span<const double> b,
                                         const PartitionResult& pr) {
  if (b.size() != a.rows()) throw DimensionError("overlap: rhs length mismatch");
  const ExtensionSets sets = compute_extension_sets(a, pr);
  const SparseMatrix csr = a.with_layout(Layout::Row);
  const Index n = csr.rows();
  const Index p = sets.extended_parts.size();
  constexpr Index none = std::numeric_limits<Index>::max();

  OverlappedSystem sys;
  OverlapMap& map = sys.map;
  map.copies.resize(n);
  map.primary.assign(n, none);
  // position[k][v]: copy of v in block k (k = p is the separator block)
  std::vector<std::vector<Index>> position(p + 1);
  auto add_block = [&](const std::vector<Index>& verts, Index block, Index t) {
    position[block].assign(n, none);
    for (Index v : verts) {
      const Index c = map.original.size();
      map.original.push_back(v);
      map.tag.push_back(t);
      map.copies[v].push_back(c);
      position[block][v] = c;
    }
  };
  for (Index i = 0; i < p; ++i) {
    add_block(sets.extended_parts[i], i, i);
    sys.part_sizes.push_back(sets.extended_parts[i].size());
  }
  add_block(sets.extended_separator, p, OverlapMap::separator_tag);
  sys.separator_size = sets.extended_separator.size();

  for (Index i = 0; i < p; ++i) {
    for (Index v : pr.interior[i]) map.primary[v] = position[i][v];
  }
  for (Index v : pr.interface) map.primary[v] = position[p][v];

  const Index nt = map.original.size();
  std::vector<Triplet> t;
  t.reserve(csr.nnz() * 2);
  for (Index c = 0; c < nt; ++c) {
    const Index u = map.original[c];
    const bool sep_row = map.tag[c] == OverlapMap::separator_tag;
    const auto& own = position[sep_row ? p : map.tag[c]];
    auto idx = csr.line_indices(u);
    auto val = csr.line_values(u);
    for (Index k = 0; k < idx.size(); ++k) {
      const Index v = idx[k];
      Index col = own[v];
      if (col == none) col = sep_row ? position[pr.part_of[v]][v] : position[p][v];
      if (col == none) {
        throw Error("overlap: no copy of vertex " + std::to_string(v) + " reachable from row " +
                    std::to_string(u) + "; partition is not consistent with the matrix");
      }
      t.push_back({c, col, val[k]});
    }
  }
  sys.matrix = SparseMatrix::from_triplets(nt, nt, std::move(t));
  sys.rhs.resize(nt);
  for (Index c = 0; c < nt; ++c) sys.rhs[c] = b[map.original[c]];
  return sys;
}

/// x(v) = x_tilde(primary copy of v)
inline Vector restrict_solution(std::span<const double> x_tilde, const OverlapMap& map) {
  if (x_tilde.size() != map.overlapped_size()) {
    throw DimensionError("restrict: expected length " + std::to_string(map.overlapped_size()));
  }
  Vector x(map.original_size());
  for (Index v = 0; v < x.size(); ++v) x[v] = x_tilde[map.primary[v]];
  return x;
}

struct OverlapStats {
  double size_ratio = 1.0;
  double nnz_ratio = 1.0;
  Index separator_before = 0;
  Index separator_after = 0;
  double sparsity_f_before = 0.0;  // nnz(F) / (rows(F) * cols(F))
  double sparsity_f_after = 0.0;
};

namespace detail {

inline double coupling_density(const SparseMatrix& a, std::span<const std::vector<Index>> parts,
                               std::span<const Index> sep) {
  std::vector<Index> rows;
  for (const auto& part : parts) rows.insert(rows.end(), part.begin(), part.end());
  const double size = static_cast<double>(rows.size()) * static_cast<double>(sep.size());
  if (size == 0.0) return 0.0;
  return static_cast<double>(extract_submatrix(a, rows, sep).nnz()) / size;
}

}  // namespace detail

inline OverlapStats overlap_stats(const SparseMatrix& a, const PartitionResult& pr,
                                  const OverlappedSystem& ov) {
  OverlapStats s;
  s.size_ratio = static_cast<double>(ov.matrix.rows()) / static_cast<double>(a.rows());
  s.nnz_ratio = a.nnz() ? static_cast<double>(ov.matrix.nnz()) / static_cast<double>(a.nnz()) : 1.0;
  s.separator_before = pr.interface.size();
  s.separator_after = ov.separator_size;
  const SparseMatrix csr = a.with_layout(Layout::Row);
  s.sparsity_f_before = detail::coupling_density(csr, pr.interior, pr.interface);
  const PartitionResult blocks = ov.block_partition();
  s.sparsity_f_after = detail::coupling_density(ov.matrix, blocks.interior, blocks.interface);
  return s;
}

}  // namespace ames
