#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ames/partition.hpp"

namespace ames {

/// Shape of the recursive block-bordered reordering.
struct TreeConfig {
  Index parts = 2;            // parts per split
  Index levels = 1;           // maximum depth of split nodes
  Index min_block_size = 16;  // blocks of at most this size are not split
  double imbalance = 1.2;

  void validate() const {
    if (min_block_size < 1) throw Error("min_block_size must be at least 1");
    if (parts < 1) throw Error("parts must be at least 1");
  }
};

/// One node of the dissection tree.
///
/// A split node stores the coupling blocks of its own block-bordered form:
/// `e_blocks[i]` is C-rows x child-i columns (row-compressed), `f_blocks[i]` is
/// child-i rows x C columns (column-compressed), `c_block` the separator block.
/// A leaf stores its whole diagonal block. Local ordering inside a node is:
/// child 0, child 1, ..., separator.
struct DissectionNode {
  Index level = 0;
  Index offset = 0;  // position of the node's first row in the root ordering
  Index size = 0;
  std::vector<Index> global_index;  // local row -> row of the matrix given to build_tree
  std::vector<DissectionNode> children;
  std::vector<Index> child_offsets;  // local offsets of the children
  std::vector<SparseMatrix> e_blocks;
  std::vector<SparseMatrix> f_blocks;
  SparseMatrix c_block;
  std::optional<SparseMatrix> leaf_block;

  bool is_leaf() const noexcept { return leaf_block.has_value(); }
  Index separator_size() const noexcept { return c_block.rows(); }
  Index separator_offset() const noexcept { return size - separator_size(); }
};

struct DissectionTree {
  DissectionNode root;
  Permutation permutation;  // root ordering: forward[new] = old
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (a + 1) + 0xBF58476D1CE4E5B9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline DissectionNode build_node(const SparseMatrix& a, Index level, const TreeConfig& cfg,
                                 std::uint64_t seed, const PartitionResult* forced,
                                 std::vector<Index>& order) {
  const Index n = a.rows();
  DissectionNode node;
  node.level = level;
  node.size = n;

  auto make_leaf = [&] {
    node.leaf_block = a;
    node.c_block = SparseMatrix::zero(0, 0);
    order = index_range(0, n);
    return node;
  };

  if (!forced && (level >= cfg.levels || n <= cfg.min_block_size || cfg.parts < 2 || n < 2)) {
    return make_leaf();
  }
  PartitionResult pr;
  if (forced) {
    pr = *forced;
  } else {
    PartitionOptions opt;
    opt.imbalance = cfg.imbalance;
    pr = partition_graph(build_adjacency(a, true), std::min(cfg.parts, n), seed, opt);
  }

  Index nonempty = 0;
  for (const auto& part : pr.interior) nonempty += part.empty() ? 0 : 1;
  if (nonempty == 0 || (nonempty == 1 && pr.interface.empty())) return make_leaf();

  order.clear();
  order.reserve(n);
  std::vector<std::vector<Index>> child_rows;
  for (Index i = 0; i < pr.interior.size(); ++i) {
    const auto& part = pr.interior[i];
    if (part.empty()) continue;  // empty diagonal blocks are skipped
    std::vector<Index> child_order;
    SparseMatrix sub = extract_submatrix(a, part, part);
    node.child_offsets.push_back(order.size());
    node.children.push_back(
        build_node(sub, level + 1, cfg, mix_seed(seed, level, i), nullptr, child_order));
    std::vector<Index> rows(part.size());
    for (Index k = 0; k < part.size(); ++k) rows[k] = part[child_order[k]];
    order.insert(order.end(), rows.begin(), rows.end());
    child_rows.push_back(std::move(rows));
  }
  const std::vector<Index>& sep = pr.interface;
  order.insert(order.end(), sep.begin(), sep.end());

  for (const auto& rows : child_rows) {
    node.e_blocks.push_back(extract_submatrix(a, sep, rows));
    node.f_blocks.push_back(extract_submatrix(a, rows, sep).with_layout(Layout::Column));
  }
  node.c_block = extract_submatrix(a, sep, sep);
  return node;
}

inline void assign_positions(DissectionNode& node, Index offset, std::span<const Index> global) {
  node.offset = offset;
  node.global_index.assign(global.begin(), global.end());
  for (Index i = 0; i < node.children.size(); ++i) {
    const Index off = node.child_offsets[i];
    assign_positions(node.children[i], offset + off, global.subspan(off, node.children[i].size));
  }
}

inline void collect_triplets(const DissectionNode& node, Index offset, std::vector<Triplet>& out) {
  if (node.is_leaf()) {
    for (const auto& t : node.leaf_block->triplets()) {
      out.push_back({offset + t.row, offset + t.col, t.value});
    }
    return;
  }
  const Index sep = offset + node.separator_offset();
  for (Index i = 0; i < node.children.size(); ++i) {
    const Index co = offset + node.child_offsets[i];
    collect_triplets(node.children[i], co, out);
    for (const auto& t : node.e_blocks[i].triplets()) out.push_back({sep + t.row, co + t.col, t.value});
    for (const auto& t : node.f_blocks[i].triplets()) out.push_back({co + t.row, sep + t.col, t.value});
  }
  for (const auto& t : node.c_block.triplets()) out.push_back({sep + t.row, sep + t.col, t.value});
}

}  // namespace detail

/// Analysis phase: recursive block-bordered reordering of A.
///
/// Splitting stops at depth `cfg.levels` or when a block has at most
/// `cfg.min_block_size` rows. `root_partition`, when given, replaces the
/// partitioner at the root (partition-file hook, overlapped systems).
inline DissectionTree build_tree(const SparseMatrix& a, const TreeConfig& cfg, std::uint64_t seed,
                                 const PartitionResult* root_partition = nullptr) {
  if (!a.square()) throw DimensionError("build_tree needs a square matrix");
  cfg.validate();
  const SparseMatrix csr = a.with_layout(Layout::Row);
  std::vector<Index> order;
  DissectionTree tree;
  tree.root = detail::build_node(csr, 0, cfg, seed, root_partition, order);
  tree.permutation = Permutation(order);
  detail::assign_positions(tree.root, 0, order);
  return tree;
}

/// The permuted matrix P^T A P, rebuilt from the stored blocks.
inline SparseMatrix reassemble(const DissectionNode& node) {
  std::vector<Triplet> t;
  detail::collect_triplets(node, 0, t);
  return SparseMatrix::from_triplets(node.size, node.size, std::move(t));
}

inline Index stored_nnz(const DissectionNode& node) {
  if (node.is_leaf()) return node.leaf_block->nnz();
  Index total = node.c_block.nnz();
  for (Index i = 0; i < node.children.size(); ++i) {
    total += stored_nnz(node.children[i]) + node.e_blocks[i].nnz() + node.f_blocks[i].nnz();
  }
  return total;
}

inline Index depth(const DissectionNode& node) {
  Index d = 0;
  for (const auto& c : node.children) d = std::max(d, depth(c) + 1);
  return d;
}

/// One line per node: indentation by level, sizes and block nnz.
inline void dump_tree(std::ostream& os, const DissectionNode& node) {
  os << std::string(2 * node.level, ' ');
  if (node.is_leaf()) {
    os << "leaf level=" << node.level << " offset=" << node.offset << " size=" << node.size
       << " nnz=" << node.leaf_block->nnz() << '\n';
    return;
  }
  Index e = 0, f = 0;
  for (const auto& b : node.e_blocks) e += b.nnz();
  for (const auto& b : node.f_blocks) f += b.nnz();
  os << "split level=" << node.level << " offset=" << node.offset << " size=" << node.size
     << " children=" << node.children.size() << " separator=" << node.separator_size()
     << " nnz_E=" << e << " nnz_F=" << f << " nnz_C=" << node.c_block.nnz() << '\n';
  for (const auto& c : node.children) dump_tree(os, c);
}

inline std::string dump_tree(const DissectionNode& node) {
  std::ostringstream os;
  dump_tree(os, node);
  return os.str();
}

}  // namespace ames
