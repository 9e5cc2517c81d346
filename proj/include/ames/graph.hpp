#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "ames/sparse_matrix.hpp"

namespace ames {

/// Undirected graph in compressed adjacency form, neighbors sorted, no self-loops.
struct AdjacencyGraph {
  std::vector<Index> xadj{0};
  std::vector<Index> adj;

  Index size() const noexcept { return xadj.size() - 1; }
  Index num_edges() const noexcept { return adj.size() / 2; }
  std::span<const Index> neighbors(Index v) const {
    return {adj.data() + xadj[v], xadj[v + 1] - xadj[v]};
  }
  bool has_edge(Index u, Index v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }
};

inline bool structurally_symmetric(const SparseMatrix& a) {
  if (!a.square()) return false;
  const SparseMatrix t = a.transpose();
  auto ap = a.ptr(), tp = t.ptr();
  auto ai = a.indices(), ti = t.indices();
  return std::equal(ap.begin(), ap.end(), tp.begin()) && std::equal(ai.begin(), ai.end(), ti.begin());
}

/// Graph of the pattern of A (`symmetrize == false`, pattern must already be
/// symmetric) or of A + A^T. The diagonal is ignored.
inline AdjacencyGraph build_adjacency(const SparseMatrix& a, bool symmetrize) {
  if (!a.square()) throw DimensionError("adjacency graph needs a square matrix");
  if (!symmetrize && !structurally_symmetric(a)) {
    throw DimensionError("pattern is not symmetric; build the graph of A + A^T instead");
  }
  const Index n = a.rows();
  std::vector<std::vector<Index>> nbrs(n);
  for (const auto& t : a.triplets()) {
    if (t.row == t.col) continue;
    nbrs[t.row].push_back(t.col);
    if (symmetrize) nbrs[t.col].push_back(t.row);
  }
  AdjacencyGraph g;
  g.xadj.assign(n + 1, 0);
  for (Index v = 0; v < n; ++v) {
    auto& l = nbrs[v];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    g.xadj[v + 1] = g.xadj[v] + l.size();
  }
  g.adj.reserve(g.xadj[n]);
  for (auto& l : nbrs) g.adj.insert(g.adj.end(), l.begin(), l.end());
  return g;
}

}  // namespace ames
