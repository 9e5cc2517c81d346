#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ames/graph.hpp"
#include "ames/permutation.hpp"

namespace ames {

/// p-way vertex partition with interior/interface classification.
struct PartitionResult {
  Index parts = 0;
  std::vector<Index> part_of;
  std::vector<std::vector<Index>> interior;  // sorted, per part
  std::vector<Index> interface;              // sorted separator vertices
};

/// Which endpoints of cut edges join the separator.
///  - VertexCover: a greedy cover of the cut edges (max uncovered degree first,
///    lowest index on ties), so only one side of most cut edges is moved.
///  - BothSides: every vertex with a neighbor in another part.
enum class SeparatorRule { VertexCover, BothSides };

struct PartitionOptions {
  double imbalance = 1.2;  // max part size relative to n / p
  int refine_passes = 8;
  int initial_trials = 8;
  Index coarsen_until = 32;
  SeparatorRule separator = SeparatorRule::VertexCover;
};

/// Splits the vertices of a p-way partition into per-part interiors and a
/// separator such that no edge joins the interiors of two different parts.
inline PartitionResult classify_partition(const AdjacencyGraph& g, std::vector<Index> part_of,
                                          Index parts,
                                          SeparatorRule rule = SeparatorRule::VertexCover) {
  const Index n = g.size();
  if (part_of.size() != n) throw DimensionError("partition vector length mismatch");
  for (Index v = 0; v < n; ++v) {
    if (part_of[v] >= parts) throw DimensionError("part id out of range");
  }
  std::vector<char> in_sep(n, 0);
  if (rule == SeparatorRule::BothSides) {
    for (Index v = 0; v < n; ++v) {
      for (Index u : g.neighbors(v)) {
        if (part_of[u] != part_of[v]) {
          in_sep[v] = 1;
          break;
        }
      }
    }
  } else {
    std::vector<Index> cut(n, 0);
    std::set<std::pair<long, Index>> queue;  // (-uncovered cut degree, vertex)
    for (Index v = 0; v < n; ++v) {
      for (Index u : g.neighbors(v)) cut[v] += part_of[u] != part_of[v] ? 1 : 0;
      if (cut[v]) queue.emplace(-static_cast<long>(cut[v]), v);
    }
    while (!queue.empty()) {
      const Index v = queue.begin()->second;
      queue.erase(queue.begin());
      in_sep[v] = 1;
      for (Index u : g.neighbors(v)) {
        if (in_sep[u] || part_of[u] == part_of[v]) continue;
        queue.erase({-static_cast<long>(cut[u]), u});
        if (--cut[u]) queue.emplace(-static_cast<long>(cut[u]), u);
      }
    }
  }
  PartitionResult r;
  r.parts = parts;
  r.interior.resize(parts);
  for (Index v = 0; v < n; ++v) (in_sep[v] ? r.interface : r.interior[part_of[v]]).push_back(v);
  r.part_of = std::move(part_of);
  return r;
}

/// Structural invariants: every vertex appears once, and every neighbor of an
/// interior vertex of part i is interior to part i or on the separator.
inline bool is_valid_partition(const AdjacencyGraph& g, const PartitionResult& r) {
  if (r.part_of.size() != g.size() || r.interior.size() != r.parts) return false;
  constexpr Index sep = static_cast<Index>(-1);
  std::vector<Index> where(g.size(), sep);
  std::vector<int> seen(g.size(), 0);
  for (Index i = 0; i < r.parts; ++i) {
    for (Index v : r.interior[i]) {
      if (v >= g.size() || r.part_of[v] != i) return false;
      ++seen[v];
      where[v] = i;
    }
  }
  for (Index v : r.interface) {
    if (v >= g.size()) return false;
    ++seen[v];
  }
  if (!std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; })) return false;
  for (Index i = 0; i < r.parts; ++i) {
    for (Index v : r.interior[i]) {
      for (Index u : g.neighbors(v)) {
        if (where[u] != i && where[u] != sep) return false;
      }
    }
  }
  return true;
}

namespace detail {

struct WeightedGraph {
  std::vector<Index> xadj{0};
  std::vector<Index> adj;
  std::vector<long> ewgt;
  std::vector<long> vwgt;

  Index size() const noexcept { return vwgt.size(); }
  long total_weight() const {
    long s = 0;
    for (long w : vwgt) s += w;
    return s;
  }
};

inline WeightedGraph unit_weighted(const AdjacencyGraph& g) {
  WeightedGraph w;
  w.xadj = g.xadj;
  w.adj = g.adj;
  w.ewgt.assign(g.adj.size(), 1);
  w.vwgt.assign(g.size(), 1);
  return w;
}

struct CoarseLevel {
  WeightedGraph graph;
  std::vector<Index> map;  // fine vertex -> coarse vertex
};

/// Heavy-edge matching in a seeded random visiting order.
inline CoarseLevel coarsen(const WeightedGraph& g, std::mt19937_64& rng) {
  const Index n = g.size();
  constexpr Index unset = static_cast<Index>(-1);
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Index> match(n, unset);
  for (Index u : order) {
    if (match[u] != unset) continue;
    Index best = u;
    long best_w = -1;
    for (Index k = g.xadj[u]; k < g.xadj[u + 1]; ++k) {
      const Index v = g.adj[k];
      if (match[v] != unset || v == u) continue;
      if (g.ewgt[k] > best_w || (g.ewgt[k] == best_w && v < best)) {
        best = v;
        best_w = g.ewgt[k];
      }
    }
    match[u] = best;
    match[best] = u;
  }

  CoarseLevel c;
  c.map.assign(n, unset);
  Index nc = 0;
  for (Index v = 0; v < n; ++v) {
    if (c.map[v] != unset) continue;
    c.map[v] = nc;
    c.map[match[v]] = nc;
    ++nc;
  }
  auto& cg = c.graph;
  cg.vwgt.assign(nc, 0);
  std::vector<std::vector<Index>> members(nc);
  for (Index v = 0; v < n; ++v) {
    cg.vwgt[c.map[v]] += g.vwgt[v];
    members[c.map[v]].push_back(v);
  }
  std::vector<Index> pos(nc, unset);
  cg.xadj.assign(nc + 1, 0);
  for (Index cv = 0; cv < nc; ++cv) {
    const Index start = cg.adj.size();
    for (Index v : members[cv]) {
      for (Index k = g.xadj[v]; k < g.xadj[v + 1]; ++k) {
        const Index cu = c.map[g.adj[k]];
        if (cu == cv) continue;
        if (pos[cu] == unset || pos[cu] < start) {
          pos[cu] = cg.adj.size();
          cg.adj.push_back(cu);
          cg.ewgt.push_back(g.ewgt[k]);
        } else {
          cg.ewgt[pos[cu]] += g.ewgt[k];
        }
      }
    }
    cg.xadj[cv + 1] = cg.adj.size();
    for (Index k = start; k < cg.adj.size(); ++k) pos[cg.adj[k]] = unset;
  }
  return c;
}

struct BisectionTargets {
  long max_weight[2];
};

inline long overweight(const long w[2], const BisectionTargets& t) {
  return std::max(0L, w[0] - t.max_weight[0]) + std::max(0L, w[1] - t.max_weight[1]);
}

inline long cut_weight(const WeightedGraph& g, const std::vector<std::uint8_t>& side) {
  long cut = 0;
  for (Index v = 0; v < g.size(); ++v) {
    for (Index k = g.xadj[v]; k < g.xadj[v + 1]; ++k) {
      if (side[v] != side[g.adj[k]]) cut += g.ewgt[k];
    }
  }
  return cut / 2;
}

/// Fiduccia–Mattheyses style boundary refinement with single-vertex moves,
/// rollback to the best prefix, ties broken by lowest vertex index.
inline void fm_refine(const WeightedGraph& g, std::vector<std::uint8_t>& side,
                      const BisectionTargets& targets, int passes) {
  const Index n = g.size();
  if (n < 2) return;
  for (int pass = 0; pass < passes; ++pass) {
    long w[2] = {0, 0};
    for (Index v = 0; v < n; ++v) w[side[v]] += g.vwgt[v];
    std::vector<long> gain(n, 0);
    for (Index v = 0; v < n; ++v) {
      for (Index k = g.xadj[v]; k < g.xadj[v + 1]; ++k) {
        gain[v] += side[g.adj[k]] != side[v] ? g.ewgt[k] : -g.ewgt[k];
      }
    }
    std::set<std::pair<long, Index>> queue[2];
    for (Index v = 0; v < n; ++v) queue[side[v]].emplace(-gain[v], v);
    std::vector<std::uint8_t> locked(n, 0);
    std::vector<Index> moves;

    long cut = cut_weight(g, side);
    const long start_cut = cut;
    const long start_over = overweight(w, targets);
    long best_cut = cut, best_over = start_over;
    std::size_t best_len = 0;
    const std::size_t patience = std::max<std::size_t>(32, n / 16);

    for (;;) {
      const bool force[2] = {w[0] > targets.max_weight[0], w[1] > targets.max_weight[1]};
      Index pick = static_cast<Index>(-1);
      long pick_gain = 0;
      for (int s = 0; s < 2; ++s) {
        if (force[1 - s]) continue;  // never move into an overweight side
        int inspected = 0;
        for (auto it = queue[s].begin(); it != queue[s].end() && inspected < 8; ++it, ++inspected) {
          const Index v = it->second;
          const bool fits = w[1 - s] + g.vwgt[v] <= targets.max_weight[1 - s] || force[s];
          if (!fits) continue;
          const long gv = -it->first;
          if (pick == static_cast<Index>(-1) || gv > pick_gain || (gv == pick_gain && v < pick)) {
            pick = v;
            pick_gain = gv;
          }
          break;
        }
      }
      if (pick == static_cast<Index>(-1)) break;

      const int from = side[pick], to = 1 - from;
      queue[from].erase({-gain[pick], pick});
      locked[pick] = 1;
      side[pick] = static_cast<std::uint8_t>(to);
      w[from] -= g.vwgt[pick];
      w[to] += g.vwgt[pick];
      cut -= gain[pick];
      moves.push_back(pick);
      for (Index k = g.xadj[pick]; k < g.xadj[pick + 1]; ++k) {
        const Index u = g.adj[k];
        if (locked[u]) continue;
        queue[side[u]].erase({-gain[u], u});
        gain[u] += side[u] == from ? 2 * g.ewgt[k] : -2 * g.ewgt[k];
        queue[side[u]].emplace(-gain[u], u);
      }

      const long over = overweight(w, targets);
      if (over < best_over || (over == best_over && cut < best_cut)) {
        best_over = over;
        best_cut = cut;
        best_len = moves.size();
      }
      if (moves.size() - best_len > patience) break;
    }
    for (std::size_t k = moves.size(); k > best_len; --k) side[moves[k - 1]] ^= 1;
    if (best_over == start_over && best_cut >= start_cut) break;
  }
}

/// Greedy breadth-first growth of side 0 from several seeded start vertices.
inline std::vector<std::uint8_t> initial_bisection(const WeightedGraph& g, double target0,
                                                   const BisectionTargets& targets, int trials,
                                                   std::mt19937_64& rng) {
  const Index n = g.size();
  std::vector<std::uint8_t> best;
  long best_cut = 0, best_over = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::uint8_t> side(n, 1);
    std::vector<std::uint8_t> queued(n, 0);
    std::vector<Index> queue;
    std::size_t head = 0;
    long w0 = 0;
    Index next_unvisited = 0;
    Index start = static_cast<Index>(rng() % n);
    queue.push_back(start);
    queued[start] = 1;
    while (static_cast<double>(w0) < target0) {
      if (head == queue.size()) {
        while (next_unvisited < n && queued[next_unvisited]) ++next_unvisited;
        if (next_unvisited == n) break;
        queue.push_back(next_unvisited);
        queued[next_unvisited] = 1;
      }
      const Index v = queue[head++];
      if (static_cast<double>(w0) + 0.5 * static_cast<double>(g.vwgt[v]) > target0 && w0 > 0) break;
      side[v] = 0;
      w0 += g.vwgt[v];
      for (Index k = g.xadj[v]; k < g.xadj[v + 1]; ++k) {
        const Index u = g.adj[k];
        if (!queued[u]) {
          queued[u] = 1;
          queue.push_back(u);
        }
      }
    }
    fm_refine(g, side, targets, 4);
    long w[2] = {0, 0};
    for (Index v = 0; v < n; ++v) w[side[v]] += g.vwgt[v];
    const long over = overweight(w, targets);
    const long cut = cut_weight(g, side);
    if (best.empty() || over < best_over || (over == best_over && cut < best_cut)) {
      best = std::move(side);
      best_cut = cut;
      best_over = over;
    }
  }
  return best;
}

inline std::vector<std::uint8_t> multilevel_bisection(const WeightedGraph& g, double fraction0,
                                                      double ub, const PartitionOptions& opt,
                                                      std::mt19937_64& rng) {
  auto targets_for = [&](const WeightedGraph& gr) {
    const double total = static_cast<double>(gr.total_weight());
    const double t0 = total * fraction0, t1 = total - t0;
    BisectionTargets bt{};
    bt.max_weight[0] = std::max(static_cast<long>(std::floor(t0 * ub + 1e-9)),
                                static_cast<long>(std::ceil(t0 - 1e-9)));
    bt.max_weight[1] = std::max(static_cast<long>(std::floor(t1 * ub + 1e-9)),
                                static_cast<long>(std::ceil(t1 - 1e-9)));
    return bt;
  };

  std::vector<CoarseLevel> levels;
  const WeightedGraph* cur = &g;
  while (cur->size() > opt.coarsen_until) {
    CoarseLevel c = coarsen(*cur, rng);
    if (static_cast<double>(c.graph.size()) > 0.9 * static_cast<double>(cur->size())) break;
    levels.push_back(std::move(c));
    cur = &levels.back().graph;
  }
  std::vector<std::uint8_t> side =
      initial_bisection(*cur, static_cast<double>(cur->total_weight()) * fraction0,
                        targets_for(*cur), opt.initial_trials, rng);
  for (std::size_t l = levels.size(); l-- > 0;) {
    const WeightedGraph& fine = l == 0 ? g : levels[l - 1].graph;
    std::vector<std::uint8_t> fine_side(fine.size());
    for (Index v = 0; v < fine.size(); ++v) fine_side[v] = side[levels[l].map[v]];
    side = std::move(fine_side);
    fm_refine(fine, side, targets_for(fine), opt.refine_passes);
  }
  return side;
}

inline WeightedGraph induced_subgraph(const WeightedGraph& g, const std::vector<Index>& vertices) {
  constexpr Index absent = static_cast<Index>(-1);
  std::vector<Index> local(g.size(), absent);
  for (Index i = 0; i < vertices.size(); ++i) local[vertices[i]] = i;
  WeightedGraph s;
  s.xadj.assign(vertices.size() + 1, 0);
  s.vwgt.reserve(vertices.size());
  for (Index i = 0; i < vertices.size(); ++i) {
    const Index v = vertices[i];
    s.vwgt.push_back(g.vwgt[v]);
    for (Index k = g.xadj[v]; k < g.xadj[v + 1]; ++k) {
      if (local[g.adj[k]] == absent) continue;
      s.adj.push_back(local[g.adj[k]]);
      s.ewgt.push_back(g.ewgt[k]);
    }
    s.xadj[i + 1] = s.adj.size();
  }
  return s;
}

inline void recursive_bisection(const WeightedGraph& g, const std::vector<Index>& ids, Index parts,
                                Index first_part, double ub, const PartitionOptions& opt,
                                std::mt19937_64& rng, std::vector<Index>& part_of) {
  if (parts == 1) {
    for (Index id : ids) part_of[id] = first_part;
    return;
  }
  const Index p0 = parts / 2, p1 = parts - p0;
  std::vector<std::uint8_t> side = multilevel_bisection(
      g, static_cast<double>(p0) / static_cast<double>(parts), ub, opt, rng);

  // Each side needs at least as many vertices as the parts it will hold.
  Index count0 = static_cast<Index>(std::count(side.begin(), side.end(), 0));
  for (Index v = 0; v < g.size() && count0 < p0; ++v) {
    if (side[v] == 1) side[v] = 0, ++count0;
  }
  for (Index v = 0; v < g.size() && g.size() - count0 < p1; ++v) {
    if (side[v] == 0) side[v] = 1, --count0;
  }

  std::vector<Index> local[2], global[2];
  for (Index v = 0; v < g.size(); ++v) {
    local[side[v]].push_back(v);
    global[side[v]].push_back(ids[v]);
  }
  recursive_bisection(induced_subgraph(g, local[0]), global[0], p0, first_part, ub, opt, rng,
                      part_of);
  recursive_bisection(induced_subgraph(g, local[1]), global[1], p1, first_part + p0, ub, opt, rng,
                      part_of);
}

}  // namespace detail

/// Multilevel recursive-bisection vertex partition into `parts` non-empty parts:
/// heavy-edge matching coarsening, greedy growth on the coarsest graph, FM
/// refinement while uncoarsening. Deterministic for a fixed seed.
inline PartitionResult partition_graph(const AdjacencyGraph& g, Index parts, std::uint64_t seed,
                                       const PartitionOptions& opt = {}) {
  if (parts == 0) throw DimensionError("number of parts must be positive");
  if (parts > g.size()) {
    throw DimensionError("cannot split " + std::to_string(g.size()) + " vertices into " +
                         std::to_string(parts) + " parts");
  }
  std::vector<Index> part_of(g.size(), 0);
  if (parts > 1) {
    std::mt19937_64 rng(seed);
    const double depth = std::ceil(std::log2(static_cast<double>(parts)));
    const double ub = std::pow(opt.imbalance, 1.0 / depth);
    std::vector<Index> ids(g.size());
    std::iota(ids.begin(), ids.end(), Index{0});
    detail::recursive_bisection(detail::unit_weighted(g), ids, parts, 0, ub, opt, rng, part_of);
  }
  return classify_partition(g, std::move(part_of), parts, opt.separator);
}

/// Interiors of part 0, 1, ..., p-1, then the separator.
inline Permutation block_bordered_permutation(const PartitionResult& r) {
  std::vector<Index> forward;
  forward.reserve(r.part_of.size());
  for (const auto& part : r.interior) forward.insert(forward.end(), part.begin(), part.end());
  forward.insert(forward.end(), r.interface.begin(), r.interface.end());
  return Permutation(std::move(forward));
}

/// Whitespace-separated part ids, one per vertex (e.g. produced by METIS).
inline std::vector<Index> read_partition_file(const std::string& path, Index n) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open partition file '" + path + "'");
  std::vector<Index> part_of;
  part_of.reserve(n);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    long long id = 0;
    while (ss >> id) {
      if (id < 0) throw FormatError("negative part id", lineno);
      part_of.push_back(static_cast<Index>(id));
    }
    if (!ss.eof()) throw FormatError("non-numeric part id", lineno);
  }
  if (part_of.size() != n) {
    throw FormatError("expected " + std::to_string(n) + " part ids, found " +
                          std::to_string(part_of.size()),
                      lineno);
  }
  return part_of;
}

inline Index count_parts(const std::vector<Index>& part_of) {
  return part_of.empty() ? 0 : *std::max_element(part_of.begin(), part_of.end()) + 1;
}

}  // namespace ames
