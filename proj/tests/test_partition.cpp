#include <gtest/gtest.h>

#include <fstream>

#include "support.hpp"

using namespace ames;

namespace {

AdjacencyGraph path_graph(Index n) {
  std::vector<Triplet> t;
  for (Index i = 0; i + 1 < n; ++i) t.push_back({i, i + 1, 1.0});
  for (Index i = 0; i < n; ++i) t.push_back({i, i, 2.0});
  return build_adjacency(SparseMatrix::from_triplets(n, n, t), true);
}

void expect_symmetric_no_loops(const AdjacencyGraph& g) {
  for (Index u = 0; u < g.size(); ++u) {
    for (Index v : g.neighbors(u)) {
      EXPECT_NE(u, v);
      EXPECT_TRUE(g.has_edge(v, u));
    }
  }
}

}  // namespace

TEST(Adjacency, DiagonalMatrixHasNoEdges) {
  const AdjacencyGraph g = build_adjacency(SparseMatrix::identity(6), false);
  EXPECT_EQ(g.size(), 6u);
  EXPECT_EQ(g.num_edges(), 0u);
}

TEST(Adjacency, SingleEntryIsSymmetrized) {
  const auto a = SparseMatrix::from_triplets(4, 4, {{1, 3, 2.0}});
  const AdjacencyGraph g = build_adjacency(a, true);
  EXPECT_TRUE(g.has_edge(1, 3));
  EXPECT_TRUE(g.has_edge(3, 1));
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_THROW(build_adjacency(a, false), DimensionError);
}

TEST(Adjacency, TwoPartEdges) {
  const AdjacencyGraph g = build_adjacency(test::two_part_matrix(), true);
  // 0-based version of {1,2},{1,4},{1,5},{3,4},{3,5}
  const std::vector<std::pair<Index, Index>> edges = {{0, 1}, {0, 3}, {0, 4}, {2, 3}, {2, 4}};
  EXPECT_EQ(g.num_edges(), edges.size());
  for (auto [u, v] : edges) EXPECT_TRUE(g.has_edge(u, v));
  expect_symmetric_no_loops(g);
}

TEST(Adjacency, RejectsNonSquare) {
  EXPECT_THROW(build_adjacency(SparseMatrix::zero(2, 3), true), DimensionError);
}

TEST(Partition, SinglePartHasNoInterface) {
  const AdjacencyGraph g = build_adjacency(test::random_sparse(30, 3.0, 2), true);
  const PartitionResult r = partition_graph(g, 1, 0);
  EXPECT_TRUE(r.interface.empty());
  EXPECT_EQ(r.interior[0].size(), 30u);
}

TEST(Partition, PathGraphMatchesBruteForceMinimumCut) {
  // Balanced 2-partitions of 0-1-2-3: {0,1}|{2,3} is the unique cut-1 split.
  const AdjacencyGraph g = path_graph(4);
  PartitionOptions opt;
  opt.separator = SeparatorRule::BothSides;
  const PartitionResult r = partition_graph(g, 2, 0, opt);
  EXPECT_EQ(r.part_of[0], r.part_of[1]);
  EXPECT_EQ(r.part_of[2], r.part_of[3]);
  EXPECT_NE(r.part_of[1], r.part_of[2]);
  EXPECT_EQ(r.interface, (std::vector<Index>{1, 2}));

  const PartitionResult cover = partition_graph(g, 2, 0);
  EXPECT_EQ(cover.interface.size(), 1u);
  EXPECT_TRUE(is_valid_partition(g, cover));
}

TEST(Partition, TwoPartClassificationIsValid) {
  const AdjacencyGraph g = build_adjacency(test::two_part_matrix(), true);
  PartitionResult r;
  r.parts = 2;
  r.part_of = {0, 0, 1, 0, 1};
  r.interior = {{0, 1}, {2}};
  r.interface = {3, 4};
  EXPECT_TRUE(is_valid_partition(g, r));
  // Moving vertex 3 into part 0's interior would couple it with part 1.
  PartitionResult bad = r;
  bad.interior[0].push_back(3);
  bad.interface = {4};
  EXPECT_FALSE(is_valid_partition(g, bad));
}

TEST(Partition, TwoPartPartitionerFindsValidSeparator) {
  const AdjacencyGraph g = build_adjacency(test::two_part_matrix(), true);
  const PartitionResult r = partition_graph(g, 2, 0);
  EXPECT_TRUE(is_valid_partition(g, r));
  EXPECT_LE(r.interface.size(), 2u);
}

TEST(Partition, RandomGraphsSatisfyInteriorInvariantExhaustively) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index n = 50 + 10 * seed;
    const AdjacencyGraph g = build_adjacency(test::random_sparse(n, 2.0, seed), true);
    for (Index p : {2u, 3u, 4u, 7u}) {
      for (SeparatorRule rule : {SeparatorRule::VertexCover, SeparatorRule::BothSides}) {
        PartitionOptions opt;
        opt.separator = rule;
        const PartitionResult r = partition_graph(g, p, seed, opt);
        ASSERT_TRUE(is_valid_partition(g, r)) << "seed " << seed << " p " << p;
        for (Index i = 0; i < p; ++i) {
          for (Index u : r.interior[i]) {
            for (Index v : g.neighbors(u)) {
              const bool same_interior = r.part_of[v] == i &&
                  std::find(r.interface.begin(), r.interface.end(), v) == r.interface.end();
              const bool on_separator =
                  std::find(r.interface.begin(), r.interface.end(), v) != r.interface.end();
              EXPECT_TRUE(same_interior || on_separator);
              if (rule == SeparatorRule::BothSides) { EXPECT_EQ(r.part_of[v], i); }
            }
          }
        }
      }
    }
  }
}

TEST(Partition, PartsAreNonEmptyAndBalanced) {
  const SparseMatrix a = test::convection_diffusion(30);
  const AdjacencyGraph g = build_adjacency(a, true);
  for (Index p : {2u, 4u, 8u}) {
    const PartitionResult r = partition_graph(g, p, 1);
    std::vector<Index> sizes(p, 0);
    for (Index v : r.part_of) ++sizes[v];
    const double target = static_cast<double>(g.size()) / static_cast<double>(p);
    for (Index s : sizes) {
      EXPECT_GT(s, 0u);
      EXPECT_LE(static_cast<double>(s), 1.2 * target + 1.0) << "p=" << p;
    }
  }
}

TEST(Partition, DeterministicForFixedSeed) {
  const AdjacencyGraph g = build_adjacency(test::random_sparse(300, 3.0, 4), true);
  const PartitionResult a = partition_graph(g, 4, 99);
  const PartitionResult b = partition_graph(g, 4, 99);
  EXPECT_EQ(a.part_of, b.part_of);
  EXPECT_EQ(a.interface, b.interface);
  EXPECT_EQ(a.interior, b.interior);
}

TEST(Partition, RejectsTooManyParts) {
  const AdjacencyGraph g = path_graph(3);
  EXPECT_THROW(partition_graph(g, 4, 0), DimensionError);
  EXPECT_THROW(partition_graph(g, 0, 0), DimensionError);
}

TEST(BlockBordered, SinglePartIsIdentity) {
  const AdjacencyGraph g = path_graph(5);
  EXPECT_TRUE(block_bordered_permutation(partition_graph(g, 1, 0)).is_identity());
}

TEST(BlockBordered, TwoPartOrderingIsAlreadyArrowShaped) {
  PartitionResult r;
  r.parts = 2;
  r.part_of = {0, 0, 1, 0, 1};
  r.interior = {{0, 1}, {2}};
  r.interface = {3, 4};
  const Permutation p = block_bordered_permutation(r);
  EXPECT_TRUE(p.is_identity());
  const SparseMatrix pa = permute(test::two_part_matrix(), p);
  EXPECT_EQ(pa.at(0, 2), 0.0);
  EXPECT_EQ(pa.at(1, 2), 0.0);
  EXPECT_EQ(pa.at(2, 0), 0.0);
  EXPECT_EQ(pa.at(2, 1), 0.0);
}

TEST(BlockBordered, NoCouplingBetweenDistinctInteriors) {
  const SparseMatrix a = test::random_sparse(400, 2.5, 77);
  const PartitionResult r = partition_graph(build_adjacency(a, true), 4, 3);
  const SparseMatrix pa = permute(a, block_bordered_permutation(r));
  std::vector<Index> range_of(a.rows(), r.parts);  // parts = separator marker
  Index pos = 0;
  for (Index i = 0; i < r.parts; ++i) {
    for (Index k = 0; k < r.interior[i].size(); ++k) range_of[pos++] = i;
  }
  for (const auto& t : pa.triplets()) {
    const Index ri = range_of[t.row], ci = range_of[t.col];
    if (ri < r.parts && ci < r.parts) { EXPECT_EQ(ri, ci) << t.row << "," << t.col; }
  }
}

TEST(PartitionFile, ReadsWhitespaceSeparatedIds) {
  const std::string path = ::testing::TempDir() + "parts.txt";
  {
    std::ofstream out(path);
    out << "0 0\n1\n1 0\n";
  }
  const auto ids = read_partition_file(path, 5);
  EXPECT_EQ(ids, (std::vector<Index>{0, 0, 1, 1, 0}));
  EXPECT_EQ(count_parts(ids), 2u);
  EXPECT_THROW(read_partition_file(path, 4), FormatError);
}
