#pragma once

// Shared generators and the dense Eigen oracle for the test suites.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ames/ames.hpp"

namespace ames::test {

inline Eigen::MatrixXd dense(const SparseMatrix& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.rows()),
                                            static_cast<Eigen::Index>(a.cols()));
  for (const auto& t : a.triplets()) {
    d(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) += t.value;
  }
  return d;
}

inline Eigen::VectorXd to_eigen(const Vector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Vector from_eigen(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

inline Vector random_vector(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = u(rng);
  return v;
}

/// Random nonsymmetric pattern with about `per_row` off-diagonals per row.
/// With `dominant`, the diagonal exceeds both the row and column absolute
/// sums, so every principal submatrix and every Schur complement is
/// nonsingular and elimination without pivoting is safe.
inline SparseMatrix random_sparse(Index n, double per_row, std::uint64_t seed,
                                  bool dominant = true) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_int_distribution<Index> col(0, n - 1);
  std::vector<Triplet> t;
  Vector row_sum(n, 0.0), col_sum(n, 0.0);
  const auto off = static_cast<Index>(per_row * static_cast<double>(n));
  for (Index k = 0; k < off; ++k) {
    const Index i = col(rng), j = col(rng);
    if (i == j) continue;
    const double v = val(rng);
    t.push_back({i, j, v});
    row_sum[i] += std::abs(v);
    col_sum[j] += std::abs(v);
  }
  for (Index i = 0; i < n; ++i) {
    const double d = dominant ? row_sum[i] + col_sum[i] + 0.5 + std::abs(val(rng))
                              : (std::abs(val(rng)) + 0.1);
    t.push_back({i, i, val(rng) < 0.0 && dominant ? -d : d});
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

/// Random sparse matrix that needs pivoting: small diagonal, guaranteed
/// nonsingular by a random permutation of a dominant matrix.
inline SparseMatrix random_needs_pivoting(Index n, double per_row, std::uint64_t seed) {
  SparseMatrix base = random_sparse(n, per_row, seed);
  std::mt19937_64 rng(seed ^ 0xabcdefULL);
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  auto t = base.triplets();
  for (auto& e : t) e.row = perm[e.row];
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

/// Nonsymmetric 5-point convection-diffusion operator on an m x m grid.
inline SparseMatrix convection_diffusion(Index m, double wind = 20.0) {
  const double h = 1.0 / static_cast<double>(m + 1);
  const double lo = -1.0 - wind * h / 2.0, hi = -1.0 + wind * h / 2.0;
  std::vector<Triplet> t;
  auto id = [m](Index i, Index j) { return i * m + j; };
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      const Index r = id(i, j);
      t.push_back({r, r, 4.0});
      if (j > 0) t.push_back({r, id(i, j - 1), lo});
      if (j + 1 < m) t.push_back({r, id(i, j + 1), hi});
      if (i > 0) t.push_back({r, id(i - 1, j), lo});
      if (i + 1 < m) t.push_back({r, id(i + 1, j), hi});
    }
  }
  return SparseMatrix::from_triplets(m * m, m * m, std::move(t));
}

/// The 5x5 two-subdomain example (0-based): parts {0,1} and {2}, separator {3,4}.
inline SparseMatrix two_part_matrix() {
  std::vector<Triplet> t = {
      {0, 0, 5.0}, {0, 1, 1.0}, {0, 3, 0.5}, {0, 4, -1.0},
      {1, 0, 2.0}, {1, 1, 6.0},
      {2, 2, 7.0}, {2, 3, 1.5}, {2, 4, -0.5},
      {3, 0, -1.0}, {3, 2, 2.0}, {3, 3, 8.0},
      {4, 0, 0.75}, {4, 2, 1.0}, {4, 4, 9.0},
  };
  return SparseMatrix::from_triplets(5, 5, std::move(t));
}

inline PartitionResult two_part_partition() {
  PartitionResult r;
  r.parts = 2;
  r.part_of = {0, 0, 1, 0, 1};
  r.interior = {{0, 1}, {2}};
  r.interface = {3, 4};
  return r;
}

/// The 11x11 matrix obtained from two_part_matrix() by one level of
/// overlapping. Block order: part 0 copies of {0,1,3,4}, part 1 copies of
/// {2,3,4}, separator copies of {3,4,0,2}. Derived by hand from the row
/// placement rule; rows 2 and 3 keep their coupling to vertex 2 through the
/// separator copy at column 10.
inline SparseMatrix two_part_overlapped() {
  std::vector<Triplet> t = {
      {0, 0, 5.0}, {0, 1, 1.0}, {0, 2, 0.5}, {0, 3, -1.0},
      {1, 0, 2.0}, {1, 1, 6.0},
      {2, 0, -1.0}, {2, 2, 8.0}, {2, 10, 2.0},
      {3, 0, 0.75}, {3, 3, 9.0}, {3, 10, 1.0},
      {4, 4, 7.0}, {4, 5, 1.5}, {4, 6, -0.5},
      {5, 4, 2.0}, {5, 5, 8.0}, {5, 9, -1.0},
      {6, 4, 1.0}, {6, 6, 9.0}, {6, 9, 0.75},
      {7, 7, 8.0}, {7, 9, -1.0}, {7, 10, 2.0},
      {8, 8, 9.0}, {8, 9, 0.75}, {8, 10, 1.0},
      {9, 1, 1.0}, {9, 7, 0.5}, {9, 8, -1.0}, {9, 9, 5.0},
      {10, 7, 1.5}, {10, 8, -0.5}, {10, 10, 7.0},
  };
  return SparseMatrix::from_triplets(11, 11, std::move(t));
}

/// Random partition of the symmetrized pattern of `a` into `parts` parts,
/// with the separator chosen by the given rule.
inline PartitionResult random_partition(const SparseMatrix& a, Index parts, std::mt19937_64& rng,
                                        SeparatorRule rule = SeparatorRule::VertexCover) {
  std::uniform_int_distribution<Index> pick(0, parts - 1);
  std::vector<Index> part_of(a.rows());
  for (Index& v : part_of) v = pick(rng);
  return classify_partition(build_adjacency(a, true), part_of, parts, rule);
}

/// Row-bijection check: every overlapped row has exactly the entries of its
/// original row, each original column reached through exactly one copy.
/// Returns an empty string on success, otherwise the first violation.
inline std::string row_bijection_violation(const SparseMatrix& a, const OverlappedSystem& ov) {
  const SparseMatrix csr = a.with_layout(Layout::Row);
  const SparseMatrix at = ov.matrix.with_layout(Layout::Row);
  const auto& orig = ov.map.original;
  for (Index c = 0; c < at.rows(); ++c) {
    const Index u = orig[c];
    auto oi = csr.line_indices(u);
    auto ti = at.line_indices(c);
    auto tv = at.line_values(c);
    if (oi.size() != ti.size()) {
      return "row " + std::to_string(c) + ": " + std::to_string(ti.size()) + " entries, original row " +
             std::to_string(u) + " has " + std::to_string(oi.size());
    }
    std::vector<Index> images;
    for (Index k = 0; k < ti.size(); ++k) {
      const Index v = orig[ti[k]];
      if (csr.at(u, v) != tv[k]) return "row " + std::to_string(c) + ": value mismatch";
      images.push_back(v);
    }
    std::sort(images.begin(), images.end());
    if (std::adjacent_find(images.begin(), images.end()) != images.end()) {
      return "row " + std::to_string(c) + ": original column reached twice";
    }
    if (!std::equal(images.begin(), images.end(), oi.begin())) {
      return "row " + std::to_string(c) + ": column images differ";
    }
  }
  return {};
}

inline double rel_diff(const Vector& a, const Vector& b) {
  double num = 0.0, den = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

inline FactorizeConfig exact_config() {
  FactorizeConfig f;
  f.local_kind = LocalKind::ExactLu;
  return f;
}

}  // namespace ames::test
