#include <gtest/gtest.h>

#include "support.hpp"

using namespace ames;

namespace {

// Dense matrix of the linear map x -> apply(x).
template <class F>
Eigen::MatrixXd operator_matrix(Index n, const F& apply) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Vector e(n, 0.0), y(n);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    apply(e, y);
    m.col(static_cast<Eigen::Index>(j)) = test::to_eigen(y);
    e[j] = 0.0;
  }
  return m;
}

double residual_norm(const SparseMatrix& b, const LocalFactor& f) {
  const Eigen::MatrixXd bd = test::dense(b);
  const Eigen::MatrixXd m = operator_matrix(b.rows(), [&](const Vector& x, Vector& y) { f.apply(x, y); });
  return (Eigen::MatrixXd::Identity(bd.rows(), bd.cols()) - m * bd).norm();
}

SparseMatrix spd_tridiagonal(Index n) {
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0 + 0.01 * static_cast<double>(i)});
    if (i + 1 < n) {
      t.push_back({i, i + 1, -1.0});
      t.push_back({i + 1, i, -1.0});
    }
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

double condition_number(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

const LocalKind all_kinds[] = {LocalKind::IluThreshold, LocalKind::Fsai, LocalKind::Ainv,
                               LocalKind::ExactLu};

}  // namespace

TEST(Local, IdentityBlockGivesIdentityFactors) {
  const SparseMatrix id = SparseMatrix::identity(7);
  for (LocalKind k : all_kinds) {
    const LocalFactor f = factorize_local(id, {k, {0.01, {}}, 1});
    std::mt19937_64 rng(1);
    const Vector x = test::random_vector(7, rng);
    const Vector y = f.apply(x);
    for (Index i = 0; i < 7; ++i) EXPECT_DOUBLE_EQ(y[i], x[i]) << to_string(k);
  }
}

TEST(Local, KindNamesRoundTrip) {
  for (LocalKind k : all_kinds) EXPECT_EQ(parse_local_kind(to_string(k)), k);
  EXPECT_THROW(parse_local_kind("cholesky"), Error);
}

TEST(Ilu, ZeroDropReproducesMatrix) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SparseMatrix b = test::random_sparse(60, 3.0, seed);
    const IluFactors f = ilu_factorize(b, {0.0, {}});
    EXPECT_EQ(f.shifts(), 0u);
    const Eigen::MatrixXd lu = test::dense(f.lower()) * test::dense(f.upper());
    EXPECT_LE((lu - test::dense(b)).norm() / test::dense(b).norm(), 1e-12);
  }
}

TEST(Ilu, FactorShapes) {
  const IluFactors f = ilu_factorize(test::random_sparse(40, 3.0, 9), {0.01, {}});
  for (const auto& t : f.lower().triplets()) {
    EXPECT_LE(t.col, t.row);
    if (t.col == t.row) { EXPECT_EQ(t.value, 1.0); }
  }
  for (const auto& t : f.upper().triplets()) EXPECT_GE(t.col, t.row);
}

TEST(Ilu, ResidualShrinksWithDroptol) {
  const SparseMatrix b = test::convection_diffusion(12);
  double previous = std::numeric_limits<double>::infinity();
  for (double tol : {0.1, 0.01, 0.001}) {
    const double r = residual_norm(b, factorize_local(b, {LocalKind::IluThreshold, {tol, {}}, 1}));
    EXPECT_LE(r, previous) << "droptol " << tol;
    previous = r;
  }
}

TEST(Ilu, FillCapLimitsRows) {
  const SparseMatrix b = test::random_sparse(80, 5.0, 4);
  const IluFactors f = ilu_factorize(b, {0.0, Index{3}});
  for (Index i = 0; i < b.rows(); ++i) {
    EXPECT_LE(f.lower().line_indices(i).size(), 4u);  // cap + unit diagonal
    EXPECT_LE(f.upper().line_indices(i).size(), 4u);  // cap + pivot
  }
}

TEST(Fsai, DiagonalBlockGivesInverseDiagonal) {
  const SparseMatrix d = SparseMatrix::from_triplets(4, 4, {{0, 0, 2.0}, {1, 1, -4.0}, {2, 2, 0.5}, {3, 3, 8.0}});
  const FsaiFactors f = fsai_factorize(d, 1);
  EXPECT_EQ(f.fallbacks(), 0u);
  EXPECT_TRUE(f.m_upper() == SparseMatrix::identity(4));
  for (Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(f.m_lower().at(i, i), 1.0 / d.at(i, i));
  EXPECT_EQ(f.m_lower().nnz(), 4u);
}

TEST(Fsai, LowerFactorHasUnitDiagonalProduct) {
  const SparseMatrix b = test::random_sparse(50, 3.0, 6);
  const FsaiFactors f = fsai_factorize(b, 1);
  const Eigen::MatrixXd mb = test::dense(f.m_lower()) * test::dense(b);
  for (Eigen::Index i = 0; i < mb.rows(); ++i) EXPECT_NEAR(mb(i, i), 1.0, 1e-10);
  for (const auto& t : f.m_upper().triplets()) {
    EXPECT_GE(t.col, t.row);
    if (t.col == t.row) { EXPECT_DOUBLE_EQ(t.value, 1.0); }
  }
}

TEST(Fsai, PatternStaysInsidePrescribedSet) {
  const SparseMatrix b = test::random_sparse(60, 2.0, 8);
  for (int power : {1, 2}) {
    const FsaiFactors f = fsai_factorize(b, power);
    const auto pattern = detail::symmetric_pattern_power(b, power);
    for (const auto& t : f.m_lower().triplets()) {
      EXPECT_LE(t.col, t.row);
      EXPECT_TRUE(std::binary_search(pattern[t.row].begin(), pattern[t.row].end(), t.col));
    }
    for (const auto& t : f.m_upper().triplets()) {
      EXPECT_GE(t.col, t.row);
      EXPECT_TRUE(std::binary_search(pattern[t.col].begin(), pattern[t.col].end(), t.row));
    }
  }
}

TEST(Fsai, ImprovesConditioningOfSpdTridiagonal) {
  const SparseMatrix b = spd_tridiagonal(60);
  const FsaiFactors f = fsai_factorize(b, 1);
  const Eigen::MatrixXd bd = test::dense(b);
  const Eigen::MatrixXd prec = test::dense(f.m_upper()) * test::dense(f.m_lower()) * bd;
  EXPECT_LT(condition_number(prec), condition_number(bd));
}

TEST(Fsai, SecondPowerBeatsFirst) {
  const SparseMatrix b = test::convection_diffusion(10);
  const double r1 = residual_norm(b, factorize_local(b, {LocalKind::Fsai, {}, 1}));
  const double r2 = residual_norm(b, factorize_local(b, {LocalKind::Fsai, {}, 2}));
  EXPECT_LT(r2, r1);
}

TEST(Ainv, ZeroDropGivesInverse) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SparseMatrix b = test::random_sparse(50, 3.0, 20 + seed);
    const AinvFactors f = ainv_factorize(b, {0.0, {}});
    const Eigen::MatrixXd inv = test::dense(b).inverse();
    const Eigen::MatrixXd m = operator_matrix(b.rows(), [&](const Vector& x, Vector& y) { f.apply(x, y); });
    EXPECT_LE((m - inv).norm() / inv.norm(), 1e-8);
  }
}

TEST(Ainv, FactorsAreUnitUpperTriangular) {
  const AinvFactors f = ainv_factorize(test::random_sparse(40, 3.0, 2), {0.05, {}});
  for (const SparseMatrix* m : {&f.z(), &f.w()}) {
    for (const auto& t : m->triplets()) {
      EXPECT_LE(t.row, t.col);
      if (t.row == t.col) { EXPECT_DOUBLE_EQ(t.value, 1.0); }
    }
  }
}

TEST(Ainv, ZeroLeadingPivotBreaksDown) {
  // leading 2x2 block is singular, so the second pivot vanishes
  const SparseMatrix b = SparseMatrix::from_triplets(
      3, 3, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}});
  try {
    (void)ainv_factorize(b, {0.0, {}});
    FAIL() << "expected breakdown";
  } catch (const BreakdownError& e) {
    EXPECT_EQ(e.step(), 1u);
  }
}

TEST(ExactLu, SolvesSystemsNeedingPivoting) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SparseMatrix b = test::random_needs_pivoting(80, 3.0, seed);
    const SparseLu lu(b);
    std::mt19937_64 rng(seed);
    const Vector rhs = test::random_vector(80, rng);
    Vector x(80);
    lu.apply(rhs, x);
    const Vector r = spmv(b, x);
    double err = 0.0;
    for (Index i = 0; i < 80; ++i) err = std::max(err, std::abs(r[i] - rhs[i]));
    EXPECT_LE(err, 1e-12 * std::max(1.0, b.max_abs()));
  }
}

TEST(ExactLu, RejectsSingularMatrix) {
  const SparseMatrix b = SparseMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {1, 0, 2.0}, {2, 2, 1.0}});
  EXPECT_THROW(SparseLu lu(b), FactorizationError);
}

TEST(Local, AllKindsAgreeAtZeroDrop) {
  const SparseMatrix b = test::random_sparse(15, 3.0, 31);
  const Eigen::MatrixXd inv = test::dense(b).inverse();
  // FSAI with a pattern covering the whole matrix is exact only when the
  // pattern closure is dense; powering a 15x15 random pattern usually is.
  for (LocalKind k : {LocalKind::IluThreshold, LocalKind::Ainv, LocalKind::ExactLu}) {
    const LocalFactor f = factorize_local(b, {k, {0.0, {}}, 1});
    const Eigen::MatrixXd m = operator_matrix(15, [&](const Vector& x, Vector& y) { f.apply(x, y); });
    EXPECT_LE((m - inv).norm() / inv.norm(), 1e-6) << to_string(k);
  }
}

TEST(Local, DenseBlocksInvertExactlyUpTo200) {
  for (Index n : {1u, 2u, 10u, 50u, 200u}) {
    std::vector<Triplet> t;
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) t.push_back({i, j, u(rng) + (i == j ? 3.0 * static_cast<double>(n) : 0.0)});
    }
    const SparseMatrix b = SparseMatrix::from_triplets(n, n, std::move(t));
    const Eigen::MatrixXd inv = test::dense(b).inverse();
    for (LocalKind k : {LocalKind::IluThreshold, LocalKind::Fsai, LocalKind::Ainv, LocalKind::ExactLu}) {
      const LocalFactor f = factorize_local(b, {k, {0.0, {}}, 1});
      const Eigen::MatrixXd m = operator_matrix(n, [&](const Vector& x, Vector& y) { f.apply(x, y); });
      EXPECT_LE((m - inv).norm() / inv.norm(), 1e-8) << to_string(k) << " n=" << n;
    }
  }
}

TEST(Local, NnzCountsMatchStorage) {
  const SparseMatrix b = test::random_sparse(40, 3.0, 12);
  const LocalFactor ilu = factorize_local(b, {LocalKind::IluThreshold, {0.01, {}}, 1});
  const auto& ilu_f = std::get<IluFactors>(ilu.storage());
  EXPECT_EQ(ilu.nnz_factors(), ilu_f.lower().nnz() + ilu_f.upper().nnz() - 40);
  const LocalFactor ainv = factorize_local(b, {LocalKind::Ainv, {0.01, {}}, 1});
  const auto& ainv_f = std::get<AinvFactors>(ainv.storage());
  EXPECT_EQ(ainv.nnz_factors(), ainv_f.z().nnz() + ainv_f.w().nnz() - 40);
}
