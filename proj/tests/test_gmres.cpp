#include <gtest/gtest.h>

#include "support.hpp"

using namespace ames;

namespace {

SparseMatrix diag_1_to(Index n) {
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) t.push_back({i, i, static_cast<double>(i + 1)});
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

void expect_monotone_within_cycles(const GmresReport& r) {
  const auto& h = r.residual_history;
  for (Index c = 0; c < r.cycle_starts.size(); ++c) {
    const Index begin = r.cycle_starts[c];
    const Index end = c + 1 < r.cycle_starts.size() ? r.cycle_starts[c + 1] : h.size();
    for (Index k = begin + 1; k < end; ++k) EXPECT_LE(h[k], h[k - 1] * (1.0 + 1e-12)) << "entry " << k;
  }
}

double true_relative_residual(const SparseMatrix& a, const Vector& x, const Vector& b) {
  const Vector ax = spmv(a, x);
  Vector r(b.size());
  for (Index i = 0; i < b.size(); ++i) r[i] = b[i] - ax[i];
  return norm2(r) / norm2(b);
}

}  // namespace

TEST(Gmres, IdentityConvergesInOneIteration) {
  const SparseMatrix a = SparseMatrix::identity(25);
  const Vector b = make_rhs(a);
  const GmresResult r = gmres(matrix_operator(a), b, nullptr, {});
  EXPECT_TRUE(r.report.converged);
  EXPECT_EQ(r.report.iterations, 1u);
  for (double v : r.x) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Gmres, DiagonalConvergesWithinDimension) {
  const SparseMatrix a = diag_1_to(10);
  const Vector b = make_rhs(a);
  const GmresResult r = gmres(matrix_operator(a), b, nullptr, {});
  EXPECT_TRUE(r.report.converged);
  EXPECT_LE(r.report.iterations, 10u);
  EXPECT_LE(r.report.final_relative_residual, 1e-12);
  expect_monotone_within_cycles(r.report);
}

TEST(Gmres, ExactPreconditionerConvergesImmediately) {
  const SparseMatrix a = test::random_sparse(150, 3.0, 2);
  const SparseLu lu(a);
  const LinearOperator m = [&](std::span<const double> x, std::span<double> y) { lu.apply(x, y); };
  const Vector b = make_rhs(a);
  for (PrecondSide side : {PrecondSide::Right, PrecondSide::Left}) {
    GmresConfig cfg;
    cfg.side = side;
    const GmresResult r = gmres(matrix_operator(a), b, &m, cfg);
    EXPECT_TRUE(r.report.converged);
    EXPECT_LE(r.report.iterations, 2u);
    EXPECT_LE(true_relative_residual(a, r.x, b), 1e-12);
  }
}

TEST(Gmres, ConvergenceIsCertifiedByTrueResidual) {
  const SparseMatrix a = test::convection_diffusion(20);
  const Vector b = make_rhs(a);
  GmresConfig cfg;
  cfg.restart = 15;
  cfg.rtol = 1e-8;
  const GmresResult r = gmres(matrix_operator(a), b, nullptr, cfg);
  ASSERT_TRUE(r.report.converged);
  EXPECT_GT(r.report.cycle_starts.size(), 1u);
  const double actual = true_relative_residual(a, r.x, b);
  EXPECT_LE(actual, 1e-8);
  EXPECT_NEAR(actual, r.report.final_relative_residual, 1e-12);
  EXPECT_DOUBLE_EQ(r.report.residual_history.back(), r.report.final_relative_residual);
  expect_monotone_within_cycles(r.report);
}

TEST(Gmres, MatvecBudgetIsRespected) {
  const SparseMatrix a = test::convection_diffusion(30, 200.0);
  const Vector b = make_rhs(a);
  Index calls = 0;
  const LinearOperator op = [&](std::span<const double> x, std::span<double> y) {
    ++calls;
    spmv(a, x, y);
  };
  GmresConfig cfg;
  cfg.restart = 10;
  cfg.max_matvecs = 37;
  const GmresResult r = gmres(op, b, nullptr, cfg);
  EXPECT_FALSE(r.report.converged);
  EXPECT_LE(calls, 37u);
  EXPECT_EQ(calls, r.report.matvecs);
  EXPECT_LE(true_relative_residual(a, r.x, b), 1.0);
}

TEST(Gmres, LeftAndRightAgreeOnSolution) {
  const SparseMatrix a = test::random_sparse(100, 3.0, 5);
  const IluFactors ilu = ilu_factorize(a, {0.05, {}});
  const LinearOperator m = [&](std::span<const double> x, std::span<double> y) { ilu.apply(x, y); };
  const Vector b = make_rhs(a);
  GmresConfig left;
  left.side = PrecondSide::Left;
  const GmresResult rl = gmres(matrix_operator(a), b, &m, left);
  const GmresResult rr = gmres(matrix_operator(a), b, &m, {});
  ASSERT_TRUE(rl.report.converged);
  ASSERT_TRUE(rr.report.converged);
  EXPECT_LE(test::rel_diff(rl.x, rr.x), 1e-9);
  expect_monotone_within_cycles(rl.report);
  expect_monotone_within_cycles(rr.report);
}

TEST(Gmres, InitialGuessIsUsed) {
  const SparseMatrix a = diag_1_to(8);
  const Vector b = make_rhs(a);
  const Vector x0(8, 1.0);
  const GmresResult r = gmres(matrix_operator(a), b, nullptr, {}, x0);
  EXPECT_TRUE(r.report.converged);
  EXPECT_EQ(r.report.iterations, 0u);
  EXPECT_EQ(r.x, x0);
}

TEST(Gmres, NonFiniteInputThrows) {
  const SparseMatrix a = SparseMatrix::identity(4);
  Vector b(4, 1.0);
  b[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(gmres(matrix_operator(a), b, nullptr, {}), NumericalError);

  const LinearOperator bad = [](std::span<const double>, std::span<double> y) {
    std::fill(y.begin(), y.end(), std::numeric_limits<double>::infinity());
  };
  EXPECT_THROW(gmres(matrix_operator(a), Vector(4, 1.0), &bad, {}), NumericalError);
}

TEST(Gmres, RejectsBadConfig) {
  const SparseMatrix a = SparseMatrix::identity(3);
  GmresConfig cfg;
  cfg.restart = 0;
  EXPECT_THROW(gmres(matrix_operator(a), Vector(3, 1.0), nullptr, cfg), Error);
  cfg = {};
  cfg.rtol = 0.0;
  EXPECT_THROW(gmres(matrix_operator(a), Vector(3, 1.0), nullptr, cfg), Error);
  cfg = {};
  cfg.max_matvecs = 1;
  EXPECT_THROW(gmres(matrix_operator(a), Vector(3, 1.0), nullptr, cfg), Error);
}

TEST(Gmres, DefaultsMatchHarnessProtocol) {
  const GmresConfig cfg;
  EXPECT_EQ(cfg.restart, 500u);
  EXPECT_EQ(cfg.max_matvecs, 5000u);
  EXPECT_EQ(cfg.rtol, 1e-12);
  EXPECT_EQ(cfg.side, PrecondSide::Right);
}

TEST(Gmres, MakeRhsIsRowSums) {
  const SparseMatrix a = test::two_part_matrix();
  EXPECT_EQ(make_rhs(a), (Vector{5.5, 8.0, 8.0, 9.0, 10.75}));
}

TEST(Gmres, ZeroRhsReturnsZero) {
  const SparseMatrix a = diag_1_to(5);
  const GmresResult r = gmres(matrix_operator(a), Vector(5, 0.0), nullptr, {});
  EXPECT_TRUE(r.report.converged);
  EXPECT_EQ(r.x, Vector(5, 0.0));
}
