#include <gtest/gtest.h>

#include <cmath>

#include "hslab/errors.hpp"
#include "hslab/numerics.hpp"
#include "test_util.hpp"

using namespace hslab;
using hslab::test::random_spd;
using hslab::test::random_vector;
using hslab::test::to_sparse;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no hslab::Error thrown";
  return ErrorCode::InvalidArgument;
}

double flat(double s) { return s == 0.0 ? 0.0 : std::exp(-1.0 / (s * s)); }

}  // namespace

TEST(DenseSym, FromRowsSymmetrizes) {
  const std::vector<double> rows{1, 2, 4, 3};
  const auto m = DenseSym::from_rows(2, rows);
  EXPECT_EQ(m(0, 1), 3.0);
  EXPECT_EQ(m(1, 0), 3.0);
  EXPECT_EQ(code_of([] { DenseSym::from_rows(2, std::vector<double>{1, 2, 3}); }), ErrorCode::DimensionMismatch);
}

TEST(DenseSym, SetWritesBothTriangles) {
  DenseSym m(3);
  m.set(0, 2, 5.0);
  m.add(2, 0, 1.0);
  EXPECT_EQ(m(0, 2), 6.0);
  EXPECT_EQ(m(2, 0), 6.0);
}

TEST(Factor, DiagonalCholesky) {
  const auto f = factor_spd(to_sparse(DenseSym::diagonal(std::vector<double>{4, 9})));
  const auto d = f.factor_diagonal();
  EXPECT_DOUBLE_EQ(d[0], 2.0);
  EXPECT_DOUBLE_EQ(d[1], 3.0);
}

TEST(Factor, IdentityFactorIsIdentity) {
  const auto f = factor_spd(to_sparse(DenseSym::identity(5)));
  for (double d : f.factor_diagonal()) EXPECT_EQ(d, 1.0);
  EXPECT_EQ(f.envelope_size(), 5u);
}

TEST(Factor, IndefiniteRejected) {
  const auto m = DenseSym::from_rows(2, std::vector<double>{1, 2, 2, 1});
  EXPECT_EQ(code_of([&] { factor_spd(to_sparse(m)); }), ErrorCode::NotPositiveDefinite);
}

TEST(Factor, SolveExamples) {
  const auto id = factor_spd(to_sparse(DenseSym::identity(3)));
  EXPECT_EQ(solve(id, std::vector<double>{1, 2, 3}), (Vector{1, 2, 3}));
  const auto d = factor_spd(to_sparse(DenseSym::diagonal(std::vector<double>{2, 4})));
  const auto x = solve(d, std::vector<double>{2, 4});
  EXPECT_DOUBLE_EQ(x[0], 1.0);
  EXPECT_DOUBLE_EQ(x[1], 1.0);
  EXPECT_EQ(code_of([&] { solve(d, std::vector<double>{1, 2, 3}); }), ErrorCode::DimensionMismatch);
}

TEST(Factor, ConstructedConsistencyRecoversOnes) {
  const auto m = random_spd(5, 11);
  const Vector ones(5, 1.0);
  const auto x = solve(factor_spd(to_sparse(m)), m.multiply(ones));
  for (double v : x) EXPECT_NEAR(v, 1.0, 1e-13);
}

TEST(Factor, RandomSpdResidualProperty) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t n = 3 + seed % 17;
    const auto m = random_spd(n, seed);
    const auto f = factor_spd(to_sparse(m));
    const auto b = random_vector(n, 1000 + seed);
    const auto x = f.solve(b);
    auto r = m.multiply(x);
    for (std::size_t i = 0; i < n; ++i) r[i] -= b[i];
    EXPECT_LE(norm2(r), 1e-12 * norm2(b)) << "seed " << seed;
  }
}

TEST(Factor, SparseBandedMatchesDenseOracle) {
  // 1D Laplacian plus a dense last row/column: exercises the RCM rule that
  // pushes high-degree rows to the end.
  const std::size_t n = 30;
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, i, 4.0});
    if (i + 1 < n - 1) t.push_back({i, i + 1, -1.0});
    if (i < n - 1) t.push_back({i, n - 1, 0.05});
  }
  const auto m = SparseSymmetric::from_upper(n, t);
  EXPECT_EQ(m.max_asymmetry(), 0.0);
  const auto b = random_vector(n, 3);
  const auto x = factor_spd(m).solve(b);
  std::vector<double> dense(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dense[i * n + j] = m.value(i, j);
  const auto y = hslab::test::dense_solve(dense, b);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], y[i], 1e-13);
  const auto order = rcm_ordering(m);
  EXPECT_EQ(order.back(), n - 1);
}

TEST(Factor, DuplicateTripletsSum) {
  const SparseSymmetric m(2, {{0, 0, 1.0}, {0, 0, 2.0}, {1, 1, 1.0}});
  EXPECT_EQ(m.value(0, 0), 3.0);
  EXPECT_EQ(code_of([] { SparseSymmetric(2, {{2, 0, 1.0}}); }), ErrorCode::IndexOutOfRange);
}

TEST(Bordered, MatchesDenseAugmentedSolve) {
  // Graph Laplacian of a path: kernel = constants.
  const std::size_t n = 8;
  std::vector<Triplet> t;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double w = 1.0 + 0.1 * static_cast<double>(i);
    t.push_back({i, i, w});
    t.push_back({i + 1, i + 1, w});
    t.push_back({i, i + 1, -w});
  }
  const auto k = SparseSymmetric::from_upper(n, t);
  Vector c(n), z(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) c[i] = 0.5 + 0.1 * static_cast<double>(i);
  auto b = random_vector(n, 5);
  const BorderedSolver solver(k, c, z);
  const auto sol = solver.solve(b);

  const auto aug = BorderedSolver::augmented(k, c);
  std::vector<double> dense((n + 1) * (n + 1));
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= n; ++j) dense[i * (n + 1) + j] = aug.value(i, j);
  Vector rhs(b);
  rhs.push_back(0.0);
  const auto ref = hslab::test::dense_solve(dense, rhs);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(sol.u[i], ref[i], 1e-12);
  EXPECT_NEAR(sol.multiplier, ref[n], 1e-12);
  EXPECT_NEAR(dot(c, sol.u), 0.0, 1e-13);
}

TEST(Bordered, ConstraintAnnihilatingKernelRejected) {
  const auto k = SparseSymmetric::from_upper(2, {{0, 0, 1.0}, {1, 1, 1.0}, {0, 1, -1.0}});
  EXPECT_EQ(code_of([&] { BorderedSolver(k, {1.0, -1.0}, {1.0, 1.0}); }), ErrorCode::NotPositiveDefinite);
}

TEST(Spectral, Examples) {
  EXPECT_NEAR(spectral_norm(DenseSym::diagonal(std::vector<double>{1, -3, 2})), 3.0, 1e-14);
  EXPECT_EQ(spectral_norm(DenseSym(4)), 0.0);
  const auto m = DenseSym::from_rows(2, std::vector<double>{2, 1, 1, 2});
  EXPECT_NEAR(spectral_norm(m), 3.0, 1e-14);
  EXPECT_NEAR(eig_min(DenseSym::diagonal(std::vector<double>{1, 3})), 1.0, 1e-14);
  EXPECT_NEAR(eig_min(DenseSym::identity(3)), 1.0, 1e-14);
  EXPECT_NEAR(eig_min(m), 1.0, 1e-14);
}

TEST(Spectral, DominatesRayleighQuotients) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto m = random_spd(12, seed);
    m -= 12.5 * DenseSym::identity(12);  // make it indefinite
    const double s = spectral_norm(m);
    for (std::uint64_t k = 0; k < 100; ++k) {
      const auto v = random_vector(12, 100 * seed + k);
      EXPECT_GE(s * (1 + 1e-12), std::abs(m.quadratic_form(v)) / dot(v, v));
    }
  }
}

TEST(Spectral, JacobiReconstructsMatrix) {
  const auto m = random_spd(9, 42);
  const auto e = jacobi_eigen(m);
  for (std::size_t k = 1; k < 9; ++k) EXPECT_LE(e.values[k - 1], e.values[k]);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 9; ++k) s += e.vectors[i * 9 + k] * e.values[k] * e.vectors[j * 9 + k];
      EXPECT_NEAR(s, m(i, j), 1e-12 * m.max_abs());
    }
}

TEST(Whiten, CholeskyWhiteningOfGramIsIdentity) {
  const auto g = random_spd(6, 8);
  const DenseCholesky chol(g);
  const auto w = chol.whiten(g);
  EXPECT_LE((w - DenseSym::identity(6)).max_abs(), 1e-13);
}

TEST(Quadrature, Examples) {
  EXPECT_NEAR(adaptive_quadrature([](double s) { return s; }, 0, 1, 1e-12), 0.5, 1e-12);
  EXPECT_EQ(adaptive_quadrature([](double) { return 0.0; }, 0, 1, 1e-12), 0.0);
  EXPECT_EQ(code_of([] { adaptive_quadrature([](double s) { return s; }, 1, 0, 1e-6); }),
            ErrorCode::InvalidArgument);
}

TEST(Quadrature, FlatIntegrandMatchesPinnedValue) {
  // Closed form 0.5 e^{-4} - sqrt(pi) erfc(2), evaluated at 40 digits.
  constexpr double pinned = 8.667500636944227836535991235835e-4;
  const double v = adaptive_quadrature(flat, 0.0, 0.5, 1e-14);
  EXPECT_NEAR(v, pinned, 1e-14);
  EXPECT_NEAR(0.5 * std::exp(-4.0) - std::sqrt(std::numbers::pi) * std::erfc(2.0), pinned, 1e-15);
}

TEST(Quadrature, FlatIntegrandMatchesCompositeSimpson) {
  const std::size_t n = 1'000'000;
  const double h = 0.5 / static_cast<double>(n);
  double s = flat(0.0) + flat(0.5);
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * flat(h * static_cast<double>(i));
  const double composite = s * h / 3.0;
  EXPECT_NEAR(adaptive_quadrature(flat, 0.0, 0.5, 1e-14), composite, 1e-14);
}

TEST(Quadrature, Additive) {
  const auto f = [](double s) { return std::sin(3 * s) + flat(s); };
  const double tol = 1e-10;
  for (double c : {0.1, 0.37, 0.8}) {
    const double whole = adaptive_quadrature(f, 0.0, 1.0, tol);
    const double parts = adaptive_quadrature(f, 0.0, c, tol) + adaptive_quadrature(f, c, 1.0, tol);
    EXPECT_NEAR(whole, parts, 2 * tol);
  }
}

TEST(Quadrature, DepthCapRaises) {
  // A jump cannot be resolved to 1e-14 with only three halvings.
  const auto step = [](double s) { return s < 1.0 / 3.0 ? 0.0 : 1.0; };
  EXPECT_EQ(code_of([&] { adaptive_quadrature(step, 0.0, 1.0, 1e-14, 3); }), ErrorCode::ToleranceNotReached);
}
