#include <gtest/gtest.h>

#include <random>

#include "hslab/elasticity.hpp"
#include "hslab/errors.hpp"
#include "hslab/forward_problem.hpp"
#include "test_util.hpp"

using namespace hslab;
using hslab::test::rel_diff;

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

Mesh bottom_mesh(int n, int cols = 1, int rows = 1) {
  return build_mesh(n, PartitionSpec(cols, rows), PatchSpec(Side::bottom, 0, 1));
}

// Random strongly convex Mandel tensors: isotropic core plus a PSD rank-one
// perturbation.
ElasticityParams random_params(int n_cells, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0), v(-0.5, 0.5);
  ElasticityParams p;
  for (int j = 0; j < n_cells; ++j) {
    MandelTensor t = isotropic_tensor(u(rng) - 0.4, u(rng));
    const double a = v(rng), b = v(rng), c = v(rng);
    t[0] += a * a;
    t[1] += b * b;
    t[2] += c * c;
    t[3] += a * b;
    t[4] += a * c;
    t[5] += b * c;
    p.cells.push_back(t);
  }
  return p;
}

ElasticityParams scaled(ElasticityParams p, double t) {
  for (auto& c : p.cells)
    for (double& v : c) v *= t;
  return p;
}

}  // namespace

TEST(Isotropic, Examples) {
  EXPECT_EQ(isotropic_tensor(0, 1), (MandelTensor{2, 2, 2, 0, 0, 0}));
  const auto t = isotropic_tensor(1, 1);
  EXPECT_EQ(t, (MandelTensor{3, 3, 2, 1, 0, 0}));
  DenseSym m(3);
  const auto mm = mandel_matrix(t);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i; j < 3; ++j) m.set(i, j, mm[i][j]);
  const auto e = jacobi_eigen(m);
  EXPECT_NEAR(e.values[0], 2.0, 1e-14);
  EXPECT_NEAR(e.values[1], 2.0, 1e-14);
  EXPECT_NEAR(e.values[2], 4.0, 1e-14);
  EXPECT_EQ(code_of([] { isotropic_tensor(-2, 1); }), ErrorCode::NotPositiveDefinite);
  EXPECT_EQ(code_of([] { isotropic_tensor(1, 0); }), ErrorCode::NotPositiveDefinite);
}

TEST(Isotropic, MandelMatchesFourIndexContraction) {
  const double lam = 0.7, mu = 1.3;
  const auto m = mandel_matrix(isotropic_tensor(lam, mu));
  auto c4 = [&](int i, int j, int k, int l) {
    return lam * (i == j) * (k == l) + mu * ((i == k) * (j == l) + (i == l) * (j == k));
  };
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    const double eps[2][2] = {{g(rng), 0}, {0, g(rng)}};
    double e[2][2] = {{eps[0][0], g(rng)}, {0, eps[1][1]}};
    e[1][0] = e[0][1];
    double sigma[2][2] = {};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) sigma[i][j] += c4(i, j, k, l) * e[k][l];
    const double r2 = std::sqrt(2.0);
    const double ev[3] = {e[0][0], e[1][1], r2 * e[0][1]};
    double sv[3] = {};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) sv[i] += m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * ev[j];
    EXPECT_NEAR(sv[0], sigma[0][0], 1e-13);
    EXPECT_NEAR(sv[1], sigma[1][1], 1e-13);
    EXPECT_NEAR(sv[2], r2 * sigma[0][1], 1e-13);
    // Energy agrees with the tensor double contraction.
    double energy4 = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) energy4 += sigma[i][j] * e[i][j];
    EXPECT_NEAR(sv[0] * ev[0] + sv[1] * ev[1] + sv[2] * ev[2], energy4, 1e-12);
  }
}

TEST(Isotropic, PureShearStress) {
  const double mu = 1.5, gamma = 0.3;
  const auto m = mandel_matrix(isotropic_tensor(0.4, mu));
  // Mandel shear component sqrt(2) * gamma gives sqrt(2) * sigma12.
  const double s = m[2][2] * std::sqrt(2.0) * gamma;
  EXPECT_NEAR(s / std::sqrt(2.0), 2.0 * mu * gamma, 1e-15);
}

TEST(DisplacementBasis, Dimensions) {
  EXPECT_EQ(displacement_basis(bottom_mesh(2)).dim(), 2u);
  EXPECT_EQ(displacement_basis(bottom_mesh(4)).dim(), 6u);
  EXPECT_EQ(code_of([] { displacement_basis(bottom_mesh(1)); }), ErrorCode::PatchTooSmall);
}

TEST(DisplacementBasis, EndpointsCarryNoFunction) {
  const auto mesh = bottom_mesh(4);
  const auto b = displacement_basis(mesh);
  const auto patch = patch_nodes(mesh);
  for (auto n : b.nodes) {
    EXPECT_NE(n, patch.front());
    EXPECT_NE(n, patch.back());
  }
  EXPECT_GT(eig_min(b.gram), 0.0);
}

TEST(ElasticStiffness, LinearInTensor) {
  const auto mesh = bottom_mesh(4, 2, 1);
  const auto p = random_params(2, 3);
  const auto k1 = assemble_elastic_stiffness(mesh, p);
  const auto k3 = assemble_elastic_stiffness(mesh, scaled(p, 3.0));
  for (std::size_t i = 0; i < k1.size(); ++i)
    for (std::size_t j = 0; j < k1.size(); ++j) EXPECT_NEAR(k3.value(i, j), 3.0 * k1.value(i, j), 1e-14);
}

TEST(ElasticStiffness, ConstantStrainEnergy) {
  const auto mesh = bottom_mesh(4);
  const auto form = assemble_elastic_form(mesh, ElasticityParams::uniform(1, isotropic_tensor(0, 1)));
  Vector u(2 * mesh.node_count(), 0.0);
  for (std::size_t n = 0; n < mesh.node_count(); ++n) u[2 * n] = mesh.nodes[n].x;
  EXPECT_NEAR(form.bilinear(u, u), 2.0, 1e-13);
}

TEST(ElasticStiffness, ReducedSystemDefinite) {
  for (int n : {2, 4, 6}) {
    const auto mesh = bottom_mesh(n, n % 2 ? 1 : 2, 1);
    const auto k = assemble_elastic_stiffness(mesh, random_params(mesh.cell_count(), 7));
    EXPECT_NO_THROW(factor_spd(k));
    EXPECT_EQ(k.size(), 2u * static_cast<std::size_t>((n - 1) * (n - 1)));
  }
}

TEST(ElasticStiffness, Errors) {
  const auto mesh = bottom_mesh(4, 2, 1);
  EXPECT_EQ(code_of([&] { assemble_elastic_stiffness(mesh, random_params(1, 0)); }), ErrorCode::CellCountMismatch);
  auto bad = random_params(2, 0);
  bad.cells[0] = {1, 1, 1, 2, 0, 0};
  EXPECT_EQ(code_of([&] { assemble_elastic_stiffness(mesh, bad); }), ErrorCode::NotPositiveDefinite);
}

TEST(DnMatrix, ScalingIdentity) {
  for (int n : {4, 8}) {
    const auto mesh = bottom_mesh(n, 2, 2);
    const auto basis = displacement_basis(mesh);
    const auto p = random_params(4, static_cast<std::uint64_t>(n));
    const auto m = dn_matrix(mesh, p, basis).matrix;
    for (double t : {0.5, 2.0, 10.0}) EXPECT_LE(rel_diff(dn_matrix(mesh, scaled(p, t), basis).matrix, t * m), 1e-12);
  }
}

TEST(DnMatrix, IsotropicDoubling) {
  const auto mesh = bottom_mesh(6);
  const auto basis = displacement_basis(mesh);
  const auto m1 = dn_matrix(mesh, ElasticityParams::uniform(1, isotropic_tensor(0, 1)), basis).matrix;
  const auto m2 = dn_matrix(mesh, ElasticityParams::uniform(1, isotropic_tensor(0, 2)), basis).matrix;
  EXPECT_LE(rel_diff(m2, 2.0 * m1), 1e-13);
}

TEST(DnMatrix, SymmetricAndPsd) {
  const auto mesh = bottom_mesh(8, 2, 2);
  const auto basis = displacement_basis(mesh);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto op = dn_matrix(mesh, random_params(4, seed), basis);
    EXPECT_LE(op.raw_asymmetry, 1e-12);
    EXPECT_GE(eig_min(op.matrix), -1e-10 * spectral_norm(op.matrix));
    for (std::size_t i = 0; i < op.dim(); ++i) EXPECT_GT(op.matrix(i, i), 0.0);
  }
}

TEST(DnMatrix, LiftIndependence) {
  const auto mesh = bottom_mesh(6, 2, 1);
  const auto basis = displacement_basis(mesh);
  const auto p = random_params(2, 11);
  const auto lifts = zero_extension_lifts(mesh, basis);
  const auto ref = solve_elasticity(mesh, p, basis, lifts).op.matrix;
  const auto interior = interior_dofs(mesh);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  auto perturbed = lifts;
  for (auto& l : perturbed)
    for (auto d : interior) l[d] = g(rng);
  const auto m = solve_elasticity(mesh, p, basis, perturbed).op.matrix;
  EXPECT_LE((m - ref).max_abs(), 1e-12 * ref.max_abs());
}

TEST(DnDerivative, RadialAndZeroDirections) {
  const auto mesh = bottom_mesh(6, 2, 1);
  const auto basis = displacement_basis(mesh);
  const auto p = random_params(2, 4);
  EXPECT_LE(rel_diff(dn_derivative(mesh, p, p, basis), dn_matrix(mesh, p, basis).matrix), 1e-10);
  EXPECT_EQ(dn_derivative(mesh, p, ElasticityParams::uniform(2, {}), basis).max_abs(), 0.0);
}

TEST(DnDerivative, CentralDifferenceStepSweep) {
  const ForwardProblem problem(bottom_mesh(8, 2, 2), ProblemKind::elasticity);
  const auto p = random_params(4, 31).flat();
  std::vector<double> dp(p.size());
  std::mt19937_64 rng(32);
  std::normal_distribution<double> g;
  for (double& v : dp) v = g(rng);
  const auto d = problem.derivative(p, dp);
  auto fd_error = [&](double h) {
    std::vector<double> a(p), b(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      a[i] += h * dp[i];
      b[i] -= h * dp[i];
    }
    const auto fd = (0.5 / h) * (problem.evaluate(a).matrix - problem.evaluate(b).matrix);
    return (fd - d).max_abs() / d.max_abs();
  };
  const double e2 = fd_error(1e-2), e3 = fd_error(1e-3), e4 = fd_error(1e-4);
  EXPECT_LE(e4, 1e-5);
  EXPECT_NEAR(e2 / e3, 100.0, 10.0);
}
