#include "hslab/elasticity.hpp"

#include <algorithm>
#include <cmath>

#include "hslab/errors.hpp"
#include "hslab/fem.hpp"

namespace hslab {

Mat3 mandel_matrix(const MandelTensor& t) {
  return {{{t[0], t[3], t[4]}, {t[3], t[1], t[5]}, {t[4], t[5], t[2]}}};
}

MandelTensor mandel_from_matrix(const Mat3& m) {
  return {m[0][0], m[1][1], m[2][2], 0.5 * (m[0][1] + m[1][0]), 0.5 * (m[0][2] + m[2][0]),
          0.5 * (m[1][2] + m[2][1])};
}

double convexity_constant(const MandelTensor& t) {
  const Mat3 m = mandel_matrix(t);
  DenseSym d(3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i; j < 3; ++j) d.set(i, j, m[i][j]);
  return eig_min(d);
}

MandelTensor isotropic_tensor(double lambda_lame, double mu) {
  if (!(mu > 0.0) || !(lambda_lame + mu > 0.0))
    fail(ErrorCode::NotPositiveDefinite, "isotropic tensor needs mu > 0 and lambda + mu > 0");
  const double d = lambda_lame + 2.0 * mu;
  return {d, d, 2.0 * mu, lambda_lame, 0.0, 0.0};
}

ElasticityParams ElasticityParams::uniform(int n_cells, const MandelTensor& t) {
  ElasticityParams p;
  p.cells.assign(static_cast<std::size_t>(n_cells), t);
  return p;
}

ElasticityParams ElasticityParams::from_flat(std::span<const double> flat) {
  if (flat.size() % 6 != 0) fail(ErrorCode::DimensionMismatch, "elasticity parameters come in sextuples");
  ElasticityParams p;
  for (std::size_t i = 0; i < flat.size(); i += 6)
    p.cells.push_back({flat[i], flat[i + 1], flat[i + 2], flat[i + 3], flat[i + 4], flat[i + 5]});
  return p;
}

std::vector<double> ElasticityParams::flat() const {
  std::vector<double> out;
  out.reserve(6 * cells.size());
  for (const auto& c : cells) out.insert(out.end(), c.begin(), c.end());
  return out;
}

void ElasticityParams::validate() const {
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const double lam = convexity_constant(cells[j]);
    if (!(lam > 0.0) || !std::isfinite(lam))
      fail(ErrorCode::NotPositiveDefinite, "elasticity tensor of cell " + std::to_string(j + 1) +
                                               " is not strongly convex");
  }
}

DisplacementBasis displacement_basis(const Mesh& mesh) {
  const auto patch = patch_nodes(mesh);
  if (patch.size() < 3) fail(ErrorCode::PatchTooSmall, "displacement basis needs an interior patch node");
  const DenseSym hat_mass = boundary_mass_matrix(mesh);
  DisplacementBasis b;
  b.nodes.assign(patch.begin() + 1, patch.end() - 1);
  const std::size_t m = b.nodes.size();
  b.gram = DenseSym(2 * m);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = p; q < m; ++q)
      for (std::size_t c = 0; c < 2; ++c) b.gram.set(2 * p + c, 2 * q + c, hat_mass(p + 1, q + 1));
  return b;
}

SparseSymmetric assemble_elastic_form(const Mesh& mesh, const ElasticityParams& c) {
  if (static_cast<int>(c.cells.size()) != mesh.cell_count())
    fail(ErrorCode::CellCountMismatch, "expected " + std::to_string(mesh.cell_count()) + " cells, got " +
                                           std::to_string(c.cells.size()));
  const double r2 = std::sqrt(0.5);
  std::vector<Triplet> t;
  t.reserve(36 * mesh.triangles.size());
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const auto& tri = mesh.triangles[e];
    const auto g = fem::p1_gradients(mesh, e);
    const Mat3 cm = mandel_matrix(c.cells[static_cast<std::size_t>(tri.label - 1)]);

    // Strain-displacement matrix, columns (ux_a, uy_a) for a = 0..2.
    double b[3][6] = {};
    for (std::size_t a = 0; a < 3; ++a) {
      b[0][2 * a] = g.dx[a];
      b[1][2 * a + 1] = g.dy[a];
      b[2][2 * a] = r2 * g.dy[a];
      b[2][2 * a + 1] = r2 * g.dx[a];
    }
    double cb[3][6] = {};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 6; ++j)
        for (std::size_t k = 0; k < 3; ++k) cb[i][j] += cm[i][k] * b[k][j];
    for (std::size_t i = 0; i < 6; ++i) {
      const std::size_t gi = 2 * tri.nodes[i / 2] + i % 2;
      for (std::size_t j = 0; j < 6; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 3; ++k) s += b[k][i] * cb[k][j];
        t.push_back({gi, 2 * tri.nodes[j / 2] + j % 2, g.area * s});
      }
    }
  }
  return SparseSymmetric(2 * mesh.node_count(), std::move(t));
}

std::vector<std::size_t> interior_dofs(const Mesh& mesh) {
  std::vector<std::size_t> dofs;
  for (std::size_t n = 0; n < mesh.node_count(); ++n) {
    if (mesh.on_boundary(n)) continue;
    dofs.push_back(2 * n);
    dofs.push_back(2 * n + 1);
  }
  return dofs;
}

SparseSymmetric assemble_elastic_stiffness(const Mesh& mesh, const ElasticityParams& p) {
  if (static_cast<int>(p.cells.size()) != mesh.cell_count())
    fail(ErrorCode::CellCountMismatch, "expected " + std::to_string(mesh.cell_count()) + " cells, got " +
                                           std::to_string(p.cells.size()));
  p.validate();
  const auto dofs = interior_dofs(mesh);
  return assemble_elastic_form(mesh, p).restrict_to(dofs);
}

std::vector<Vector> zero_extension_lifts(const Mesh& mesh, const DisplacementBasis& basis) {
  std::vector<Vector> lifts(basis.dim(), Vector(2 * mesh.node_count(), 0.0));
  for (std::size_t i = 0; i < basis.dim(); ++i) lifts[i][basis.dof(i)] = 1.0;
  return lifts;
}

ElasticitySolution solve_elasticity(const Mesh& mesh, const ElasticityParams& p, const DisplacementBasis& basis,
                                    std::span<const Vector> lifts) {
  if (lifts.size() != basis.dim()) fail(ErrorCode::DimensionMismatch, "one lift per basis function");
  if (static_cast<int>(p.cells.size()) != mesh.cell_count())
    fail(ErrorCode::CellCountMismatch, "expected " + std::to_string(mesh.cell_count()) + " cells, got " +
                                           std::to_string(p.cells.size()));
  p.validate();
  const auto full = assemble_elastic_form(mesh, p);
  const auto dofs = interior_dofs(mesh);
  const SpdFactor factor = factor_spd(full.restrict_to(dofs));

  const std::size_t k = basis.dim();
  ElasticitySolution out;
  out.displacements.resize(k);
  std::vector<Vector> load(k);        // P f_i restricted to interior dofs
  std::vector<Vector> correction(k);  // L^{-1} P f_i
  std::vector<Vector> lifted(k);      // K E f_i over all dofs
  for (std::size_t i = 0; i < k; ++i) {
    if (lifts[i].size() != full.size()) fail(ErrorCode::DimensionMismatch, "lift length");
    lifted[i] = full.multiply(lifts[i]);
    load[i].resize(dofs.size());
    for (std::size_t d = 0; d < dofs.size(); ++d) load[i][d] = lifted[i][dofs[d]];
    correction[i] = factor.solve(load[i]);
    out.displacements[i] = lifts[i];
    for (std::size_t d = 0; d < dofs.size(); ++d) out.displacements[i][dofs[d]] -= correction[i][d];
  }

  std::vector<double> raw(k * k);
  double scale = 0.0, asym = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      raw[i * k + j] = dot(lifts[j], lifted[i]) - dot(load[j], correction[i]);
      scale = std::max(scale, std::abs(raw[i * k + j]));
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) asym = std::max(asym, std::abs(raw[i * k + j] - raw[j * k + i]));

  out.op.matrix = DenseSym::from_rows(k, raw);
  out.op.gram = basis.gram;
  out.op.kind = OperatorKind::elasticity_dn;
  out.op.raw_asymmetry = scale > 0.0 ? asym / scale : 0.0;
  return out;
}

DataOperator dn_matrix(const Mesh& mesh, const ElasticityParams& p, const DisplacementBasis& basis) {
  const auto lifts = zero_extension_lifts(mesh, basis);
  return solve_elasticity(mesh, p, basis, lifts).op;
}

DenseSym dn_derivative(const Mesh& mesh, const ElasticityParams& p, const ElasticityParams& dp,
                       const DisplacementBasis& basis) {
  const auto lifts = zero_extension_lifts(mesh, basis);
  const auto sol = solve_elasticity(mesh, p, basis, lifts);
  const auto form = assemble_elastic_form(mesh, dp);
  const std::size_t k = basis.dim();
  DenseSym d(k);
  for (std::size_t i = 0; i < k; ++i) {
    const Vector cu = form.multiply(sol.displacements[i]);
    for (std::size_t j = i; j < k; ++j) d.set(i, j, dot(sol.displacements[j], cu));
  }
  return d;
}

}  // namespace hslab
