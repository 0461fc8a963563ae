#include "hslab/conductivity.hpp"

#include <algorithm>
#include <cmath>

#include "hslab/errors.hpp"
#include "hslab/fem.hpp"

namespace hslab {

ConductivityParams ConductivityParams::uniform(int n_cells, double a11, double a22, double a12) {
  ConductivityParams p;
  p.cells.assign(static_cast<std::size_t>(n_cells), {a11, a22, a12});
  return p;
}

ConductivityParams ConductivityParams::from_flat(std::span<const double> flat) {
  if (flat.size() % 3 != 0) fail(ErrorCode::DimensionMismatch, "conductivity parameters come in triples");
  ConductivityParams p;
  for (std::size_t i = 0; i < flat.size(); i += 3) p.cells.push_back({flat[i], flat[i + 1], flat[i + 2]});
  return p;
}

std::vector<double> ConductivityParams::flat() const {
  std::vector<double> out;
  out.reserve(3 * cells.size());
  for (const auto& c : cells) out.insert(out.end(), c.begin(), c.end());
  return out;
}

void ConductivityParams::validate() const {
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const auto& c = cells[j];
    const double det = c[0] * c[1] - c[2] * c[2];
    if (!(c[0] > 0.0 && det > 0.0) || !std::isfinite(det))
      fail(ErrorCode::NotPositiveDefinite, "conductivity of cell " + std::to_string(j + 1) +
                                               " is not positive definite");
  }
}

CurrentBasis current_basis(const Mesh& mesh) {
  CurrentBasis b;
  b.patch = patch_nodes(mesh);
  if (b.patch.size() < 2) fail(ErrorCode::EmptyPatch, "current basis needs at least two patch nodes");
  b.hat_mass = boundary_mass_matrix(mesh);
  b.hat_integrals = patch_hat_integrals(mesh);

  const std::size_t m = b.patch.size();
  const std::size_t k = m - 1;
  b.coefficients.assign(k * m, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    b.coefficients[i * m + i] = 1.0 / b.hat_integrals[i];
    b.coefficients[i * m + i + 1] = -1.0 / b.hat_integrals[i + 1];
  }

  b.gram = DenseSym(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = 0; q < m; ++q)
          s += b.coefficients[i * m + p] * b.hat_mass(p, q) * b.coefficients[j * m + q];
      b.gram.set(i, j, s);
    }
  }
  return b;
}

SparseSymmetric assemble_conductivity_form(const Mesh& mesh, const ConductivityParams& sigma) {
  if (static_cast<int>(sigma.cells.size()) != mesh.cell_count())
    fail(ErrorCode::CellCountMismatch, "expected " + std::to_string(mesh.cell_count()) + " cells, got " +
                                           std::to_string(sigma.cells.size()));
  std::vector<Triplet> t;
  t.reserve(9 * mesh.triangles.size());
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const auto& tri = mesh.triangles[e];
    const auto g = fem::p1_gradients(mesh, e);
    const auto& c = sigma.cells[static_cast<std::size_t>(tri.label - 1)];
    for (std::size_t a = 0; a < 3; ++a) {
      const double sx = c[0] * g.dx[a] + c[2] * g.dy[a];
      const double sy = c[2] * g.dx[a] + c[1] * g.dy[a];
      for (std::size_t b = 0; b < 3; ++b)
        t.push_back({tri.nodes[a], tri.nodes[b], g.area * (sx * g.dx[b] + sy * g.dy[b])});
    }
  }
  return SparseSymmetric(mesh.node_count(), std::move(t));
}

ConductivityStiffness assemble_stiffness(const Mesh& mesh, const ConductivityParams& p) {
  if (static_cast<int>(p.cells.size()) != mesh.cell_count())
    fail(ErrorCode::CellCountMismatch, "expected " + std::to_string(mesh.cell_count()) + " cells, got " +
                                           std::to_string(p.cells.size()));
  p.validate();
  ConductivityStiffness s;
  s.stiffness = assemble_conductivity_form(mesh, p);
  s.constraint.assign(mesh.node_count(), 0.0);
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const double third = mesh.area(e) / 3.0;
    for (std::size_t n : mesh.triangles[e].nodes) s.constraint[n] += third;
  }
  return s;
}

Vector current_load(const Mesh& mesh, const CurrentBasis& basis, std::size_t i) {
  if (i >= basis.dim()) fail(ErrorCode::IndexOutOfRange, "current index");
  Vector b(mesh.node_count(), 0.0);
  const std::size_t m = basis.patch.size();
  for (std::size_t p = 0; p < m; ++p) {
    double s = 0.0;
    for (std::size_t q = 0; q < m; ++q) s += basis.hat_mass(p, q) * basis.coefficient(i, q);
    b[basis.patch[p]] = s;
  }
  return b;
}

ConductivitySolution solve_conductivity(const Mesh& mesh, const ConductivityParams& p,
                                        const CurrentBasis& basis) {
  const auto sys = assemble_stiffness(mesh, p);
  const BorderedSolver solver(sys.stiffness, sys.constraint, Vector(mesh.node_count(), 1.0));

  const std::size_t k = basis.dim();
  std::vector<Vector> loads(k);
  ConductivitySolution out;
  out.potentials.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    loads[i] = current_load(mesh, basis, i);
    out.potentials[i] = solver.solve(loads[i]).u;
  }

  std::vector<double> raw(k * k);
  double scale = 0.0, asym = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      raw[i * k + j] = dot(loads[j], out.potentials[i]);
      scale = std::max(scale, std::abs(raw[i * k + j]));
    }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) asym = std::max(asym, std::abs(raw[i * k + j] - raw[j * k + i]));

  out.op.matrix = DenseSym::from_rows(k, raw);
  out.op.gram = basis.gram;
  out.op.kind = OperatorKind::conductivity_nd;
  out.op.raw_asymmetry = scale > 0.0 ? asym / scale : 0.0;
  return out;
}

DataOperator nd_matrix(const Mesh& mesh, const ConductivityParams& p, const CurrentBasis& basis) {
  return solve_conductivity(mesh, p, basis).op;
}

DenseSym nd_derivative(const Mesh& mesh, const ConductivityParams& p, const ConductivityParams& dp,
                       const CurrentBasis& basis) {
  const auto sol = solve_conductivity(mesh, p, basis);
  const auto form = assemble_conductivity_form(mesh, dp);
  const std::size_t k = basis.dim();
  DenseSym d(k);
  for (std::size_t i = 0; i < k; ++i) {
    const Vector ku = form.multiply(sol.potentials[i]);
    for (std::size_t j = i; j < k; ++j) d.set(i, j, -dot(sol.potentials[j], ku));
  }
  return d;
}

}  // namespace hslab
