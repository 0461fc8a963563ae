#pragma once

// Localized Dirichlet-to-Neumann map for piecewise homogeneous anisotropic
// plane-strain elasticity, computed as
//
//   Lambda = Q - P^# L^{-1} P
//
// where L is the stiffness on displacements vanishing on the whole
// boundary, E a fixed lift of patch data, P f = a(Ef, .) on V0 and
// Q(f, g) = a(Ef, Eg).
//
// Strains are Mandel vectors (e11, e22, sqrt(2) e12), so a cell tensor is a
// symmetric 3x3 matrix whose Frobenius norm and positive-definite cone
// agree with those of the fourth-order tensor.

#include <array>
#include <span>
#include <vector>

#include "hslab/data_operator.hpp"
#include "hslab/mesh.hpp"

namespace hslab {

/// Upper triangle of a symmetric 3x3 Mandel matrix: (m11, m22, m33, m12, m13, m23).
using MandelTensor = std::array<double, 6>;
using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 mandel_matrix(const MandelTensor& t);
MandelTensor mandel_from_matrix(const Mat3& m);

/// Plane-strain isotropic tensor [[l+2m, l, 0], [l, l+2m, 0], [0, 0, 2m]].
/// Throws NotPositiveDefinite unless mu > 0 and lambda + mu > 0.
MandelTensor isotropic_tensor(double lambda_lame, double mu);

struct ElasticityParams {
  std::vector<MandelTensor> cells;

  static ElasticityParams uniform(int n_cells, const MandelTensor& t);
  static ElasticityParams from_flat(std::span<const double> flat);
  std::vector<double> flat() const;

  /// Strong convexity per cell (positive definite Mandel matrix).
  void validate() const;
};

/// Strong-convexity constant of one cell: the smallest Mandel eigenvalue.
double convexity_constant(const MandelTensor& t);

/// Vector hat functions at interior patch nodes; basis index 2*m + c is
/// node m (in patch order, endpoints skipped) and component c in {x, y}.
struct DisplacementBasis {
  std::vector<std::size_t> nodes;  // global node per interior patch node
  DenseSym gram;

  std::size_t dim() const noexcept { return gram.size(); }
  /// Global displacement dof (2 * node + component) of basis function i.
  std::size_t dof(std::size_t i) const { return 2 * nodes[i / 2] + i % 2; }
};

/// Throws PatchTooSmall when the patch has no interior node.
DisplacementBasis displacement_basis(const Mesh& mesh);

/// Vector stiffness over every nodal dof (2 per node), for an arbitrary
/// symmetric per-cell tensor field.
SparseSymmetric assemble_elastic_form(const Mesh& mesh, const ElasticityParams& c);

/// Dofs of nodes off the boundary, ascending.
std::vector<std::size_t> interior_dofs(const Mesh& mesh);

/// Reduced stiffness on interior dofs (zero Dirichlet data on all of the
/// boundary). Validates strong convexity.
SparseSymmetric assemble_elastic_stiffness(const Mesh& mesh, const ElasticityParams& p);

struct ElasticitySolution {
  DataOperator op;
  std::vector<Vector> displacements;  // full-dof solution per basis function
};

/// `lifts` holds one full-dof lift per basis function. Only values at
/// interior dofs may differ from the zero extension; the result does not
/// depend on them.
ElasticitySolution solve_elasticity(const Mesh& mesh, const ElasticityParams& p, const DisplacementBasis& basis,
                                    std::span<const Vector> lifts);

/// Zero-extension lifts: unit value at the basis dof, zero elsewhere.
std::vector<Vector> zero_extension_lifts(const Mesh& mesh, const DisplacementBasis& basis);

DataOperator dn_matrix(const Mesh& mesh, const ElasticityParams& p, const DisplacementBasis& basis);

/// d[i][j] = int C_dp eps(u_i) : eps(u_j).
DenseSym dn_derivative(const Mesh& mesh, const ElasticityParams& p, const ElasticityParams& dp,
                       const DisplacementBasis& basis);

}  // namespace hslab
