#pragma once

// Local Neumann-to-Dirichlet map for piecewise constant anisotropic
// conductivities on a structured P1 mesh, realized as
//
//   N_A = T^# L_A^{-1} T
//
// with L_A the stiffness operator on H^1 modulo constants (one Lagrange
// multiplier for the zero-mean constraint) and T the pairing of a patch
// current with nodal traces.

#include <array>
#include <span>
#include <vector>

#include "hslab/data_operator.hpp"
#include "hslab/mesh.hpp"

namespace hslab {

/// One 2x2 symmetric matrix per cell, stored as (a11, a22, a12).
struct ConductivityParams {
  std::vector<std::array<double, 3>> cells;

  static ConductivityParams uniform(int n_cells, double a11, double a22, double a12);
  static ConductivityParams from_flat(std::span<const double> flat);
  std::vector<double> flat() const;

  /// Throws NotPositiveDefinite naming the first indefinite cell.
  void validate() const;
};

/// Zero-mean patch currents psi_i = phi_i / int(phi_i) - phi_{i+1} / int(phi_{i+1}).
struct CurrentBasis {
  std::vector<std::size_t> patch;  // global node index per patch hat
  Vector hat_integrals;            // int(phi_m) over the patch
  DenseSym hat_mass;               // L2(patch) Gram of the hats
  std::vector<double> coefficients;  // k x patch.size(), row-major
  DenseSym gram;                   // L2(patch) Gram of the psi_i

  std::size_t dim() const noexcept { return gram.size(); }
  double coefficient(std::size_t i, std::size_t m) const { return coefficients[i * patch.size() + m]; }
};

CurrentBasis current_basis(const Mesh& mesh);

/// Pure P1 stiffness (constants in its kernel) plus the constraint row
/// c_n = int(phi_n) that pins the mean.
struct ConductivityStiffness {
  SparseSymmetric stiffness;
  Vector constraint;

  /// Stiffness bordered with the Lagrange-multiplier row and column.
  SparseSymmetric augmented() const { return BorderedSolver::augmented(stiffness, constraint); }
};

/// Validates ellipticity; throws CellCountMismatch or NotPositiveDefinite.
ConductivityStiffness assemble_stiffness(const Mesh& mesh, const ConductivityParams& p);

/// Bilinear form matrix for an arbitrary symmetric per-cell field (used
/// for derivative directions, no definiteness requirement).
SparseSymmetric assemble_conductivity_form(const Mesh& mesh, const ConductivityParams& sigma);

/// Load vector T psi_i over all mesh nodes.
Vector current_load(const Mesh& mesh, const CurrentBasis& basis, std::size_t i);

struct ConductivitySolution {
  DataOperator op;
  std::vector<Vector> potentials;  // u_i = L_A^{-1} T psi_i, zero mean
};

ConductivitySolution solve_conductivity(const Mesh& mesh, const ConductivityParams& p,
                                        const CurrentBasis& basis);

DataOperator nd_matrix(const Mesh& mesh, const ConductivityParams& p, const CurrentBasis& basis);

/// d[i][j] = -int sigma_dp grad u_i . grad u_j, the directional derivative
/// of the N-D matrix at p along dp.
DenseSym nd_derivative(const Mesh& mesh, const ConductivityParams& p, const ConductivityParams& dp,
                       const CurrentBasis& basis);

}  // namespace hslab
