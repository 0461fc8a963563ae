#pragma once

#include "hslab/numerics.hpp"

namespace hslab {

enum class OperatorKind { conductivity_nd, elasticity_dn };

const char* operator_kind_name(OperatorKind k) noexcept;

/// A discretized boundary map in a fixed boundary basis:
/// matrix(i, j) = <F(p) basis_i, basis_j>, together with the basis Gram
/// matrix that defines the data norm.
struct DataOperator {
  DenseSym matrix;
  DenseSym gram;
  OperatorKind kind = OperatorKind::conductivity_nd;
  /// max |M_ij - M_ji| / max |M_ij| of the raw assembled matrix, before
  /// symmetrization.
  double raw_asymmetry = 0.0;

  std::size_t dim() const noexcept { return matrix.size(); }
};

/// L^{-1} (M_a - M_b) L^{-T} with G = L L^T: the difference expressed in
/// the Gram-orthonormalized basis (Gram-Schmidt in basis order). Throws
/// BasisMismatch unless both operators share kind and Gram.
DenseSym whitened_difference(const DataOperator& a, const DataOperator& b);

/// Gram-whitened spectral norm of M_a - M_b.
double operator_distance(const DataOperator& a, const DataOperator& b);

/// Gram-whitened spectral norm of M_a itself.
double operator_norm(const DataOperator& a);

}  // namespace hslab
