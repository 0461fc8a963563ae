#include "hslab/data_operator.hpp"

#include "hslab/errors.hpp"

namespace hslab {

const char* operator_kind_name(OperatorKind k) noexcept {
  return k == OperatorKind::conductivity_nd ? "conductivity_nd" : "elasticity_dn";
}

DenseSym whitened_difference(const DataOperator& a, const DataOperator& b) {
  if (a.kind != b.kind || !(a.gram == b.gram) || a.dim() != b.dim() || a.dim() != a.gram.size())
    fail(ErrorCode::BasisMismatch, "operators do not share a boundary basis");
  return DenseCholesky(a.gram).whiten(a.matrix - b.matrix);
}

double operator_distance(const DataOperator& a, const DataOperator& b) {
  return spectral_norm(whitened_difference(a, b));
}

double operator_norm(const DataOperator& a) {
  if (a.dim() != a.gram.size()) fail(ErrorCode::BasisMismatch, "operator and Gram sizes differ");
  return spectral_norm(DenseCholesky(a.gram).whiten(a.matrix));
}

}  // namespace hslab
