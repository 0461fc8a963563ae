#include "hslab/forward_problem.hpp"

#include <cmath>

#include "hslab/errors.hpp"

namespace hslab {

const char* problem_kind_name(ProblemKind k) noexcept {
  return k == ProblemKind::conductivity ? "conductivity" : "elasticity";
}

ProblemKind parse_problem_kind(const std::string& name) {
  if (name == "conductivity") return ProblemKind::conductivity;
  if (name == "elasticity") return ProblemKind::elasticity;
  fail(ErrorCode::InvalidArgument, "unknown problem kind '" + name + "'");
}

ForwardProblem::ForwardProblem(Mesh mesh, ProblemKind kind) : mesh_(std::move(mesh)), kind_(kind) {
  if (kind_ == ProblemKind::conductivity) {
    currents_ = hslab::current_basis(mesh_);
    gram_ = currents_.gram;
  } else {
    displacements_ = hslab::displacement_basis(mesh_);
    gram_ = displacements_.gram;
  }
}

void ForwardProblem::check_size(std::span<const double> v) const {
  if (v.size() != param_size())
    fail(ErrorCode::CellCountMismatch, "expected " + std::to_string(param_size()) + " parameter values, got " +
                                           std::to_string(v.size()));
}

DataOperator ForwardProblem::evaluate(std::span<const double> params) const {
  check_size(params);
  if (kind_ == ProblemKind::conductivity)
    return nd_matrix(mesh_, ConductivityParams::from_flat(params), currents_);
  return dn_matrix(mesh_, ElasticityParams::from_flat(params), displacements_);
}

DenseSym ForwardProblem::derivative(std::span<const double> params, std::span<const double> direction) const {
  check_size(params);
  check_size(direction);
  if (kind_ == ProblemKind::conductivity)
    return nd_derivative(mesh_, ConductivityParams::from_flat(params), ConductivityParams::from_flat(direction),
                         currents_);
  return dn_derivative(mesh_, ElasticityParams::from_flat(params), ElasticityParams::from_flat(direction),
                       displacements_);
}

namespace {

// Squared Frobenius norm of a symmetric matrix stored as diagonal entries
// followed by off-diagonal entries.
double frobenius_sq(std::span<const double> v, std::size_t n_diag) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i < n_diag ? 1.0 : 2.0) * v[i] * v[i];
  return s;
}

}  // namespace

double ForwardProblem::cell_distance(std::span<const double> p, std::span<const double> q, int cell) const {
  check_size(p);
  check_size(q);
  if (cell < 1 || cell > cell_count()) fail(ErrorCode::IndexOutOfRange, "cell " + std::to_string(cell));
  const std::size_t w = values_per_cell();
  const std::size_t off = w * static_cast<std::size_t>(cell - 1);
  double diff[6];
  for (std::size_t i = 0; i < w; ++i) diff[i] = p[off + i] - q[off + i];
  return std::sqrt(frobenius_sq({diff, w}, w == 3 ? 2 : 3));
}

double ForwardProblem::tuple_norm(std::span<const double> p) const {
  check_size(p);
  const std::size_t w = values_per_cell();
  double s = 0.0;
  for (std::size_t off = 0; off < p.size(); off += w) s += frobenius_sq(p.subspan(off, w), w == 3 ? 2 : 3);
  return std::sqrt(s);
}

}  // namespace hslab
