#pragma once

// A mesh plus boundary basis for one of the two boundary maps, evaluated on
// flat parameter vectors (3 values per conductivity cell, 6 per
// elasticity cell).

#include <span>
#include <vector>

#include "hslab/conductivity.hpp"
#include "hslab/elasticity.hpp"

namespace hslab {

enum class ProblemKind { conductivity, elasticity };

const char* problem_kind_name(ProblemKind k) noexcept;
ProblemKind parse_problem_kind(const std::string& name);

class ForwardProblem {
 public:
  ForwardProblem(Mesh mesh, ProblemKind kind);

  ProblemKind kind() const noexcept { return kind_; }
  const Mesh& mesh() const noexcept { return mesh_; }
  std::size_t basis_dim() const noexcept { return gram_.size(); }
  const DenseSym& gram() const noexcept { return gram_; }
  int cell_count() const noexcept { return mesh_.cell_count(); }
  std::size_t values_per_cell() const noexcept { return kind_ == ProblemKind::conductivity ? 3 : 6; }
  std::size_t param_size() const noexcept { return values_per_cell() * static_cast<std::size_t>(cell_count()); }

  DataOperator evaluate(std::span<const double> params) const;
  DenseSym derivative(std::span<const double> params, std::span<const double> direction) const;

  /// Frobenius norm of the difference of one cell's matrices (cell is 1-based).
  double cell_distance(std::span<const double> p, std::span<const double> q, int cell) const;

  /// Frobenius norm of a whole parameter tuple, sum over cells.
  double tuple_norm(std::span<const double> p) const;

  const CurrentBasis& current_basis() const { return currents_; }
  const DisplacementBasis& displacement_basis() const { return displacements_; }

 private:
  void check_size(std::span<const double> v) const;

  Mesh mesh_;
  ProblemKind kind_;
  CurrentBasis currents_;
  DisplacementBasis displacements_;
  DenseSym gram_;
};

}  // namespace hslab
