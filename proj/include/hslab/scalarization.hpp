#pragma once

// Hilbert-Schmidt scalarization of operator differences and finite sets of
// scalar matrix-element measurements.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "hslab/data_operator.hpp"

namespace hslab {

/// Diagonal probe weights 2^-1, ..., 2^-k.
struct ProbeWeights {
  std::vector<double> weights;

  std::size_t k() const noexcept { return weights.size(); }
  double sum_of_squares() const;
};

ProbeWeights probe_weights(std::size_t k);

/// Phi(a, b) = sum_{i,j<k} w_i^2 w_j^2 D_ij^2 where D is the Gram-whitened
/// difference of the two operators. Throws BasisMismatch, or
/// InvalidArgument when k exceeds the basis dimension.
double phi(const DataOperator& a, const DataOperator& b, const ProbeWeights& w);

/// <F(p) basis_i, basis_j>. Throws IndexOutOfRange.
double matrix_element(const DataOperator& a, std::size_t i, std::size_t j);

using IndexPair = std::pair<std::size_t, std::size_t>;

class MeasurementSet {
 public:
  MeasurementSet() = default;
  /// Throws InvalidArgument on duplicates or IndexOutOfRange past `dim`.
  MeasurementSet(std::vector<IndexPair> pairs, std::size_t dim);

  static MeasurementSet all_pairs(std::size_t dim);
  static MeasurementSet upper_pairs(std::size_t dim);

  const std::vector<IndexPair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  std::size_t dim() const noexcept { return dim_; }

 private:
  std::vector<IndexPair> pairs_;
  std::size_t dim_ = 0;
};

/// Samples an operator at the pairs of a measurement set.
class FiniteMap {
 public:
  explicit FiniteMap(MeasurementSet set) : set_(std::move(set)) {}
  const MeasurementSet& set() const noexcept { return set_; }
  Vector evaluate(const DataOperator& a) const;

 private:
  MeasurementSet set_;
};

/// Euclidean distance between the finite measurement vectors of a and b.
double finite_distance(const FiniteMap& fm, const DataOperator& a, const DataOperator& b);

struct OperatorPair {
  const DataOperator* a;
  const DataOperator* b;
};

struct Selection {
  MeasurementSet set;
  double ratio = 0.0;    // min over samples of finite_distance / operator_distance
  bool reached = false;  // false: CannotReachRatio, set still usable
};

/// Greedily adds the candidate maximizing the worst-case ratio over the
/// samples until the ratio reaches `target_ratio` or `max_size` is hit.
/// Ties go to the lowest candidate index. Throws DegenerateSample if a
/// sample has zero operator distance. `threads` only affects speed.
Selection greedy_select(std::span<const OperatorPair> samples, std::span<const IndexPair> candidates,
                        double target_ratio, std::size_t max_size, unsigned threads = 1);

/// CSV lines "i,j" (0-based basis indices).
void write_measurement_csv(const MeasurementSet& set, std::ostream& out);

}  // namespace hslab
