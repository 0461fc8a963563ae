#pragma once

// Small self-contained linear algebra: dense symmetric matrices with a
// cyclic Jacobi eigensolver, sparse symmetric matrices with an envelope
// Cholesky factorization, and adaptive Simpson quadrature.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hslab {

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

/// Dense symmetric matrix, row-major storage. Every mutator writes both
/// (i,j) and (j,i), so entries are exactly symmetric at all times.
class DenseSym {
 public:
  DenseSym() = default;
  explicit DenseSym(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  /// Builds from a possibly unsymmetric row-major array as (A + A^T) / 2.
  static DenseSym from_rows(std::size_t n, std::span<const double> rows);
  static DenseSym identity(std::size_t n);
  static DenseSym diagonal(std::span<const double> d);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v);
  void add(std::size_t i, std::size_t j, double v);
  std::span<const double> data() const noexcept { return a_; }

  Vector multiply(std::span<const double> x) const;
  double quadratic_form(std::span<const double> x) const;
  double max_abs() const;

  DenseSym& operator+=(const DenseSym& o);
  DenseSym& operator-=(const DenseSym& o);
  DenseSym& operator*=(double s);

  friend DenseSym operator+(DenseSym a, const DenseSym& b) { return a += b; }
  friend DenseSym operator-(DenseSym a, const DenseSym& b) { return a -= b; }
  friend DenseSym operator*(double s, DenseSym a) { return a *= s; }
  friend bool operator==(const DenseSym&, const DenseSym&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

struct SymEigen {
  Vector values;                // ascending
  std::vector<double> vectors;  // row-major n x n; column k pairs with values[k]
};

/// Cyclic Jacobi. Intended for n up to a few hundred.
SymEigen jacobi_eigen(const DenseSym& m);

/// Largest absolute eigenvalue.
double spectral_norm(const DenseSym& m);
double eig_min(const DenseSym& m);

/// Dense lower Cholesky factor, used for Gram whitening.
class DenseCholesky {
 public:
  explicit DenseCholesky(const DenseSym& m);

  std::size_t size() const noexcept { return n_; }
  double lower(std::size_t i, std::size_t j) const { return l_[i * n_ + j]; }

  /// Returns L^{-1} M L^{-T}.
  DenseSym whiten(const DenseSym& m) const;

 private:
  std::size_t n_;
  std::vector<double> l_;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Sparse symmetric matrix in compressed-row form with the full (both
/// triangles) pattern stored.
class SparseSymmetric {
 public:
  SparseSymmetric() = default;

  /// Duplicate triplets are summed. Every triplet (i,j) with i != j must be
  /// accompanied by its mirror; `from_upper` below does that for callers.
  SparseSymmetric(std::size_t n, std::vector<Triplet> triplets);

  /// Triplets from one triangle (or mixed); mirrors off-diagonal entries.
  static SparseSymmetric from_upper(std::size_t n, const std::vector<Triplet>& triplets);

  std::size_t size() const noexcept { return n_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  double value(std::size_t i, std::size_t j) const;
  Vector multiply(std::span<const double> x) const;
  double bilinear(std::span<const double> x, std::span<const double> y) const;

  std::span<const std::size_t> row_columns(std::size_t i) const {
    return {cols_.data() + start_[i], start_[i + 1] - start_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {values_.data() + start_[i], start_[i + 1] - start_[i]};
  }

  /// Principal submatrix on `keep` (in the given order).
  SparseSymmetric restrict_to(std::span<const std::size_t> keep) const;

  double max_asymmetry() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> start_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
};

/// Reverse Cuthill-McKee ordering. Rows whose degree exceeds half the
/// dimension are placed last.
std::vector<std::size_t> rcm_ordering(const SparseSymmetric& m);

/// Envelope (variable band) Cholesky factor P A P^T = L L^T under an RCM
/// permutation. Immutable after construction, safe to share for solves.
class SpdFactor {
 public:
  std::size_t size() const noexcept { return n_; }
  Vector solve(std::span<const double> b) const;

  /// Diagonal of L, reported in the original (unpermuted) index order.
  Vector factor_diagonal() const;
  std::size_t envelope_size() const noexcept { return values_.size(); }

 private:
  friend SpdFactor factor_spd(const SparseSymmetric& m);

  std::size_t n_ = 0;
  std::vector<std::size_t> perm_;     // perm_[new] = old
  std::vector<std::size_t> first_;    // first column stored in row
  std::vector<std::size_t> offset_;   // start of row in values_
  std::vector<double> values_;        // row i holds L(i, first_[i] .. i)
};

/// Throws NotPositiveDefinite on a non-positive pivot.
SpdFactor factor_spd(const SparseSymmetric& m);

Vector solve(const SpdFactor& f, std::span<const double> b);

/// Solves the bordered system
///
///   [ K   c ] [u]   [b]
///   [ c^T 0 ] [mu] = [0]
///
/// for a positive semidefinite K whose kernel is exactly span{z}, with
/// c^T z != 0. The multiplier is eliminated in closed form; K is made
/// definite by grounding one index where z is nonzero.
class BorderedSolver {
 public:
  BorderedSolver(const SparseSymmetric& k, Vector c, Vector z);

  struct Solution {
    Vector u;
    double multiplier;
  };

  std::size_t size() const noexcept { return c_.size(); }
  Solution solve(std::span<const double> b) const;

  /// The (n+1)x(n+1) bordered matrix, for inspection and residual checks.
  static SparseSymmetric augmented(const SparseSymmetric& k, std::span<const double> c);

 private:
  Vector c_;
  Vector z_;
  double zc_;
  SpdFactor factor_;
};

/// Adaptive Simpson with a recursion-depth cap; |result - integral| <= tol
/// under the usual Richardson error estimate. Throws ToleranceNotReached
/// when the cap is hit.
double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double tol, int max_depth = 60);

}  // namespace hslab
