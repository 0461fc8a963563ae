#pragma once

// Empirical stability experiments: parameter sampling on compact
// ellipticity classes, pair sweeps producing stability records, Hölder
// envelope fits, and the flat-map counterexample with its analytic control.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hslab/forward_problem.hpp"
#include "hslab/scalarization.hpp"

namespace hslab {

/// Parameter tuples whose cell matrices lie between lambda_lo*I and
/// lambda_hi*I in the Loewner order.
struct CompactSetSpec {
  double lambda_lo = 0.5;
  double lambda_hi = 2.0;
  int n_cells = 1;
  ProblemKind kind = ProblemKind::conductivity;

  /// Requires 0 < lambda_lo <= lambda_hi (equality gives a single point).
  void validate() const;
};

/// Cell matrices R diag(e) R^T with eigenvalues uniform in
/// [lambda_lo, lambda_hi] and Haar-random rotation R. Pure function of
/// (seed, tag, index).
std::vector<double> sample_point(const CompactSetSpec& spec, std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t index);

std::vector<std::vector<double>> sample_params(const CompactSetSpec& spec, std::size_t count, std::uint64_t seed);

/// Random symmetric per-cell direction with unit total Frobenius norm.
std::vector<double> sample_direction(const CompactSetSpec& spec, std::uint64_t seed, std::uint64_t tag,
                                     std::uint64_t index);

/// Cells (1-based) whose matrices make up the recovered quantity.
struct RecoveredQuantity {
  std::vector<int> cells;

  static RecoveredQuantity all(int n_cells);
  void validate(int n_cells) const;
};

enum class PairKind { random_random, near_diagonal };

const char* pair_kind_name(PairKind k) noexcept;
PairKind parse_pair_kind(const std::string& name);

struct StabilityRecord {
  std::size_t pair_id = 0;
  PairKind kind = PairKind::random_random;
  double t = 0.0;  // ray step; 0 for random pairs
  double delta_R = 0.0;
  double delta_F = 0.0;
  double phi = 0.0;
  double delta_finite = std::numeric_limits<double>::quiet_NaN();
  std::string flags;
};

struct SweepConfig {
  CompactSetSpec set;
  RecoveredQuantity recovered;
  std::size_t random_pairs = 200;
  std::size_t rays = 20;
  std::size_t ray_steps = 20;
  double t_min = 1e-6;
  double t_max = 1e-1;
  std::uint64_t seed = 0;
  std::size_t probe_k = 0;  // 0: full basis dimension
  unsigned threads = 1;
  bool keep_operators = true;
};

struct SweepResult {
  std::vector<StabilityRecord> records;  // ordered by pair id
  std::vector<DataOperator> first;       // F(p) per record, when kept
  std::vector<DataOperator> second;      // F(q) per record, when kept
  std::size_t dropped = 0;
  std::vector<std::string> drop_reasons;
};

/// n values log-spaced over [lo, hi].
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

/// Records for random pairs and for rays q = p + t dp. Results are
/// independent of `threads`.
SweepResult sweep(const ForwardProblem& problem, const SweepConfig& config);

/// Record for one (p, q) pair with already evaluated operators.
StabilityRecord make_record(const ForwardProblem& problem, std::span<const double> p, std::span<const double> q,
                            const DataOperator& fp, const DataOperator& fq, const RecoveredQuantity& rq,
                            const ProbeWeights& weights);

/// Fills delta_finite for every record from the kept operators.
void attach_finite(SweepResult& result, const MeasurementSet& set);

/// Operator pairs with positive operator distance, for greedy selection.
std::vector<OperatorPair> operator_pairs(const SweepResult& result);

// ---------------------------------------------------------------------------
// Envelope fit

struct FitPoint {
  double delta_F;
  double delta_R;
};

enum class FitColumn { delta_F, delta_finite };

struct HolderFit {
  double theta = 1.0;
  double theta_precap = 1.0;
  double log_C = 0.0;  // -inf when the recovered quantity is constant
  std::size_t n_bins = 0;
  double slack = 0.0;
  double max_violation = 0.0;  // max of log dR - theta log dF - log C
  std::size_t records_used = 0;
  std::size_t dropped = 0;      // records without positive distances
  std::size_t violations = 0;   // records above the envelope plus slack
  bool constant_R = false;
};

/// Bins records by log dF, fits a least-squares line through the per-bin
/// maxima of log dR, caps the slope at 1, then lifts log C until every
/// record satisfies log dR <= theta log dF + log C + slack.
/// Throws InsufficientSpread (< 2 decades of dF) or NonPositiveExponent.
HolderFit fit_holder(std::span<const FitPoint> points, std::size_t n_bins, double slack);
HolderFit fit_holder(std::span<const StabilityRecord> records, std::size_t n_bins, double slack,
                     FitColumn column = FitColumn::delta_F);

/// True when dR <= C dF^theta e^slack (with a relative rounding allowance).
bool under_envelope(const HolderFit& fit, const FitPoint& p);

/// Pair ids with delta_R > floor but delta_F < floor * scale.
std::vector<std::size_t> injectivity_probe(std::span<const StabilityRecord> records, double floor,
                                           double scale = 1.0);

// ---------------------------------------------------------------------------
// Flat counterexample

struct FlatMapSample {
  double t;
  double F_t;
  double local_slope;  // d log F / d log t by a centered difference
};

/// Relative half-width of the centered log-log difference.
inline constexpr double kSlopeStep = 1e-3;

/// F(t) = int_0^t exp(-1/s^2) ds, to relative accuracy rel_tol.
double flat_map(double t, double rel_tol);

/// Throws ToleranceNotReached from the quadrature, InvalidArgument for t
/// outside (0, 1] or so small that F(t) underflows.
std::vector<FlatMapSample> flat_counterexample(std::span<const double> ts, double tol);

struct AnalyticControl {
  std::vector<FlatMapSample> samples;
  HolderFit fit;
};

/// Pair points (|a - b|, |a^3 - b^3|) over all distinct a, b in {+-t}.
std::vector<FitPoint> cubic_pair_points(std::span<const double> ts);

/// Same pipeline with F(t) = t^3.
AnalyticControl analytic_control(std::span<const double> ts, std::size_t n_bins = 10, double slack = 0.1);

// ---------------------------------------------------------------------------
// Records CSV

/// Columns pair_id,kind,t,delta_R,delta_F,phi,delta_finite,flags. The
/// header comment is written verbatim as the first line when nonempty.
void write_records_csv(std::span<const StabilityRecord> records, std::ostream& out,
                       const std::string& header_comment = "");

/// Reads the format above; '#' lines are skipped. Throws IoError with the
/// offending line number.
std::vector<StabilityRecord> read_records_csv(std::istream& in);

}  // namespace hslab
