#include "hslab/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <optional>
#include <thread>

#include "hslab/errors.hpp"
#include "hslab/random.hpp"

namespace hslab {

namespace {

// Stream tags keep the random sources of a sweep disjoint.
constexpr std::uint64_t kTagSample = 0;
constexpr std::uint64_t kTagPairFirst = 1;
constexpr std::uint64_t kTagPairSecond = 2;
constexpr std::uint64_t kTagRayBase = 3;
constexpr std::uint64_t kTagRayDirection = 4;

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::array<double, 3> conductivity_cell(StreamRng& rng, double lo, double hi) {
  if (lo == hi) return {lo, lo, 0.0};
  const double e1 = rng.uniform(lo, hi);
  const double e2 = rng.uniform(lo, hi);
  const double angle = rng.uniform(0.0, std::numbers::pi);
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * c * e1 + s * s * e2, s * s * e1 + c * c * e2, c * s * (e1 - e2)};
}

MandelTensor elasticity_cell(StreamRng& rng, double lo, double hi) {
  if (lo == hi) return {lo, lo, lo, 0.0, 0.0, 0.0};
  const double e[3] = {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
  // Gram-Schmidt on a Gaussian matrix gives a Haar-distributed orthogonal Q.
  double q[3][3];
  for (auto& col : q)
    for (double& v : col) v = rng.normal();
  for (int c = 0; c < 3; ++c) {
    for (int prev = 0; prev < c; ++prev) {
      double d = 0.0;
      for (int r = 0; r < 3; ++r) d += q[c][r] * q[prev][r];
      for (int r = 0; r < 3; ++r) q[c][r] -= d * q[prev][r];
    }
    double nrm = 0.0;
    for (int r = 0; r < 3; ++r) nrm += q[c][r] * q[c][r];
    nrm = std::sqrt(nrm);
    for (int r = 0; r < 3; ++r) q[c][r] /= nrm;
  }
  Mat3 m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) m[i][j] += q[k][i] * e[k] * q[k][j];
  return mandel_from_matrix(m);
}

}  // namespace

void CompactSetSpec::validate() const {
  if (!(lambda_lo > 0.0 && lambda_lo <= lambda_hi && std::isfinite(lambda_hi)))
    fail(ErrorCode::InvalidArgument, "compact set needs 0 < lambda_lo <= lambda_hi");
  if (n_cells < 1) fail(ErrorCode::InvalidArgument, "compact set needs at least one cell");
}

std::vector<double> sample_point(const CompactSetSpec& spec, std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t index) {
  spec.validate();
  StreamRng rng(seed, tag, index);
  std::vector<double> out;
  for (int j = 0; j < spec.n_cells; ++j) {
    if (spec.kind == ProblemKind::conductivity) {
      const auto c = conductivity_cell(rng, spec.lambda_lo, spec.lambda_hi);
      out.insert(out.end(), c.begin(), c.end());
    } else {
      const auto c = elasticity_cell(rng, spec.lambda_lo, spec.lambda_hi);
      out.insert(out.end(), c.begin(), c.end());
    }
  }
  return out;
}

std::vector<std::vector<double>> sample_params(const CompactSetSpec& spec, std::size_t count, std::uint64_t seed) {
  if (count < 1) fail(ErrorCode::InvalidArgument, "sample count must be >= 1");
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_point(spec, seed, kTagSample, i));
  return out;
}

std::vector<double> sample_direction(const CompactSetSpec& spec, std::uint64_t seed, std::uint64_t tag,
                                     std::uint64_t index) {
  StreamRng rng(seed, tag, index);
  const std::size_t per_cell = spec.kind == ProblemKind::conductivity ? 3 : 6;
  const std::size_t n_diag = spec.kind == ProblemKind::conductivity ? 2 : 3;
  std::vector<double> d(per_cell * static_cast<std::size_t>(spec.n_cells));
  double sq = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = rng.normal();
    sq += (i % per_cell < n_diag ? 1.0 : 2.0) * d[i] * d[i];
  }
  const double nrm = std::sqrt(sq);
  for (double& v : d) v /= nrm;
  return d;
}

RecoveredQuantity RecoveredQuantity::all(int n_cells) {
  RecoveredQuantity rq;
  for (int j = 1; j <= n_cells; ++j) rq.cells.push_back(j);
  return rq;
}

void RecoveredQuantity::validate(int n_cells) const {
  if (cells.empty()) fail(ErrorCode::InvalidArgument, "recovered quantity needs at least one cell");
  for (int c : cells)
    if (c < 1 || c > n_cells)
      fail(ErrorCode::IndexOutOfRange, "recovered cell " + std::to_string(c) + " outside 1.." +
                                           std::to_string(n_cells));
}

const char* pair_kind_name(PairKind k) noexcept {
  return k == PairKind::random_random ? "random_random" : "near_diagonal";
}

PairKind parse_pair_kind(const std::string& name) {
  if (name == "random_random") return PairKind::random_random;
  if (name == "near_diagonal") return PairKind::near_diagonal;
  fail(ErrorCode::InvalidArgument, "unknown pair kind '" + name + "'");
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && lo <= hi)) fail(ErrorCode::InvalidArgument, "log_spaced needs 0 < lo <= hi");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

StabilityRecord make_record(const ForwardProblem& problem, std::span<const double> p, std::span<const double> q,
                            const DataOperator& fp, const DataOperator& fq, const RecoveredQuantity& rq,
                            const ProbeWeights& weights) {
  StabilityRecord r;
  for (int c : rq.cells) r.delta_R = std::max(r.delta_R, problem.cell_distance(p, q, c));
  r.delta_F = operator_distance(fp, fq);
  r.phi = phi(fp, fq, weights);
  if (r.delta_F == 0.0 && r.delta_R > 0.0) r.flags = "injectivity";
  return r;
}

SweepResult sweep(const ForwardProblem& problem, const SweepConfig& config) {
  config.set.validate();
  if (config.set.n_cells != problem.cell_count() ||
      (config.set.kind == ProblemKind::conductivity) != (problem.kind() == ProblemKind::conductivity))
    fail(ErrorCode::CellCountMismatch, "compact set does not match the forward problem");
  config.recovered.validate(problem.cell_count());
  const std::size_t k = config.probe_k == 0 ? problem.basis_dim() : config.probe_k;
  const ProbeWeights weights = probe_weights(k);
  const auto ts = log_spaced(config.t_min, config.t_max, config.ray_steps);

  const std::size_t n_records = config.random_pairs + config.rays * config.ray_steps;
  struct Slot {
    std::optional<StabilityRecord> record;
    DataOperator a, b;
    std::string error;
  };
  std::vector<Slot> slots(n_records);

  auto run_random = [&](std::size_t i) {
    Slot& s = slots[i];
    try {
      const auto p = sample_point(config.set, config.seed, kTagPairFirst, i);
      const auto q = sample_point(config.set, config.seed, kTagPairSecond, i);
      s.a = problem.evaluate(p);
      s.b = problem.evaluate(q);
      StabilityRecord r = make_record(problem, p, q, s.a, s.b, config.recovered, weights);
      r.pair_id = i;
      r.kind = PairKind::random_random;
      s.record = std::move(r);
    } catch (const Error& e) {
      s.error = e.what();
    }
  };

  auto run_ray = [&](std::size_t ray) {
    const std::size_t base_id = config.random_pairs + ray * config.ray_steps;
    std::vector<double> p;
    DataOperator fp;
    try {
      p = sample_point(config.set, config.seed, kTagRayBase, ray);
      fp = problem.evaluate(p);
    } catch (const Error& e) {
      for (std::size_t s = 0; s < config.ray_steps; ++s) slots[base_id + s].error = e.what();
      return;
    }
    const auto dp = sample_direction(config.set, config.seed, kTagRayDirection, ray);
    for (std::size_t step = 0; step < config.ray_steps; ++step) {
      Slot& s = slots[base_id + step];
      try {
        std::vector<double> q(p);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] += ts[step] * dp[i];
        s.a = fp;
        s.b = problem.evaluate(q);
        StabilityRecord r = make_record(problem, p, q, s.a, s.b, config.recovered, weights);
        r.pair_id = base_id + step;
        r.kind = PairKind::near_diagonal;
        r.t = ts[step];
        s.record = std::move(r);
      } catch (const Error& e) {
        s.error = e.what();
      }
    }
  };

  parallel_for(config.random_pairs + config.rays, config.threads, [&](std::size_t task) {
    if (task < config.random_pairs)
      run_random(task);
    else
      run_ray(task - config.random_pairs);
  });

  SweepResult out;
  for (std::size_t i = 0; i < n_records; ++i) {
    Slot& s = slots[i];
    if (!s.record) {
      ++out.dropped;
      out.drop_reasons.push_back("pair " + std::to_string(i) + ": " + s.error);
      continue;
    }
    out.records.push_back(std::move(*s.record));
    if (config.keep_operators) {
      out.first.push_back(std::move(s.a));
      out.second.push_back(std::move(s.b));
    }
  }
  return out;
}

void attach_finite(SweepResult& result, const MeasurementSet& set) {
  if (result.first.size() != result.records.size())
    fail(ErrorCode::InvalidArgument, "sweep was run without keeping operators");
  const FiniteMap fm(set);
  for (std::size_t i = 0; i < result.records.size(); ++i)
    result.records[i].delta_finite = finite_distance(fm, result.first[i], result.second[i]);
}

std::vector<OperatorPair> operator_pairs(const SweepResult& result) {
  if (result.first.size() != result.records.size())
    fail(ErrorCode::InvalidArgument, "sweep was run without keeping operators");
  std::vector<OperatorPair> out;
  for (std::size_t i = 0; i < result.records.size(); ++i)
    if (result.records[i].delta_F > 0.0) out.push_back({&result.first[i], &result.second[i]});
  return out;
}

// ---------------------------------------------------------------------------
// Envelope fit

HolderFit fit_holder(std::span<const FitPoint> points, std::size_t n_bins, double slack) {
  if (n_bins < 1) fail(ErrorCode::InvalidArgument, "n_bins must be >= 1");
  if (!(slack >= 0.0)) fail(ErrorCode::InvalidArgument, "slack must be >= 0");

  HolderFit fit;
  fit.n_bins = n_bins;
  fit.slack = slack;

  const bool all_constant =
      !points.empty() && std::all_of(points.begin(), points.end(), [](const FitPoint& p) { return p.delta_R == 0.0; });
  if (all_constant) {
    fit.theta = 1.0;
    fit.theta_precap = 1.0;
    fit.log_C = -std::numeric_limits<double>::infinity();
    fit.records_used = points.size();
    fit.constant_R = true;
    return fit;
  }

  std::vector<double> xs, ys;
  for (const auto& p : points) {
    if (p.delta_F > 0.0 && p.delta_R > 0.0 && std::isfinite(p.delta_F) && std::isfinite(p.delta_R)) {
      xs.push_back(std::log(p.delta_F));
      ys.push_back(std::log(p.delta_R));
    } else {
      ++fit.dropped;
    }
  }
  fit.records_used = xs.size();
  if (xs.size() < 2) fail(ErrorCode::InsufficientSpread, "fewer than two records with positive distances");
  const double lo = *std::min_element(xs.begin(), xs.end());
  const double hi = *std::max_element(xs.begin(), xs.end());
  if (hi - lo < 2.0 * std::log(10.0))
    fail(ErrorCode::InsufficientSpread, "delta_F spans fewer than two decades");

  const double width = (hi - lo) / static_cast<double>(n_bins);
  std::vector<int> best(n_bins, -1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::size_t b = std::min(n_bins - 1, static_cast<std::size_t>((xs[i] - lo) / width));
    if (best[b] < 0 || ys[i] > ys[static_cast<std::size_t>(best[b])]) best[b] = static_cast<int>(i);
  }
  std::vector<double> bx, by;
  for (int i : best)
    if (i >= 0) {
      bx.push_back(xs[static_cast<std::size_t>(i)]);
      by.push_back(ys[static_cast<std::size_t>(i)]);
    }

  const double n = static_cast<double>(bx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < bx.size(); ++i) {
    mx += bx[i];
    my += by[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < bx.size(); ++i) {
    sxy += (bx[i] - mx) * (by[i] - my);
    sxx += (bx[i] - mx) * (bx[i] - mx);
  }
  fit.theta_precap = sxy / sxx;
  if (!(fit.theta_precap > 0.0))
    fail(ErrorCode::NonPositiveExponent, "envelope slope " + std::to_string(fit.theta_precap) + " is not positive");
  fit.theta = std::min(fit.theta_precap, 1.0);

  const double intercept = my - fit.theta * mx;
  double excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) excess = std::max(excess, ys[i] - fit.theta * xs[i]);
  fit.log_C = std::max(intercept, excess - slack);
  fit.max_violation = excess - fit.log_C;
  // Same rounding allowance as under_envelope: the lifted point sits at slack.
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double rhs = fit.theta * xs[i] + fit.log_C + slack;
    if (ys[i] > rhs + 1e-12 * std::max(1.0, std::abs(rhs))) ++fit.violations;
  }
  return fit;
}

HolderFit fit_holder(std::span<const StabilityRecord> records, std::size_t n_bins, double slack, FitColumn column) {
  std::vector<FitPoint> pts;
  pts.reserve(records.size());
  for (const auto& r : records)
    pts.push_back({column == FitColumn::delta_F ? r.delta_F : r.delta_finite, r.delta_R});
  return fit_holder(pts, n_bins, slack);
}

bool under_envelope(const HolderFit& fit, const FitPoint& p) {
  if (fit.constant_R) return p.delta_R == 0.0;
  if (p.delta_R == 0.0) return true;
  if (!(p.delta_F > 0.0)) return false;
  const double lhs = std::log(p.delta_R);
  const double rhs = fit.theta * std::log(p.delta_F) + fit.log_C + fit.slack;
  return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs));
}

std::vector<std::size_t> injectivity_probe(std::span<const StabilityRecord> records, double floor, double scale) {
  std::vector<std::size_t> out;
  for (const auto& r : records)
    if (r.delta_R > floor && r.delta_F < floor * scale) out.push_back(r.pair_id);
  return out;
}

// ---------------------------------------------------------------------------
// Flat counterexample

namespace {

double flat_density(double s) { return s == 0.0 ? 0.0 : std::exp(-1.0 / (s * s)); }

double centered_slope(double t, const auto& f) {
  const double up = t * (1.0 + kSlopeStep);
  const double down = t * (1.0 - kSlopeStep);
  return (std::log(f(up)) - std::log(f(down))) / (std::log(up) - std::log(down));
}

}  // namespace

double flat_map(double t, double rel_tol) {
  if (!(t > 0.0)) fail(ErrorCode::InvalidArgument, "flat map is sampled at t > 0");
  // t exp(-1/t^2) bounds F(t) from above and sets the absolute scale.
  const double scale = t * flat_density(t);
  if (!(scale > std::numeric_limits<double>::min()))
    fail(ErrorCode::InvalidArgument, "F(" + std::to_string(t) + ") underflows double precision");
  return adaptive_quadrature(flat_density, 0.0, t, rel_tol * scale);
}

std::vector<FlatMapSample> flat_counterexample(std::span<const double> ts, double tol) {
  std::vector<FlatMapSample> out;
  out.reserve(ts.size());
  for (double t : ts) {
    if (!(t > 0.0 && t <= 1.0)) fail(ErrorCode::InvalidArgument, "flat map samples need t in (0, 1]");
    const auto f = [tol](double s) { return flat_map(s, tol); };
    out.push_back({t, f(t), centered_slope(t, f)});
  }
  return out;
}

std::vector<FitPoint> cubic_pair_points(std::span<const double> ts) {
  std::vector<double> pts;
  for (double t : ts) {
    pts.push_back(t);
    pts.push_back(-t);
  }
  std::vector<FitPoint> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double a = pts[i], b = pts[j];
      if (a == b) continue;
      out.push_back({std::abs(a * a * a - b * b * b), std::abs(a - b)});
    }
  return out;
}

AnalyticControl analytic_control(std::span<const double> ts, std::size_t n_bins, double slack) {
  AnalyticControl out;
  const auto cube = [](double s) { return s * s * s; };
  for (double t : ts) {
    if (!(t > 0.0 && t <= 1.0)) fail(ErrorCode::InvalidArgument, "analytic control samples need t in (0, 1]");
    out.samples.push_back({t, cube(t), centered_slope(t, cube)});
  }
  const auto pts = cubic_pair_points(ts);
  out.fit = fit_holder(pts, n_bins, slack);
  return out;
}

}  // namespace hslab
