#include "hslab/scalarization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <thread>

#include "hslab/errors.hpp"

namespace hslab {

double ProbeWeights::sum_of_squares() const {
  double s = 0.0;
  for (double w : weights) s += w * w;
  return s;
}

ProbeWeights probe_weights(std::size_t k) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "probe truncation order must be >= 1");
  ProbeWeights w;
  w.weights.resize(k);
  for (std::size_t j = 0; j < k; ++j) w.weights[j] = std::ldexp(1.0, -static_cast<int>(j + 1));
  return w;
}

double phi(const DataOperator& a, const DataOperator& b, const ProbeWeights& w) {
  const DenseSym d = whitened_difference(a, b);
  if (w.k() > d.size())
    fail(ErrorCode::InvalidArgument, "probe order " + std::to_string(w.k()) + " exceeds basis dimension " +
                                         std::to_string(d.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < w.k(); ++i) {
    for (std::size_t j = 0; j < w.k(); ++j) {
      const double v = w.weights[i] * w.weights[j] * d(i, j);
      s += v * v;
    }
  }
  return s;
}

double matrix_element(const DataOperator& a, std::size_t i, std::size_t j) {
  if (i >= a.dim() || j >= a.dim())
    fail(ErrorCode::IndexOutOfRange, "matrix element (" + std::to_string(i) + "," + std::to_string(j) +
                                         ") outside dimension " + std::to_string(a.dim()));
  return a.matrix(i, j);
}

MeasurementSet::MeasurementSet(std::vector<IndexPair> pairs, std::size_t dim) : pairs_(std::move(pairs)), dim_(dim) {
  std::set<IndexPair> seen;
  for (const auto& p : pairs_) {
    if (p.first >= dim || p.second >= dim)
      fail(ErrorCode::IndexOutOfRange, "measurement (" + std::to_string(p.first) + "," + std::to_string(p.second) +
                                           ") outside dimension " + std::to_string(dim));
    if (!seen.insert(p).second)
      fail(ErrorCode::InvalidArgument, "duplicate measurement (" + std::to_string(p.first) + "," +
                                           std::to_string(p.second) + ")");
  }
}

MeasurementSet MeasurementSet::all_pairs(std::size_t dim) {
  std::vector<IndexPair> p;
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) p.emplace_back(i, j);
  return MeasurementSet(std::move(p), dim);
}

MeasurementSet MeasurementSet::upper_pairs(std::size_t dim) {
  std::vector<IndexPair> p;
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i; j < dim; ++j) p.emplace_back(i, j);
  return MeasurementSet(std::move(p), dim);
}

Vector FiniteMap::evaluate(const DataOperator& a) const {
  Vector out;
  out.reserve(set_.size());
  for (const auto& [i, j] : set_.pairs()) out.push_back(matrix_element(a, i, j));
  return out;
}

double finite_distance(const FiniteMap& fm, const DataOperator& a, const DataOperator& b) {
  if (a.kind != b.kind || !(a.gram == b.gram)) fail(ErrorCode::BasisMismatch, "operators do not share a basis");
  double s = 0.0;
  for (const auto& [i, j] : fm.set().pairs()) {
    const double d = matrix_element(a, i, j) - matrix_element(b, i, j);
    s += d * d;
  }
  return std::sqrt(s);
}

Selection greedy_select(std::span<const OperatorPair> samples, std::span<const IndexPair> candidates,
                        double target_ratio, std::size_t max_size, unsigned threads) {
  if (samples.empty()) fail(ErrorCode::InvalidArgument, "greedy_select needs at least one sample");
  if (!(target_ratio > 0.0 && target_ratio <= 1.0))
    fail(ErrorCode::InvalidArgument, "target_ratio must lie in (0, 1]");

  const std::size_t dim = samples.front().a->dim();
  const std::size_t ns = samples.size();
  const std::size_t nc = candidates.size();
  for (const auto& [i, j] : candidates)
    if (i >= dim || j >= dim) fail(ErrorCode::IndexOutOfRange, "candidate outside basis dimension");

  Vector dist(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    dist[s] = operator_distance(*samples[s].a, *samples[s].b);
    if (!(dist[s] > 0.0))
      fail(ErrorCode::DegenerateSample, "sample " + std::to_string(s) + " has zero operator distance");
  }
  // gain[c * ns + s]: squared contribution of candidate c to sample s.
  std::vector<double> gain(nc * ns);
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t s = 0; s < ns; ++s) {
      const double d = samples[s].a->matrix(candidates[c].first, candidates[c].second) -
                       samples[s].b->matrix(candidates[c].first, candidates[c].second);
      gain[c * ns + s] = d * d;
    }

  Vector current(ns, 0.0);
  std::vector<char> used(nc, 0);
  std::vector<IndexPair> chosen;
  double ratio = 0.0;

  auto worst_ratio = [&](std::size_t c) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < ns; ++s)
      worst = std::min(worst, std::sqrt(current[s] + gain[c * ns + s]) / dist[s]);
    return worst;
  };

  const unsigned workers = std::max(1u, threads);
  Vector score(nc);
  while (ratio < target_ratio && chosen.size() < max_size) {
    auto score_range = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t c = lo; c < hi; ++c) score[c] = used[c] ? -1.0 : worst_ratio(c);
    };
    if (workers == 1 || nc < 64) {
      score_range(0, nc);
    } else {
      std::vector<std::thread> pool;
      const std::size_t chunk = (nc + workers - 1) / workers;
      for (unsigned t = 0; t < workers; ++t) {
        const std::size_t lo = std::min(nc, t * chunk);
        const std::size_t hi = std::min(nc, lo + chunk);
        pool.emplace_back(score_range, lo, hi);
      }
      for (auto& th : pool) th.join();
    }
    std::size_t best = nc;
    for (std::size_t c = 0; c < nc; ++c)
      if (!used[c] && (best == nc || score[c] > score[best])) best = c;
    if (best == nc) break;
    used[best] = 1;
    chosen.push_back(candidates[best]);
    for (std::size_t s = 0; s < ns; ++s) current[s] += gain[best * ns + s];
    ratio = score[best];
  }

  Selection out;
  out.set = MeasurementSet(std::move(chosen), dim);
  out.ratio = ratio;
  out.reached = ratio >= target_ratio;
  return out;
}

void write_measurement_csv(const MeasurementSet& set, std::ostream& out) {
  for (const auto& [i, j] : set.pairs()) out << i << ',' << j << '\n';
}

}  // namespace hslab
