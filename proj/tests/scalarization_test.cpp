#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "hslab/errors.hpp"
#include "hslab/forward_problem.hpp"
#include "hslab/scalarization.hpp"
#include "test_util.hpp"

using namespace hslab;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no hslab::Error thrown";
  return ErrorCode::InvalidArgument;
}

DataOperator make_op(const DenseSym& m, const DenseSym& gram) {
  DataOperator op;
  op.matrix = m;
  op.gram = gram;
  return op;
}

DenseSym random_sym(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseSym m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m.set(i, j, g(rng));
  return m;
}

}  // namespace

TEST(ProbeWeights, Examples) {
  const auto w = probe_weights(3);
  EXPECT_EQ(w.weights, (std::vector<double>{0.5, 0.25, 0.125}));
  EXPECT_DOUBLE_EQ(w.sum_of_squares(), 0.328125);
  EXPECT_NEAR(probe_weights(40).sum_of_squares(), 1.0 / 3.0, 1e-16);
  for (std::size_t k = 1; k < 30; ++k)
    EXPECT_NEAR(probe_weights(k).sum_of_squares(), (1.0 - std::pow(4.0, -static_cast<double>(k))) / 3.0, 1e-16);
  EXPECT_EQ(code_of([] { probe_weights(0); }), ErrorCode::InvalidArgument);
}

TEST(Phi, Basics) {
  std::mt19937_64 rng(1);
  const auto g = hslab::test::random_spd(5, 2);
  const auto a = make_op(random_sym(5, rng), g), b = make_op(random_sym(5, rng), g);
  const auto w = probe_weights(5);
  EXPECT_EQ(phi(a, a, w), 0.0);
  EXPECT_DOUBLE_EQ(phi(a, b, w), phi(b, a, w));
  EXPECT_GT(phi(a, b, w), 0.0);
  EXPECT_EQ(code_of([&] { phi(a, b, probe_weights(6)); }), ErrorCode::InvalidArgument);
  const auto c = make_op(a.matrix, DenseSym::identity(5));
  EXPECT_EQ(code_of([&] { phi(a, c, w); }), ErrorCode::BasisMismatch);
}

TEST(Phi, HilbertSchmidtBoundAndSandwich) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
    const auto g = hslab::test::random_spd(n, 100 + static_cast<std::uint64_t>(trial));
    const auto a = make_op(random_sym(n, rng), g), b = make_op(random_sym(n, rng), g);
    const auto w = probe_weights(n);
    const double d = operator_distance(a, b);
    const double s = w.sum_of_squares();
    const double f = phi(a, b, w);
    EXPECT_LE(f, s * s * d * d * (1 + 1e-12));
    // Lower side: the smallest squared weight times the distance.
    const double wmin = w.weights.back() * w.weights.back();
    EXPECT_GE(std::sqrt(f), wmin * d * (1 - 1e-12));
  }
}

TEST(Phi, TruncationDropsTrailingDirections) {
  // Whitened difference supported on the last direction only.
  const auto g = DenseSym::identity(4);
  DenseSym m(4);
  m.set(3, 3, 1.0);
  const auto a = make_op(DenseSym(4), g), b = make_op(m, g);
  EXPECT_EQ(phi(a, b, probe_weights(3)), 0.0);
  EXPECT_GT(phi(a, b, probe_weights(4)), 0.0);
}

TEST(OperatorDistance, Examples) {
  std::mt19937_64 rng(4);
  const auto g = hslab::test::random_spd(4, 5);
  const auto a = make_op(random_sym(4, rng), g);
  EXPECT_EQ(operator_distance(a, a), 0.0);
  const auto b = make_op(a.matrix + g, g);
  EXPECT_NEAR(operator_distance(a, b), 1.0, 1e-13);
  EXPECT_NEAR(operator_distance(a, b), operator_distance(b, a), 1e-15);
  auto c = b;
  c.kind = OperatorKind::elasticity_dn;
  EXPECT_EQ(code_of([&] { operator_distance(a, c); }), ErrorCode::BasisMismatch);
}

TEST(OperatorDistance, ConductivityScaling) {
  const ForwardProblem problem(build_mesh(8, PartitionSpec(2, 1), PatchSpec()), ProblemKind::conductivity);
  const std::vector<double> p{1.2, 0.8, 0.1, 0.9, 1.5, -0.2};
  std::vector<double> p2(p);
  for (double& v : p2) v *= 2;
  const auto a = problem.evaluate(p), b = problem.evaluate(p2);
  EXPECT_NEAR(operator_distance(a, b), 0.5 * operator_norm(a), 1e-12 * operator_norm(a));
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) {
      EXPECT_EQ(matrix_element(a, i, j), matrix_element(a, j, i));
      EXPECT_NEAR(matrix_element(b, i, j), 0.5 * matrix_element(a, i, j), 1e-12 * a.matrix.max_abs());
    }
}

TEST(Faithfulness, PhiZeroIffDistanceZero) {
  const ForwardProblem problem(build_mesh(8, PartitionSpec(2, 2), PatchSpec()), ProblemKind::conductivity);
  const auto w = probe_weights(problem.basis_dim());
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.6, 1.8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(problem.param_size()), q(problem.param_size());
    for (std::size_t i = 0; i < p.size(); i += 3) {
      p[i] = u(rng);
      p[i + 1] = u(rng);
      q[i] = u(rng);
      q[i + 1] = u(rng);
    }
    const auto a = problem.evaluate(p), b = problem.evaluate(q), a2 = problem.evaluate(p);
    EXPECT_GT(phi(a, b, w), 0.0);
    EXPECT_GT(operator_distance(a, b), 0.0);
    EXPECT_EQ(phi(a, a2, w), 0.0);
    EXPECT_EQ(operator_distance(a, a2), 0.0);
  }
}

TEST(MatrixElement, ZeroOperatorAndRange) {
  const auto z = make_op(DenseSym(3), DenseSym::identity(3));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(matrix_element(z, i, j), 0.0);
  EXPECT_EQ(code_of([&] { matrix_element(z, 3, 0); }), ErrorCode::IndexOutOfRange);
}

TEST(MeasurementSet, Validation) {
  EXPECT_EQ(code_of([] { MeasurementSet({{0, 1}, {0, 1}}, 3); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { MeasurementSet({{0, 3}}, 3); }), ErrorCode::IndexOutOfRange);
  EXPECT_EQ(MeasurementSet::all_pairs(3).size(), 9u);
  EXPECT_EQ(MeasurementSet::upper_pairs(4).size(), 10u);
}

TEST(FiniteDistance, Examples) {
  std::mt19937_64 rng(7);
  const auto g = DenseSym::identity(4);
  const auto a = make_op(random_sym(4, rng), g), b = make_op(random_sym(4, rng), g);
  const FiniteMap all(MeasurementSet::all_pairs(4));
  const DenseSym diff = a.matrix - b.matrix;
  double frob = 0.0;
  for (double v : diff.data()) frob += v * v;
  EXPECT_NEAR(finite_distance(all, a, b), std::sqrt(frob), 1e-14);
  EXPECT_EQ(finite_distance(all, a, a), 0.0);
  const FiniteMap single(MeasurementSet({{1, 1}}, 4));
  EXPECT_DOUBLE_EQ(finite_distance(single, a, b), std::abs(a.matrix(1, 1) - b.matrix(1, 1)));
  EXPECT_DOUBLE_EQ(finite_distance(single, a, b), finite_distance(single, b, a));
  EXPECT_EQ(all.evaluate(a).size(), 16u);
}

TEST(Greedy, SingleEntryDifference) {
  std::mt19937_64 rng(8);
  const auto g = DenseSym::identity(3);
  const auto base = random_sym(3, rng);
  DenseSym bump(3);
  bump.set(2, 2, 0.7);
  const DataOperator a = make_op(base, g), b = make_op(base + bump, g);
  const std::vector<OperatorPair> samples{{&a, &b}};
  const auto cand = MeasurementSet::upper_pairs(3);
  const auto sel = greedy_select(samples, cand.pairs(), 1.0, 6);
  ASSERT_EQ(sel.set.size(), 1u);
  EXPECT_EQ(sel.set.pairs()[0], (IndexPair{2, 2}));
  EXPECT_TRUE(sel.reached);
  EXPECT_NEAR(sel.ratio, 1.0, 1e-14);
}

TEST(Greedy, EmptyCandidatesFlagged) {
  const auto g = DenseSym::identity(2);
  DenseSym m(2);
  m.set(0, 0, 1.0);
  const DataOperator a = make_op(DenseSym(2), g), b = make_op(m, g);
  const std::vector<OperatorPair> samples{{&a, &b}};
  const auto sel = greedy_select(samples, {}, 0.5, 3);
  EXPECT_EQ(sel.set.size(), 0u);
  EXPECT_FALSE(sel.reached);
}

TEST(Greedy, DegenerateSampleRejected) {
  const auto g = DenseSym::identity(2);
  const DataOperator a = make_op(DenseSym(2), g);
  const std::vector<OperatorPair> samples{{&a, &a}};
  const auto cand = MeasurementSet::upper_pairs(2);
  EXPECT_EQ(code_of([&] { greedy_select(samples, cand.pairs(), 0.5, 3); }), ErrorCode::DegenerateSample);
  EXPECT_EQ(code_of([&] { greedy_select({}, cand.pairs(), 0.5, 3); }), ErrorCode::InvalidArgument);
}

TEST(Greedy, AgainstBruteForceOnThreeByThree) {
  std::mt19937_64 rng(10);
  const auto g = DenseSym::identity(3);
  std::vector<DataOperator> ops;
  for (int i = 0; i < 12; ++i) ops.push_back(make_op(random_sym(3, rng), g));
  std::vector<OperatorPair> samples;
  for (std::size_t i = 0; i + 1 < ops.size(); i += 2) samples.push_back({&ops[i], &ops[i + 1]});
  const auto cand = MeasurementSet::upper_pairs(3).pairs();

  auto worst_ratio = [&](const std::vector<IndexPair>& set) {
    const FiniteMap fm(MeasurementSet(set, 3));
    double r = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) r = std::min(r, finite_distance(fm, *s.a, *s.b) / operator_distance(*s.a, *s.b));
    return r;
  };
  std::vector<double> best(cand.size() + 1, 0.0);
  for (unsigned mask = 1; mask < (1u << cand.size()); ++mask) {
    std::vector<IndexPair> set;
    for (std::size_t c = 0; c < cand.size(); ++c)
      if (mask & (1u << c)) set.push_back(cand[c]);
    best[set.size()] = std::max(best[set.size()], worst_ratio(set));
  }

  double prev = 0.0;
  for (std::size_t m = 1; m <= cand.size(); ++m) {
    const auto sel = greedy_select(samples, cand, 1.0, m);
    EXPECT_EQ(sel.set.size(), m);
    EXPECT_NEAR(sel.ratio, worst_ratio(sel.set.pairs()), 1e-14);
    EXPECT_LE(sel.ratio, best[m] + 1e-14);
    EXPECT_GE(sel.ratio, prev);  // monotone in max_size
    prev = sel.ratio;
  }
  // Greedy's first choice is optimal among singletons.
  EXPECT_NEAR(greedy_select(samples, cand, 1.0, 1).ratio, best[1], 1e-14);
  // All upper pairs: sum over i<=j of D_ij^2 >= |D|_F^2 / 2 >= |D|_2^2 / 2.
  EXPECT_GE(best[cand.size()], 1.0 / std::sqrt(2.0) - 1e-14);
}

TEST(Greedy, ThreadCountDoesNotChangeResult) {
  std::mt19937_64 rng(11);
  const auto g = DenseSym::identity(5);
  std::vector<DataOperator> ops;
  for (int i = 0; i < 20; ++i) ops.push_back(make_op(random_sym(5, rng), g));
  std::vector<OperatorPair> samples;
  for (std::size_t i = 0; i + 1 < ops.size(); i += 2) samples.push_back({&ops[i], &ops[i + 1]});
  const auto cand = MeasurementSet::upper_pairs(5).pairs();
  const auto one = greedy_select(samples, cand, 0.9, 15, 1);
  const auto many = greedy_select(samples, cand, 0.9, 15, 7);
  EXPECT_EQ(one.set.pairs(), many.set.pairs());
  EXPECT_EQ(one.ratio, many.ratio);
}

TEST(MeasurementCsv, Format) {
  std::ostringstream out;
  write_measurement_csv(MeasurementSet({{0, 2}, {1, 1}}, 3), out);
  EXPECT_EQ(out.str(), "0,2\n1,1\n");
}
