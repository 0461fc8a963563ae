#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "hslab/hslab.h"

namespace {

struct Fixture {
  hslab_mesh* mesh = nullptr;
  hslab_problem* problem = nullptr;
  size_t dim = 0, cells = 0, params = 0;

  explicit Fixture(hslab_problem_kind kind, int n = 4, int cols = 2) {
    EXPECT_EQ(hslab_mesh_create(n, cols, 1, HSLAB_BOTTOM, 0.0, 1.0, &mesh), HSLAB_OK);
    EXPECT_EQ(hslab_problem_create(mesh, kind, &problem), HSLAB_OK);
    EXPECT_EQ(hslab_problem_info(problem, &dim, &cells, &params), HSLAB_OK);
  }
  ~Fixture() {
    hslab_problem_destroy(problem);
    hslab_mesh_destroy(mesh);
  }
};

double linear(double s, void*) { return s; }

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(hslab_version(), "0.3.0");
  EXPECT_STREQ(hslab_status_name(HSLAB_OK), "Ok");
  EXPECT_STREQ(hslab_status_name(HSLAB_EMPTY_PATCH), "EmptyPatch");
}

TEST(CApi, ErrorsReportStatusAndMessage) {
  hslab_mesh* mesh = nullptr;
  EXPECT_EQ(hslab_mesh_create(5, 2, 1, HSLAB_BOTTOM, 0, 1, &mesh), HSLAB_INCOMPATIBLE_SUBDIVISION);
  EXPECT_EQ(mesh, nullptr);
  EXPECT_NE(std::string(hslab_last_error()).size(), 0u);
  EXPECT_EQ(hslab_mesh_create(4, 1, 1, HSLAB_BOTTOM, 0, 1, nullptr), HSLAB_INVALID_ARGUMENT);
}

TEST(CApi, ForwardLifecycle) {
  Fixture f(HSLAB_CONDUCTIVITY);
  EXPECT_EQ(f.dim, 4u);
  EXPECT_EQ(f.cells, 2u);
  EXPECT_EQ(f.params, 6u);
  std::vector<double> p(f.params);
  ASSERT_EQ(hslab_problem_sample(f.problem, 0.5, 2.0, 3, 0, p.data(), p.size()), HSLAB_OK);
  hslab_operator* a = nullptr;
  ASSERT_EQ(hslab_forward(f.problem, p.data(), p.size(), &a), HSLAB_OK);
  ASSERT_EQ(hslab_operator_dim(a), f.dim);

  std::vector<double> m(f.dim * f.dim);
  ASSERT_EQ(hslab_operator_matrix(a, m.data(), m.size()), HSLAB_OK);
  for (size_t i = 0; i < f.dim; ++i)
    for (size_t j = 0; j < f.dim; ++j) {
      EXPECT_EQ(m[i * f.dim + j], m[j * f.dim + i]);
      double e = 0.0;
      ASSERT_EQ(hslab_matrix_element(a, i, j, &e), HSLAB_OK);
      EXPECT_EQ(e, m[i * f.dim + j]);
    }
  double e = 0.0;
  EXPECT_EQ(hslab_matrix_element(a, f.dim, 0, &e), HSLAB_INDEX_OUT_OF_RANGE);
  EXPECT_EQ(hslab_operator_matrix(a, m.data(), 3), HSLAB_DIMENSION_MISMATCH);

  // Doubling the conductivity halves the matrix.
  std::vector<double> p2(p);
  for (double& v : p2) v *= 2;
  hslab_operator* b = nullptr;
  ASSERT_EQ(hslab_forward(f.problem, p2.data(), p2.size(), &b), HSLAB_OK);
  double d = 0.0, phi = -1.0, self = -1.0;
  ASSERT_EQ(hslab_operator_distance(a, b, &d), HSLAB_OK);
  EXPECT_GT(d, 0.0);
  ASSERT_EQ(hslab_phi(a, b, 0, &phi), HSLAB_OK);
  EXPECT_GT(phi, 0.0);
  ASSERT_EQ(hslab_phi(a, a, 0, &self), HSLAB_OK);
  EXPECT_EQ(self, 0.0);
  EXPECT_EQ(hslab_phi(a, b, f.dim + 1, &phi), HSLAB_INVALID_ARGUMENT);

  // Radial derivative of the conductivity map is minus the map.
  std::vector<double> dm(f.dim * f.dim);
  ASSERT_EQ(hslab_derivative(f.problem, p.data(), p.data(), p.size(), dm.data(), dm.size()), HSLAB_OK);
  for (size_t i = 0; i < dm.size(); ++i) EXPECT_NEAR(dm[i], -m[i], 1e-10 * std::abs(m[0]));

  hslab_operator_destroy(a);
  hslab_operator_destroy(b);

  p[2] = 10.0;  // not positive definite
  hslab_operator* bad = nullptr;
  EXPECT_EQ(hslab_forward(f.problem, p.data(), p.size(), &bad), HSLAB_NOT_POSITIVE_DEFINITE);
  EXPECT_EQ(hslab_forward(f.problem, p.data(), 5, &bad), HSLAB_CELL_COUNT_MISMATCH);
}

TEST(CApi, SweepSelectFit) {
  Fixture f(HSLAB_CONDUCTIVITY);
  hslab_sweep_config cfg;
  hslab_sweep_config_init(&cfg);
  cfg.random_pairs = 20;
  cfg.rays = 4;
  cfg.ray_steps = 10;
  cfg.t_min = 1e-4;
  cfg.seed = 5;
  hslab_sweep* sw = nullptr;
  ASSERT_EQ(hslab_sweep_run(f.problem, &cfg, &sw), HSLAB_OK);
  size_t n = 0, dropped = 0;
  ASSERT_EQ(hslab_sweep_counts(sw, &n, &dropped), HSLAB_OK);
  EXPECT_EQ(n, 60u);
  EXPECT_EQ(dropped, 0u);

  hslab_selection* sel = nullptr;
  ASSERT_EQ(hslab_sweep_select(sw, 0.5, 0, 1, &sel), HSLAB_OK);
  size_t size = 0;
  double ratio = 0.0;
  int reached = 0;
  ASSERT_EQ(hslab_selection_info(sel, &size, &ratio, &reached), HSLAB_OK);
  EXPECT_TRUE(reached);
  EXPECT_GE(ratio, 0.5);
  EXPECT_LE(size, f.dim * (f.dim + 1) / 2);
  ASSERT_EQ(hslab_sweep_attach_selection(sw, sel), HSLAB_OK);

  hslab_records* recs = nullptr;
  ASSERT_EQ(hslab_sweep_records(sw, &recs), HSLAB_OK);
  hslab_record r;
  ASSERT_EQ(hslab_records_get(recs, 0, &r), HSLAB_OK);
  EXPECT_FALSE(std::isnan(r.delta_finite));
  EXPECT_EQ(hslab_records_get(recs, n, &r), HSLAB_INDEX_OUT_OF_RANGE);
  hslab_fit fit;
  ASSERT_EQ(hslab_fit_records(recs, 8, 0.1, 0, &fit), HSLAB_OK);
  EXPECT_GT(fit.theta, 0.0);
  EXPECT_EQ(fit.violations, 0u);
  size_t count = 99;
  ASSERT_EQ(hslab_injectivity_probe(recs, 1e-8, 1.0, nullptr, 0, &count), HSLAB_OK);
  EXPECT_EQ(count, 0u);

  const std::string path = ::testing::TempDir() + "c_api_records.csv";
  ASSERT_EQ(hslab_records_write_csv(recs, path.c_str(), "# header"), HSLAB_OK);
  hslab_records* back = nullptr;
  ASSERT_EQ(hslab_records_read_csv(path.c_str(), &back), HSLAB_OK);
  EXPECT_EQ(hslab_records_count(back), n);
  std::remove(path.c_str());

  hslab_records_destroy(back);
  hslab_records_destroy(recs);
  hslab_selection_destroy(sel);
  hslab_sweep_destroy(sw);
}

TEST(CApi, RecordsFromScratch) {
  hslab_records* recs = nullptr;
  ASSERT_EQ(hslab_records_create(&recs), HSLAB_OK);
  for (int i = 0; i <= 40; ++i) {
    hslab_record r{};
    r.pair_id = static_cast<size_t>(i);
    r.delta_F = std::pow(10.0, -4.0 + 0.1 * i);
    r.delta_R = std::sqrt(r.delta_F);
    r.delta_finite = NAN;
    ASSERT_EQ(hslab_records_append(recs, &r), HSLAB_OK);
  }
  hslab_fit fit;
  ASSERT_EQ(hslab_fit_records(recs, 10, 0.1, 0, &fit), HSLAB_OK);
  EXPECT_NEAR(fit.theta, 0.5, 1e-6);
  EXPECT_EQ(hslab_fit_records(recs, 10, 0.1, 1, &fit), HSLAB_INSUFFICIENT_SPREAD);
  EXPECT_EQ(hslab_records_read_csv("/nonexistent/records.csv", &recs), HSLAB_IO_ERROR);
  hslab_records_destroy(recs);
}

TEST(CApi, FlatAndQuadrature) {
  const double ts[] = {0.1, 0.2};
  hslab_flat_sample out[2];
  ASSERT_EQ(hslab_flat_counterexample(ts, 2, 1e-12, out), HSLAB_OK);
  EXPECT_GT(out[0].local_slope, 100.0);
  hslab_fit fit;
  EXPECT_EQ(hslab_analytic_control(ts, 2, 4, 0.1, out, &fit), HSLAB_INSUFFICIENT_SPREAD);
  double v = 0.0;
  ASSERT_EQ(hslab_adaptive_quadrature(linear, nullptr, 0.0, 1.0, 1e-12, &v), HSLAB_OK);
  EXPECT_NEAR(v, 0.5, 1e-12);
}
