// hslab command-line front end. Every subcommand takes its settings from a
// JSON config (see README) and writes CSV/JSON outputs whose first line
// records tool version, config hash and seed.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "hslab/hslab.h"

namespace {

using hslab_cli::ConfigError;
using hslab_cli::ExperimentConfig;

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

// Library failure; carries the status so main can print its name.
struct RuntimeFailure : std::runtime_error {
  hslab_status status;
  RuntimeFailure(hslab_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

void check(hslab_status s) {
  if (s != HSLAB_OK) {
    std::string msg = hslab_last_error();
    if (msg.empty()) msg = hslab_status_name(s);
    throw RuntimeFailure(s, msg);
  }
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using MeshPtr = std::unique_ptr<hslab_mesh, Deleter<hslab_mesh, hslab_mesh_destroy>>;
using ProblemPtr = std::unique_ptr<hslab_problem, Deleter<hslab_problem, hslab_problem_destroy>>;
using OperatorPtr = std::unique_ptr<hslab_operator, Deleter<hslab_operator, hslab_operator_destroy>>;
using SweepPtr = std::unique_ptr<hslab_sweep, Deleter<hslab_sweep, hslab_sweep_destroy>>;
using SelectionPtr = std::unique_ptr<hslab_selection, Deleter<hslab_selection, hslab_selection_destroy>>;
using RecordsPtr = std::unique_ptr<hslab_records, Deleter<hslab_records, hslab_records_destroy>>;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string header(const ExperimentConfig& c) {
  return std::string("# hslab ") + hslab_version() + " config=" + hslab_cli::config_hash(c) +
         " seed=" + std::to_string(c.seed);
}

ExperimentConfig load(const std::string& path) {
  auto c = hslab_cli::load_config(path);
  hslab_cli::validate_against_mesh(c);
  return c;
}

MeshPtr make_mesh(const ExperimentConfig& c) {
  hslab_mesh* m = nullptr;
  check(hslab_mesh_create(c.mesh.n_sub, c.mesh.cols, c.mesh.rows, c.mesh.side, c.mesh.t0, c.mesh.t1, &m));
  return MeshPtr(m);
}

ProblemPtr make_problem(const ExperimentConfig& c) {
  const auto mesh = make_mesh(c);
  hslab_problem* p = nullptr;
  check(hslab_problem_create(mesh.get(), c.problem, &p));
  return ProblemPtr(p);
}

std::size_t param_size(const hslab_problem* p) {
  std::size_t n = 0;
  check(hslab_problem_info(p, nullptr, nullptr, &n));
  return n;
}

std::size_t basis_dim(const hslab_problem* p) {
  std::size_t n = 0;
  check(hslab_problem_info(p, &n, nullptr, nullptr));
  return n;
}

OperatorPtr forward(const hslab_problem* p, const std::vector<double>& params) {
  hslab_operator* op = nullptr;
  check(hslab_forward(p, params.data(), params.size(), &op));
  return OperatorPtr(op);
}

std::vector<double> sample(const hslab_problem* p, const ExperimentConfig& c, std::size_t index) {
  std::vector<double> v(param_size(p));
  check(hslab_problem_sample(p, c.lambda_lo, c.lambda_hi, c.seed, index, v.data(), v.size()));
  return v;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw RuntimeFailure(HSLAB_IO_ERROR, "IoError: cannot open '" + path + "' for writing");
  return f;
}

SweepPtr run_sweep(const hslab_problem* p, const ExperimentConfig& c, unsigned threads) {
  hslab_sweep_config sc;
  hslab_sweep_config_init(&sc);
  sc.lambda_lo = c.lambda_lo;
  sc.lambda_hi = c.lambda_hi;
  sc.recovered_cells = c.recovered_cells.empty() ? nullptr : c.recovered_cells.data();
  sc.n_recovered = c.recovered_cells.size();
  sc.random_pairs = c.sweep.random_pairs;
  sc.rays = c.sweep.rays;
  sc.ray_steps = c.sweep.ray_steps;
  sc.t_min = c.sweep.t_min;
  sc.t_max = c.sweep.t_max;
  sc.seed = c.seed;
  sc.probe_k = c.probe_k;
  sc.threads = threads;
  hslab_sweep* s = nullptr;
  check(hslab_sweep_run(p, &sc, &s));
  return SweepPtr(s);
}

void write_sweep_records(const hslab_sweep* s, const std::string& path, const std::string& head) {
  hslab_records* r = nullptr;
  check(hslab_sweep_records(s, &r));
  const RecordsPtr records(r);
  check(hslab_records_write_csv(records.get(), path.c_str(), head.c_str()));
}

nlohmann::ordered_json fit_json(const hslab_fit& f, const std::string& comment, const char* column) {
  nlohmann::ordered_json j;
  j["comment"] = comment;
  j["column"] = column;
  j["theta"] = f.theta;
  j["theta_precap"] = f.theta_precap;
  if (std::isfinite(f.log_C))
    j["log_C"] = f.log_C;
  else
    j["log_C"] = nullptr;  // constant recovered quantity
  j["n_bins"] = f.n_bins;
  j["slack"] = f.slack;
  j["max_violation"] = f.max_violation;
  j["records_used"] = f.records_used;
  j["dropped"] = f.dropped;
  j["violations"] = f.violations;
  j["constant_R"] = f.constant_R != 0;
  return j;
}

// ---- subcommands

int cmd_validate(const std::string& path) {
  const auto c = load(path);
  std::cout << hslab_cli::normalized(c).dump(2) << '\n';
  return 0;
}

int cmd_mesh(const std::string& path) {
  const auto c = load(path);
  const auto mesh = make_mesh(c);
  const auto out = c.output.resolve(c.output.mesh).string();
  check(hslab_mesh_write(mesh.get(), out.c_str(), header(c).c_str()));
  std::size_t nodes = 0, tris = 0, edges = 0;
  check(hslab_mesh_counts(mesh.get(), &nodes, &tris, &edges));
  std::cout << "nodes " << nodes << "\ntriangles " << tris << "\npatch_edges " << edges << "\nwrote " << out << '\n';
  return 0;
}

int cmd_forward(const std::string& path) {
  const auto c = load(path);
  const auto problem = make_problem(c);
  const auto params = c.forward.params.empty() ? sample(problem.get(), c, c.forward.sample_index) : c.forward.params;
  const auto op = forward(problem.get(), params);
  const auto out = c.output.resolve(c.output.forward).string();
  check(hslab_operator_write_csv(op.get(), out.c_str(), header(c).c_str()));
  double asym = 0.0;
  check(hslab_operator_asymmetry(op.get(), &asym));
  std::cout << "dim " << hslab_operator_dim(op.get()) << "\nraw_asymmetry " << fmt(asym) << "\nwrote " << out
            << '\n';
  return 0;
}

int cmd_derivcheck(const std::string& path) {
  const auto c = load(path);
  const auto problem = make_problem(c);
  const std::size_t n = param_size(problem.get());
  const std::size_t k = basis_dim(problem.get());
  const auto p = sample(problem.get(), c, c.derivcheck.sample_index);
  std::vector<double> dp(n);
  check(hslab_problem_direction(problem.get(), c.seed, c.derivcheck.sample_index, dp.data(), n));

  std::vector<double> d(k * k);
  check(hslab_derivative(problem.get(), p.data(), dp.data(), n, d.data(), d.size()));
  double dnorm = 0.0;
  for (double v : d) dnorm = std::max(dnorm, std::abs(v));

  const auto out = c.output.resolve(c.output.derivcheck).string();
  auto f = open_output(out);
  f << header(c) << "\nh,rel_error\n";
  std::vector<double> m_plus(k * k), m_minus(k * k);
  for (double h : c.derivcheck.steps) {
    std::vector<double> a(p), b(p);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] += h * dp[i];
      b[i] -= h * dp[i];
    }
    check(hslab_operator_matrix(forward(problem.get(), a).get(), m_plus.data(), m_plus.size()));
    check(hslab_operator_matrix(forward(problem.get(), b).get(), m_minus.data(), m_minus.size()));
    double err = 0.0;
    for (std::size_t i = 0; i < k * k; ++i) err = std::max(err, std::abs((m_plus[i] - m_minus[i]) / (2 * h) - d[i]));
    const double rel = dnorm > 0.0 ? err / dnorm : err;
    f << fmt(h) << ',' << fmt(rel) << '\n';
    std::cout << "h " << fmt(h) << " rel_error " << fmt(rel) << '\n';
  }
  f.flush();
  if (!f) throw RuntimeFailure(HSLAB_IO_ERROR, "IoError: write to '" + out + "' failed");
  std::cout << "wrote " << out << '\n';
  return 0;
}

int cmd_sweep(const std::string& path, unsigned threads) {
  const auto c = load(path);
  const auto problem = make_problem(c);
  const auto s = run_sweep(problem.get(), c, threads);
  const auto out = c.output.resolve(c.output.records).string();
  write_sweep_records(s.get(), out, header(c));
  std::size_t n = 0, dropped = 0;
  check(hslab_sweep_counts(s.get(), &n, &dropped));
  std::cout << "records " << n << "\ndropped " << dropped << "\nwrote " << out << '\n';
  return 0;
}

int cmd_select(const std::string& path, unsigned threads) {
  const auto c = load(path);
  const auto problem = make_problem(c);
  const auto s = run_sweep(problem.get(), c, threads);
  const std::size_t k = basis_dim(problem.get());
  const std::size_t max_size = c.select.max_size ? c.select.max_size : k * (k + 1) / 2;
  hslab_selection* raw = nullptr;
  check(hslab_sweep_select(s.get(), c.select.target_ratio, max_size, threads, &raw));
  const SelectionPtr sel(raw);
  check(hslab_sweep_attach_selection(s.get(), sel.get()));

  const auto sel_out = c.output.resolve(c.output.selection).string();
  const auto rec_out = c.output.resolve(c.output.records_finite).string();
  check(hslab_selection_write_csv(sel.get(), sel_out.c_str(), header(c).c_str()));
  write_sweep_records(s.get(), rec_out, header(c));

  std::size_t size = 0;
  double ratio = 0.0;
  int reached = 0;
  check(hslab_selection_info(sel.get(), &size, &ratio, &reached));
  std::cout << "size " << size << "\nratio " << fmt(ratio) << "\nreached " << (reached ? "true" : "false")
            << "\nwrote " << sel_out << "\nwrote " << rec_out << '\n';
  if (!reached)
    throw RuntimeFailure(HSLAB_CANNOT_REACH_RATIO, std::string("CannotReachRatio: ratio ") + fmt(ratio) +
                                                       " below target " + fmt(c.select.target_ratio) +
                                                       " at max_size " + std::to_string(max_size));
  return 0;
}

// First-line seed of a records file written by this tool, if any.
std::string records_seed(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# hslab", 0) != 0) return "unknown";
  const auto pos = line.find("seed=");
  return pos == std::string::npos ? "unknown" : line.substr(pos + 5);
}

struct FitOptions {
  std::string records;
  std::string config;
  std::string out;
  std::size_t n_bins = 0;
  double slack = -1.0;
  std::string column;
};

int cmd_fit(const FitOptions& o) {
  hslab_cli::FitConfig fc;
  std::string comment;
  std::string out = o.out;
  if (!o.config.empty()) {
    const auto c = load(o.config);
    fc = c.fit;
    comment = header(c).substr(2);
    if (out.empty()) out = c.output.resolve(c.output.fit).string();
  }
  if (o.n_bins) fc.n_bins = o.n_bins;
  if (o.slack >= 0.0) fc.slack = o.slack;
  if (!o.column.empty()) fc.use_finite = o.column == "delta_finite";
  if (comment.empty()) {
    // No config: the hash covers the fit settings alone.
    std::ostringstream s;
    s << "fit n_bins=" << fc.n_bins << " slack=" << fmt(fc.slack) << " column=" << fc.use_finite;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s.str()) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    comment = std::string("hslab ") + hslab_version() + " config=" + buf + " seed=" + records_seed(o.records);
  }

  {
    std::ifstream probe(o.records);
    if (!probe) throw ConfigError("cannot read records file '" + o.records + "'");
  }
  hslab_records* raw = nullptr;
  check(hslab_records_read_csv(o.records.c_str(), &raw));
  const RecordsPtr records(raw);
  hslab_fit fit{};
  check(hslab_fit_records(records.get(), fc.n_bins, fc.slack, fc.use_finite, &fit));
  const std::string body = fit_json(fit, comment, fc.use_finite ? "delta_finite" : "delta_F").dump(2) + "\n";
  if (out.empty()) {
    std::cout << body;
  } else {
    auto f = open_output(out);
    f << body;
    f.flush();
    if (!f) throw RuntimeFailure(HSLAB_IO_ERROR, "IoError: write to '" + out + "' failed");
    std::cout << "theta " << fmt(fit.theta) << "\nwrote " << out << '\n';
  }
  return 0;
}

int cmd_counterexample(const std::string& path) {
  const auto c = load(path);
  const auto& ts = c.counterexample.ts;
  std::vector<hslab_flat_sample> flat(ts.size()), cubic(ts.size());
  check(hslab_flat_counterexample(ts.data(), ts.size(), c.counterexample.tol, flat.data()));
  hslab_fit fit{};
  check(hslab_analytic_control(ts.data(), ts.size(), c.fit.n_bins, c.fit.slack, cubic.data(), &fit));

  const auto flat_out = c.output.resolve(c.output.flat).string();
  const auto cubic_out = c.output.resolve(c.output.analytic).string();
  auto write_table = [&](const std::string& file, const std::vector<hslab_flat_sample>& rows, bool bound) {
    auto f = open_output(file);
    f << header(c) << '\n' << (bound ? "t,F_t,bound,local_slope\n" : "t,F_t,local_slope\n");
    for (const auto& r : rows) {
      f << fmt(r.t) << ',' << fmt(r.F_t);
      if (bound) f << ',' << fmt(r.t * std::exp(-1.0 / (r.t * r.t)));
      f << ',' << fmt(r.local_slope) << '\n';
    }
    f.flush();
    if (!f) throw RuntimeFailure(HSLAB_IO_ERROR, "IoError: write to '" + file + "' failed");
  };
  write_table(flat_out, flat, true);
  write_table(cubic_out, cubic, false);

  std::cout << "t flat_slope cubic_slope\n";
  for (std::size_t i = 0; i < ts.size(); ++i)
    std::cout << fmt(ts[i]) << ' ' << fmt(flat[i].local_slope) << ' ' << fmt(cubic[i].local_slope) << '\n';
  std::cout << "cubic_pair_theta " << fmt(fit.theta) << "\nwrote " << flat_out << "\nwrote " << cubic_out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hslab: Hölder stability experiments for boundary data maps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hslab_version()));

  std::string config;
  unsigned threads = 1;
  FitOptions fit;

  auto add_config = [&](CLI::App* sub) { sub->add_option("config", config, "experiment config (JSON)")->required(); };
  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "parallelism budget; results do not depend on it")
        ->check(CLI::PositiveNumber);
  };

  auto* validate = app.add_subcommand("validate", "print the effective config with defaults filled");
  add_config(validate);
  auto* mesh = app.add_subcommand("mesh", "write the mesh file and print counts");
  add_config(mesh);
  auto* fwd = app.add_subcommand("forward", "write the data operator matrix as CSV");
  add_config(fwd);
  auto* deriv = app.add_subcommand("derivcheck", "compare the derivative with central differences");
  add_config(deriv);
  auto* sw = app.add_subcommand("sweep", "write stability records");
  add_config(sw);
  add_threads(sw);
  auto* sel = app.add_subcommand("select", "greedy measurement selection on the sweep");
  add_config(sel);
  add_threads(sel);
  auto* ce = app.add_subcommand("counterexample", "flat map and analytic control tables");
  add_config(ce);
  auto* ft = app.add_subcommand("fit", "fit a Hölder envelope to a records CSV");
  ft->add_option("records", fit.records, "records CSV")->required();
  ft->add_option("--config", fit.config, "take fit settings and output path from a config");
  ft->add_option("-o,--output", fit.out, "output JSON (default: stdout)");
  ft->add_option("--bins", fit.n_bins, "number of log delta_F bins")->check(CLI::PositiveNumber);
  ft->add_option("--slack", fit.slack, "log-slack for violations")->check(CLI::NonNegativeNumber);
  ft->add_option("--column", fit.column, "delta_F or delta_finite")
      ->check(CLI::IsMember({"delta_F", "delta_finite"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*validate) return cmd_validate(config);
    if (*mesh) return cmd_mesh(config);
    if (*fwd) return cmd_forward(config);
    if (*deriv) return cmd_derivcheck(config);
    if (*sw) return cmd_sweep(config, threads);
    if (*sel) return cmd_select(config, threads);
    if (*ce) return cmd_counterexample(config);
    if (*ft) return cmd_fit(fit);
  } catch (const ConfigError& e) {
    std::cerr << "hslab: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const RuntimeFailure& e) {
    std::cerr << "hslab: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "hslab: InternalError: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
