#include "config.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace hslab_cli {

using json = nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& msg) {
  throw ConfigError("field '" + field + "': " + msg);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Rejects keys not in `allowed` so that typos do not silently fall back to
// defaults.
void check_keys(const json& obj, const std::string& prefix, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    if (prefix.empty()) throw ConfigError("config root must be a JSON object");
    field_error(prefix, "expected an object");
  }
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) field_error(join(prefix, key), "unknown key");
}

const json* child(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& obj, const std::string& prefix, const char* key, double fallback) {
  const json* v = child(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) field_error(join(prefix, key), "expected a number");
  const double d = v->get<double>();
  if (!std::isfinite(d)) field_error(join(prefix, key), "must be finite");
  return d;
}

std::uint64_t unsigned_int(const json& obj, const std::string& prefix, const char* key, std::uint64_t fallback) {
  const json* v = child(obj, key);
  if (!v) return fallback;
  if (!v->is_number_unsigned()) field_error(join(prefix, key), "expected a non-negative integer");
  return v->get<std::uint64_t>();
}

std::string text(const json& obj, const std::string& prefix, const char* key, const std::string& fallback) {
  const json* v = child(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) field_error(join(prefix, key), "expected a string");
  return v->get<std::string>();
}

std::vector<double> numbers(const json& obj, const std::string& prefix, const char* key,
                            const std::vector<double>& fallback) {
  const json* v = child(obj, key);
  if (!v) return fallback;
  const std::string f = join(prefix, key);
  if (!v->is_array()) field_error(f, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v->size(); ++i) {
    const json& e = (*v)[i];
    if (!e.is_number()) field_error(f + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(e.get<double>());
  }
  return out;
}

const json& section(const json& root, const char* key) {
  static const json empty = json::object();
  const json* v = child(root, key);
  return v ? *v : empty;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

const char* side_name(hslab_side s) {
  switch (s) {
    case HSLAB_BOTTOM: return "bottom";
    case HSLAB_RIGHT: return "right";
    case HSLAB_TOP: return "top";
    case HSLAB_LEFT: return "left";
  }
  return "bottom";
}

// A missing directory is fine when its nearest existing ancestor is writable.
void check_writable_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  auto probe = std::filesystem::absolute(dir, ec);
  while (!std::filesystem::exists(probe, ec) && probe.has_parent_path() && probe.parent_path() != probe)
    probe = probe.parent_path();
  if (!std::filesystem::is_directory(probe, ec))
    field_error("output.dir", "'" + probe.string() + "' is not a directory");
  if (::access(probe.c_str(), W_OK) != 0) field_error("output.dir", "'" + probe.string() + "' is not writable");
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string body = buf.str();

  json root;
  try {
    root = json::parse(body);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(body, e.byte);
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": invalid JSON");
  }

  check_keys(root, "", {"problem", "seed", "mesh", "compact_set", "recovered_cells", "sweep", "probe_k", "select",
                        "fit", "forward", "derivcheck", "counterexample", "output"});
  ExperimentConfig c;

  const std::string problem = text(root, "", "problem", "conductivity");
  if (problem == "conductivity")
    c.problem = HSLAB_CONDUCTIVITY;
  else if (problem == "elasticity")
    c.problem = HSLAB_ELASTICITY;
  else
    field_error("problem", "expected 'conductivity' or 'elasticity', got '" + problem + "'");

  // The seed is mandatory: no run draws from an implicit source.
  if (!child(root, "seed")) field_error("seed", "required");
  c.seed = unsigned_int(root, "", "seed", 0);

  {
    const json& m = section(root, "mesh");
    check_keys(m, "mesh", {"n_sub", "partition", "patch"});
    c.mesh.n_sub = static_cast<int>(unsigned_int(m, "mesh", "n_sub", 8));
    if (c.mesh.n_sub < 1) field_error("mesh.n_sub", "must be >= 1");
    const json& part = section(m, "partition");
    check_keys(part, "mesh.partition", {"cols", "rows"});
    c.mesh.cols = static_cast<int>(unsigned_int(part, "mesh.partition", "cols", 1));
    c.mesh.rows = static_cast<int>(unsigned_int(part, "mesh.partition", "rows", 1));
    if (c.mesh.cols < 1) field_error("mesh.partition.cols", "must be >= 1");
    if (c.mesh.rows < 1) field_error("mesh.partition.rows", "must be >= 1");
    if (c.mesh.n_sub % c.mesh.cols != 0)
      field_error("mesh.partition.cols", "must divide mesh.n_sub = " + std::to_string(c.mesh.n_sub));
    if (c.mesh.n_sub % c.mesh.rows != 0)
      field_error("mesh.partition.rows", "must divide mesh.n_sub = " + std::to_string(c.mesh.n_sub));
    const json& patch = section(m, "patch");
    check_keys(patch, "mesh.patch", {"side", "t0", "t1"});
    const std::string side = text(patch, "mesh.patch", "side", "bottom");
    if (side == "bottom")
      c.mesh.side = HSLAB_BOTTOM;
    else if (side == "right")
      c.mesh.side = HSLAB_RIGHT;
    else if (side == "top")
      c.mesh.side = HSLAB_TOP;
    else if (side == "left")
      c.mesh.side = HSLAB_LEFT;
    else
      field_error("mesh.patch.side", "expected bottom, right, top or left, got '" + side + "'");
    c.mesh.t0 = number(patch, "mesh.patch", "t0", 0.0);
    c.mesh.t1 = number(patch, "mesh.patch", "t1", 1.0);
    if (c.mesh.t0 < 0.0) field_error("mesh.patch.t0", "must be >= 0");
    if (c.mesh.t1 > 1.0) field_error("mesh.patch.t1", "must be <= 1");
    if (!(c.mesh.t0 < c.mesh.t1)) field_error("mesh.patch.t1", "must exceed mesh.patch.t0");
  }

  {
    const json& k = section(root, "compact_set");
    check_keys(k, "compact_set", {"lambda_lo", "lambda_hi"});
    c.lambda_lo = number(k, "compact_set", "lambda_lo", 0.5);
    c.lambda_hi = number(k, "compact_set", "lambda_hi", 2.0);
    if (!(c.lambda_lo > 0.0)) field_error("compact_set.lambda_lo", "must be > 0");
    if (!(c.lambda_lo < c.lambda_hi)) field_error("compact_set.lambda_lo", "must be < compact_set.lambda_hi");
  }

  if (const json* cells = child(root, "recovered_cells")) {
    if (!cells->is_array() || cells->empty()) field_error("recovered_cells", "expected a non-empty array");
    for (std::size_t i = 0; i < cells->size(); ++i) {
      const json& e = (*cells)[i];
      const std::string f = "recovered_cells[" + std::to_string(i) + "]";
      if (!e.is_number_integer()) field_error(f, "expected an integer cell label");
      const auto v = e.get<long long>();
      if (v < 1 || v > c.n_cells())
        field_error(f, "cell " + std::to_string(v) + " outside 1.." + std::to_string(c.n_cells()));
      c.recovered_cells.push_back(static_cast<int>(v));
    }
  }

  {
    const json& s = section(root, "sweep");
    check_keys(s, "sweep", {"random_pairs", "rays", "ray_steps", "t_min", "t_max"});
    c.sweep.random_pairs = unsigned_int(s, "sweep", "random_pairs", c.sweep.random_pairs);
    c.sweep.rays = unsigned_int(s, "sweep", "rays", c.sweep.rays);
    c.sweep.ray_steps = unsigned_int(s, "sweep", "ray_steps", c.sweep.ray_steps);
    c.sweep.t_min = number(s, "sweep", "t_min", c.sweep.t_min);
    c.sweep.t_max = number(s, "sweep", "t_max", c.sweep.t_max);
    if (c.sweep.rays > 0 && c.sweep.ray_steps == 0) field_error("sweep.ray_steps", "must be >= 1 when rays > 0");
    if (!(c.sweep.t_min > 0.0)) field_error("sweep.t_min", "must be > 0");
    if (!(c.sweep.t_min <= c.sweep.t_max)) field_error("sweep.t_max", "must be >= sweep.t_min");
  }

  c.probe_k = unsigned_int(root, "", "probe_k", 0);

  {
    const json& s = section(root, "select");
    check_keys(s, "select", {"target_ratio", "max_size"});
    c.select.target_ratio = number(s, "select", "target_ratio", c.select.target_ratio);
    c.select.max_size = unsigned_int(s, "select", "max_size", 0);
    if (!(c.select.target_ratio > 0.0 && c.select.target_ratio <= 1.0))
      field_error("select.target_ratio", "must lie in (0, 1]");
  }

  {
    const json& f = section(root, "fit");
    check_keys(f, "fit", {"n_bins", "slack", "column"});
    c.fit.n_bins = unsigned_int(f, "fit", "n_bins", c.fit.n_bins);
    c.fit.slack = number(f, "fit", "slack", c.fit.slack);
    const std::string col = text(f, "fit", "column", "delta_F");
    if (col == "delta_F")
      c.fit.use_finite = false;
    else if (col == "delta_finite")
      c.fit.use_finite = true;
    else
      field_error("fit.column", "expected 'delta_F' or 'delta_finite'");
    if (c.fit.n_bins < 1) field_error("fit.n_bins", "must be >= 1");
    if (!(c.fit.slack >= 0.0)) field_error("fit.slack", "must be >= 0");
  }

  {
    const json& f = section(root, "forward");
    check_keys(f, "forward", {"sample_index", "params"});
    c.forward.sample_index = unsigned_int(f, "forward", "sample_index", 0);
    c.forward.params = numbers(f, "forward", "params", {});
  }

  {
    const json& d = section(root, "derivcheck");
    check_keys(d, "derivcheck", {"sample_index", "steps"});
    c.derivcheck.sample_index = unsigned_int(d, "derivcheck", "sample_index", 0);
    c.derivcheck.steps = numbers(d, "derivcheck", "steps", c.derivcheck.steps);
    if (c.derivcheck.steps.empty()) field_error("derivcheck.steps", "must not be empty");
    for (std::size_t i = 0; i < c.derivcheck.steps.size(); ++i)
      if (!(c.derivcheck.steps[i] > 0.0))
        field_error("derivcheck.steps[" + std::to_string(i) + "]", "must be > 0");
  }

  {
    const json& x = section(root, "counterexample");
    check_keys(x, "counterexample", {"ts", "tol"});
    c.counterexample.ts = numbers(x, "counterexample", "ts", c.counterexample.ts);
    c.counterexample.tol = number(x, "counterexample", "tol", c.counterexample.tol);
    if (c.counterexample.ts.empty()) field_error("counterexample.ts", "must not be empty");
    for (std::size_t i = 0; i < c.counterexample.ts.size(); ++i) {
      const double t = c.counterexample.ts[i];
      if (!(t > 0.0 && t <= 1.0)) field_error("counterexample.ts[" + std::to_string(i) + "]", "must lie in (0, 1]");
    }
    if (!(c.counterexample.tol > 0.0)) field_error("counterexample.tol", "must be > 0");
  }

  {
    const json& o = section(root, "output");
    check_keys(o, "output", {"dir", "mesh", "forward", "derivcheck", "records", "selection", "records_finite", "fit",
                             "flat", "analytic"});
    auto& out = c.output;
    std::filesystem::path dir = text(o, "output", "dir", ".");
    out.dir = dir.is_absolute() ? dir : path.parent_path() / dir;
    if (out.dir.empty()) out.dir = ".";
    out.dir = out.dir.lexically_normal();
    out.mesh = text(o, "output", "mesh", out.mesh);
    out.forward = text(o, "output", "forward", out.forward);
    out.derivcheck = text(o, "output", "derivcheck", out.derivcheck);
    out.records = text(o, "output", "records", out.records);
    out.selection = text(o, "output", "selection", out.selection);
    out.records_finite = text(o, "output", "records_finite", out.records_finite);
    out.fit = text(o, "output", "fit", out.fit);
    out.flat = text(o, "output", "flat", out.flat);
    out.analytic = text(o, "output", "analytic", out.analytic);
    check_writable_dir(out.dir);
  }
  return c;
}

void validate_against_mesh(const ExperimentConfig& c) {
  hslab_mesh* mesh = nullptr;
  hslab_status st = hslab_mesh_create(c.mesh.n_sub, c.mesh.cols, c.mesh.rows, c.mesh.side, c.mesh.t0, c.mesh.t1, &mesh);
  if (st != HSLAB_OK) field_error("mesh", hslab_last_error());
  hslab_problem* problem = nullptr;
  st = hslab_problem_create(mesh, c.problem, &problem);
  hslab_mesh_destroy(mesh);
  if (st != HSLAB_OK) field_error("mesh.patch", hslab_last_error());
  std::size_t dim = 0, param_size = 0;
  hslab_problem_info(problem, &dim, nullptr, &param_size);
  hslab_problem_destroy(problem);
  if (c.probe_k > dim) field_error("probe_k", "exceeds the basis dimension " + std::to_string(dim));
  if (!c.forward.params.empty() && c.forward.params.size() != param_size)
    field_error("forward.params", "expected " + std::to_string(param_size) + " values, got " +
                                      std::to_string(c.forward.params.size()));
}

nlohmann::ordered_json normalized(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["problem"] = c.problem == HSLAB_CONDUCTIVITY ? "conductivity" : "elasticity";
  j["seed"] = c.seed;
  j["mesh"]["n_sub"] = c.mesh.n_sub;
  j["mesh"]["partition"]["cols"] = c.mesh.cols;
  j["mesh"]["partition"]["rows"] = c.mesh.rows;
  j["mesh"]["patch"]["side"] = side_name(c.mesh.side);
  j["mesh"]["patch"]["t0"] = c.mesh.t0;
  j["mesh"]["patch"]["t1"] = c.mesh.t1;
  j["compact_set"]["lambda_lo"] = c.lambda_lo;
  j["compact_set"]["lambda_hi"] = c.lambda_hi;
  if (c.recovered_cells.empty()) {
    std::vector<int> all;
    for (int i = 1; i <= c.n_cells(); ++i) all.push_back(i);
    j["recovered_cells"] = all;
  } else {
    j["recovered_cells"] = c.recovered_cells;
  }
  j["sweep"]["random_pairs"] = c.sweep.random_pairs;
  j["sweep"]["rays"] = c.sweep.rays;
  j["sweep"]["ray_steps"] = c.sweep.ray_steps;
  j["sweep"]["t_min"] = c.sweep.t_min;
  j["sweep"]["t_max"] = c.sweep.t_max;
  j["probe_k"] = c.probe_k;
  j["select"]["target_ratio"] = c.select.target_ratio;
  j["select"]["max_size"] = c.select.max_size;
  j["fit"]["n_bins"] = c.fit.n_bins;
  j["fit"]["slack"] = c.fit.slack;
  j["fit"]["column"] = c.fit.use_finite ? "delta_finite" : "delta_F";
  j["forward"]["sample_index"] = c.forward.sample_index;
  j["forward"]["params"] = c.forward.params;
  j["derivcheck"]["sample_index"] = c.derivcheck.sample_index;
  j["derivcheck"]["steps"] = c.derivcheck.steps;
  j["counterexample"]["ts"] = c.counterexample.ts;
  j["counterexample"]["tol"] = c.counterexample.tol;
  auto& o = j["output"];
  o["dir"] = c.output.dir.string();
  o["mesh"] = c.output.mesh;
  o["forward"] = c.output.forward;
  o["derivcheck"] = c.output.derivcheck;
  o["records"] = c.output.records;
  o["selection"] = c.output.selection;
  o["records_finite"] = c.output.records_finite;
  o["fit"] = c.output.fit;
  o["flat"] = c.output.flat;
  o["analytic"] = c.output.analytic;
  return j;
}

std::string config_hash(const ExperimentConfig& c) {
  // Output locations do not change results, so they stay out of the hash.
  auto j = normalized(c);
  j.erase("output");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hslab_cli
