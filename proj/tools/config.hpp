#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hslab/hslab.h"

namespace hslab_cli {

// Invalid or unreadable configuration; the CLI exits with status 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MeshConfig {
  int n_sub = 8;
  int cols = 1;
  int rows = 1;
  hslab_side side = HSLAB_BOTTOM;
  double t0 = 0.0;
  double t1 = 1.0;
};

struct SweepSizes {
  std::size_t random_pairs = 200;
  std::size_t rays = 20;
  std::size_t ray_steps = 20;
  double t_min = 1e-6;
  double t_max = 1e-1;
};

struct SelectConfig {
  double target_ratio = 0.5;
  std::size_t max_size = 0;  // 0: k(k+1)/2
};

struct FitConfig {
  std::size_t n_bins = 10;
  double slack = 0.1;
  bool use_finite = false;
};

struct ForwardConfig {
  std::size_t sample_index = 0;
  std::vector<double> params;  // explicit flat parameters; empty: sample
};

struct DerivcheckConfig {
  std::size_t sample_index = 0;
  std::vector<double> steps{1e-3, 1e-4, 1e-5};
};

struct CounterexampleConfig {
  std::vector<double> ts{0.05, 0.07, 0.1, 0.15, 0.2, 0.3, 0.5, 0.7, 1.0};
  double tol = 1e-10;
};

struct OutputPaths {
  std::filesystem::path dir = ".";
  std::string mesh = "mesh.txt";
  std::string forward = "forward.csv";
  std::string derivcheck = "derivcheck.csv";
  std::string records = "records.csv";
  std::string selection = "selection.csv";
  std::string records_finite = "records_finite.csv";
  std::string fit = "fit.json";
  std::string flat = "flat.csv";
  std::string analytic = "analytic.csv";

  // Creates the directory on first use.
  std::filesystem::path resolve(const std::string& name) const {
    std::filesystem::create_directories(dir);
    return dir / name;
  }
};

struct ExperimentConfig {
  hslab_problem_kind problem = HSLAB_CONDUCTIVITY;
  std::uint64_t seed = 0;
  MeshConfig mesh;
  double lambda_lo = 0.5;
  double lambda_hi = 2.0;
  std::vector<int> recovered_cells;  // empty: all cells
  SweepSizes sweep;
  std::size_t probe_k = 0;
  SelectConfig select;
  FitConfig fit;
  ForwardConfig forward;
  DerivcheckConfig derivcheck;
  CounterexampleConfig counterexample;
  OutputPaths output;

  int n_cells() const { return mesh.cols * mesh.rows; }
};

// Reads and validates a config file. Relative output paths are resolved
// against the config file's directory unless output.dir is absolute.
ExperimentConfig load_config(const std::filesystem::path& path);

// Checks that need the mesh: subdivision, patch size, probe_k against the
// basis dimension, explicit forward parameters against the parameter size.
void validate_against_mesh(const ExperimentConfig& config);

// Effective configuration with defaults filled, in canonical key order.
nlohmann::ordered_json normalized(const ExperimentConfig& config);

// FNV-1a of the normalized configuration dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace hslab_cli
