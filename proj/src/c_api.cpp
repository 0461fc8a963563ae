#include "hslab/hslab.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "hslab/errors.hpp"
#include "hslab/forward_problem.hpp"
#include "hslab/stability.hpp"

using namespace hslab;

struct hslab_mesh {
  Mesh mesh;
};
struct hslab_problem {
  ForwardProblem problem;
};
struct hslab_operator {
  DataOperator op;
};
struct hslab_sweep {
  SweepResult result;
};
struct hslab_records {
  std::vector<StabilityRecord> records;
};
struct hslab_selection {
  Selection selection;
};

namespace {

thread_local std::string g_last_error;

// Stream tags for single draws; sweeps use 0..4 internally.
constexpr std::uint64_t kTagSample = 0;
constexpr std::uint64_t kTagProbeDirection = 5;

hslab_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return HSLAB_INVALID_ARGUMENT;
    case ErrorCode::NotPositiveDefinite: return HSLAB_NOT_POSITIVE_DEFINITE;
    case ErrorCode::DimensionMismatch: return HSLAB_DIMENSION_MISMATCH;
    case ErrorCode::ToleranceNotReached: return HSLAB_TOLERANCE_NOT_REACHED;
    case ErrorCode::IncompatibleSubdivision: return HSLAB_INCOMPATIBLE_SUBDIVISION;
    case ErrorCode::EmptyPatch: return HSLAB_EMPTY_PATCH;
    case ErrorCode::PatchTooSmall: return HSLAB_PATCH_TOO_SMALL;
    case ErrorCode::CellCountMismatch: return HSLAB_CELL_COUNT_MISMATCH;
    case ErrorCode::BasisMismatch: return HSLAB_BASIS_MISMATCH;
    case ErrorCode::IndexOutOfRange: return HSLAB_INDEX_OUT_OF_RANGE;
    case ErrorCode::DegenerateSample: return HSLAB_DEGENERATE_SAMPLE;
    case ErrorCode::CannotReachRatio: return HSLAB_CANNOT_REACH_RATIO;
    case ErrorCode::InsufficientSpread: return HSLAB_INSUFFICIENT_SPREAD;
    case ErrorCode::DegenerateRecords: return HSLAB_DEGENERATE_RECORDS;
    case ErrorCode::NonPositiveExponent: return HSLAB_NON_POSITIVE_EXPONENT;
    case ErrorCode::IoError: return HSLAB_IO_ERROR;
  }
  return HSLAB_INTERNAL_ERROR;
}

template <typename Fn>
hslab_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return HSLAB_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HSLAB_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HSLAB_INTERNAL_ERROR;
  }
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::InvalidArgument, what);
}

void copy_matrix(const DenseSym& m, double* out, std::size_t len) {
  require(out != nullptr, "output buffer is NULL");
  if (len < m.size() * m.size()) fail(ErrorCode::DimensionMismatch, "output buffer too small");
  std::memcpy(out, m.data().data(), m.size() * m.size() * sizeof(double));
}

std::ofstream open_out(const char* path) {
  require(path != nullptr, "path is NULL");
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, std::string("cannot open '") + path + "' for writing");
  return f;
}

void write_header(std::ostream& out, const char* header) {
  if (header && *header) out << header << '\n';
}

void finish(std::ofstream& f, const char* path) {
  f.flush();
  if (!f) fail(ErrorCode::IoError, std::string("write to '") + path + "' failed");
}

hslab_fit to_c(const HolderFit& f) {
  hslab_fit out{};
  out.theta = f.theta;
  out.theta_precap = f.theta_precap;
  out.log_C = f.log_C;
  out.n_bins = f.n_bins;
  out.slack = f.slack;
  out.max_violation = f.max_violation;
  out.records_used = f.records_used;
  out.dropped = f.dropped;
  out.violations = f.violations;
  out.constant_R = f.constant_R ? 1 : 0;
  return out;
}

CompactSetSpec compact_set(const ForwardProblem& p, double lo, double hi) {
  CompactSetSpec spec;
  spec.lambda_lo = lo;
  spec.lambda_hi = hi;
  spec.n_cells = p.cell_count();
  spec.kind = p.kind();
  return spec;
}

}  // namespace

extern "C" {

HSLAB_API const char* hslab_version(void) { return HSLAB_VERSION_STRING; }

HSLAB_API const char* hslab_status_name(hslab_status status) {
  switch (status) {
    case HSLAB_OK: return "Ok";
    case HSLAB_INVALID_ARGUMENT: return error_name(ErrorCode::InvalidArgument);
    case HSLAB_NOT_POSITIVE_DEFINITE: return error_name(ErrorCode::NotPositiveDefinite);
    case HSLAB_DIMENSION_MISMATCH: return error_name(ErrorCode::DimensionMismatch);
    case HSLAB_TOLERANCE_NOT_REACHED: return error_name(ErrorCode::ToleranceNotReached);
    case HSLAB_INCOMPATIBLE_SUBDIVISION: return error_name(ErrorCode::IncompatibleSubdivision);
    case HSLAB_EMPTY_PATCH: return error_name(ErrorCode::EmptyPatch);
    case HSLAB_PATCH_TOO_SMALL: return error_name(ErrorCode::PatchTooSmall);
    case HSLAB_CELL_COUNT_MISMATCH: return error_name(ErrorCode::CellCountMismatch);
    case HSLAB_BASIS_MISMATCH: return error_name(ErrorCode::BasisMismatch);
    case HSLAB_INDEX_OUT_OF_RANGE: return error_name(ErrorCode::IndexOutOfRange);
    case HSLAB_DEGENERATE_SAMPLE: return error_name(ErrorCode::DegenerateSample);
    case HSLAB_CANNOT_REACH_RATIO: return error_name(ErrorCode::CannotReachRatio);
    case HSLAB_INSUFFICIENT_SPREAD: return error_name(ErrorCode::InsufficientSpread);
    case HSLAB_DEGENERATE_RECORDS: return error_name(ErrorCode::DegenerateRecords);
    case HSLAB_NON_POSITIVE_EXPONENT: return error_name(ErrorCode::NonPositiveExponent);
    case HSLAB_IO_ERROR: return error_name(ErrorCode::IoError);
    case HSLAB_INTERNAL_ERROR: return "InternalError";
  }
  return "Unknown";
}

HSLAB_API const char* hslab_last_error(void) { return g_last_error.c_str(); }

// ---- mesh

HSLAB_API hslab_status hslab_mesh_create(int n_sub, int grid_cols, int grid_rows, hslab_side side, double t0,
                                         double t1, hslab_mesh** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    require(side >= HSLAB_BOTTOM && side <= HSLAB_LEFT, "unknown side");
    const PartitionSpec part(grid_cols, grid_rows);
    const PatchSpec patch(static_cast<Side>(side), t0, t1);
    *out = new hslab_mesh{build_mesh(n_sub, part, patch)};
  });
}

HSLAB_API void hslab_mesh_destroy(hslab_mesh* mesh) { delete mesh; }

HSLAB_API hslab_status hslab_mesh_counts(const hslab_mesh* mesh, size_t* nodes, size_t* triangles,
                                         size_t* patch_edges) {
  return guarded([&] {
    require(mesh != nullptr, "mesh is NULL");
    if (nodes) *nodes = mesh->mesh.node_count();
    if (triangles) *triangles = mesh->mesh.triangles.size();
    if (patch_edges) *patch_edges = mesh->mesh.patch_edge_count();
  });
}

HSLAB_API hslab_status hslab_mesh_write(const hslab_mesh* mesh, const char* path, const char* header) {
  return guarded([&] {
    require(mesh != nullptr, "mesh is NULL");
    auto f = open_out(path);
    write_header(f, header);
    write_mesh(mesh->mesh, f);
    finish(f, path);
  });
}

// ---- forward maps

HSLAB_API hslab_status hslab_problem_create(const hslab_mesh* mesh, hslab_problem_kind kind, hslab_problem** out) {
  return guarded([&] {
    require(mesh != nullptr && out != nullptr, "NULL argument");
    require(kind == HSLAB_CONDUCTIVITY || kind == HSLAB_ELASTICITY, "unknown problem kind");
    *out = new hslab_problem{ForwardProblem(mesh->mesh, kind == HSLAB_CONDUCTIVITY ? ProblemKind::conductivity
                                                                                   : ProblemKind::elasticity)};
  });
}

HSLAB_API void hslab_problem_destroy(hslab_problem* problem) { delete problem; }

HSLAB_API hslab_status hslab_problem_info(const hslab_problem* problem, size_t* basis_dim, size_t* n_cells,
                                          size_t* param_size) {
  return guarded([&] {
    require(problem != nullptr, "problem is NULL");
    if (basis_dim) *basis_dim = problem->problem.basis_dim();
    if (n_cells) *n_cells = static_cast<size_t>(problem->problem.cell_count());
    if (param_size) *param_size = problem->problem.param_size();
  });
}

HSLAB_API hslab_status hslab_problem_sample(const hslab_problem* problem, double lambda_lo, double lambda_hi,
                                            uint64_t seed, uint64_t index, double* out, size_t len) {
  return guarded([&] {
    require(problem != nullptr && out != nullptr, "NULL argument");
    const auto& p = problem->problem;
    if (len != p.param_size()) fail(ErrorCode::DimensionMismatch, "parameter buffer length");
    const auto v = sample_point(compact_set(p, lambda_lo, lambda_hi), seed, kTagSample, index);
    std::copy(v.begin(), v.end(), out);
  });
}

HSLAB_API hslab_status hslab_problem_direction(const hslab_problem* problem, uint64_t seed, uint64_t index,
                                               double* out, size_t len) {
  return guarded([&] {
    require(problem != nullptr && out != nullptr, "NULL argument");
    const auto& p = problem->problem;
    if (len != p.param_size()) fail(ErrorCode::DimensionMismatch, "direction buffer length");
    const auto v = sample_direction(compact_set(p, 1.0, 1.0), seed, kTagProbeDirection, index);
    std::copy(v.begin(), v.end(), out);
  });
}

HSLAB_API hslab_status hslab_forward(const hslab_problem* problem, const double* params, size_t len,
                                     hslab_operator** out) {
  return guarded([&] {
    require(problem != nullptr && params != nullptr && out != nullptr, "NULL argument");
    *out = new hslab_operator{problem->problem.evaluate({params, len})};
  });
}

HSLAB_API void hslab_operator_destroy(hslab_operator* op) { delete op; }

HSLAB_API size_t hslab_operator_dim(const hslab_operator* op) { return op ? op->op.dim() : 0; }

HSLAB_API hslab_status hslab_operator_matrix(const hslab_operator* op, double* out, size_t len) {
  return guarded([&] {
    require(op != nullptr, "operator is NULL");
    copy_matrix(op->op.matrix, out, len);
  });
}

HSLAB_API hslab_status hslab_operator_gram(const hslab_operator* op, double* out, size_t len) {
  return guarded([&] {
    require(op != nullptr, "operator is NULL");
    copy_matrix(op->op.gram, out, len);
  });
}

HSLAB_API hslab_status hslab_operator_asymmetry(const hslab_operator* op, double* out) {
  return guarded([&] {
    require(op != nullptr && out != nullptr, "NULL argument");
    *out = op->op.raw_asymmetry;
  });
}

HSLAB_API hslab_status hslab_operator_write_csv(const hslab_operator* op, const char* path, const char* header) {
  return guarded([&] {
    require(op != nullptr, "operator is NULL");
    auto f = open_out(path);
    write_header(f, header);
    const auto& m = op->op.matrix;
    char buf[32];
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = 0; j < m.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
        f << (j ? "," : "") << buf;
      }
      f << '\n';
    }
    finish(f, path);
  });
}

HSLAB_API hslab_status hslab_derivative(const hslab_problem* problem, const double* params, const double* direction,
                                        size_t len, double* out, size_t out_len) {
  return guarded([&] {
    require(problem != nullptr && params != nullptr && direction != nullptr, "NULL argument");
    copy_matrix(problem->problem.derivative({params, len}, {direction, len}), out, out_len);
  });
}

HSLAB_API hslab_status hslab_operator_distance(const hslab_operator* a, const hslab_operator* b, double* out) {
  return guarded([&] {
    require(a != nullptr && b != nullptr && out != nullptr, "NULL argument");
    *out = operator_distance(a->op, b->op);
  });
}

HSLAB_API hslab_status hslab_phi(const hslab_operator* a, const hslab_operator* b, size_t k, double* out) {
  return guarded([&] {
    require(a != nullptr && b != nullptr && out != nullptr, "NULL argument");
    *out = phi(a->op, b->op, probe_weights(k == 0 ? a->op.dim() : k));
  });
}

HSLAB_API hslab_status hslab_matrix_element(const hslab_operator* a, size_t i, size_t j, double* out) {
  return guarded([&] {
    require(a != nullptr && out != nullptr, "NULL argument");
    *out = matrix_element(a->op, i, j);
  });
}

// ---- sweeps

HSLAB_API void hslab_sweep_config_init(hslab_sweep_config* config) {
  if (!config) return;
  const SweepConfig d;
  config->lambda_lo = d.set.lambda_lo;
  config->lambda_hi = d.set.lambda_hi;
  config->recovered_cells = nullptr;
  config->n_recovered = 0;
  config->random_pairs = d.random_pairs;
  config->rays = d.rays;
  config->ray_steps = d.ray_steps;
  config->t_min = d.t_min;
  config->t_max = d.t_max;
  config->seed = 0;
  config->probe_k = 0;
  config->threads = 1;
}

HSLAB_API hslab_status hslab_sweep_run(const hslab_problem* problem, const hslab_sweep_config* config,
                                       hslab_sweep** out) {
  return guarded([&] {
    require(problem != nullptr && config != nullptr && out != nullptr, "NULL argument");
    const auto& p = problem->problem;
    SweepConfig c;
    c.set = compact_set(p, config->lambda_lo, config->lambda_hi);
    if (config->recovered_cells && config->n_recovered > 0)
      c.recovered.cells.assign(config->recovered_cells, config->recovered_cells + config->n_recovered);
    else
      c.recovered = RecoveredQuantity::all(p.cell_count());
    c.random_pairs = config->random_pairs;
    c.rays = config->rays;
    c.ray_steps = config->ray_steps;
    c.t_min = config->t_min;
    c.t_max = config->t_max;
    c.seed = config->seed;
    c.probe_k = config->probe_k;
    c.threads = config->threads;
    *out = new hslab_sweep{sweep(p, c)};
  });
}

HSLAB_API void hslab_sweep_destroy(hslab_sweep* s) { delete s; }

HSLAB_API hslab_status hslab_sweep_counts(const hslab_sweep* s, size_t* records, size_t* dropped) {
  return guarded([&] {
    require(s != nullptr, "sweep is NULL");
    if (records) *records = s->result.records.size();
    if (dropped) *dropped = s->result.dropped;
  });
}

HSLAB_API hslab_status hslab_sweep_records(const hslab_sweep* s, hslab_records** out) {
  return guarded([&] {
    require(s != nullptr && out != nullptr, "NULL argument");
    *out = new hslab_records{s->result.records};
  });
}

HSLAB_API hslab_status hslab_sweep_select(const hslab_sweep* s, double target_ratio, size_t max_size,
                                          unsigned threads, hslab_selection** out) {
  return guarded([&] {
    require(s != nullptr && out != nullptr, "NULL argument");
    const auto pairs = operator_pairs(s->result);
    if (pairs.empty()) fail(ErrorCode::InvalidArgument, "sweep has no pairs with positive operator distance");
    const std::size_t dim = pairs.front().a->dim();
    const auto candidates = MeasurementSet::upper_pairs(dim);
    if (max_size == 0) max_size = candidates.size();
    *out = new hslab_selection{greedy_select(pairs, candidates.pairs(), target_ratio, max_size, threads)};
  });
}

HSLAB_API hslab_status hslab_sweep_attach_selection(hslab_sweep* s, const hslab_selection* selection) {
  return guarded([&] {
    require(s != nullptr && selection != nullptr, "NULL argument");
    attach_finite(s->result, selection->selection.set);
  });
}

HSLAB_API void hslab_selection_destroy(hslab_selection* selection) { delete selection; }

HSLAB_API hslab_status hslab_selection_info(const hslab_selection* selection, size_t* size, double* ratio,
                                            int* reached) {
  return guarded([&] {
    require(selection != nullptr, "selection is NULL");
    if (size) *size = selection->selection.set.size();
    if (ratio) *ratio = selection->selection.ratio;
    if (reached) *reached = selection->selection.reached ? 1 : 0;
  });
}

HSLAB_API hslab_status hslab_selection_pairs(const hslab_selection* selection, size_t* rows, size_t* cols,
                                             size_t len) {
  return guarded([&] {
    require(selection != nullptr && rows != nullptr && cols != nullptr, "NULL argument");
    const auto& p = selection->selection.set.pairs();
    if (len < p.size()) fail(ErrorCode::DimensionMismatch, "pair buffer too small");
    for (std::size_t i = 0; i < p.size(); ++i) {
      rows[i] = p[i].first;
      cols[i] = p[i].second;
    }
  });
}

HSLAB_API hslab_status hslab_selection_write_csv(const hslab_selection* selection, const char* path,
                                                 const char* header) {
  return guarded([&] {
    require(selection != nullptr, "selection is NULL");
    auto f = open_out(path);
    write_header(f, header);
    write_measurement_csv(selection->selection.set, f);
    finish(f, path);
  });
}

// ---- records and fits

HSLAB_API hslab_status hslab_records_create(hslab_records** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = new hslab_records{};
  });
}

HSLAB_API void hslab_records_destroy(hslab_records* records) { delete records; }

HSLAB_API hslab_status hslab_records_append(hslab_records* records, const hslab_record* record) {
  return guarded([&] {
    require(records != nullptr && record != nullptr, "NULL argument");
    StabilityRecord r;
    r.pair_id = record->pair_id;
    r.kind = record->kind == HSLAB_NEAR_DIAGONAL ? PairKind::near_diagonal : PairKind::random_random;
    r.t = record->t;
    r.delta_R = record->delta_R;
    r.delta_F = record->delta_F;
    r.phi = record->phi;
    r.delta_finite = record->delta_finite;
    if (record->injectivity_flag) r.flags = "injectivity";
    records->records.push_back(std::move(r));
  });
}

HSLAB_API size_t hslab_records_count(const hslab_records* records) { return records ? records->records.size() : 0; }

HSLAB_API hslab_status hslab_records_get(const hslab_records* records, size_t i, hslab_record* out) {
  return guarded([&] {
    require(records != nullptr && out != nullptr, "NULL argument");
    if (i >= records->records.size()) fail(ErrorCode::IndexOutOfRange, "record index");
    const auto& r = records->records[i];
    out->pair_id = r.pair_id;
    out->kind = r.kind == PairKind::near_diagonal ? HSLAB_NEAR_DIAGONAL : HSLAB_RANDOM_RANDOM;
    out->t = r.t;
    out->delta_R = r.delta_R;
    out->delta_F = r.delta_F;
    out->phi = r.phi;
    out->delta_finite = r.delta_finite;
    out->injectivity_flag = r.flags.find("injectivity") != std::string::npos ? 1 : 0;
  });
}

HSLAB_API hslab_status hslab_records_read_csv(const char* path, hslab_records** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "NULL argument");
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::IoError, std::string("cannot open '") + path + "'");
    *out = new hslab_records{read_records_csv(f)};
  });
}

HSLAB_API hslab_status hslab_records_write_csv(const hslab_records* records, const char* path, const char* header) {
  return guarded([&] {
    require(records != nullptr, "records is NULL");
    auto f = open_out(path);
    write_records_csv(records->records, f, header ? header : "");
    finish(f, path);
  });
}

HSLAB_API hslab_status hslab_fit_records(const hslab_records* records, size_t n_bins, double slack, int use_finite,
                                         hslab_fit* out) {
  return guarded([&] {
    require(records != nullptr && out != nullptr, "NULL argument");
    *out = to_c(fit_holder(records->records, n_bins, slack,
                           use_finite ? FitColumn::delta_finite : FitColumn::delta_F));
  });
}

HSLAB_API hslab_status hslab_injectivity_probe(const hslab_records* records, double floor, double scale,
                                               size_t* ids, size_t cap, size_t* count) {
  return guarded([&] {
    require(records != nullptr && count != nullptr, "NULL argument");
    const auto hits = injectivity_probe(records->records, floor, scale);
    *count = hits.size();
    for (std::size_t i = 0; i < hits.size() && i < cap && ids; ++i) ids[i] = hits[i];
  });
}

// ---- flat counterexample

HSLAB_API hslab_status hslab_flat_counterexample(const double* ts, size_t n, double tol, hslab_flat_sample* out) {
  return guarded([&] {
    require(ts != nullptr && out != nullptr, "NULL argument");
    const auto s = flat_counterexample({ts, n}, tol);
    for (std::size_t i = 0; i < n; ++i) out[i] = {s[i].t, s[i].F_t, s[i].local_slope};
  });
}

HSLAB_API hslab_status hslab_analytic_control(const double* ts, size_t n, size_t n_bins, double slack,
                                              hslab_flat_sample* out, hslab_fit* fit) {
  return guarded([&] {
    require(ts != nullptr, "ts is NULL");
    const auto c = analytic_control({ts, n}, n_bins, slack);
    if (out)
      for (std::size_t i = 0; i < n; ++i) out[i] = {c.samples[i].t, c.samples[i].F_t, c.samples[i].local_slope};
    if (fit) *fit = to_c(c.fit);
  });
}

HSLAB_API hslab_status hslab_adaptive_quadrature(double (*f)(double, void*), void* ctx, double a, double b,
                                                 double tol, double* out) {
  return guarded([&] {
    require(f != nullptr && out != nullptr, "NULL argument");
    *out = adaptive_quadrature([&](double x) { return f(x, ctx); }, a, b, tol);
  });
}

}  // extern "C"
