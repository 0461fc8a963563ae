/*
 * hslab C interface.
 *
 * Every function that can fail returns an hslab_status; on failure a
 * thread-local message is available from hslab_last_error(). Handles are
 * opaque and owned by the caller, who releases them with the matching
 * *_destroy function (passing NULL is allowed). Indices of basis functions
 * are 0-based; cell labels are 1-based.
 */
#ifndef HSLAB_H
#define HSLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(HSLAB_BUILDING_LIBRARY)
#define HSLAB_API __attribute__((visibility("default")))
#else
#define HSLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hslab_status {
  HSLAB_OK = 0,
  HSLAB_INVALID_ARGUMENT = 1,
  HSLAB_NOT_POSITIVE_DEFINITE = 2,
  HSLAB_DIMENSION_MISMATCH = 3,
  HSLAB_TOLERANCE_NOT_REACHED = 4,
  HSLAB_INCOMPATIBLE_SUBDIVISION = 5,
  HSLAB_EMPTY_PATCH = 6,
  HSLAB_PATCH_TOO_SMALL = 7,
  HSLAB_CELL_COUNT_MISMATCH = 8,
  HSLAB_BASIS_MISMATCH = 9,
  HSLAB_INDEX_OUT_OF_RANGE = 10,
  HSLAB_DEGENERATE_SAMPLE = 11,
  HSLAB_CANNOT_REACH_RATIO = 12,
  HSLAB_INSUFFICIENT_SPREAD = 13,
  HSLAB_DEGENERATE_RECORDS = 14,
  HSLAB_NON_POSITIVE_EXPONENT = 15,
  HSLAB_IO_ERROR = 16,
  HSLAB_INTERNAL_ERROR = 17
} hslab_status;

typedef enum hslab_problem_kind { HSLAB_CONDUCTIVITY = 0, HSLAB_ELASTICITY = 1 } hslab_problem_kind;

typedef enum hslab_side { HSLAB_BOTTOM = 0, HSLAB_RIGHT = 1, HSLAB_TOP = 2, HSLAB_LEFT = 3 } hslab_side;

typedef enum hslab_pair_kind { HSLAB_RANDOM_RANDOM = 0, HSLAB_NEAR_DIAGONAL = 1 } hslab_pair_kind;

typedef struct hslab_mesh hslab_mesh;
typedef struct hslab_problem hslab_problem;
typedef struct hslab_operator hslab_operator;
typedef struct hslab_sweep hslab_sweep;
typedef struct hslab_records hslab_records;
typedef struct hslab_selection hslab_selection;

HSLAB_API const char* hslab_version(void);
/* Error name such as "NotPositiveDefinite". */
HSLAB_API const char* hslab_status_name(hslab_status status);
HSLAB_API const char* hslab_last_error(void);

/* ---- mesh ------------------------------------------------------------ */

HSLAB_API hslab_status hslab_mesh_create(int n_sub, int grid_cols, int grid_rows, hslab_side side, double t0,
                                         double t1, hslab_mesh** out);
HSLAB_API void hslab_mesh_destroy(hslab_mesh* mesh);
HSLAB_API hslab_status hslab_mesh_counts(const hslab_mesh* mesh, size_t* nodes, size_t* triangles,
                                         size_t* patch_edges);
/* Writes the node/element text file; `header` (may be NULL) is written as
 * the first line. */
HSLAB_API hslab_status hslab_mesh_write(const hslab_mesh* mesh, const char* path, const char* header);

/* ---- forward maps ----------------------------------------------------- */

HSLAB_API hslab_status hslab_problem_create(const hslab_mesh* mesh, hslab_problem_kind kind, hslab_problem** out);
HSLAB_API void hslab_problem_destroy(hslab_problem* problem);
HSLAB_API hslab_status hslab_problem_info(const hslab_problem* problem, size_t* basis_dim, size_t* n_cells,
                                          size_t* param_size);

/* Point of the compact class [lo, hi] for stream (seed, index). */
HSLAB_API hslab_status hslab_problem_sample(const hslab_problem* problem, double lambda_lo, double lambda_hi,
                                            uint64_t seed, uint64_t index, double* out, size_t len);
/* Random direction with unit total Frobenius norm. */
HSLAB_API hslab_status hslab_problem_direction(const hslab_problem* problem, uint64_t seed, uint64_t index,
                                               double* out, size_t len);

HSLAB_API hslab_status hslab_forward(const hslab_problem* problem, const double* params, size_t len,
                                     hslab_operator** out);
HSLAB_API void hslab_operator_destroy(hslab_operator* op);
HSLAB_API size_t hslab_operator_dim(const hslab_operator* op);
/* Row-major dim x dim copies. */
HSLAB_API hslab_status hslab_operator_matrix(const hslab_operator* op, double* out, size_t len);
HSLAB_API hslab_status hslab_operator_gram(const hslab_operator* op, double* out, size_t len);
/* Relative asymmetry of the raw assembled matrix. */
HSLAB_API hslab_status hslab_operator_asymmetry(const hslab_operator* op, double* out);
HSLAB_API hslab_status hslab_operator_write_csv(const hslab_operator* op, const char* path, const char* header);

/* Directional derivative of the data matrix at params along direction;
 * out receives dim x dim row-major entries. */
HSLAB_API hslab_status hslab_derivative(const hslab_problem* problem, const double* params, const double* direction,
                                        size_t len, double* out, size_t out_len);

HSLAB_API hslab_status hslab_operator_distance(const hslab_operator* a, const hslab_operator* b, double* out);
/* k = 0 means the full basis dimension. */
HSLAB_API hslab_status hslab_phi(const hslab_operator* a, const hslab_operator* b, size_t k, double* out);
HSLAB_API hslab_status hslab_matrix_element(const hslab_operator* a, size_t i, size_t j, double* out);

/* ---- sweeps ----------------------------------------------------------- */

typedef struct hslab_sweep_config {
  double lambda_lo;
  double lambda_hi;
  const int* recovered_cells; /* NULL: all cells */
  size_t n_recovered;
  size_t random_pairs;
  size_t rays;
  size_t ray_steps;
  double t_min;
  double t_max;
  uint64_t seed;
  size_t probe_k; /* 0: full basis dimension */
  unsigned threads;
} hslab_sweep_config;

HSLAB_API void hslab_sweep_config_init(hslab_sweep_config* config);
HSLAB_API hslab_status hslab_sweep_run(const hslab_problem* problem, const hslab_sweep_config* config,
                                       hslab_sweep** out);
HSLAB_API void hslab_sweep_destroy(hslab_sweep* sweep);
HSLAB_API hslab_status hslab_sweep_counts(const hslab_sweep* sweep, size_t* records, size_t* dropped);
/* Copy of the sweep's records. */
HSLAB_API hslab_status hslab_sweep_records(const hslab_sweep* sweep, hslab_records** out);

/* Greedy measurement selection over the sweep's operator pairs, with
 * candidates (i, j), i <= j; max_size = 0 allows all dim(dim+1)/2 of them.
 * Succeeds even when the ratio is not reached;
 * check `reached` via hslab_selection_info. */
HSLAB_API hslab_status hslab_sweep_select(const hslab_sweep* sweep, double target_ratio, size_t max_size,
                                          unsigned threads, hslab_selection** out);
/* Fills delta_finite of every record from the selected pairs. */
HSLAB_API hslab_status hslab_sweep_attach_selection(hslab_sweep* sweep, const hslab_selection* selection);

HSLAB_API void hslab_selection_destroy(hslab_selection* selection);
HSLAB_API hslab_status hslab_selection_info(const hslab_selection* selection, size_t* size, double* ratio,
                                            int* reached);
HSLAB_API hslab_status hslab_selection_pairs(const hslab_selection* selection, size_t* rows, size_t* cols,
                                             size_t len);
HSLAB_API hslab_status hslab_selection_write_csv(const hslab_selection* selection, const char* path,
                                                 const char* header);

/* ---- records and fits ------------------------------------------------- */

typedef struct hslab_record {
  size_t pair_id;
  hslab_pair_kind kind;
  double t;
  double delta_R;
  double delta_F;
  double phi;
  double delta_finite; /* NaN when absent */
  int injectivity_flag;
} hslab_record;

typedef struct hslab_fit {
  double theta;
  double theta_precap;
  double log_C;
  size_t n_bins;
  double slack;
  double max_violation;
  size_t records_used;
  size_t dropped;
  size_t violations;
  int constant_R;
} hslab_fit;

HSLAB_API hslab_status hslab_records_create(hslab_records** out);
HSLAB_API void hslab_records_destroy(hslab_records* records);
HSLAB_API hslab_status hslab_records_append(hslab_records* records, const hslab_record* record);
HSLAB_API size_t hslab_records_count(const hslab_records* records);
HSLAB_API hslab_status hslab_records_get(const hslab_records* records, size_t i, hslab_record* out);
HSLAB_API hslab_status hslab_records_read_csv(const char* path, hslab_records** out);
HSLAB_API hslab_status hslab_records_write_csv(const hslab_records* records, const char* path, const char* header);

/* use_finite != 0 fits delta_R against delta_finite instead of delta_F. */
HSLAB_API hslab_status hslab_fit_records(const hslab_records* records, size_t n_bins, double slack, int use_finite,
                                         hslab_fit* out);
/* Writes up to `cap` offending pair ids; `count` receives the total. */
HSLAB_API hslab_status hslab_injectivity_probe(const hslab_records* records, double floor, double scale,
                                               size_t* ids, size_t cap, size_t* count);

/* ---- flat counterexample ---------------------------------------------- */

typedef struct hslab_flat_sample {
  double t;
  double F_t;
  double local_slope;
} hslab_flat_sample;

/* tol is relative to the scale t*exp(-1/t^2) of F(t). */
HSLAB_API hslab_status hslab_flat_counterexample(const double* ts, size_t n, double tol, hslab_flat_sample* out);
HSLAB_API hslab_status hslab_analytic_control(const double* ts, size_t n, size_t n_bins, double slack,
                                              hslab_flat_sample* out, hslab_fit* fit);

HSLAB_API hslab_status hslab_adaptive_quadrature(double (*f)(double, void*), void* ctx, double a, double b,
                                                 double tol, double* out);

#ifdef __cplusplus
}
#endif

#endif /* HSLAB_H */
