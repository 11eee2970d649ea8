#ifndef PATHDEV_PATHDEV_H
#define PATHDEV_PATHDEV_H

#include <stddef.h>

#if defined(_WIN32)
#define PD_API __declspec(dllexport)
#else
#define PD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pd_status {
  PD_OK = 0,
  PD_ERR_ARGUMENT = 1,
  PD_ERR_DOMAIN = 2,
  PD_ERR_STENCIL = 3,
  PD_ERR_PARSE = 4,
  PD_ERR_CONFIG = 5,
  PD_ERR_NUMERICAL = 6,
  PD_ERR_TRUNCATION = 7,
  PD_ERR_SCENARIO = 8,
  PD_ERR_DEGENERATE = 9,
  PD_ERR_INTERNAL = 10
} pd_status;

typedef struct pd_manifold pd_manifold;
typedef struct pd_curve pd_curve;
typedef struct pd_config pd_config;
typedef struct pd_run pd_run;

typedef struct pd_overrides {
  int has_step;
  double step;
  int has_quad_panels;
  int quad_panels;
  int has_fd_step;
  double fd_step;
} pd_overrides;

typedef struct pd_run_options {
  const char* output_dir; /* NULL: PATHDEV_OUTPUT_DIR, then "." */
  int write_files;
  int threads; /* 0: hardware concurrency */
} pd_run_options;

PD_API const char* pd_version(void);

/* Message of the last failed call on this thread; never NULL. */
PD_API const char* pd_last_error(void);
PD_API const char* pd_status_name(pd_status status);
/* 0 ok, 2 config, 3 numerical, 4 domain or truncation. */
PD_API int pd_exit_code(pd_status status);

/* Manifolds: catalog names such as "sphere2:1". */
PD_API pd_status pd_manifold_create(const char* spec, pd_manifold** out);
PD_API void pd_manifold_destroy(pd_manifold* m);
PD_API int pd_manifold_dim(const pd_manifold* m);
/* out: dim^3 entries Gamma^i_jk, row-major (i, j, k). */
PD_API pd_status pd_christoffel(const pd_manifold* m, const double* x, double* out);
/* out: dim^3 entries T^i_jk. */
PD_API pd_status pd_torsion(const pd_manifold* m, const double* x, double* out);
/* out: dim^4 entries R^i_jkl. */
PD_API pd_status pd_curvature(const pd_manifold* m, const double* x, double* out);

/* Curves. Expression components use the parameter name "t". */
PD_API pd_status pd_curve_expression(int dim, const char* const* components, double lo, double hi,
                                     pd_curve** out);
PD_API pd_status pd_curve_geodesic(const pd_manifold* m, const double* x0, const double* u0, double lo,
                                   double hi, double step, pd_curve** out);
PD_API void pd_curve_destroy(pd_curve* c);
PD_API pd_status pd_curve_point(const pd_curve* c, double t, double* out);
PD_API pd_status pd_curve_tangent(const pd_curve* c, double t, double* out);

/* Transport and displacement. m == NULL selects the euclidean law. */
PD_API pd_status pd_transport_matrix(const pd_manifold* m, const pd_curve* c, double s, double t, double step,
                                     double* out);
PD_API pd_status pd_displacement(const pd_manifold* m, const pd_curve* c, double s, double t, double step,
                                 int panels, double* out);
/* (I - H_loop) / eps^2 over a coordinate square in the (k, l) plane; out: dim^2. */
PD_API pd_status pd_holonomy_curvature(const pd_manifold* m, const double* x, int k, int l, double eps,
                                       double* out);

/* Scenarios. overrides may be NULL. */
PD_API pd_status pd_config_load(const char* path, const pd_overrides* overrides, pd_config** out);
PD_API pd_status pd_config_parse(const char* text, const pd_overrides* overrides, pd_config** out);
PD_API void pd_config_destroy(pd_config* cfg);
PD_API const char* pd_config_name(const pd_config* cfg);
PD_API const char* pd_config_task(const pd_config* cfg);
PD_API const char* pd_config_hash(const pd_config* cfg);
PD_API size_t pd_config_grid_size(const pd_config* cfg);

/* On failure *out still receives the partial record when rows were produced. */
PD_API pd_status pd_run_scenario(const pd_config* cfg, const pd_run_options* options, pd_run** out);
PD_API void pd_run_destroy(pd_run* run);
PD_API size_t pd_run_rows(const pd_run* run);
PD_API size_t pd_run_columns(const pd_run* run);
PD_API const char* pd_run_column_name(const pd_run* run, size_t column);
PD_API double pd_run_value(const pd_run* run, size_t row, size_t column);
PD_API int pd_run_complete(const pd_run* run);
PD_API double pd_run_wall_time(const pd_run* run);
PD_API const char* pd_run_csv_path(const pd_run* run);
PD_API const char* pd_run_sidecar_path(const pd_run* run);
PD_API const char* pd_run_evidence(const pd_run* run);

/* Catalog text or JSON; release with pd_string_free. */
PD_API pd_status pd_catalog(int as_json, char** out);
PD_API void pd_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
