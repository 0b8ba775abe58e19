/*
 * hamflow C API.
 *
 * C bindings for the hamflow shared library: symbolic scalar fields on
 * velocity/momentum charts, generalized Hamiltonian dynamics driven by
 * Pfaffian normal-form data, and the scenario runner behind the hamflow
 * CLI. All objects are opaque handles; every fallible function returns a
 * hamflow_status, and hamflow_last_error() describes the most recent
 * failure in the calling thread.
 *
 * Strings returned through char** out-parameters are heap-allocated and
 * must be released with hamflow_string_free().
 */

#ifndef HAMFLOW_HAMFLOW_H
#define HAMFLOW_HAMFLOW_H

#include <stddef.h>

#if defined(_WIN32)
#define HAMFLOW_API __declspec(dllexport)
#else
#define HAMFLOW_API __attribute__((visibility("default")))
#endif

#define HAMFLOW_VERSION_STRING "0.1.0"

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hamflow_status {
  HAMFLOW_OK = 0,
  HAMFLOW_ERR_PARSE = 1,
  HAMFLOW_ERR_UNKNOWN_IDENTIFIER = 2,
  HAMFLOW_ERR_DOMAIN = 3,
  HAMFLOW_ERR_CHART_MISMATCH = 4,
  HAMFLOW_ERR_NONZERO_DT = 5,
  HAMFLOW_ERR_NON_INTEGRABLE = 6,
  HAMFLOW_ERR_SINGULAR_MASS_MATRIX = 7,
  HAMFLOW_ERR_NEWTON_DIVERGENCE = 8,
  HAMFLOW_ERR_NON_FINITE_STATE = 9,
  HAMFLOW_ERR_VALIDATION = 10,
  HAMFLOW_ERR_UNKNOWN_CHECK = 11,
  HAMFLOW_ERR_IO = 12,
  HAMFLOW_ERR_CHECK_FAILED = 13,
  HAMFLOW_ERR_INVALID_ARGUMENT = 14,
  HAMFLOW_ERR_INTERNAL = 15
} hamflow_status;

typedef enum hamflow_chart_kind {
  HAMFLOW_CHART_VELOCITY = 0, /* coordinates t, x1..xn, v1..vn */
  HAMFLOW_CHART_MOMENTUM = 1, /* coordinates t, x1..xn, p1..pn */
  HAMFLOW_CHART_CONFIG = 2    /* coordinates t, x1..xn */
} hamflow_chart_kind;

typedef struct hamflow_chart hamflow_chart;
typedef struct hamflow_field hamflow_field;
typedef struct hamflow_normal_form hamflow_normal_form;
typedef struct hamflow_trajectory hamflow_trajectory;

/* --------------------------------------------------------------------- */
/* Library information and error reporting                                */

HAMFLOW_API const char* hamflow_version(void);

/* Message for the last failed call in this thread; empty string if none. */
HAMFLOW_API const char* hamflow_last_error(void);

HAMFLOW_API void hamflow_string_free(char* s);

/* --------------------------------------------------------------------- */
/* Charts and scalar fields                                               */

HAMFLOW_API hamflow_status hamflow_chart_new(hamflow_chart_kind kind, int dimension,
                                             hamflow_chart** out);
HAMFLOW_API void hamflow_chart_free(hamflow_chart* chart);

/* Number of coordinates of the chart (2n+1, or n+1 for config charts). */
HAMFLOW_API hamflow_status hamflow_chart_size(const hamflow_chart* chart, size_t* out);

/* Parses an expression over the chart's coordinate names. */
HAMFLOW_API hamflow_status hamflow_field_parse(const hamflow_chart* chart,
                                               const char* source,
                                               hamflow_field** out);
HAMFLOW_API void hamflow_field_free(hamflow_field* field);

/* point must supply all coordinates in chart order (t, x.., v/p..). */
HAMFLOW_API hamflow_status hamflow_field_eval(const hamflow_field* field,
                                              const double* point, size_t point_len,
                                              double* out);

/* Exact symbolic partial derivative with respect to a named coordinate. */
HAMFLOW_API hamflow_status hamflow_field_diff(const hamflow_field* field,
                                              const char* coordinate,
                                              hamflow_field** out);

/* Text form of the field; reparses to an evaluation-identical field. */
HAMFLOW_API hamflow_status hamflow_field_str(const hamflow_field* field, char** out);

/* Poisson bracket {f, g} of two fields on one momentum chart. */
HAMFLOW_API hamflow_status hamflow_poisson_bracket(const hamflow_field* f,
                                                   const hamflow_field* g,
                                                   hamflow_field** out);

/* --------------------------------------------------------------------- */
/* Normal forms and Hamiltonian dynamics                                  */

/*
 * Builds the normal form eta = dH - sum_a mu_a dv^a on a momentum chart.
 * hamiltonian, mu_sources[a] and v_sources[a] are expression strings;
 * term_count may be zero for the classical case.
 */
HAMFLOW_API hamflow_status hamflow_normal_form_new(const hamflow_chart* chart,
                                                   const char* hamiltonian,
                                                   const char* const* mu_sources,
                                                   const char* const* v_sources,
                                                   size_t term_count,
                                                   hamflow_normal_form** out);
HAMFLOW_API void hamflow_normal_form_free(hamflow_normal_form* nf);

/*
 * Generalized Hamilton equations at one state:
 *   xdot^i = dH/dp_i - mu_a dv^a/dp_i,  pdot_i = -dH/dx^i + mu_a dv^a/dx^i.
 * x, p, xdot, pdot all have length n.
 */
HAMFLOW_API hamflow_status hamflow_hamilton_rhs(const hamflow_normal_form* nf,
                                                double t, const double* x,
                                                const double* p, double* xdot,
                                                double* pdot);

/* Fixed-step RK4 from (t0, x0, p0) to t1; every step is recorded. */
HAMFLOW_API hamflow_status hamflow_integrate(const hamflow_normal_form* nf, double t0,
                                             const double* x0, const double* p0,
                                             double t1, double step,
                                             hamflow_trajectory** out);
HAMFLOW_API void hamflow_trajectory_free(hamflow_trajectory* trajectory);

HAMFLOW_API hamflow_status hamflow_trajectory_length(const hamflow_trajectory* trajectory,
                                                     size_t* out);
HAMFLOW_API hamflow_status hamflow_trajectory_dimension(const hamflow_trajectory* trajectory,
                                                        int* out);
HAMFLOW_API hamflow_status hamflow_trajectory_step(const hamflow_trajectory* trajectory,
                                                   double* out);

/* state receives 2n values (x1..xn, p1..pn) for sample k. */
HAMFLOW_API hamflow_status hamflow_trajectory_sample(const hamflow_trajectory* trajectory,
                                                     size_t k, double* t, double* state);

/* CSV with header t,x1..xn,p1..pn, 17 significant digits. */
HAMFLOW_API hamflow_status hamflow_trajectory_write_csv(const hamflow_trajectory* trajectory,
                                                        const char* path);

/* Max interior |dH/dt - dH/dt_partial + mu_a {H, v^a}| along a trajectory. */
HAMFLOW_API hamflow_status hamflow_energy_balance_residual(const hamflow_normal_form* nf,
                                                           const hamflow_trajectory* trajectory,
                                                           double* out);

/* --------------------------------------------------------------------- */
/* Scenario runner                                                        */

/*
 * Runs a scenario from its JSON text: integrates the system, writes
 * <name>_trajectory.csv and <name>_report.json under out_dir, and runs
 * the requested checks (jobs > 1 runs them concurrently). On return the
 * report JSON is stored in *report_json when it is non-NULL. Returns
 * HAMFLOW_OK when all checks pass and HAMFLOW_ERR_CHECK_FAILED when at
 * least one fails; *checks_failed receives the failure count. The
 * HAMFLOW_SEED environment variable overrides the config seed.
 */
HAMFLOW_API hamflow_status hamflow_run(const char* config_json, const char* out_dir,
                                       int jobs, int* checks_failed,
                                       char** report_json);

/* Pointwise checks only; no integration, no files written. */
HAMFLOW_API hamflow_status hamflow_verify(const char* config_json, int jobs,
                                          int* checks_failed, char** report_json);

/* Newline-separated "name  -  description" lines for built-in scenarios. */
HAMFLOW_API hamflow_status hamflow_builtin_list(char** out);

/* Config JSON of a built-in scenario, or an error for unknown names. */
HAMFLOW_API hamflow_status hamflow_builtin_scenario(const char* name, char** out);

#ifdef __cplusplus
}
#endif

#endif /* HAMFLOW_HAMFLOW_H */
