/*
 * powerborrow C API.
 *
 * Power-prior analysis of the normal linear model behind opaque handles.
 * Every fallible call returns a pb_status; on failure the thread-local
 * pb_last_error_message() describes what went wrong. Handles are created by
 * the *_create / *_from_* / *_read_* functions and released by the matching
 * *_free function. Matrices are dense, row-major.
 */
#ifndef POWERBORROW_H
#define POWERBORROW_H

#include <stddef.h>
#include <stdint.h>

#if defined(PB_BUILDING_LIBRARY)
#define PB_API __attribute__((visibility("default")))
#else
#define PB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pb_status {
    PB_OK = 0,
    PB_ERR_SHAPE_MISMATCH,
    PB_ERR_SINGULAR_DESIGN,
    PB_ERR_NOT_POSITIVE_DEFINITE,
    PB_ERR_INVALID_SUMMARY,
    PB_ERR_INVALID_HYPERPARAMETER,
    PB_ERR_INSUFFICIENT_HISTORICAL_DATA,
    PB_ERR_SINGULAR_SYSTEM,
    PB_ERR_OUTSIDE_FEASIBLE_SET,
    PB_ERR_NONPOSITIVE_SCALE,
    PB_ERR_IMPROPER_POSTERIOR,
    PB_ERR_MOMENT_UNDEFINED,
    PB_ERR_EMPTY_DOMAIN,
    PB_ERR_UNSUPPORTED_DIMENSION,
    PB_ERR_DIVERGENT,
    PB_ERR_DOMAIN,
    PB_ERR_INVALID_ARGUMENT,
    PB_ERR_IO,
    PB_ERR_PARSE,
    PB_ERR_INTERNAL
} pb_status;

PB_API const char* pb_version(void);
PB_API const char* pb_status_name(pb_status status);
PB_API const char* pb_last_error_message(void);
PB_API void pb_string_free(char* s);

/* ---- sufficient statistics ------------------------------------------------ */

typedef struct pb_stats pb_stats;

PB_API pb_status pb_stats_from_data(const double* x, size_t n, size_t p, const double* y, pb_stats** out);
PB_API pb_status pb_stats_from_summary(long n, double ybar, double sd, pb_stats** out);
/* CSV with a header row; column "y" is the response, all others covariates. */
PB_API pb_status pb_stats_read_csv(const char* path, pb_stats** out);
PB_API void pb_stats_free(pb_stats* stats);
PB_API size_t pb_stats_n(const pb_stats* stats);
PB_API size_t pb_stats_p(const pb_stats* stats);
/* Any output pointer may be NULL. beta_hat and xty hold p values, xtx p*p. */
PB_API pb_status pb_stats_get(const pb_stats* stats, double* beta_hat, double* s, double* xtx, double* xty);
PB_API pb_status pb_chol_logdet(const double* m, size_t dim, double* out);

/* ---- initial priors and the feasible set ---------------------------------- */

typedef struct pb_prior pb_prior;

PB_API pb_status pb_prior_reference(size_t p, pb_prior** out);
/* R = X'X / g with X'X taken from xtx_source. mu0 may be NULL (zero vector). */
PB_API pb_status pb_prior_zellner(double g, const pb_stats* xtx_source, const double* mu0, pb_prior** out);
PB_API pb_status pb_prior_nig(size_t p, const double* mu0, const double* r, double a, double b, pb_prior** out);
PB_API pb_status pb_prior_custom(size_t p, double t, double b, int k, const double* mu0, const double* r,
                                 pb_prior** out);
/* {"kind": "reference" | "zellner" | "nig" | "custom", ...}; either stats pointer may be NULL. */
PB_API pb_status pb_prior_from_json(const char* json, size_t p, const pb_stats* historical, const pb_stats* current,
                                    pb_prior** out);
PB_API pb_status pb_prior_set_normalized(pb_prior* prior, int normalized);
PB_API pb_status pb_prior_params(const pb_prior* prior, double* t, double* b, int* k);
PB_API const char* pb_prior_label(const pb_prior* prior);
PB_API void pb_prior_free(pb_prior* prior);

typedef struct pb_feasible_set {
    double lower;
    int lower_open;
    double upper;
    int upper_open;
    int includes_zero;
} pb_feasible_set;

PB_API pb_status pb_feasible_set_compute(const pb_prior* prior, long n0, long p, pb_feasible_set* out);
PB_API int pb_feasible_set_contains(const pb_feasible_set* set, double delta);

/* ---- power posterior ------------------------------------------------------- */

typedef struct pb_context pb_context;

PB_API pb_status pb_context_create(const pb_prior* prior, const pb_stats* historical, const pb_stats* current,
                                   pb_context** out);
PB_API void pb_context_free(pb_context* ctx);
PB_API size_t pb_context_p(const pb_context* ctx);
PB_API pb_status pb_context_feasible_set(const pb_context* ctx, pb_feasible_set* out);

/* log C(delta), including all (2 pi) constants. */
PB_API pb_status pb_log_c(const pb_prior* prior, const pb_stats* historical, double delta, double* out);
PB_API pb_status pb_log_marginal_likelihood(const pb_context* ctx, double delta, double* out);

/* beta_tilde and beta_star hold p values; either may be NULL. */
PB_API pb_status pb_nig_coefficients(const pb_context* ctx, double delta, double* nu0, double* nu, double* h0,
                                     double* h, double* beta_tilde, double* beta_star);
/* location: p values, precision: p*p. */
PB_API pb_status pb_posterior(const pb_context* ctx, double delta, double* location, double* precision,
                              double* shape, double* scale);
PB_API pb_status pb_posterior_moments(const pb_context* ctx, double delta, double* mean_beta, double* mean_sigma2,
                                      double* cov_beta);
/* beta: n_draws*p row-major, sigma2: n_draws. Deterministic given seed. */
PB_API pb_status pb_sample_posterior(const pb_context* ctx, double delta, size_t n_draws, uint64_t seed,
                                     double* beta, double* sigma2);
PB_API pb_status pb_dic(const pb_context* ctx, double delta, double* dic, double* p_d);

/* log pi0(delta); NULL means uniform. */
typedef double (*pb_log_delta_prior_fn)(double delta, void* user);

/* Writes -INFINITY (and returns PB_OK) when delta is outside the feasible set. */
PB_API pb_status pb_delta_log_posterior(const pb_context* ctx, double delta, pb_log_delta_prior_fn log_prior,
                                        void* user, double* out);

/* ---- delta selection -------------------------------------------------------- */

typedef enum pb_criterion { PB_CRITERION_MARGINAL_LIKELIHOOD = 0, PB_CRITERION_DIC = 1 } pb_criterion;

typedef struct pb_profile pb_profile;

PB_API pb_status pb_select_delta(const pb_context* ctx, pb_criterion criterion, long grid_size, double tol,
                                 pb_profile** out);
PB_API pb_status pb_profile_curve(const pb_context* ctx, pb_criterion criterion, long grid_size, pb_profile** out);
/* Normalized delta posterior on a grid over the feasible set; mean may be NULL. */
PB_API pb_status pb_delta_posterior(const pb_context* ctx, pb_log_delta_prior_fn log_prior, void* user,
                                    long grid_size, pb_profile** out, double* mean);
PB_API size_t pb_profile_size(const pb_profile* profile);
PB_API pb_status pb_profile_point(const pb_profile* profile, size_t i, double* delta, double* value, int* feasible);
PB_API double pb_profile_selected(const pb_profile* profile);
PB_API double pb_profile_selected_value(const pb_profile* profile);
PB_API void pb_profile_free(pb_profile* profile);

/* ---- Bernoulli joint vs normalized power prior ----------------------------- */

PB_API pb_status pb_bernoulli_npp_log_density(double theta, double delta, long y0, long n0, double a1, double a2,
                                              double log_c0, double* out);
PB_API pb_status pb_bernoulli_jpp_log_kernel(double theta, double delta, long y0, long n0, double a1, double a2,
                                             double log_c0, double* out);
PB_API double pb_log_binomial_coefficient(long n0, long y0);

/* ---- simulation studies ------------------------------------------------------ */

typedef struct pb_fig1_config {
    long n;
    long n0;
    double s;
    double s0;
    double ybar;
    const double* discrepancy_grid; /* NULL: 0 to 1.5 step 0.05 */
    size_t grid_len;
    const char* methods; /* comma-separated subset of EB1,EB2,DIC; NULL: all */
    long select_grid_size;
    double tol;
} pb_fig1_config;

typedef struct pb_fig2_config {
    const double* beta_current; /* NULL: (1,1,1,1) */
    size_t p;
    const double* beta04_grid; /* NULL: 1 to 3, 9 points */
    size_t grid_len;
    long n;
    long n0;
    double sigma;
    long replicates;
    uint64_t seed;
    const char* methods;
    long select_grid_size;
    double tol;
    unsigned workers;
    int common_random_numbers; /* nonzero: replicate r uses the same streams in every cell */
} pb_fig2_config;

typedef struct pb_sim_record {
    double cell;
    char method[8];
    double mean_delta;
    double log_mse;
    long replicates;
    long failures;
    double elapsed_seconds;
} pb_sim_record;

typedef struct pb_sim_result pb_sim_result;

PB_API void pb_fig1_config_default(pb_fig1_config* cfg);
PB_API void pb_fig2_config_default(pb_fig2_config* cfg);
PB_API pb_status pb_simulate_fig1(const pb_fig1_config* cfg, pb_sim_result** out);
PB_API pb_status pb_simulate_fig2(const pb_fig2_config* cfg, pb_sim_result** out);
PB_API size_t pb_sim_result_size(const pb_sim_result* result);
PB_API pb_status pb_sim_result_record(const pb_sim_result* result, size_t i, pb_sim_record* out);
PB_API const char* pb_sim_result_config_hash(const pb_sim_result* result);
/* Caller releases the string with pb_string_free. */
PB_API pb_status pb_sim_result_csv(const pb_sim_result* result, char** out);
PB_API pb_status pb_sim_result_json(const pb_sim_result* result, char** out);
PB_API void pb_sim_result_free(pb_sim_result* result);

/* ---- oracle cross-checks ---------------------------------------------------- */

/* case_name: all | proper | improper | pooled | dic. report_json is released with pb_string_free. */
PB_API pb_status pb_oracle_check(const char* case_name, long dic_draws, uint64_t seed, char** report_json,
                                 int* all_passed);

#ifdef __cplusplus
}
#endif

#endif /* POWERBORROW_H */
