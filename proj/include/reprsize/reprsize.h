/* C interface to the representation-size library: asymptotic risks of PCA-pretrained linear
 * probes, phase boundaries for the optimal representation size, and a Monte Carlo oracle.
 *
 * Every fallible call returns an rs_status; on failure rs_last_error() holds a message for the
 * calling thread. Output pointers are written only on success. */
#ifndef REPRSIZE_REPRSIZE_H
#define REPRSIZE_REPRSIZE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RS_API __declspec(dllexport)
#else
#define RS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rs_status {
    RS_OK = 0,
    RS_ERR_DOMAIN = 1,         /* argument outside the domain of the formula */
    RS_ERR_SINGULAR = 2,       /* gamma_eff ~ 1, spike below BBP, or no usable grid value */
    RS_ERR_NUMERIC = 3,        /* quadrature or eigensolver did not converge */
    RS_ERR_NULL_ARGUMENT = 4,
    RS_ERR_INTERNAL = 5
} rs_status;

RS_API const char* rs_last_error(void);
RS_API const char* rs_status_name(rs_status status);
RS_API const char* rs_version(void);

typedef struct rs_model_params {
    double gamma_u;        /* p / n_u */
    double gamma_l;        /* p / n_l */
    double alpha;          /* retained fraction m / p */
    double lambda;         /* spike strength, > 1 */
    double eta;            /* squared alignment of the signal with the spike */
    double w_star_norm_sq; /* signal power */
    double noise_var;      /* label noise variance */
} rs_model_params;

typedef struct rs_risk_breakdown {
    double e_est, e_gen, e_train;
    double missing_signal, leaked_signal, variance;
    double test_spike_bias, irreducible;
} rs_risk_breakdown;

typedef struct rs_projection_limits {
    double p_ww, p_vv, p_wv;
    double p_perp_ww, p_perp_vv, p_perp_wv;
    double lambda_bar, sigma_eff_sq;
    double pi_ww, pi_vv, pi_wv;
    double gamma_eff;
} rs_projection_limits;

/* Test covariance spikes. */
typedef struct rs_test_spec rs_test_spec;
RS_API rs_test_spec* rs_test_spec_new(void);
/* Single spike equal to the pretraining spike (test covariance = training covariance). */
RS_API rs_test_spec* rs_test_spec_matched(double lambda, double eta);
RS_API rs_status rs_test_spec_add(rs_test_spec* spec, double nu, double rho_w_new, double rho_v_new);
RS_API size_t rs_test_spec_size(const rs_test_spec* spec);
RS_API void rs_test_spec_free(rs_test_spec* spec);

/* Grid of retained fractions for the argmin search. */
typedef struct rs_alpha_grid rs_alpha_grid;
RS_API rs_status rs_alpha_grid_standard(int count, double lo, double guard_band, rs_alpha_grid** out);
RS_API rs_status rs_alpha_grid_from_values(const double* values, size_t n, double guard_band, rs_alpha_grid** out);
RS_API size_t rs_alpha_grid_size(const rs_alpha_grid* grid);
RS_API double rs_alpha_grid_value(const rs_alpha_grid* grid, size_t i);
RS_API int rs_alpha_grid_excluded(const rs_alpha_grid* grid, double alpha, double gamma_l);
RS_API void rs_alpha_grid_free(rs_alpha_grid* grid);

/* Marchenko-Pastur law. */
RS_API rs_status rs_mp_density(double gamma, double theta, double* out);
RS_API rs_status rs_mp_cdf(double gamma, double theta, double* out);
RS_API rs_status rs_mp_bulk_threshold(double gamma_u, double alpha, double* out);
RS_API rs_status rs_mp_inverse_moment(double gamma, double* out);
RS_API rs_status rs_pseudoinverse_trace_limit(double gamma_eff, double* out);

/* Spiked sample covariance. */
RS_API rs_status rs_spike_location(double lambda, double gamma_u, double* out);
RS_API rs_status rs_bbp_overlap(double lambda, double gamma_u, double* out);

/* Deterministic limits and risks. `test` may be NULL for an isotropic test covariance. */
RS_API rs_status rs_projection_bundle(const rs_model_params* params, rs_projection_limits* out);
RS_API rs_status rs_estimation_error(const rs_model_params* params, rs_risk_breakdown* out);
RS_API rs_status rs_generalisation_error(const rs_model_params* params, const rs_test_spec* test,
                                         rs_risk_breakdown* out);
RS_API rs_status rs_training_error(const rs_model_params* params, double* out);
RS_API rs_status rs_risk_limits_gamma_u_zero(const rs_model_params* params, rs_risk_breakdown* out);
RS_API rs_status rs_risk_limits_gamma_l_zero(const rs_model_params* params, const rs_test_spec* test,
                                             rs_risk_breakdown* out);

/* Optimal representation size and phase boundaries. params->alpha is ignored. */
RS_API rs_status rs_optimal_alpha(const rs_model_params* params, const rs_test_spec* test,
                                  const rs_alpha_grid* grid, double* alpha_star, double* e_gen_min);
RS_API double rs_train_optimal_alpha(double gamma_l);
/* *found is 0 when no crossing exists in (1, gamma_l_max]; *gamma_l is then NaN. */
RS_API rs_status rs_endpoint_transition_curve(double lambda, double eta, double snr, double gamma_u,
                                              double gamma_l_max, int* found, double* gamma_l,
                                              int* root_count);
/* All crossings in (1, gamma_l_max], ascending. Writes min(capacity, *count) values; *count is the total. */
RS_API rs_status rs_endpoint_transition_roots(double lambda, double eta, double snr, double gamma_u,
                                              double gamma_l_max, double* roots, size_t capacity,
                                              size_t* count);
RS_API rs_status rs_stability_boundary(double lambda, double eta, double snr, double gamma_u, double* out);
RS_API rs_status rs_substitution_rate(const rs_model_params* tmpl, double p, double n_u, double n_l,
                                      double h_u, double h_l, const rs_test_spec* test,
                                      const rs_alpha_grid* grid, double* rate, int* one_sided);

typedef struct rs_heatmap rs_heatmap;
typedef struct rs_heatmap_cell {
    double n_u, n_l;
    double alpha_star, e_gen_min;
    int singular;
    double substitution_rate; /* from grid differences, one cell per step */
    int rate_one_sided;
} rs_heatmap_cell;

RS_API rs_status rs_heatmap_compute(const rs_model_params* tmpl, double p, double n_u_lo, double n_u_hi,
                                    int n_u_count, double n_l_lo, double n_l_hi, int n_l_count,
                                    const rs_test_spec* test, const rs_alpha_grid* grid, int threads,
                                    rs_heatmap** out);
RS_API size_t rs_heatmap_rows(const rs_heatmap* hm);
RS_API size_t rs_heatmap_cols(const rs_heatmap* hm);
RS_API rs_status rs_heatmap_cell_at(const rs_heatmap* hm, size_t row, size_t col, rs_heatmap_cell* out);
RS_API void rs_heatmap_free(rs_heatmap* hm);

/* Monte Carlo oracle. */
typedef struct rs_finite_instance {
    int p, n_u, n_l, m;
    double lambda, eta;
    double w_star_norm, noise_sd;
    uint64_t seed;
} rs_finite_instance;

typedef struct rs_trial_stats {
    double e_est_mean, e_est_sd;
    double e_gen_mean, e_gen_sd;
    double e_train_mean, e_train_sd;
    double spike_overlap_sq_mean, spike_overlap_sq_sd;
    int n_trials;
} rs_trial_stats;

typedef enum rs_method { RS_METHOD_PRETRAINED = 0, RS_METHOD_PCR = 1, RS_METHOD_OLS = 2 } rs_method;

/* One draw per trial serves every alpha; out has n_alpha entries. inst->m is ignored. */
RS_API rs_status rs_mc_alpha_curve(const rs_finite_instance* inst, const double* alphas, size_t n_alpha,
                                   int n_trials, const rs_test_spec* test, rs_method method, int threads,
                                   rs_trial_stats* out);
RS_API rs_status rs_mc_run_trials(const rs_finite_instance* inst, int n_trials, const rs_test_spec* test,
                                  int threads, rs_trial_stats* out);
RS_API rs_status rs_mc_baselines(const rs_finite_instance* inst, int n_trials, const rs_test_spec* test,
                                 int threads, rs_trial_stats* pretrained, rs_trial_stats* pcr,
                                 rs_trial_stats* ols);

#ifdef __cplusplus
}
#endif

#endif
