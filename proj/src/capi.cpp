#include "reprsize/reprsize.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <exception>
#include <new>
#include <string>

#include "errors.hpp"
#include "montecarlo.hpp"
#include "mp_law.hpp"
#include "phase.hpp"
#include "projections.hpp"
#include "risk.hpp"
#include "spectral_measure.hpp"

struct rs_test_spec {
    reprsize::TestSpikeSpec spec;
};

struct rs_alpha_grid {
    reprsize::AlphaGrid grid;
};

struct rs_heatmap {
    reprsize::Heatmap map;
    std::vector<reprsize::SubstitutionRate> rates;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
rs_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return RS_OK;
    } catch (const reprsize::SingularityError& e) {
        g_last_error = e.what();
        return RS_ERR_SINGULAR;
    } catch (const reprsize::DomainError& e) {
        g_last_error = e.what();
        return RS_ERR_DOMAIN;
    } catch (const reprsize::NumericError& e) {
        g_last_error = e.what();
        return RS_ERR_NUMERIC;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return RS_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RS_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return RS_ERR_INTERNAL;
    }
}

rs_status null_arg(const char* what) {
    g_last_error = std::string("null argument: ") + what;
    return RS_ERR_NULL_ARGUMENT;
}

#define RS_REQUIRE(ptr) \
    if (!(ptr)) return null_arg(#ptr)

reprsize::ModelParams to_cpp(const rs_model_params& p) {
    return {p.gamma_u, p.gamma_l, p.alpha, p.lambda, p.eta, p.w_star_norm_sq, p.noise_var};
}

rs_risk_breakdown to_c(const reprsize::RiskBreakdown& r) {
    return {r.e_est, r.e_gen, r.e_train, r.missing_signal, r.leaked_signal, r.variance, r.test_spike_bias,
            r.irreducible};
}

reprsize::mc::FiniteInstance to_cpp(const rs_finite_instance& i) {
    return {i.p, i.n_u, i.n_l, i.m, i.lambda, i.eta, i.w_star_norm, i.noise_sd, i.seed};
}

rs_trial_stats to_c(const reprsize::mc::Aggregate& a) {
    return {a.mean.e_est_emp,        a.sd.e_est_emp,        a.mean.e_gen_emp, a.sd.e_gen_emp, a.mean.e_train_emp,
            a.sd.e_train_emp,        a.mean.spike_overlap_sq, a.sd.spike_overlap_sq, a.n_trials};
}

const reprsize::TestSpikeSpec& spec_or_empty(const rs_test_spec* t) {
    static const reprsize::TestSpikeSpec empty;
    return t ? t->spec : empty;
}

template <class Fn>
rs_status scalar(double* out, Fn&& fn) {
    RS_REQUIRE(out);
    return guarded([&] { *out = fn(); });
}

}  // namespace

extern "C" {

const char* rs_last_error(void) { return g_last_error.c_str(); }

const char* rs_status_name(rs_status s) {
    switch (s) {
        case RS_OK: return "ok";
        case RS_ERR_DOMAIN: return "domain error";
        case RS_ERR_SINGULAR: return "singularity";
        case RS_ERR_NUMERIC: return "numeric error";
        case RS_ERR_NULL_ARGUMENT: return "null argument";
        case RS_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* rs_version(void) { return "1.0.0"; }

rs_test_spec* rs_test_spec_new(void) { return new (std::nothrow) rs_test_spec{}; }

rs_test_spec* rs_test_spec_matched(double lambda, double eta) {
    auto* t = new (std::nothrow) rs_test_spec{};
    if (t) t->spec.spikes.push_back({lambda, std::sqrt(std::max(0.0, eta)), 1.0});
    return t;
}

rs_status rs_test_spec_add(rs_test_spec* spec, double nu, double rho_w_new, double rho_v_new) {
    RS_REQUIRE(spec);
    return guarded([&] {
        if (!(nu > 1.0) || !(std::abs(rho_w_new) <= 1.0) || !(std::abs(rho_v_new) <= 1.0))
            throw reprsize::DomainError("test spike needs nu > 1 and alignments in [-1, 1]");
        spec->spec.spikes.push_back({nu, rho_w_new, rho_v_new});
    });
}

size_t rs_test_spec_size(const rs_test_spec* spec) { return spec ? spec->spec.spikes.size() : 0; }
void rs_test_spec_free(rs_test_spec* spec) { delete spec; }

rs_status rs_alpha_grid_standard(int count, double lo, double guard_band, rs_alpha_grid** out) {
    RS_REQUIRE(out);
    return guarded([&] { *out = new rs_alpha_grid{reprsize::AlphaGrid::standard(count, lo, guard_band)}; });
}

rs_status rs_alpha_grid_from_values(const double* values, size_t n, double guard_band, rs_alpha_grid** out) {
    RS_REQUIRE(out);
    RS_REQUIRE(values);
    return guarded([&] {
        *out = new rs_alpha_grid{reprsize::AlphaGrid(std::vector<double>(values, values + n), guard_band)};
    });
}

size_t rs_alpha_grid_size(const rs_alpha_grid* g) { return g ? g->grid.values().size() : 0; }

double rs_alpha_grid_value(const rs_alpha_grid* g, size_t i) {
    if (!g || i >= g->grid.values().size()) return std::nan("");
    return g->grid.values()[i];
}

int rs_alpha_grid_excluded(const rs_alpha_grid* g, double alpha, double gamma_l) {
    return g && g->grid.excluded(alpha, gamma_l) ? 1 : 0;
}

void rs_alpha_grid_free(rs_alpha_grid* g) { delete g; }

rs_status rs_mp_density(double gamma, double theta, double* out) {
    return scalar(out, [&] { return reprsize::mp::density(gamma, theta); });
}
rs_status rs_mp_cdf(double gamma, double theta, double* out) {
    return scalar(out, [&] { return reprsize::mp::cdf(gamma, theta); });
}
rs_status rs_mp_bulk_threshold(double gamma_u, double alpha, double* out) {
    return scalar(out, [&] { return reprsize::mp::bulk_threshold(gamma_u, alpha); });
}
rs_status rs_mp_inverse_moment(double gamma, double* out) {
    return scalar(out, [&] { return reprsize::mp::inverse_moment(gamma); });
}
rs_status rs_pseudoinverse_trace_limit(double gamma_eff, double* out) {
    return scalar(out, [&] { return reprsize::mp::pseudoinverse_trace_limit(gamma_eff); });
}
rs_status rs_spike_location(double lambda, double gamma_u, double* out) {
    return scalar(out, [&] { return reprsize::spike_location(lambda, gamma_u); });
}
rs_status rs_bbp_overlap(double lambda, double gamma_u, double* out) {
    return scalar(out, [&] { return reprsize::bbp_overlap(lambda, gamma_u); });
}

rs_status rs_projection_bundle(const rs_model_params* params, rs_projection_limits* out) {
    RS_REQUIRE(params);
    RS_REQUIRE(out);
    return guarded([&] {
        const auto l = reprsize::projection_bundle(to_cpp(*params));
        *out = {l.p_ww,       l.p_vv,         l.p_wv,  l.p_perp_ww, l.p_perp_vv, l.p_perp_wv,
                l.lambda_bar, l.sigma_eff_sq, l.pi_ww, l.pi_vv,     l.pi_wv,     l.gamma_eff};
    });
}

rs_status rs_estimation_error(const rs_model_params* params, rs_risk_breakdown* out) {
    RS_REQUIRE(params);
    RS_REQUIRE(out);
    return guarded([&] { *out = to_c(reprsize::estimation_error(to_cpp(*params))); });
}

rs_status rs_generalisation_error(const rs_model_params* params, const rs_test_spec* test, rs_risk_breakdown* out) {
    RS_REQUIRE(params);
    RS_REQUIRE(out);
    return guarded([&] { *out = to_c(reprsize::generalisation_error(to_cpp(*params), spec_or_empty(test))); });
}

rs_status rs_training_error(const rs_model_params* params, double* out) {
    RS_REQUIRE(params);
    return scalar(out, [&] { return reprsize::training_error(to_cpp(*params)); });
}

rs_status rs_risk_limits_gamma_u_zero(const rs_model_params* params, rs_risk_breakdown* out) {
    RS_REQUIRE(params);
    RS_REQUIRE(out);
    return guarded([&] { *out = to_c(reprsize::risk_limits_gamma_u_zero(to_cpp(*params))); });
}

rs_status rs_risk_limits_gamma_l_zero(const rs_model_params* params, const rs_test_spec* test, rs_risk_breakdown* out) {
    RS_REQUIRE(params);
    RS_REQUIRE(out);
    return guarded([&] { *out = to_c(reprsize::risk_limits_gamma_l_zero(to_cpp(*params), spec_or_empty(test))); });
}

rs_status rs_optimal_alpha(const rs_model_params* params, const rs_test_spec* test, const rs_alpha_grid* grid,
                           double* alpha_star, double* e_gen_min) {
    RS_REQUIRE(params);
    RS_REQUIRE(grid);
    RS_REQUIRE(alpha_star);
    RS_REQUIRE(e_gen_min);
    return guarded([&] {
        const auto o = reprsize::optimal_alpha(to_cpp(*params), spec_or_empty(test), grid->grid);
        if (!o.found) throw reprsize::SingularityError("no usable alpha on the grid");
        *alpha_star = o.alpha_star;
        *e_gen_min = o.e_gen_min;
    });
}

double rs_train_optimal_alpha(double gamma_l) { return reprsize::train_optimal_alpha(gamma_l); }

rs_status rs_endpoint_transition_curve(double lambda, double eta, double snr, double gamma_u, double gamma_l_max,
                                       int* found, double* gamma_l, int* root_count) {
    RS_REQUIRE(found);
    RS_REQUIRE(gamma_l);
    return guarded([&] {
        const auto r = reprsize::endpoint_transition_curve(lambda, eta, snr, gamma_u, gamma_l_max);
        *found = r.found ? 1 : 0;
        *gamma_l = r.gamma_l;
        if (root_count) *root_count = r.root_count;
    });
}

rs_status rs_endpoint_transition_roots(double lambda, double eta, double snr, double gamma_u, double gamma_l_max,
                                       double* roots, size_t capacity, size_t* count) {
    RS_REQUIRE(count);
    RS_REQUIRE(roots || capacity == 0);
    return guarded([&] {
        const auto r = reprsize::endpoint_transition_curve(lambda, eta, snr, gamma_u, gamma_l_max);
        for (size_t i = 0; i < r.roots.size() && i < capacity; ++i) roots[i] = r.roots[i];
        *count = r.roots.size();
    });
}

rs_status rs_stability_boundary(double lambda, double eta, double snr, double gamma_u, double* out) {
    return scalar(out, [&] { return reprsize::stability_boundary(lambda, eta, snr, gamma_u); });
}

rs_status rs_substitution_rate(const rs_model_params* tmpl, double p, double n_u, double n_l, double h_u, double h_l,
                               const rs_test_spec* test, const rs_alpha_grid* grid, double* rate, int* one_sided) {
    RS_REQUIRE(tmpl);
    RS_REQUIRE(grid);
    RS_REQUIRE(rate);
    return guarded([&] {
        const auto r = reprsize::substitution_rate(to_cpp(*tmpl), p, n_u, n_l, h_u, h_l, spec_or_empty(test),
                                                   grid->grid);
        *rate = r.rate;
        if (one_sided) *one_sided = r.one_sided ? 1 : 0;
    });
}

rs_status rs_heatmap_compute(const rs_model_params* tmpl, double p, double n_u_lo, double n_u_hi, int n_u_count,
                             double n_l_lo, double n_l_hi, int n_l_count, const rs_test_spec* test,
                             const rs_alpha_grid* grid, int threads, rs_heatmap** out) {
    RS_REQUIRE(tmpl);
    RS_REQUIRE(grid);
    RS_REQUIRE(out);
    return guarded([&] {
        auto hm = std::make_unique<rs_heatmap>();
        hm->map = reprsize::heatmap(to_cpp(*tmpl), p, {n_u_lo, n_u_hi, n_u_count}, {n_l_lo, n_l_hi, n_l_count},
                                    spec_or_empty(test), grid->grid, threads);
        hm->rates = reprsize::substitution_rate_grid(hm->map);
        *out = hm.release();
    });
}

size_t rs_heatmap_rows(const rs_heatmap* hm) { return hm ? hm->map.n_u.size() : 0; }
size_t rs_heatmap_cols(const rs_heatmap* hm) { return hm ? hm->map.n_l.size() : 0; }

rs_status rs_heatmap_cell_at(const rs_heatmap* hm, size_t row, size_t col, rs_heatmap_cell* out) {
    RS_REQUIRE(hm);
    RS_REQUIRE(out);
    return guarded([&] {
        if (row >= hm->map.n_u.size() || col >= hm->map.n_l.size())
            throw reprsize::DomainError("heatmap index out of range");
        const auto& c = hm->map.at(row, col);
        const auto& r = hm->rates[row * hm->map.n_l.size() + col];
        *out = {c.n_u, c.n_l, c.alpha_star, c.e_gen_min, c.singular ? 1 : 0, r.rate, r.one_sided ? 1 : 0};
    });
}

void rs_heatmap_free(rs_heatmap* hm) { delete hm; }

rs_status rs_mc_alpha_curve(const rs_finite_instance* inst, const double* alphas, size_t n_alpha, int n_trials,
                            const rs_test_spec* test, rs_method method, int threads, rs_trial_stats* out) {
    RS_REQUIRE(inst);
    RS_REQUIRE(alphas);
    RS_REQUIRE(out);
    return guarded([&] {
        reprsize::mc::Method m;
        switch (method) {
            case RS_METHOD_PRETRAINED: m = reprsize::mc::Method::pretrained; break;
            case RS_METHOD_PCR: m = reprsize::mc::Method::pcr; break;
            case RS_METHOD_OLS: m = reprsize::mc::Method::ols; break;
            default: throw reprsize::DomainError("unknown method");
        }
        const auto res = reprsize::mc::run_alpha_curve(to_cpp(*inst), std::vector<double>(alphas, alphas + n_alpha),
                                                       n_trials, spec_or_empty(test), m, threads);
        for (size_t k = 0; k < res.size(); ++k) out[k] = to_c(res[k]);
    });
}

rs_status rs_mc_run_trials(const rs_finite_instance* inst, int n_trials, const rs_test_spec* test, int threads,
                           rs_trial_stats* out) {
    RS_REQUIRE(inst);
    RS_REQUIRE(out);
    return guarded([&] { *out = to_c(reprsize::mc::run_trials(to_cpp(*inst), n_trials, spec_or_empty(test), threads)); });
}

rs_status rs_mc_baselines(const rs_finite_instance* inst, int n_trials, const rs_test_spec* test, int threads,
                          rs_trial_stats* pretrained, rs_trial_stats* pcr, rs_trial_stats* ols) {
    RS_REQUIRE(inst);
    RS_REQUIRE(pretrained);
    RS_REQUIRE(pcr);
    RS_REQUIRE(ols);
    return guarded([&] {
        const auto b = reprsize::mc::baselines(to_cpp(*inst), n_trials, spec_or_empty(test), threads);
        *pretrained = to_c(b.pretrained);
        *pcr = to_c(b.pcr);
        *ols = to_c(b.ols);
    });
}

}  // extern "C"
