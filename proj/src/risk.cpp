#include "risk.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "mp_law.hpp"

namespace reprsize {
namespace {

double test_bias_term(const PretrainOverlaps& pre, const TestSpikeSpec& test, double gamma_eff,
                      bool effective) {
    const double lb = pre.lambda_bar;
    const double leak = (pre.lambda - 1.0) / lb * pre.perp_wv;
    double sum = 0.0;
    for (std::size_t i = 0; i < test.spikes.size(); ++i) {
        const auto& s = test.spikes[i];
        const auto& o = pre.spikes.at(i);
        double pi_wn = o.p_wn, pi_vn = o.p_vn;
        if (effective) {
            pi_wn = effective_projection({o.p_wn, pre.p_ww, o.p_nn, pre.p_wv, o.p_vn, pre.p_vv}, lb, gamma_eff);
            pi_vn = effective_projection({o.p_vn, pre.p_vv, o.p_nn, pre.p_vv, o.p_vn, pre.p_vv}, lb, gamma_eff);
        }
        const double d = s.rho_w_new - pi_wn - leak * pi_vn;
        sum += (s.nu - 1.0) * d * d;
    }
    return sum;
}

}  // namespace

RiskBreakdown assemble_risk(const PretrainOverlaps& pre, double gamma_l, double w, double s2,
                            const TestSpikeSpec& test) {
    const double g = pre.alpha * gamma_l;
    const ProjectionLimits lim = projection_limits(pre, g);
    RiskBreakdown r;
    r.missing_signal = w * (1.0 - lim.pi_ww);
    const double ratio = (pre.lambda - 1.0) / lim.lambda_bar;
    r.leaked_signal = w * ratio * ratio * lim.p_perp_wv * lim.p_perp_wv * lim.pi_vv;
    r.variance = mp::pseudoinverse_trace_limit(g) * (w * lim.sigma_eff_sq + s2);
    r.e_est = r.missing_signal + r.leaked_signal + r.variance;
    r.test_spike_bias = w * test_bias_term(pre, test, g, true);
    r.irreducible = s2;
    r.e_gen = r.e_est + r.test_spike_bias + r.irreducible;
    r.e_train = assemble_training_error(pre, gamma_l, w, s2);
    return r;
}

double assemble_training_error(const PretrainOverlaps& pre, double gamma_l, double w, double s2) {
    return (w * pre.sigma_eff_sq + s2) * std::max(0.0, 1.0 - pre.alpha * gamma_l);
}

RiskBreakdown generalisation_error(const ModelParams& p, const TestSpikeSpec& test) {
    validate(p);
    validate(test, p.eta);
    const auto pre = pretrain_overlaps(p.gamma_u, p.alpha, p.lambda, p.eta, test);
    return assemble_risk(pre, p.gamma_l, p.w_star_norm_sq, p.noise_var, test);
}

RiskBreakdown estimation_error(const ModelParams& p) {
    RiskBreakdown r = generalisation_error(p, {});
    // Keep only the estimation fields.
    r.test_spike_bias = 0.0;
    r.irreducible = 0.0;
    r.e_gen = 0.0;
    r.e_train = 0.0;
    return r;
}

double training_error(const ModelParams& p) {
    validate(p);
    const auto pre = pretrain_overlaps(p.gamma_u, p.alpha, p.lambda, p.eta);
    return assemble_training_error(pre, p.gamma_l, p.w_star_norm_sq, p.noise_var);
}

RiskBreakdown risk_limits_gamma_u_zero(const ModelParams& p) {
    validate(p);
    const double g = p.gamma_eff();
    const double w = p.w_star_norm_sq, s2 = p.noise_var, eta = p.eta, a = p.alpha, l = p.lambda;
    const double residual = w * (1.0 - eta) * (1.0 - a);
    RiskBreakdown r;
    double pi_ww;
    if (g < 1.0) {
        pi_ww = eta + (1.0 - eta) * a;
    } else {
        pi_ww = eta * l / (g - 1.0 + l) + (1.0 - eta) * a / g;
        const double t = (g - 1.0) / (g - 1.0 + l);
        r.test_spike_bias = w * (l - 1.0) * eta * t * t;
    }
    r.missing_signal = w * (1.0 - pi_ww);
    r.variance = mp::pseudoinverse_trace_limit(g) * (residual + s2);
    r.e_est = r.missing_signal + r.variance;
    r.irreducible = s2;
    r.e_gen = r.e_est + r.test_spike_bias + r.irreducible;
    r.e_train = (s2 + residual) * std::max(0.0, 1.0 - g);
    return r;
}

RiskBreakdown risk_limits_gamma_l_zero(const ModelParams& p, const TestSpikeSpec& test) {
    validate(p);
    validate(test, p.eta);
    const auto pre = pretrain_overlaps(p.gamma_u, p.alpha, p.lambda, p.eta, test);
    const double w = p.w_star_norm_sq, s2 = p.noise_var;
    const double ratio = (p.lambda - 1.0) / pre.lambda_bar;
    RiskBreakdown r;
    r.missing_signal = w * (1.0 - pre.p_ww);
    r.leaked_signal = w * ratio * ratio * pre.perp_wv * pre.perp_wv * pre.p_vv;
    r.e_est = r.missing_signal + r.leaked_signal;
    r.test_spike_bias = w * test_bias_term(pre, test, 0.0, false);
    r.irreducible = s2;
    r.e_gen = r.e_est + r.test_spike_bias + r.irreducible;
    r.e_train = s2 + w * (pre.perp_ww + ratio * pre.perp_wv * pre.perp_wv);
    return r;
}

}  // namespace reprsize
