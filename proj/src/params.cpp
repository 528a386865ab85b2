#include "params.hpp"

#include <cmath>

#include <fmt/format.h>

#include "errors.hpp"

namespace reprsize {

void validate(const ModelParams& p) {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(p.gamma_u) || p.gamma_u <= 0.0) throw DomainError("gamma_u must be positive");
    if (!finite(p.gamma_l) || p.gamma_l <= 0.0) throw DomainError("gamma_l must be positive");
    if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) throw DomainError(fmt::format("alpha {} outside [0,1]", p.alpha));
    if (!finite(p.lambda) || p.lambda <= 1.0) throw DomainError("lambda must exceed 1");
    if (!(p.eta >= 0.0 && p.eta <= 1.0)) throw DomainError("eta outside [0,1]");
    if (!finite(p.w_star_norm_sq) || p.w_star_norm_sq <= 0.0) throw DomainError("signal norm must be positive");
    if (!finite(p.noise_var) || p.noise_var <= 0.0) throw DomainError("noise variance must be positive");
}

TestSpikeSpec TestSpikeSpec::matched(const ModelParams& p) {
    return {{{p.lambda, std::sqrt(p.eta), 1.0}}};
}

void validate(const TestSpikeSpec& t, double eta) {
    const double rho = std::sqrt(eta);
    for (const auto& s : t.spikes) {
        if (!std::isfinite(s.nu) || s.nu <= 1.0) throw DomainError("test spike strength must exceed 1");
        if (std::abs(s.rho_w_new) > 1.0 || std::abs(s.rho_v_new) > 1.0)
            throw DomainError("test spike alignment outside [-1,1]");
        // Gram matrix of (w, v, v_new) must be PSD.
        const double det = 1.0 + 2.0 * rho * s.rho_v_new * s.rho_w_new - eta - s.rho_w_new * s.rho_w_new -
                           s.rho_v_new * s.rho_v_new;
        if (det < -1e-12)
            throw DomainError(fmt::format(
                "test spike alignments ({}, {}) are inconsistent with eta = {}", s.rho_w_new, s.rho_v_new, eta));
    }
}

}  // namespace reprsize
