#pragma once

#include <vector>

namespace reprsize {

struct ModelParams {
    double gamma_u = 1.0;
    double gamma_l = 1.0;
    double alpha = 1.0;
    double lambda = 5.0;
    double eta = 1.0;
    double w_star_norm_sq = 9.0;
    double noise_var = 1.0;

    double gamma_eff() const { return alpha * gamma_l; }
    double snr() const { return w_star_norm_sq / noise_var; }
};

// Throws DomainError on any out-of-range field.
void validate(const ModelParams& p);

struct TestSpike {
    double nu;         // > 1
    double rho_w_new;  // alignment of the signal direction with the test spike
    double rho_v_new;  // alignment of the pretraining spike with the test spike
};

struct TestSpikeSpec {
    std::vector<TestSpike> spikes;

    // Sigma_new = Sigma.
    static TestSpikeSpec matched(const ModelParams& p);
};

// Checks |rho| <= 1 and that (w*, v, v_new) admit a joint unit-vector realisation.
void validate(const TestSpikeSpec& t, double eta);

}  // namespace reprsize
