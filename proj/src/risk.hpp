#pragma once

#include "params.hpp"
#include "projections.hpp"

namespace reprsize {

struct RiskBreakdown {
    double e_est = 0.0;
    double e_gen = 0.0;
    double e_train = 0.0;
    double missing_signal = 0.0;
    double leaked_signal = 0.0;
    double variance = 0.0;
    double test_spike_bias = 0.0;
    double irreducible = 0.0;
};

RiskBreakdown estimation_error(const ModelParams& params);
RiskBreakdown generalisation_error(const ModelParams& params, const TestSpikeSpec& test);
double training_error(const ModelParams& params);

// Downstream assembly from precomputed pretraining overlaps. `pre` must have been built with
// the same test spikes; gamma_l, noise and signal norm enter only here.
RiskBreakdown assemble_risk(const PretrainOverlaps& pre, double gamma_l, double w_star_norm_sq,
                            double noise_var, const TestSpikeSpec& test);
double assemble_training_error(const PretrainOverlaps& pre, double gamma_l, double w_star_norm_sq,
                               double noise_var);

// Closed forms in the infinite unlabelled-data limit (matched test covariance).
RiskBreakdown risk_limits_gamma_u_zero(const ModelParams& params);
// Closed forms in the infinite labelled-data limit: no downstream variance, pi-bar -> p-bar.
RiskBreakdown risk_limits_gamma_l_zero(const ModelParams& params, const TestSpikeSpec& test);

}  // namespace reprsize
