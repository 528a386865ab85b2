#pragma once

#include <vector>

#include "params.hpp"

namespace reprsize {

struct VectorSpec {
    double rho_with_spike;
    double norm_sq;
};

// Unit-normalised overlaps of a pair (a, b): a.b, a.v, b.v.
struct PairOverlap {
    double rho_ab;
    double rho_av;
    double rho_bv;
};

// Pretraining-side state for one (gamma_u, alpha, lambda): the bulk threshold and the BBP
// overlap, reused for every pair evaluated at that point.
class PretrainGeometry {
public:
    PretrainGeometry(double gamma_u, double alpha, double lambda);

    // Limit of a' P_perp b / (|a||b|).
    double perp(const PairOverlap& pair) const;
    // Limit of a' P_m b / (|a||b|).
    double retained(const PairOverlap& pair) const { return pair.rho_ab - perp(pair); }

    double gamma_u() const { return gamma_u_; }
    double alpha() const { return alpha_; }
    double lambda() const { return lambda_; }
    double threshold() const { return lambda_t_; }
    double overlap_c() const { return c_; }

private:
    double gamma_u_, alpha_, lambda_, lambda_t_, c_;
};

double perp_projection(const PairOverlap& pair, const ModelParams& params);
double perp_projection(const VectorSpec& a, const VectorSpec& b, double rho_ab, const ModelParams& params);

// Retained overlaps needed for the effective (row-space) projection of a pair.
struct RetainedOverlaps {
    double p_ab, p_aa, p_bb, p_av, p_bv, p_vv;
};

// pi-bar for the pair; p-bar itself when gamma_eff < 1.
double effective_projection(const RetainedOverlaps& r, double lambda_bar, double gamma_eff);

struct SpikeOverlaps {
    double p_wn;  // signal / test spike
    double p_vn;  // pretraining spike / test spike
    double p_nn;
};

// Everything that depends only on the pretraining side (gamma_u, alpha, lambda, eta) and the
// test spikes; independent of gamma_l, which makes it reusable across a heatmap column.
struct PretrainOverlaps {
    double gamma_u, alpha, lambda, eta;
    double p_ww, p_vv, p_wv;
    double perp_ww, perp_vv, perp_wv;
    double lambda_bar;
    double sigma_eff_sq;
    std::vector<SpikeOverlaps> spikes;
};

PretrainOverlaps pretrain_overlaps(double gamma_u, double alpha, double lambda, double eta,
                                   const TestSpikeSpec& test = {});

struct ProjectionLimits {
    double p_ww, p_vv, p_wv;
    double p_perp_ww, p_perp_vv, p_perp_wv;
    double lambda_bar;
    double sigma_eff_sq;
    double pi_ww, pi_vv, pi_wv;
    double gamma_eff;
};

ProjectionLimits projection_limits(const PretrainOverlaps& pre, double gamma_eff);
ProjectionLimits projection_bundle(const ModelParams& params);

}  // namespace reprsize
