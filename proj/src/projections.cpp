#include "projections.hpp"

#include <cmath>

#include <fmt/format.h>

#include "errors.hpp"
#include "mp_law.hpp"
#include "spectral_measure.hpp"

namespace reprsize {

PretrainGeometry::PretrainGeometry(double gamma_u, double alpha, double lambda)
    : gamma_u_(gamma_u), alpha_(alpha), lambda_(lambda) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha outside [0,1]");
    c_ = bbp_overlap(lambda, gamma_u);
    lambda_t_ = (alpha == 0.0 || alpha == 1.0) ? 0.0 : mp::bulk_threshold(gamma_u, alpha);
}

double PretrainGeometry::perp(const PairOverlap& pair) const {
    const double spike = pair.rho_av * pair.rho_bv;
    if (alpha_ == 1.0) return 0.0;
    // m = 1: only the top sample eigenvector is kept.
    if (alpha_ == 0.0) return pair.rho_ab - spike * c_;
    const SampleMeasure meas = sample_measure({spike, pair.rho_ab - spike, lambda_}, gamma_u_);
    return measure_tail_mass(meas, lambda_t_, alpha_);
}

double perp_projection(const PairOverlap& pair, const ModelParams& params) {
    validate(params);
    return PretrainGeometry(params.gamma_u, params.alpha, params.lambda).perp(pair);
}

double perp_projection(const VectorSpec& a, const VectorSpec& b, double rho_ab, const ModelParams& params) {
    return perp_projection(PairOverlap{rho_ab, a.rho_with_spike, b.rho_with_spike}, params);
}

double effective_projection(const RetainedOverlaps& r, double lambda_bar, double gamma_eff) {
    if (gamma_eff < 1.0) {
        if (1.0 - gamma_eff < mp::kSingularBand)
            throw SingularityError(fmt::format("gamma_eff {} too close to 1", gamma_eff));
        return r.p_ab;
    }
    if (gamma_eff - 1.0 < mp::kSingularBand)
        throw SingularityError(fmt::format("gamma_eff {} too close to 1", gamma_eff));
    if (!(r.p_aa > 0.0) || !(r.p_bb > 0.0))
        throw DomainError("effective projection: vector has no retained component");
    const double norm = std::sqrt(r.p_aa * r.p_bb);
    const double s = r.p_vv > 0.0 ? r.p_av * r.p_bv / (norm * r.p_vv) : 0.0;
    const double bulk = r.p_ab / norm - s;
    const double g1 = gamma_eff - 1.0;
    return r.p_ab - norm * (bulk * g1 / gamma_eff + s * g1 / (g1 + lambda_bar));
}

PretrainOverlaps pretrain_overlaps(double gamma_u, double alpha, double lambda, double eta,
                                   const TestSpikeSpec& test) {
    const PretrainGeometry geo(gamma_u, alpha, lambda);
    const double rho = std::sqrt(eta);
    PretrainOverlaps o{};
    o.gamma_u = gamma_u;
    o.alpha = alpha;
    o.lambda = lambda;
    o.eta = eta;
    o.perp_ww = geo.perp({1.0, rho, rho});
    o.perp_vv = geo.perp({1.0, 1.0, 1.0});
    o.perp_wv = geo.perp({rho, rho, 1.0});
    o.p_ww = 1.0 - o.perp_ww;
    o.p_vv = 1.0 - o.perp_vv;
    o.p_wv = rho - o.perp_wv;
    o.lambda_bar = 1.0 + (lambda - 1.0) * o.p_vv;
    o.sigma_eff_sq = o.perp_ww + (lambda - 1.0) / o.lambda_bar * o.perp_wv * o.perp_wv;
    for (const auto& s : test.spikes) {
        SpikeOverlaps so{};
        so.p_wn = geo.retained({s.rho_w_new, rho, s.rho_v_new});
        so.p_vn = geo.retained({s.rho_v_new, 1.0, s.rho_v_new});
        so.p_nn = geo.retained({1.0, s.rho_v_new, s.rho_v_new});
        o.spikes.push_back(so);
    }
    return o;
}

ProjectionLimits projection_limits(const PretrainOverlaps& pre, double gamma_eff) {
    ProjectionLimits l{};
    l.p_ww = pre.p_ww;
    l.p_vv = pre.p_vv;
    l.p_wv = pre.p_wv;
    l.p_perp_ww = pre.perp_ww;
    l.p_perp_vv = pre.perp_vv;
    l.p_perp_wv = pre.perp_wv;
    l.lambda_bar = pre.lambda_bar;
    l.sigma_eff_sq = pre.sigma_eff_sq;
    l.gamma_eff = gamma_eff;
    const double lb = pre.lambda_bar;
    l.pi_ww = effective_projection({pre.p_ww, pre.p_ww, pre.p_ww, pre.p_wv, pre.p_wv, pre.p_vv}, lb, gamma_eff);
    l.pi_vv = effective_projection({pre.p_vv, pre.p_vv, pre.p_vv, pre.p_vv, pre.p_vv, pre.p_vv}, lb, gamma_eff);
    l.pi_wv = effective_projection({pre.p_wv, pre.p_ww, pre.p_vv, pre.p_wv, pre.p_vv, pre.p_vv}, lb, gamma_eff);
    return l;
}

ProjectionLimits projection_bundle(const ModelParams& params) {
    validate(params);
    return projection_limits(pretrain_overlaps(params.gamma_u, params.alpha, params.lambda, params.eta),
                             params.gamma_eff());
}

}  // namespace reprsize
