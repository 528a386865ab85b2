#include "spectral_measure.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "errors.hpp"
#include "quadrature.hpp"

namespace reprsize {
namespace {

void check_lambda(double lambda) {
    if (!std::isfinite(lambda) || lambda <= 1.0)
        throw DomainError(fmt::format("spike strength must exceed 1, got {}", lambda));
}

}  // namespace

bool above_bbp(double lambda, double gamma_u) {
    return gamma_u < (lambda - 1.0) * (lambda - 1.0);
}

double spike_location(double lambda, double gamma_u) {
    check_lambda(lambda);
    if (!(gamma_u > 0.0)) throw DomainError("spike_location: gamma_u must be positive");
    if (!above_bbp(lambda, gamma_u)) throw SingularityError("spike absorbed into bulk");
    return lambda * (lambda - 1.0 + gamma_u) / (lambda - 1.0);
}

double bbp_overlap(double lambda, double gamma_u) {
    check_lambda(lambda);
    if (!(gamma_u >= 0.0) || !std::isfinite(gamma_u))
        throw DomainError("bbp_overlap: gamma_u must be >= 0");
    if (!above_bbp(lambda, gamma_u)) return 0.0;
    const double x = lambda - 1.0;
    return (1.0 - gamma_u / (x * x)) / (1.0 + gamma_u / x);
}

SampleMeasure sample_measure(const PopulationMassSpec& pop, double gamma_u) {
    check_lambda(pop.lambda);
    SampleMeasure m{};
    m.pop = pop;
    m.gamma_u = gamma_u;
    m.support = mp::support(gamma_u);
    m.has_spike = above_bbp(pop.lambda, gamma_u);
    m.spike_at = m.has_spike ? spike_location(pop.lambda, gamma_u) : std::nan("");
    m.spike_weight = bbp_overlap(pop.lambda, gamma_u) * pop.spike_weight;
    m.zero_atom = 0.0;
    if (gamma_u > 1.0) {
        const double g1 = gamma_u - 1.0;
        m.zero_atom = pop.spike_weight * g1 / (g1 + pop.lambda) + pop.bulk_weight * g1 / gamma_u;
    }
    return m;
}

double SampleMeasure::bulk_density(double theta) const {
    const double f = mp::density(gamma_u, theta);
    if (f == 0.0) return 0.0;
    const double l = pop.lambda;
    const double k = l * gamma_u / (l * l - l * (1.0 - gamma_u + theta) + theta);
    return (pop.bulk_weight + pop.spike_weight * k) * f;
}

double SampleMeasure::bulk_density_in_u(double u) const {
    // The tau = lambda kernel has its pole at theta* >= lambda_+; writing the distance to the
    // pole as (theta* - lambda_+) + w cos^2 u keeps it free of cancellation near BBP.
    const double l = pop.lambda;
    const double w = support.lambda_plus - support.lambda_minus;
    const double cs = std::cos(u);
    const double gap = (l - 1.0 - std::sqrt(gamma_u)) * (l - 1.0 - std::sqrt(gamma_u)) / (l - 1.0);
    const double base = mp::density_in_u(gamma_u, u);
    double k_spike;
    const double dist = gap + w * cs * cs;
    if (dist > 0.0) {
        k_spike = l * gamma_u / ((l - 1.0) * dist);
    } else {
        // At u = pi/2 on the BBP boundary the pole meets the edge; density_in_u ~ w cos^2 there.
        const double sn = std::sin(u);
        const double theta = support.lambda_minus + w * sn * sn;
        return pop.spike_weight * l * gamma_u / ((l - 1.0) * std::numbers::pi * gamma_u) *
                   (theta > 0.0 ? w * sn * sn / theta : 1.0) +
               pop.bulk_weight * base;
    }
    return (pop.bulk_weight + pop.spike_weight * k_spike) * base;
}

double SampleMeasure::bulk_mass_below(double theta) const {
    if (theta <= support.lambda_minus) return 0.0;
    const double ut = mp::u_of_theta(gamma_u, std::min(theta, support.lambda_plus));
    return integrate([this](double u) { return bulk_density_in_u(u); }, 0.0, ut).value;
}

double SampleMeasure::total_bulk_mass() const { return bulk_mass_below(support.lambda_plus); }

double measure_tail_mass(const SampleMeasure& meas, double lambda_t, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("tail mass: alpha outside [0,1]");
    const double lm = meas.support.lambda_minus, lp = meas.support.lambda_plus;
    const double slack = 1e-12 * lp;
    if (!(lambda_t >= lm - slack && lambda_t <= lp + slack))
        throw DomainError(fmt::format("tail mass: lambda_t {} outside [{}, {}]", lambda_t, lm, lp));
    const double g = meas.gamma_u;
    if (g > 1.0 && alpha >= 1.0 / g) return (1.0 - alpha) / (1.0 - 1.0 / g) * meas.zero_atom;
    return meas.zero_atom + meas.bulk_mass_below(lambda_t);
}

}  // namespace reprsize
