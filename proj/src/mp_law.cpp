#include "mp_law.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "errors.hpp"
#include "quadrature.hpp"

namespace reprsize::mp {
namespace {

void check_gamma(double gamma, const char* who) {
    if (!std::isfinite(gamma) || gamma <= 0.0)
        throw DomainError(fmt::format("{}: aspect ratio must be positive and finite, got {}", who, gamma));
}

void check_singular(double gamma, const char* who) {
    if (std::abs(gamma - 1.0) < kSingularBand)
        throw SingularityError(fmt::format("{}: aspect ratio {} too close to 1", who, gamma));
}

}  // namespace

Support support(double gamma) {
    check_gamma(gamma, "mp support");
    const double r = std::sqrt(gamma);
    return {(1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r), std::max(0.0, 1.0 - 1.0 / gamma)};
}

double density(double gamma, double theta) {
    if (!std::isfinite(theta)) throw DomainError("mp density: non-finite theta");
    const Support s = support(gamma);
    if (theta <= s.lambda_minus || theta >= s.lambda_plus) return 0.0;
    return std::sqrt((s.lambda_plus - theta) * (theta - s.lambda_minus)) /
           (2.0 * std::numbers::pi * theta * gamma);
}

double theta_of_u(double gamma, double u) {
    const Support s = support(gamma);
    const double sn = std::sin(u);
    return s.lambda_minus + 4.0 * std::sqrt(gamma) * sn * sn;
}

double u_of_theta(double gamma, double theta) {
    const Support s = support(gamma);
    const double t = std::clamp((theta - s.lambda_minus) / (s.lambda_plus - s.lambda_minus), 0.0, 1.0);
    return std::asin(std::sqrt(t));
}

double density_in_u(double gamma, double u) {
    const Support s = support(gamma);
    const double w = s.lambda_plus - s.lambda_minus;
    const double sn = std::sin(u), cs = std::cos(u);
    const double ws2 = w * sn * sn;
    const double theta = s.lambda_minus + ws2;
    // ws2 / theta -> 1 as u -> 0 when lambda_- = 0.
    const double ratio = theta > 0.0 ? ws2 / theta : 1.0;
    return w * cs * cs * ratio / (std::numbers::pi * gamma);
}

double bulk_cdf(double gamma, double theta) {
    const Support s = support(gamma);
    if (theta <= s.lambda_minus) return 0.0;
    if (theta >= s.lambda_plus) return 1.0 - s.atom_at_zero;
    const double ut = u_of_theta(gamma, theta);
    return integrate([gamma](double u) { return density_in_u(gamma, u); }, 0.0, ut).value;
}

double cdf(double gamma, double theta) {
    if (!std::isfinite(theta) || theta < 0.0) throw DomainError("mp cdf: theta must be >= 0");
    const Support s = support(gamma);
    if (theta >= s.lambda_plus) return 1.0;
    return s.atom_at_zero + bulk_cdf(gamma, theta);
}

double bulk_threshold(double gamma_u, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw DomainError(fmt::format("bulk threshold: alpha {} outside [0,1]", alpha));
    const Support s = support(gamma_u);
    if (alpha == 0.0) return s.lambda_plus;
    const double target = (1.0 - alpha) - s.atom_at_zero;  // required bulk mass below lambda_t
    if (target <= 0.0) return s.lambda_minus;

    // Bisection in u; the bulk mass of each half is integrated incrementally so every step
    // costs one short quadrature.
    auto g = [gamma_u](double u) { return density_in_u(gamma_u, u); };
    double lo = 0.0, hi = std::numbers::pi / 2.0;
    double mass_lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double mass_mid = mass_lo + integrate(g, lo, mid).value;
        if (std::abs(mass_mid - target) < 1e-13 || hi - lo < 1e-15) return theta_of_u(gamma_u, mid);
        if (mass_mid < target) {
            lo = mid;
            mass_lo = mass_mid;
        } else {
            hi = mid;
        }
    }
    return theta_of_u(gamma_u, 0.5 * (lo + hi));
}

double inverse_moment(double gamma) {
    check_gamma(gamma, "mp inverse moment");
    check_singular(gamma, "mp inverse moment");
    return gamma < 1.0 ? 1.0 / (1.0 - gamma) : 1.0 / (gamma * (gamma - 1.0));
}

double pseudoinverse_trace_limit(double gamma_eff) {
    if (!std::isfinite(gamma_eff) || gamma_eff < 0.0)
        throw DomainError("pseudoinverse trace: gamma_eff must be >= 0");
    if (gamma_eff == 0.0) return 0.0;
    check_singular(gamma_eff, "pseudoinverse trace");
    return gamma_eff < 1.0 ? gamma_eff / (1.0 - gamma_eff) : 1.0 / (gamma_eff - 1.0);
}

}  // namespace reprsize::mp
