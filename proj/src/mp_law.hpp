#pragma once

namespace reprsize::mp {

// |gamma - 1| below this is treated as the interpolation singularity.
inline constexpr double kSingularBand = 1e-6;

struct Support {
    double lambda_minus;
    double lambda_plus;
    double atom_at_zero;
};

Support support(double gamma);

// Bulk density only; the zero atom is not included. Zero outside (lambda_-, lambda_+).
double density(double gamma, double theta);

// Integrand of the bulk in the coordinate theta = lambda_- + (lambda_+ - lambda_-) sin^2(u),
// u in [0, pi/2]: density(theta) * dtheta/du. Smooth, no edge singularity.
double density_in_u(double gamma, double u);
double theta_of_u(double gamma, double u);
double u_of_theta(double gamma, double theta);

// Integral of the bulk density from lambda_- to theta.
double bulk_cdf(double gamma, double theta);

// Full distribution function including the zero atom for gamma > 1.
double cdf(double gamma, double theta);

// lambda_t with cdf(gamma_u, lambda_t) = 1 - alpha, to 1e-10 in cdf.
double bulk_threshold(double gamma_u, double alpha);

// Integral of 1/x over the nonzero spectrum.
double inverse_moment(double gamma);

// min(gamma, 1) / |gamma - 1|; 0 at gamma = 0.
double pseudoinverse_trace_limit(double gamma_eff);

}  // namespace reprsize::mp
