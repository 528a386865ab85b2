#include <cmath>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "projections.hpp"
#include "spectral_measure.hpp"

using namespace reprsize;
using doctest::Approx;

namespace {

ModelParams make(double gu, double gl, double a, double lambda = 5.0, double eta = 1.0) {
    ModelParams p;
    p.gamma_u = gu;
    p.gamma_l = gl;
    p.alpha = a;
    p.lambda = lambda;
    p.eta = eta;
    return p;
}

}  // namespace

TEST_CASE("perp projection endpoints") {
    CHECK(perp_projection({0.3, 0.5, -0.2}, make(0.7, 0.5, 1.0)) == 0.0);
    CHECK(perp_projection({1.0, 1.0, 1.0}, make(1.0, 0.5, 0.0)) == Approx(0.25));
    // Vector form: a = b = w* with eta = 1.
    CHECK(perp_projection(VectorSpec{1.0, 9.0}, VectorSpec{1.0, 9.0}, 1.0, make(1.0, 0.5, 0.0)) == Approx(0.25));
    // The quadrature branch approaches the alpha = 0 endpoint continuously.
    const double small = perp_projection({0.8, 0.9, 0.6}, make(0.5, 0.5, 1e-6, 3.0));
    const double endpoint = perp_projection({0.8, 0.9, 0.6}, make(0.5, 0.5, 0.0, 3.0));
    CHECK(small == Approx(endpoint).epsilon(1e-4));
}

TEST_CASE("perp projection at infinite pretraining data") {
    for (double eta : {0.0, 0.4, 1.0})
        for (double a : {0.1, 0.5, 0.9}) {
            const double r = std::sqrt(eta);
            CHECK(perp_projection({1.0, r, r}, make(1e-8, 0.5, a)) == Approx((1 - eta) * (1 - a)).epsilon(1e-4));
        }
}

TEST_CASE("perp projection symmetric in its arguments") {
    const auto p = make(0.8, 0.5, 0.35, 4.0);
    CHECK(perp_projection({0.3, 0.7, -0.4}, p) == perp_projection({0.3, -0.4, 0.7}, p));
}

TEST_CASE("effective projection examples") {
    const RetainedOverlaps r{0.6, 0.8, 0.7, 0.5, 0.4, 0.9};
    CHECK(effective_projection(r, 3.0, 0.5) == 0.6);
    // alpha = 1, gamma_l = 2, eta = 1: every overlap is 1.
    CHECK(effective_projection({1, 1, 1, 1, 1, 1}, 5.0, 2.0) == Approx(5.0 / 6.0));
    // eta = 0: no spike component.
    CHECK(effective_projection({1, 1, 1, 0, 0, 1}, 5.0, 2.0) == Approx(0.5));
    CHECK_THROWS_AS(effective_projection(r, 3.0, 1.0 + 1e-8), SingularityError);
    CHECK_THROWS_AS(effective_projection({0.0, 0.0, 0.5, 0.0, 0.0, 1.0}, 3.0, 2.0), DomainError);
}

TEST_CASE("effective projection of a pair reduces to the quadratic form when a = b") {
    const double paa = 0.7, pav = 0.5, pvv = 0.8, lb = 3.0, g = 2.5;
    const double s = pav * pav / (paa * pvv);
    const double quad = paa - paa * ((1 - s) * (g - 1) / g + s * (g - 1) / (g - 1 + lb));
    CHECK(effective_projection({paa, paa, paa, pav, pav, pvv}, lb, g) == Approx(quad).epsilon(1e-15));
}

TEST_CASE("bundle at alpha = 1") {
    const auto l = projection_bundle(make(0.7, 0.5, 1.0, 4.0, 0.6));
    CHECK(l.p_perp_ww == 0.0);
    CHECK(l.p_perp_vv == 0.0);
    CHECK(l.p_perp_wv == 0.0);
    CHECK(l.sigma_eff_sq == 0.0);
    CHECK(l.lambda_bar == 4.0);
}

TEST_CASE("bundle at infinite pretraining data") {
    for (double a : {0.2, 0.6}) {
        const auto l = projection_bundle(make(1e-8, 0.5, a));
        CHECK(l.p_vv == Approx(1.0).epsilon(1e-4));
        CHECK(std::abs(l.p_perp_wv) < 1e-4);
        CHECK(std::abs(l.sigma_eff_sq) < 1e-4);
        CHECK(l.lambda_bar == Approx(5.0).epsilon(1e-4));
    }
}

TEST_CASE("bundle at the alpha = 0 endpoint") {
    const auto l = projection_bundle(make(1.0, 0.5, 0.0));
    CHECK(l.p_ww == Approx(0.75));
    CHECK(l.lambda_bar == Approx(4.0));
    CHECK(l.pi_ww == l.p_ww);
}

TEST_CASE("bundle endpoint tables") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0, 1);
    for (int k = 0; k < 20; ++k) {
        const double lambda = 1.2 + 8 * U(rng), eta = U(rng), gu = 0.05 + 5 * U(rng);
        const double gl = 1.1 + 4 * U(rng);
        const double c = bbp_overlap(lambda, gu), r = std::sqrt(eta);
        const auto l0 = projection_bundle(make(gu, gl, 0.0, lambda, eta));
        CHECK(l0.p_ww == Approx(eta * c).epsilon(1e-12));
        CHECK(l0.p_perp_ww == Approx(1 - eta * c).epsilon(1e-12));
        CHECK(l0.p_wv == Approx(r * c).epsilon(1e-12));
        CHECK(l0.p_perp_wv == Approx(r * (1 - c)).epsilon(1e-12));
        CHECK(l0.lambda_bar == Approx(1 + (lambda - 1) * c).epsilon(1e-12));
        CHECK(l0.pi_ww == l0.p_ww);
        const auto l1 = projection_bundle(make(gu, gl, 1.0, lambda, eta));
        const double A = lambda / (gl - 1 + lambda), B = 1 / gl;
        CHECK(l1.pi_ww == Approx(eta * A + (1 - eta) * B).epsilon(1e-12));
        CHECK(l1.pi_wv == Approx(r * A).epsilon(1e-12));
        CHECK(l1.pi_vv == Approx(A).epsilon(1e-12));
    }
}

TEST_CASE("bundle monotone in alpha and within bounds") {
    for (double gu : {0.5, 2.0})
        for (double eta : {0.3, 1.0}) {
            double prev_p = -1, prev_perp = 2;
            for (int k = 0; k <= 200; ++k) {
                const double a = k / 200.0;
                const auto l = projection_bundle(make(gu, 0.5, a, 4.0, eta));
                CHECK(l.p_ww >= prev_p - 1e-9);
                CHECK(l.p_perp_ww <= prev_perp + 1e-9);
                prev_p = l.p_ww;
                prev_perp = l.p_perp_ww;
                CHECK(l.p_ww + l.p_perp_ww == Approx(1.0).epsilon(1e-12));
                CHECK(l.p_vv + l.p_perp_vv == Approx(1.0).epsilon(1e-12));
                CHECK(std::abs(l.p_wv) <= std::sqrt(l.p_ww * l.p_vv) + 1e-9);
                CHECK(l.lambda_bar >= 1.0 - 1e-12);
                CHECK(l.lambda_bar <= 4.0 + 1e-12);
                CHECK(l.sigma_eff_sq >= -1e-12);
                CHECK(l.sigma_eff_sq <= 1 + 3.0 / l.lambda_bar + 1e-12);
                CHECK(l.pi_ww >= -1e-12);
                CHECK(l.pi_ww <= l.p_ww + 1e-12);
            }
        }
}

TEST_CASE("effective projections bounded above the interpolation threshold") {
    for (double gl : {1.5, 3.0, 10.0})
        for (double a : {0.5, 0.8, 1.0}) {
            if (std::abs(a * gl - 1) < 0.05) continue;
            const auto l = projection_bundle(make(0.8, gl, a, 3.0, 0.5));
            CHECK(l.pi_ww >= 0.0);
            CHECK(l.pi_ww <= l.p_ww + 1e-12);
            CHECK(l.pi_vv <= l.p_vv + 1e-12);
            CHECK(std::abs(l.pi_wv) <= std::sqrt(l.pi_ww * l.pi_vv) + 1e-12);
        }
}

TEST_CASE("infinite pretraining data: effective projections match closed forms") {
    for (double eta : {0.2, 0.9})
        for (double a : {0.3, 0.7}) {
            const double gl = 5.0, lambda = 4.0, ge = a * gl, r = std::sqrt(eta);
            const auto l = projection_bundle(make(1e-8, gl, a, lambda, eta));
            const double Al = lambda / (ge - 1 + lambda), A1 = 1 / ge;
            CHECK(l.pi_ww == Approx(eta * Al + (1 - eta) * a * A1).epsilon(1e-4));
            CHECK(l.pi_wv == Approx(r * Al).epsilon(1e-4));
        }
}

TEST_CASE("bundle validates parameters") {
    CHECK_THROWS_AS(projection_bundle(make(0.5, 0.5, 1.2)), DomainError);
    CHECK_THROWS_AS(projection_bundle(make(0.5, 0.5, 0.5, 1.0)), DomainError);
    CHECK_THROWS_AS(projection_bundle(make(0.5, 2.0, 0.5)), SingularityError);
}
