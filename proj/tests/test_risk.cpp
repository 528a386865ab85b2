#include <cmath>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "risk.hpp"
#include "spectral_measure.hpp"

using namespace reprsize;
using doctest::Approx;

namespace {

ModelParams make(double gu, double gl, double a, double lambda = 5.0, double eta = 1.0, double w = 9.0,
                 double s2 = 1.0) {
    return {gu, gl, a, lambda, eta, w, s2};
}

void check_additive(const RiskBreakdown& r) {
    CHECK(r.e_est == Approx(r.missing_signal + r.leaked_signal + r.variance).epsilon(1e-12));
    CHECK(r.e_gen == Approx(r.e_est + r.test_spike_bias + r.irreducible).epsilon(1e-12));
}

}  // namespace

TEST_CASE("estimation error: pure label noise at alpha = 1") {
    const auto r = estimation_error(make(0.7, 0.4, 1.0, 3.0, 0.5, 4.0, 2.0));
    CHECK(r.e_est == Approx(2.0 * 0.4 / 0.6).epsilon(1e-12));
    CHECK(r.missing_signal == Approx(0.0));
    CHECK(r.leaked_signal == 0.0);
    CHECK(r.e_est == Approx(r.missing_signal + r.leaked_signal + r.variance).epsilon(1e-12));
}

TEST_CASE("estimation error at infinite pretraining data") {
    const double eta = 0.6, a = 0.4, gl = 1.5, w = 9, s2 = 1, ge = a * gl;
    const auto r = estimation_error(make(1e-8, gl, a, 5.0, eta, w, s2));
    const double expect = w * (1 - eta - (1 - eta) * a) + ge / (1 - ge) * (w * (1 - eta) * (1 - a) + s2);
    CHECK(r.e_est == Approx(expect).epsilon(1e-4));
}

TEST_CASE("generalisation error worked values") {
    const auto p1 = make(1.0, 2.0, 1.0);
    const auto r1 = generalisation_error(p1, TestSpikeSpec::matched(p1));
    CHECK(r1.e_gen == Approx(4.5).epsilon(1e-12));
    check_additive(r1);
    const auto p0 = make(1.0, 2.0, 0.0);
    const auto r0 = generalisation_error(p0, TestSpikeSpec::matched(p0));
    CHECK(r0.e_gen == Approx(3.8125).epsilon(1e-12));
    CHECK(r0.variance == 0.0);
    const auto iso = generalisation_error(make(0.6, 0.3, 0.5, 4.0, 0.7), {});
    CHECK(iso.e_gen == Approx(iso.e_est + 1.0).epsilon(1e-14));
    CHECK(iso.test_spike_bias == 0.0);
}

TEST_CASE("generalisation error validates the test spec") {
    const auto p = make(0.6, 0.3, 0.5, 4.0, 0.5);
    CHECK_THROWS_AS(generalisation_error(p, {{{0.5, 0.1, 0.1}}}), DomainError);
    // rho_w_new = 1 forces the test spike onto w*, hence rho_v_new = sqrt(eta).
    CHECK_THROWS_AS(generalisation_error(p, {{{3.0, 1.0, -0.5}}}), DomainError);
    CHECK_NOTHROW(generalisation_error(p, {{{3.0, 1.0, std::sqrt(0.5)}}}));
}

TEST_CASE("training error") {
    CHECK(training_error(make(0.8, 4.0, 0.5)) == 0.0);
    CHECK(training_error(make(0.8, 0.5, 1.0)) == Approx(0.5));
    CHECK(training_error(make(1e-8, 1.0, 0.5)) == Approx(0.5).epsilon(1e-4));
    CHECK(training_error(make(0.8, 2.0, 0.5)) == 0.0);  // gamma_eff = 1 exactly is fine here
}

TEST_CASE("closed forms at infinite pretraining data") {
    const auto below = risk_limits_gamma_u_zero(make(1e-8, 0.5, 0.5));
    CHECK(below.test_spike_bias == 0.0);
    const auto above = risk_limits_gamma_u_zero(make(0.0 + 1e-12, 2.0, 1.0));
    CHECK(above.test_spike_bias == Approx(1.0));
    CHECK(risk_limits_gamma_u_zero(make(1e-8, 0.4, 1.0)).e_train == Approx(0.6));
    CHECK(risk_limits_gamma_u_zero(make(1e-8, 4.0, 1.0)).e_train == 0.0);
    check_additive(above);
}

TEST_CASE("closed forms at infinite labelled data") {
    const auto p1 = make(0.7, 1e-8, 1.0, 4.0, 0.5);
    const auto r1 = risk_limits_gamma_l_zero(p1, TestSpikeSpec::matched(p1));
    CHECK(r1.e_gen == Approx(1.0));
    CHECK(r1.e_train == Approx(1.0));
    const auto p0 = make(1.0, 1e-8, 0.0);
    CHECK(risk_limits_gamma_l_zero(p0, TestSpikeSpec::matched(p0)).e_gen == Approx(3.8125).epsilon(1e-12));
    for (double a : {0.1, 0.5, 0.9}) {
        const auto p = make(1.5, 1e-8, a, 3.0, 0.4);
        CHECK(risk_limits_gamma_l_zero(p, TestSpikeSpec::matched(p)).e_train >= 1.0);
    }
}

TEST_CASE("limit consistency with the general formulas") {
    for (double eta : {0.3, 1.0})
        for (double a : {0.2, 0.5, 0.9})
            for (double gl : {0.5, 3.0}) {
                if (std::abs(a * gl - 1) < 0.1) continue;
                const auto p = make(1e-8, gl, a, 4.0, eta);
                const auto g = generalisation_error(p, TestSpikeSpec::matched(p));
                const auto c = risk_limits_gamma_u_zero(p);
                CHECK(g.e_gen == Approx(c.e_gen).epsilon(1e-4));
                CHECK(g.e_est == Approx(c.e_est).epsilon(1e-4));
                CHECK(g.e_train == Approx(c.e_train).epsilon(1e-4));
                const auto q = make(1.3, 1e-8, a, 4.0, eta);
                const TestSpikeSpec t{{{4.0, 0.5 * std::sqrt(eta), 0.5}, {2.0, 0.1 * std::sqrt(eta), 0.1}}};
                const auto gq = generalisation_error(q, t);
                const auto cq = risk_limits_gamma_l_zero(q, t);
                CHECK(gq.e_gen == Approx(cq.e_gen).epsilon(1e-4));
                CHECK(gq.e_train == Approx(cq.e_train).epsilon(1e-4));
            }
}

TEST_CASE("random sweep: errors bounded below") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0, 1);
    int evaluated = 0;
    for (int k = 0; k < 10000; ++k) {
        ModelParams p = make(0.02 + 6 * U(rng), 0.02 + 6 * U(rng), U(rng), 1.05 + 9 * U(rng), U(rng),
                             0.1 + 10 * U(rng), 0.1 + 2 * U(rng));
        if (k % 7 == 0) p.alpha = 0.0;
        if (k % 11 == 0) p.alpha = 1.0;
        if (std::abs(p.gamma_eff() - 1) < 1e-3) continue;
        const auto r = generalisation_error(p, TestSpikeSpec::matched(p));
        CHECK(r.e_gen >= p.noise_var * (1 - 1e-12));
        CHECK(r.e_train >= 0.0);
        CHECK(r.e_est == Approx(r.missing_signal + r.leaked_signal + r.variance).epsilon(1e-12));
        ++evaluated;
    }
    CHECK(evaluated > 9000);
}

TEST_CASE("double descent at the interpolation threshold") {
    for (double gl : {2.0, 4.0})
        for (double side : {-1.0, 1.0}) {
            const double a = (1 + 0.01 * side) / gl;
            const auto p = make(0.5, gl, a);
            CHECK(generalisation_error(p, TestSpikeSpec::matched(p)).e_gen > 50.0);
        }
    const auto p = make(0.5, 2.0, 0.5);
    CHECK_THROWS_AS(generalisation_error(p, TestSpikeSpec::matched(p)), SingularityError);
}
