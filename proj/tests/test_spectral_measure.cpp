#include <cmath>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "mp_law.hpp"
#include "oracle.hpp"
#include "spectral_measure.hpp"

using namespace reprsize;
using doctest::Approx;

TEST_CASE("spike location") {
    CHECK(spike_location(5.0, 1.0) == Approx(6.25));
    CHECK(spike_location(5.0, 1e-12) == Approx(5.0));
    CHECK(spike_location(2.0, 0.5) == Approx(3.0));
    CHECK(spike_location(3.0, 2.0) > mp::support(2.0).lambda_plus);
    CHECK_THROWS_AS(spike_location(2.0, 4.0), SingularityError);
    CHECK_THROWS_AS(spike_location(1.0, 0.5), DomainError);
}

TEST_CASE("BBP overlap") {
    CHECK(bbp_overlap(5.0, 1.0) == Approx(0.75));
    CHECK(bbp_overlap(5.0, 16.0) == 0.0);
    CHECK(bbp_overlap(5.0, 0.0) == 1.0);
    CHECK(bbp_overlap(7.0, 1e-12) == Approx(1.0));
    // Both sides of the BBP boundary meet at 0.
    CHECK(bbp_overlap(5.0, 16.0 * (1 - 1e-10)) == Approx(0.0).epsilon(1e-8));
    CHECK(bbp_overlap(5.0, 16.0 * (1 + 1e-10)) == 0.0);
}

TEST_CASE("sample measure atoms") {
    const auto m = sample_measure({0.0, 1.0, 5.0}, 2.0);
    CHECK(m.zero_atom == Approx(0.5));
    const auto s = sample_measure({1.0, 0.0, 5.0}, 1.0);
    REQUIRE(s.has_spike);
    CHECK(s.spike_at == Approx(6.25));
    CHECK(s.spike_weight == Approx(0.75));
    CHECK(s.zero_atom == 0.0);
    const auto below = sample_measure({1.0, 0.0, 2.0}, 4.0);
    CHECK_FALSE(below.has_spike);
    CHECK(below.spike_weight == 0.0);
}

TEST_CASE("quadratic measures conserve mass") {
    for (double lambda : {1.1, 2.0, 5.0, 10.0})
        for (double g : {0.25, 0.5, 2.0, 4.0})
            for (double eta : {0.0, 0.3, 1.0}) {
                const auto m = sample_measure({eta, 1 - eta, lambda}, g);
                const double bulk = m.total_bulk_mass();
                CHECK(bulk + m.spike_weight + m.zero_atom == Approx(1.0).epsilon(1e-4));
                // Stronger: the smooth-coordinate integral matches the raw-kernel oracle.
                const double ref = oracle::overlap_bulk_mass(g, lambda, eta, 1 - eta, 1e9);
                CHECK(bulk == Approx(ref).epsilon(1e-7));
                CHECK(bulk + m.spike_weight + m.zero_atom == Approx(1.0).epsilon(1e-9));
            }
}

TEST_CASE("bulk density agrees with the kernel definition pointwise") {
    const auto m = sample_measure({0.6, -0.2, 3.0}, 0.7);
    const auto s = m.support;
    for (int k = 1; k < 20; ++k) {
        const double t = s.lambda_minus + (s.lambda_plus - s.lambda_minus) * k / 20.0;
        CHECK(m.bulk_density(t) == Approx(oracle::overlap_density_raw(0.7, 3.0, 0.6, -0.2, t)).epsilon(1e-12));
    }
}

TEST_CASE("mass near the BBP boundary") {
    // The tau = lambda pole approaches the upper edge; the integral must still conserve mass.
    for (double rel : {1 - 1e-3, 1 - 1e-6, 1.0, 1 + 1e-6}) {
        const double lambda = 3.0, g = 4.0 * rel;
        const auto m = sample_measure({1.0, 0.0, lambda}, g);
        CHECK(m.total_bulk_mass() + m.spike_weight + m.zero_atom == Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("tail mass examples") {
    const auto m = sample_measure({1.0, 0.0, 5.0}, 0.5);
    CHECK(measure_tail_mass(m, m.support.lambda_minus, 1.0) == 0.0);
    const auto q = sample_measure({0.7, 0.3, 5.0}, 1.0);
    CHECK(measure_tail_mass(q, q.support.lambda_plus, 0.0) == Approx(1 - bbp_overlap(5.0, 1.0) * 0.7).epsilon(1e-8));
    const auto d1 = sample_measure({0.0, 1.0, 5.0}, 2.0);
    CHECK(measure_tail_mass(d1, mp::bulk_threshold(2.0, 0.75), 0.75) == Approx(0.25));
    CHECK_THROWS_AS(measure_tail_mass(d1, 100.0, 0.5), DomainError);
    CHECK_THROWS_AS(measure_tail_mass(d1, 1.0, 1.5), DomainError);
}

TEST_CASE("signed tail mass matches oracle (no positivity assumed)") {
    // Spike and bulk weights of opposite sign make the density change sign.
    const double g = 0.6, lambda = 4.0, sw = 0.5, bw = -0.4;
    const auto m = sample_measure({sw, bw, lambda}, g);
    for (double a : {0.1, 0.4, 0.8}) {
        const double t = mp::bulk_threshold(g, a);
        CHECK(measure_tail_mass(m, t, a) == Approx(oracle::overlap_bulk_mass(g, lambda, sw, bw, t)).epsilon(1e-8));
    }
}

namespace {

struct Triple {
    double ab, av, bv;
};

Triple random_unit_triple(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    double a[3], b[3];
    for (auto& x : a) x = n(rng);
    for (auto& x : b) x = n(rng);
    auto norm = [](double* x) {
        const double s = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        for (int i = 0; i < 3; ++i) x[i] /= s;
    };
    norm(a);
    norm(b);
    return {a[0] * b[0] + a[1] * b[1] + a[2] * b[2], a[0], b[0]};
}

}  // namespace

TEST_CASE("signed tail mass obeys Cauchy-Schwarz") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 12; ++trial) {
        const Triple t = random_unit_triple(rng);
        for (double g : {0.5, 2.0}) {
            const double lambda = 4.0;
            const auto mab = sample_measure({t.av * t.bv, t.ab - t.av * t.bv, lambda}, g);
            const auto maa = sample_measure({t.av * t.av, 1 - t.av * t.av, lambda}, g);
            const auto mbb = sample_measure({t.bv * t.bv, 1 - t.bv * t.bv, lambda}, g);
            for (int k = 1; k < 10; ++k) {
                const double a = k / 10.0;
                const double th = mp::bulk_threshold(g, a);
                const double ab = measure_tail_mass(mab, th, a);
                const double aa = measure_tail_mass(maa, th, a);
                const double bb = measure_tail_mass(mbb, th, a);
                CHECK(ab * ab <= aa * bb + 1e-10);
            }
        }
    }
}

TEST_CASE("tail mass continuous and nonincreasing in alpha") {
    for (double g : {0.5, 1.0, 2.0}) {
        const auto m = sample_measure({0.6, 0.4, 5.0}, g);
        double prev = measure_tail_mass(m, m.support.lambda_plus, 0.0);
        for (int k = 1; k <= 200; ++k) {
            const double a = k / 200.0;
            const double v = measure_tail_mass(m, mp::bulk_threshold(g, a), a);
            CHECK(v <= prev + 1e-8);
            CHECK(prev - v < 0.03);
            prev = v;
        }
        CHECK(prev == Approx(0.0).epsilon(1e-12));
    }
}
