#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "errors.hpp"
#include "phase.hpp"
#include "spectral_measure.hpp"

using namespace reprsize;
using doctest::Approx;

namespace {

ModelParams make(double gu, double gl, double lambda = 5.0, double eta = 1.0, double snr = 9.0) {
    return {gu, gl, 1.0, lambda, eta, snr, 1.0};
}

double egen(ModelParams p, double alpha) {
    p.alpha = alpha;
    return generalisation_error(p, TestSpikeSpec::matched(p)).e_gen;
}

}  // namespace

TEST_CASE("alpha grid construction") {
    const auto g = AlphaGrid::standard();
    REQUIRE(g.values().size() == 31);
    CHECK(g.values().front() == 0.0);
    CHECK(g.values()[1] == Approx(0.01));
    CHECK(g.values().back() == 1.0);
    for (std::size_t i = 1; i < g.values().size(); ++i) CHECK(g.values()[i] > g.values()[i - 1]);
    for (double gl : {1.5, 2.0, 7.0, 50.0})
        for (double a : g.usable(gl)) CHECK(std::abs(a * gl - 1) >= 0.02);
    CHECK_THROWS_AS(AlphaGrid({0.1, 1.0}), DomainError);
    CHECK_THROWS_AS(AlphaGrid({0.0, 0.5, 0.5, 1.0}), DomainError);
    CHECK(g.refined().values().size() == 61);
}

TEST_CASE("optimal alpha in the three regimes") {
    const auto grid = AlphaGrid::standard();
    auto run = [&](const ModelParams& p) { return optimal_alpha(p, TestSpikeSpec::matched(p), grid); };
    // Plenty of unlabelled data, few labels: compress to the spike.
    const auto ii = run(make(1e-8, 3.0));
    CHECK(ii.alpha_star == 0.0);
    // Scarce data everywhere: no compression.
    CHECK(run(make(10.0, 10.0, 2.0)).alpha_star == 1.0);
    // Plenty of labels.
    const auto iii = run(make(0.5, 0.1));
    CHECK(iii.alpha_star == 1.0);
    CHECK(iii.e_gen_min == Approx(egen(make(0.5, 0.1), 1.0)));
}

TEST_CASE("optimal alpha stable under grid refinement") {
    const auto grid = AlphaGrid::standard();
    const auto fine = grid.refined();
    for (auto p : {make(0.5, 0.8), make(2.0, 3.0), make(0.1, 6.0, 3.0, 0.7), make(1.0, 0.6, 2.0, 0.8, 4.0)}) {
        const auto a = optimal_alpha(p, TestSpikeSpec::matched(p), grid);
        const auto b = optimal_alpha(p, TestSpikeSpec::matched(p), fine);
        const auto& v = grid.values();
        const auto it = std::find(v.begin(), v.end(), a.alpha_star);
        REQUIRE(it != v.end());
        const double lo = it == v.begin() ? 0.0 : *(it - 1);
        const double hi = it + 1 == v.end() ? 1.0 : *(it + 1);
        CHECK(b.alpha_star >= lo);
        CHECK(b.alpha_star <= hi);
        CHECK(b.e_gen_min <= a.e_gen_min + 1e-12);
    }
}

TEST_CASE("endpoint transition: crossing equates the endpoint errors") {
    for (double gu : {0.3, 2.0, 20.0})
        for (double eta : {0.6, 1.0}) {
            const auto r = endpoint_transition_curve(5.0, eta, 9.0, gu);
            // A strong spike seen with plenty of unlabelled data keeps alpha = 0 ahead everywhere.
            if (gu == 0.3 && eta == 1.0) {
                CHECK_FALSE(r.found);
                CHECK(r.root_count == 0);
                continue;
            }
            REQUIRE(r.found);
            CHECK(r.gamma_l > 1.0);
            const auto p = make(gu, r.gamma_l, 5.0, eta);
            CHECK(std::abs(egen(p, 0.0) - egen(p, 1.0)) < 1e-8);
        }
}

TEST_CASE("endpoint transition: every root is listed in order") {
    bool saw_multiple = false;
    for (double gu : {0.5, 1.0, 2.0, 2.5, 4.0, 8.0}) {
        const auto r = endpoint_transition_curve(5.0, 1.0, 9.0, gu);
        REQUIRE(r.roots.size() == static_cast<std::size_t>(r.root_count));
        if (!r.found) continue;
        CHECK(r.roots.front() == r.gamma_l);
        CHECK(std::is_sorted(r.roots.begin(), r.roots.end()));
        for (double g : r.roots) {
            const auto p = make(gu, g, 5.0, 1.0);
            CHECK(std::abs(egen(p, 0.0) - egen(p, 1.0)) < 1e-8);
        }
        saw_multiple = saw_multiple || r.roots.size() > 1;
    }
    CHECK(saw_multiple);
}

TEST_CASE("endpoint transition: eta = 1 specialisations") {
    const double lambda = 2.0, S = 9.0;
    // Below BBP (lambda < 1 + sqrt(gamma_u)): right side is lambda.
    const auto below = endpoint_transition_curve(lambda, 1.0, S, 4.0);
    REQUIRE(below.found);
    auto lhs = [&](double g) { return lambda * g * (g - 1) / ((g - 1 + lambda) * (g - 1 + lambda)) + 1 / (S * (g - 1)); };
    CHECK(lhs(below.gamma_l) == Approx(lambda).epsilon(1e-10));
    const double gu = 0.25;
    const auto above = endpoint_transition_curve(lambda, 1.0, S, gu);
    REQUIRE(above.found);
    CHECK(lhs(above.gamma_l) == Approx(lambda * gu / ((lambda - 1) * (lambda - 1))).epsilon(1e-10));
    // Exact spike recovery with huge SNR: the alpha = 0 endpoint is bias-free, no crossing.
    CHECK_FALSE(endpoint_transition_curve(5.0, 1.0, 1e12, 0.0).found);
}

TEST_CASE("stability boundary values") {
    CHECK(stability_boundary(5.0, 0.75, 9.0, 1e-12) == Approx(2.25 / 3.25).epsilon(1e-6));
    CHECK(stability_boundary(5.0, 1.0, 9.0, 0.0) == 0.0);
    CHECK(stability_boundary(5.0, 1.0, 9.0, 2.0) == Approx(0.75));
    for (double eta : {0.0, 0.5, 0.9}) {
        const double S = 4.0, expect = S * (1 - eta) / (1 + S * (1 - eta));
        CHECK(stability_boundary(3.0, eta, S, 1e-8) == Approx(expect).epsilon(1e-6));
    }
    // Branches agree at gamma_u = 1.
    CHECK(stability_derivative_scale(4.0, 1.0, 1.0 - 1e-12) ==
          Approx(stability_derivative_scale(4.0, 1.0, 1.0 + 1e-12)).epsilon(1e-9));
}

TEST_CASE("stability boundary in (0,1) and increasing in SNR") {
    for (double gu : {0.1, 0.9, 3.0})
        for (double eta : {0.2, 1.0}) {
            double prev = 0.0;
            for (double S : {0.1, 0.5, 1.0, 3.0, 9.0, 30.0}) {
                const double b = stability_boundary(4.0, eta, S, gu);
                CHECK(b > 0.0);
                CHECK(b < 1.0);
                CHECK(b > prev);
                prev = b;
            }
        }
}

TEST_CASE("alpha = 1 locally stable below the boundary") {
    for (double gu : {0.3, 2.0})
        for (double eta : {0.5, 1.0}) {
            const double crit = stability_boundary(5.0, eta, 9.0, gu);
            const double h = 1e-4;
            for (double f : {0.5, 0.9}) {
                const auto p = make(gu, crit * f, 5.0, eta);
                CHECK((egen(p, 1.0) - egen(p, 1.0 - h)) / h <= 0.0);
            }
            const double gl = crit + 0.5 * (1 - crit);
            const auto q = make(gu, gl, 5.0, eta);
            CHECK((egen(q, 1.0) - egen(q, 1.0 - h)) / h > 0.0);
        }
}

TEST_CASE("heatmap small grids") {
    const auto grid = AlphaGrid::standard();
    const ModelParams t = make(1, 1, 2.0, 1.0, 9.0);
    const auto hm = heatmap(t, 500, {40, 50, 2}, {40, 50, 2}, TestSpikeSpec::matched(t), grid);
    REQUIRE(hm.cells.size() == 4);
    for (const auto& c : hm.cells) CHECK(c.alpha_star == 1.0);
    const auto one = heatmap(t, 500, {100, 100, 1}, {300, 300, 1}, TestSpikeSpec::matched(t), grid);
    CHECK(one.cells.size() == 1);
}

TEST_CASE("heatmap is thread-count invariant and row-major") {
    const auto grid = AlphaGrid::standard(12);
    const ModelParams t = make(1, 1);
    const auto a = heatmap(t, 200, {10, 600, 5}, {10, 600, 4}, TestSpikeSpec::matched(t), grid, 1);
    const auto b = heatmap(t, 200, {10, 600, 5}, {10, 600, 4}, TestSpikeSpec::matched(t), grid, 3);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t k = 0; k < a.cells.size(); ++k) {
        CHECK(a.cells[k].alpha_star == b.cells[k].alpha_star);
        CHECK(a.cells[k].e_gen_min == b.cells[k].e_gen_min);
    }
    CHECK(a.at(2, 3).n_u == a.n_u[2]);
    CHECK(a.at(2, 3).n_l == a.n_l[3]);
}

TEST_CASE("substitution rate") {
    const auto grid = AlphaGrid::standard();
    const ModelParams t = make(1, 1);
    const auto m = TestSpikeSpec::matched(t);
    // Unlabelled data is worthless once the spike is known exactly.
    const ModelParams half = make(1, 1, 5.0, 0.5);
    const auto flat = substitution_rate(half, 200, 1e9, 400, 1e6, 10, TestSpikeSpec::matched(half), grid);
    CHECK(flat.d_n_l < 0.0);
    CHECK(std::abs(flat.rate) < 1e-3);
    CHECK_FALSE(flat.one_sided);
    // Halving the stencil changes the estimate at most at first order.
    const auto r1 = substitution_rate(t, 200, 600, 400, 20, 20, m, grid);
    const auto r2 = substitution_rate(t, 200, 600, 400, 10, 10, m, grid);
    CHECK(r1.rate > 0.0);
    CHECK(r2.rate == Approx(r1.rate).epsilon(0.05));
    const auto edge = substitution_rate(t, 200, 5, 900, 10, 10, m, grid);
    CHECK(edge.one_sided);
}

TEST_CASE("substitution rate from the heatmap grid") {
    const auto grid = AlphaGrid::standard(12);
    const ModelParams t = make(1, 1);
    const auto hm = heatmap(t, 200, {100, 1000, 4}, {300, 1200, 4}, TestSpikeSpec::matched(t), grid);
    const auto rates = substitution_rate_grid(hm);
    REQUIRE(rates.size() == 16);
    CHECK(rates[0].one_sided);
    CHECK_FALSE(rates[1 * 4 + 1].one_sided);
    const double de_du = (hm.at(2, 1).e_gen_min - hm.at(0, 1).e_gen_min) / (hm.n_u[2] - hm.n_u[0]);
    const double de_dl = (hm.at(1, 2).e_gen_min - hm.at(1, 0).e_gen_min) / (hm.n_l[2] - hm.n_l[0]);
    CHECK(rates[5].rate == Approx(de_du / de_dl).epsilon(1e-12));
}
