#include "phase.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "errors.hpp"
#include "mp_law.hpp"
#include "parallel.hpp"
#include "spectral_measure.hpp"

namespace reprsize {

AlphaGrid::AlphaGrid(std::vector<double> values, double guard_band)
    : values_(std::move(values)), guard_band_(guard_band) {
    if (values_.size() < 2 || values_.front() != 0.0 || values_.back() != 1.0)
        throw DomainError("alpha grid must contain both endpoints 0 and 1");
    for (std::size_t i = 1; i < values_.size(); ++i)
        if (!(values_[i] > values_[i - 1])) throw DomainError("alpha grid must be strictly increasing");
    if (!(guard_band >= 0.0 && guard_band < 1.0)) throw DomainError("guard band must be in [0, 1)");
}

AlphaGrid AlphaGrid::standard(int count, double lo, double guard_band) {
    if (count < 2 || !(lo > 0.0 && lo < 1.0)) throw DomainError("alpha grid: need count >= 2 and 0 < lo < 1");
    std::vector<double> v{0.0};
    const double step = -std::log(lo) / (count - 1);
    for (int i = 0; i < count; ++i) v.push_back(i == count - 1 ? 1.0 : lo * std::exp(step * i));
    return AlphaGrid(std::move(v), guard_band);
}

bool AlphaGrid::excluded(double alpha, double gamma_l) const {
    const double g = alpha * gamma_l;
    return std::abs(g - 1.0) < std::max(guard_band_, mp::kSingularBand);
}

std::vector<double> AlphaGrid::usable(double gamma_l) const {
    std::vector<double> out;
    for (double a : values_)
        if (!excluded(a, gamma_l)) out.push_back(a);
    return out;
}

AlphaGrid AlphaGrid::refined() const {
    std::vector<double> v;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (i > 0) v.push_back(0.5 * (values_[i - 1] + values_[i]));
        v.push_back(values_[i]);
    }
    return AlphaGrid(std::move(v), guard_band_);
}

AlphaSweep::AlphaSweep(double gamma_u, double lambda, double eta, const TestSpikeSpec& test,
                       const AlphaGrid& grid)
    : test_(&test), grid_(&grid) {
    validate(test, eta);
    pre_.reserve(grid.values().size());
    for (double a : grid.values()) pre_.push_back(pretrain_overlaps(gamma_u, a, lambda, eta, test));
}

std::vector<std::optional<RiskBreakdown>> AlphaSweep::curve(double gamma_l, double w, double s2) const {
    std::vector<std::optional<RiskBreakdown>> out(pre_.size());
    for (std::size_t i = 0; i < pre_.size(); ++i) {
        if (grid_->excluded(grid_->values()[i], gamma_l)) continue;
        try {
            out[i] = assemble_risk(pre_[i], gamma_l, w, s2, *test_);
        } catch (const SingularityError&) {
        }
    }
    return out;
}

OptimalAlpha AlphaSweep::best(double gamma_l, double w, double s2) const {
    OptimalAlpha best{std::nan(""), std::numeric_limits<double>::infinity(), false};
    const auto c = curve(gamma_l, w, s2);
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!c[i]) continue;
        const double e = c[i]->e_gen;
        // Ascending scan with <= resolves ties toward larger alpha.
        if (e <= best.e_gen_min * (1.0 + 1e-12)) {
            best = {grid_->values()[i], e, true};
        }
    }
    return best;
}

OptimalAlpha optimal_alpha(const ModelParams& params, const TestSpikeSpec& test, const AlphaGrid& grid) {
    ModelParams p = params;
    p.alpha = 1.0;
    validate(p);
    return AlphaSweep(p.gamma_u, p.lambda, p.eta, test, grid).best(p.gamma_l, p.w_star_norm_sq, p.noise_var);
}

double endpoint_b0(double lambda, double eta, double c) {
    return 1.0 + eta * (lambda - 1.0) - eta * lambda * lambda * c / (1.0 + (lambda - 1.0) * c);
}

double endpoint_b1(double lambda, double eta, double gamma_l) {
    const double g1 = gamma_l - 1.0;
    return (1.0 - eta) * g1 / gamma_l + eta * lambda * gamma_l * g1 / ((g1 + lambda) * (g1 + lambda));
}

EndpointCrossing endpoint_transition_curve(double lambda, double eta, double snr, double gamma_u,
                                           double gamma_l_max) {
    if (!(lambda > 1.0) || !(eta >= 0.0 && eta <= 1.0) || !(snr > 0.0) || !(gamma_u >= 0.0))
        throw DomainError("endpoint curve: invalid parameters");
    if (!(gamma_l_max > 1.0)) throw DomainError("endpoint curve: gamma_l_max must exceed 1");
    const double b0 = endpoint_b0(lambda, eta, bbp_overlap(lambda, gamma_u));
    auto phi = [&](double g) { return endpoint_b1(lambda, eta, g) + 1.0 / (snr * (g - 1.0)) - b0; };

    // Log scan in (gamma_l - 1) from 1e-8 up; phi -> +inf at the left end.
    constexpr int kScan = 4000;
    const double t0 = std::log(1e-8), t1 = std::log(gamma_l_max - 1.0);
    EndpointCrossing out{false, std::nan(""), 0, {}};
    double prev_g = 1.0 + std::exp(t0);
    double prev_f = phi(prev_g);
    for (int k = 1; k <= kScan; ++k) {
        const double g = 1.0 + std::exp(t0 + (t1 - t0) * k / kScan);
        const double f = phi(g);
        if ((prev_f > 0.0) != (f > 0.0)) {
            ++out.root_count;
            double lo = prev_g, hi = g, flo = prev_f;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = phi(mid);
                if ((fm > 0.0) == (flo > 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            out.roots.push_back(0.5 * (lo + hi));
            if (!out.found) {
                out.found = true;
                out.gamma_l = out.roots.front();
            }
        }
        prev_g = g;
        prev_f = f;
    }
    return out;
}

double stability_derivative_scale(double lambda, double eta, double gamma_u) {
    if (!(lambda > 1.0) || !(eta >= 0.0 && eta <= 1.0) || !(gamma_u >= 0.0))
        throw DomainError("stability boundary: invalid parameters");
    double dv;
    if (gamma_u < 1.0) {
        const double d = lambda - 1.0 + std::sqrt(gamma_u);
        dv = lambda * gamma_u / (d * d);
    } else {
        dv = gamma_u / (gamma_u - 1.0 + lambda);
    }
    return (1.0 - eta) + eta * dv;
}

double stability_boundary(double lambda, double eta, double snr, double gamma_u) {
    if (!(snr > 0.0)) throw DomainError("stability boundary: SNR must be positive");
    const double sd = snr * stability_derivative_scale(lambda, eta, gamma_u);
    return sd / (1.0 + sd);
}

std::vector<double> Range::points() const {
    if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw DomainError("range: need count >= 1 and 0 < lo <= hi");
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) v[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    return v;
}

Heatmap heatmap(const ModelParams& tmpl, double p, const Range& n_u, const Range& n_l, const TestSpikeSpec& test,
                const AlphaGrid& grid, int threads) {
    ModelParams base = tmpl;
    base.alpha = 1.0;
    validate(base);
    validate(test, base.eta);
    if (!(p > 0.0)) throw DomainError("heatmap: p must be positive");
    Heatmap hm;
    hm.n_u = n_u.points();
    hm.n_l = n_l.points();
    const std::size_t cols = hm.n_l.size();
    hm.cells.resize(hm.n_u.size() * cols);
    parallel_for(hm.n_u.size(), threads, [&](std::size_t i) {
        const AlphaSweep sweep(p / hm.n_u[i], base.lambda, base.eta, test, grid);
        for (std::size_t j = 0; j < cols; ++j) {
            const OptimalAlpha o = sweep.best(p / hm.n_l[j], base.w_star_norm_sq, base.noise_var);
            hm.cells[i * cols + j] = {hm.n_u[i], hm.n_l[j], o.alpha_star, o.found ? o.e_gen_min : std::nan(""),
                                      !o.found};
        }
    });
    return hm;
}

SubstitutionRate substitution_rate(const ModelParams& tmpl, double p, double n_u, double n_l, double h_u,
                                   double h_l, const TestSpikeSpec& test, const AlphaGrid& grid, double lo_u,
                                   double lo_l) {
    if (!(h_u > 0.0) || !(h_l > 0.0)) throw DomainError("substitution rate: steps must be positive");
    auto emin = [&](double nu, double nl) {
        ModelParams q = tmpl;
        q.gamma_u = p / nu;
        q.gamma_l = p / nl;
        const OptimalAlpha o = optimal_alpha(q, test, grid);
        if (!o.found) throw SingularityError("substitution rate: no usable alpha at stencil point");
        return o.e_gen_min;
    };
    SubstitutionRate r{};
    const double e0 = emin(n_u, n_l);
    if (n_u - h_u >= lo_u) {
        r.d_n_u = (emin(n_u + h_u, n_l) - emin(n_u - h_u, n_l)) / (2.0 * h_u);
    } else {
        r.d_n_u = (emin(n_u + h_u, n_l) - e0) / h_u;
        r.one_sided = true;
    }
    if (n_l - h_l >= lo_l) {
        r.d_n_l = (emin(n_u, n_l + h_l) - emin(n_u, n_l - h_l)) / (2.0 * h_l);
    } else {
        r.d_n_l = (emin(n_u, n_l + h_l) - e0) / h_l;
        r.one_sided = true;
    }
    r.rate = r.d_n_u / r.d_n_l;
    return r;
}

std::vector<SubstitutionRate> substitution_rate_grid(const Heatmap& hm) {
    const std::size_t R = hm.n_u.size(), C = hm.n_l.size();
    std::vector<SubstitutionRate> out(R * C);
    auto e = [&](std::size_t i, std::size_t j) { return hm.at(i, j).e_gen_min; };
    // Derivative along one axis at index k of n points with coordinates x.
    auto diff = [](const std::vector<double>& x, std::size_t k, auto&& f, bool& one_sided) {
        const std::size_t n = x.size();
        if (n < 2) return std::nan("");
        if (k > 0 && k + 1 < n) return (f(k + 1) - f(k - 1)) / (x[k + 1] - x[k - 1]);
        one_sided = true;
        return k == 0 ? (f(1) - f(0)) / (x[1] - x[0]) : (f(n - 1) - f(n - 2)) / (x[n - 1] - x[n - 2]);
    };
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < C; ++j) {
            SubstitutionRate s{};
            s.d_n_u = diff(hm.n_u, i, [&](std::size_t k) { return e(k, j); }, s.one_sided);
            s.d_n_l = diff(hm.n_l, j, [&](std::size_t k) { return e(i, k); }, s.one_sided);
            s.rate = s.d_n_u / s.d_n_l;
            out[i * C + j] = s;
        }
    return out;
}

}  // namespace reprsize
