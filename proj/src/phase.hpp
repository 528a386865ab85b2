#pragma once

#include <optional>
#include <vector>

#include "params.hpp"
#include "projections.hpp"
#include "risk.hpp"

namespace reprsize {

class AlphaGrid {
public:
    // `values` must be strictly increasing in [0, 1] and contain both 0 and 1.
    AlphaGrid(std::vector<double> values, double guard_band = 0.02);

    // 0, then `count` geometrically spaced points from `lo` to 1.
    static AlphaGrid standard(int count = 30, double lo = 0.01, double guard_band = 0.02);

    const std::vector<double>& values() const { return values_; }
    double guard_band() const { return guard_band_; }

    // True when alpha*gamma_l falls inside the excluded band around the interpolation peak.
    bool excluded(double alpha, double gamma_l) const;
    // Grid restricted to usable values for this gamma_l.
    std::vector<double> usable(double gamma_l) const;
    // Grid with each interval bisected.
    AlphaGrid refined() const;

private:
    std::vector<double> values_;
    double guard_band_;
};

struct OptimalAlpha {
    double alpha_star;
    double e_gen_min;
    bool found;  // false if every grid value was singular
};

// alpha in `params` is ignored.
OptimalAlpha optimal_alpha(const ModelParams& params, const TestSpikeSpec& test, const AlphaGrid& grid);

// Training-error-optimal representation size.
inline double train_optimal_alpha(double gamma_l) { return gamma_l > 1.0 ? 1.0 / gamma_l : 1.0; }

// Pretraining overlaps for every grid value at one gamma_u; shared by all gamma_l.
class AlphaSweep {
public:
    AlphaSweep(double gamma_u, double lambda, double eta, const TestSpikeSpec& test, const AlphaGrid& grid);

    OptimalAlpha best(double gamma_l, double w_star_norm_sq, double noise_var) const;
    // E_gen at each grid value; nullopt where singular/excluded.
    std::vector<std::optional<RiskBreakdown>> curve(double gamma_l, double w_star_norm_sq, double noise_var) const;

private:
    const TestSpikeSpec* test_;
    const AlphaGrid* grid_;
    std::vector<PretrainOverlaps> pre_;
};

struct EndpointCrossing {
    bool found;
    double gamma_l;     // smallest crossing
    int root_count;     // sign changes seen on the scan
    std::vector<double> roots;  // every crossing, ascending; roots.front() == gamma_l
};

// B_0 and B_1 with matched test covariance; the crossing of the alpha = 0 and alpha = 1 errors.
double endpoint_b0(double lambda, double eta, double c);
double endpoint_b1(double lambda, double eta, double gamma_l);
EndpointCrossing endpoint_transition_curve(double lambda, double eta, double snr, double gamma_u,
                                           double gamma_l_max = 1e4);

double stability_derivative_scale(double lambda, double eta, double gamma_u);  // (1-eta) + eta D_v
double stability_boundary(double lambda, double eta, double snr, double gamma_u);

enum class RegimeTag { endpoint_condition, stability_boundary };

struct PhaseCurvePoint {
    double gamma_u;
    std::optional<double> gamma_l_boundary;
    RegimeTag tag;
};

struct Range {
    double lo, hi;
    int count;
    std::vector<double> points() const;  // linear spacing; a single point uses lo
};

struct HeatmapCell {
    double n_u, n_l;
    double alpha_star;
    double e_gen_min;
    bool singular;
};

struct Heatmap {
    std::vector<double> n_u, n_l;
    std::vector<HeatmapCell> cells;  // row-major: row = n_u index
    const HeatmapCell& at(std::size_t i, std::size_t j) const { return cells[i * n_l.size() + j]; }
};

Heatmap heatmap(const ModelParams& tmpl, double p, const Range& n_u, const Range& n_l, const TestSpikeSpec& test,
                const AlphaGrid& grid, int threads = 1);

struct SubstitutionRate {
    double rate;
    double d_n_u, d_n_l;  // partial derivatives of the minimal E_gen
    bool one_sided;
};

// Central differences of min_alpha E_gen at (n_u, n_l) with steps h_u, h_l; falls back to
// one-sided differences (and flags it) when a stencil point would leave [lo_u, .] or [lo_l, .].
SubstitutionRate substitution_rate(const ModelParams& tmpl, double p, double n_u, double n_l, double h_u,
                                   double h_l, const TestSpikeSpec& test, const AlphaGrid& grid,
                                   double lo_u = 1.0, double lo_l = 1.0);

// Same quantity from a computed heatmap, one grid cell per step; boundary cells are one-sided.
std::vector<SubstitutionRate> substitution_rate_grid(const Heatmap& hm);

}  // namespace reprsize
