// Experiment configuration: a versioned JSON document, validated in full before any computation.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace reprsize::cli {

inline constexpr int kConfigVersion = 1;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Format { csv, json };
enum class Spacing { linear, log };
enum class McMethod { pretrained, pcr, ols };

// Either an explicit list or `count` points between lo and hi.
struct Sweep {
    std::vector<double> values;
    double lo = 0.0, hi = 0.0;
    int count = 0;
    Spacing spacing = Spacing::linear;

    std::vector<double> expand() const;
    bool operator==(const Sweep&) const = default;
};

// Sample sizes may be given as counts (with p) or directly as aspect ratios.
struct ModelBlock {
    std::optional<double> n_u, n_l, p;
    std::optional<double> gamma_u, gamma_l;  // derived from counts when those are given
    double lambda = 0.0, eta = 0.0;
    double w_star_norm_sq = 0.0, noise_var = 1.0;

    bool uses_counts() const { return n_u.has_value() || n_l.has_value(); }
    bool operator==(const ModelBlock&) const = default;
};

struct SpikeBlock {
    double nu = 0.0, rho_w_new = 0.0, rho_v_new = 0.0;
    bool operator==(const SpikeBlock&) const = default;
};

struct AlphaGridBlock {
    std::vector<double> values;  // empty: standard grid
    int count = 30;
    double lo = 0.01;
    double guard_band = 0.02;
    bool operator==(const AlphaGridBlock&) const = default;
};

struct LinearRange {
    double lo = 0.0, hi = 0.0;
    int count = 0;
    bool operator==(const LinearRange&) const = default;
};

struct HeatmapBlock {
    LinearRange n_u, n_l;
    bool substitution_rate = true;
    bool train_optimal_alpha = false;
    bool operator==(const HeatmapBlock&) const = default;
};

struct Family {
    double snr = 0.0, lambda = 0.0, eta = 0.0;
    bool operator==(const Family&) const = default;
};

struct PhaseCurveBlock {
    bool by_counts = false;  // sweep is over n_u (needs model.p) instead of gamma_u
    Sweep sweep;
    std::vector<Family> families;  // empty: the model's own parameters
    double gamma_l_max = 1e4;
    bool operator==(const PhaseCurveBlock&) const = default;
};

struct SubstitutionBlock {
    double h_u = 10.0, h_l = 10.0;
    bool operator==(const SubstitutionBlock&) const = default;
};

struct MonteCarloBlock {
    bool enabled = false;
    int trials = 100;
    McMethod method = McMethod::pretrained;
    bool operator==(const MonteCarloBlock&) const = default;
};

struct ValidateBlock {
    int trials = 100;
    Sweep alphas{{}, 0.05, 1.0, 20, Spacing::linear};
    double exclusion = 0.15;  // skip alphas with |alpha * gamma_l - 1| below this
    double rel_tol = 0.05;
    double se_tol = 3.0;
    double overlap_tol = 0.05;
    double interpolation_tol = 1e-8;
    std::optional<double> lambda_override;  // theory evaluated at a different lambda (negative control)
    bool operator==(const ValidateBlock&) const = default;
};

struct ExperimentConfig {
    int version = kConfigVersion;
    std::optional<ModelBlock> model;
    std::optional<std::vector<SpikeBlock>> test_spikes;  // absent: test covariance equals training covariance
    AlphaGridBlock alpha_grid;
    std::optional<Sweep> alphas;
    std::optional<HeatmapBlock> heatmap;
    std::optional<PhaseCurveBlock> phase_curve;
    SubstitutionBlock substitution_rate;
    MonteCarloBlock monte_carlo;
    ValidateBlock validate;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string output_path;  // empty: standard output
    Format format = Format::csv;

    bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace reprsize::cli
