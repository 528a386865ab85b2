#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>

#include "json.hpp"

namespace reprsize::cli {

namespace {

void check(rs_status s) {
    if (s != RS_OK) throw ApiError(s, rs_last_error());
}

struct SpecDeleter {
    void operator()(rs_test_spec* s) const { rs_test_spec_free(s); }
};
struct GridDeleter {
    void operator()(rs_alpha_grid* g) const { rs_alpha_grid_free(g); }
};
struct HeatmapDeleter {
    void operator()(rs_heatmap* h) const { rs_heatmap_free(h); }
};
using SpecPtr = std::unique_ptr<rs_test_spec, SpecDeleter>;
using GridPtr = std::unique_ptr<rs_alpha_grid, GridDeleter>;
using HeatmapPtr = std::unique_ptr<rs_heatmap, HeatmapDeleter>;

const ModelBlock& need_model(const ExperimentConfig& cfg, const char* command) {
    if (!cfg.model) throw ConfigError(std::string(command) + " needs a 'model' block");
    return *cfg.model;
}

double need(const std::optional<double>& v, const char* what, const char* command) {
    if (!v) throw ConfigError(std::string(command) + " needs model." + what);
    return *v;
}

rs_model_params params_of(const ModelBlock& m, double gamma_u, double gamma_l, double alpha) {
    return {gamma_u, gamma_l, alpha, m.lambda, m.eta, m.w_star_norm_sq, m.noise_var};
}

SpecPtr make_test_spec(const ExperimentConfig& cfg) {
    const ModelBlock& m = *cfg.model;
    SpecPtr spec(cfg.test_spikes ? rs_test_spec_new() : rs_test_spec_matched(m.lambda, m.eta));
    if (!spec) throw ApiError(RS_ERR_INTERNAL, "cannot allocate test specification");
    if (cfg.test_spikes)
        for (const auto& s : *cfg.test_spikes) check(rs_test_spec_add(spec.get(), s.nu, s.rho_w_new, s.rho_v_new));
    return spec;
}

GridPtr make_grid(const AlphaGridBlock& g) {
    rs_alpha_grid* out = nullptr;
    const rs_status s = g.values.empty() ? rs_alpha_grid_standard(g.count, g.lo, g.guard_band, &out)
                                         : rs_alpha_grid_from_values(g.values.data(), g.values.size(),
                                                                     g.guard_band, &out);
    if (s != RS_OK) throw ConfigError(std::string("alpha_grid: ") + rs_last_error());
    return GridPtr(out);
}

int to_count(double n, const char* what) {
    const double r = std::round(n);
    if (!(r >= 1.0) || r > 1e8) throw ConfigError(std::string("sample size ") + what + " is not usable for simulation");
    return static_cast<int>(r);
}

rs_finite_instance finite_instance(const ExperimentConfig& cfg, double gamma_u, double gamma_l, const char* command) {
    const ModelBlock& m = *cfg.model;
    const double p = need(m.p, "p", command);
    rs_finite_instance inst{};
    inst.p = to_count(p, "p");
    inst.n_u = to_count(m.n_u.value_or(p / gamma_u), "n_u");
    inst.n_l = to_count(m.n_l.value_or(p / gamma_l), "n_l");
    inst.m = inst.p;
    inst.lambda = m.lambda;
    inst.eta = m.eta;
    inst.w_star_norm = std::sqrt(m.w_star_norm_sq);
    inst.noise_sd = std::sqrt(m.noise_var);
    inst.seed = cfg.seed;
    return inst;
}

rs_method method_of(McMethod m) {
    switch (m) {
        case McMethod::pcr: return RS_METHOD_PCR;
        case McMethod::ols: return RS_METHOD_OLS;
        default: return RS_METHOD_PRETRAINED;
    }
}

Cell num(double v) { return std::isfinite(v) ? Cell{v} : Cell{}; }
Cell flag(bool b) { return Cell{static_cast<long long>(b ? 1 : 0)}; }

// An evaluation that may legitimately hit the interpolation singularity.
bool try_eval(rs_status s) {
    if (s == RS_ERR_SINGULAR) return false;
    check(s);
    return true;
}

CommandOutput error_curve(const ExperimentConfig& cfg) {
    const char* cmd = "error-curve";
    const ModelBlock& m = need_model(cfg, cmd);
    const double gu = need(m.gamma_u, "gamma_u (or n_u)", cmd);
    const double gl = need(m.gamma_l, "gamma_l (or n_l)", cmd);
    const std::vector<double> alphas = cfg.alphas.value_or(Sweep{{}, 0.01, 1.0, 30, Spacing::linear}).expand();
    const SpecPtr test = make_test_spec(cfg);
    const GridPtr grid = make_grid(cfg.alpha_grid);
    rs_finite_instance inst{};
    if (cfg.monte_carlo.enabled) inst = finite_instance(cfg, gu, gl, cmd);

    CommandOutput out;
    out.table.columns = {"alpha", "singular", "e_est", "e_gen", "e_train", "missing", "leaked", "variance",
                         "test_spike_bias"};
    for (double a : alphas) {
        std::vector<Cell> row{a};
        rs_model_params p = params_of(m, gu, gl, a);
        rs_risk_breakdown r{};
        const bool ok = !rs_alpha_grid_excluded(grid.get(), a, gl) && try_eval(rs_generalisation_error(&p, test.get(), &r));
        row.push_back(flag(!ok));
        if (ok) {
            for (double v : {r.e_est, r.e_gen, r.e_train, r.missing_signal, r.leaked_signal, r.variance,
                             r.test_spike_bias})
                row.push_back(num(v));
        } else {
            row.resize(out.table.columns.size());
        }
        out.table.rows.push_back(std::move(row));
    }
    if (cfg.monte_carlo.enabled) {
        std::vector<rs_trial_stats> stats(alphas.size());
        check(rs_mc_alpha_curve(&inst, alphas.data(), alphas.size(), cfg.monte_carlo.trials, test.get(),
                                method_of(cfg.monte_carlo.method), cfg.threads, stats.data()));
        for (const char* c : {"mc_mean", "mc_sd", "mc_train_mean", "mc_train_sd"}) out.table.columns.push_back(c);
        for (std::size_t i = 0; i < alphas.size(); ++i)
            for (double v : {stats[i].e_gen_mean, stats[i].e_gen_sd, stats[i].e_train_mean, stats[i].e_train_sd})
                out.table.rows[i].push_back(num(v));
    }
    return out;
}

CommandOutput optimal_alpha(const ExperimentConfig& cfg) {
    const char* cmd = "optimal-alpha";
    const ModelBlock& m = need_model(cfg, cmd);
    const double gu = need(m.gamma_u, "gamma_u (or n_u)", cmd);
    const double gl = need(m.gamma_l, "gamma_l (or n_l)", cmd);
    const SpecPtr test = make_test_spec(cfg);
    const GridPtr grid = make_grid(cfg.alpha_grid);
    rs_model_params p = params_of(m, gu, gl, 1.0);
    double a = 0.0, e = 0.0;
    const bool ok = try_eval(rs_optimal_alpha(&p, test.get(), grid.get(), &a, &e));
    CommandOutput out;
    out.table.columns = {"gamma_u", "gamma_l", "alpha_star", "e_gen_min", "singular", "train_alpha_star"};
    out.table.rows.push_back({gu, gl, ok ? num(a) : Cell{}, ok ? num(e) : Cell{}, flag(!ok),
                              num(rs_train_optimal_alpha(gl))});
    return out;
}

CommandOutput heatmap(const ExperimentConfig& cfg) {
    const char* cmd = "heatmap";
    const ModelBlock& m = need_model(cfg, cmd);
    if (!cfg.heatmap) throw ConfigError("heatmap needs a 'heatmap' block");
    const HeatmapBlock& h = *cfg.heatmap;
    const double p = need(m.p, "p", cmd);
    const SpecPtr test = make_test_spec(cfg);
    const GridPtr grid = make_grid(cfg.alpha_grid);
    rs_model_params tmpl = params_of(m, 1.0, 1.0, 1.0);
    rs_heatmap* raw = nullptr;
    check(rs_heatmap_compute(&tmpl, p, h.n_u.lo, h.n_u.hi, h.n_u.count, h.n_l.lo, h.n_l.hi, h.n_l.count, test.get(),
                             grid.get(), cfg.threads, &raw));
    const HeatmapPtr hm(raw);

    CommandOutput out;
    out.table.columns = {"n_u", "n_l", "alpha_star", "e_gen_min", "singular"};
    if (h.substitution_rate) {
        out.table.columns.push_back("substitution_rate");
        out.table.columns.push_back("rate_one_sided");
    }
    if (h.train_optimal_alpha) out.table.columns.push_back("train_alpha_star");
    for (std::size_t i = 0; i < rs_heatmap_rows(hm.get()); ++i)
        for (std::size_t j = 0; j < rs_heatmap_cols(hm.get()); ++j) {
            rs_heatmap_cell c{};
            check(rs_heatmap_cell_at(hm.get(), i, j, &c));
            std::vector<Cell> row{c.n_u, c.n_l, c.singular ? Cell{} : num(c.alpha_star), num(c.e_gen_min),
                                  flag(c.singular != 0)};
            if (h.substitution_rate) {
                // A single-cell axis has no neighbour to difference against.
                const bool defined = h.n_u.count > 1 && h.n_l.count > 1;
                row.push_back(defined ? num(c.substitution_rate) : Cell{});
                row.push_back(defined ? flag(c.rate_one_sided != 0) : Cell{});
            }
            if (h.train_optimal_alpha) row.push_back(num(rs_train_optimal_alpha(p / c.n_l)));
            out.table.rows.push_back(std::move(row));
        }
    return out;
}

constexpr double kDegenerateBoundary = 1e-6;

CommandOutput phase_curve(const ExperimentConfig& cfg) {
    const char* cmd = "phase-curve";
    const ModelBlock& m = need_model(cfg, cmd);
    if (!cfg.phase_curve) throw ConfigError("phase-curve needs a 'phase_curve' block");
    const PhaseCurveBlock& pc = *cfg.phase_curve;
    const bool counts = pc.by_counts || m.p.has_value();
    const double p = counts ? need(m.p, "p", cmd) : 0.0;
    std::vector<Family> families = pc.families;
    if (families.empty()) {
        if (!(m.noise_var > 0.0)) throw ConfigError("phase-curve needs a positive noise_var to define the SNR");
        families.push_back({m.w_star_norm_sq / m.noise_var, m.lambda, m.eta});
    }

    CommandOutput out;
    out.table.columns = {"family", "snr", "lambda", "eta", "gamma_u"};
    if (counts) out.table.columns.push_back("n_u");
    for (const char* c : {"regime_tag", "boundary_gamma_l"}) out.table.columns.push_back(c);
    if (counts) out.table.columns.push_back("boundary_n_l");
    for (const char* c : {"root_count", "flag", "root_index"}) out.table.columns.push_back(c);

    for (std::size_t f = 0; f < families.size(); ++f) {
        const Family& fam = families[f];
        for (double x : pc.sweep.expand()) {
            const double gu = pc.by_counts ? p / x : x;
            auto emit = [&](const char* tag, std::optional<double> gl, Cell roots, const char* note, Cell index) {
                std::vector<Cell> row{static_cast<long long>(f), fam.snr, fam.lambda, fam.eta, gu};
                if (counts) row.push_back(p / gu);
                row.push_back(std::string(tag));
                row.push_back(gl ? num(*gl) : Cell{});
                if (counts) row.push_back(gl && *gl > 0.0 ? num(p / *gl) : Cell{});
                row.push_back(roots);
                row.push_back(std::string(note));
                row.push_back(index);
                out.table.rows.push_back(std::move(row));
            };
            size_t count = 0;
            check(rs_endpoint_transition_roots(fam.lambda, fam.eta, fam.snr, gu, pc.gamma_l_max, nullptr, 0, &count));
            std::vector<double> roots(count);
            check(rs_endpoint_transition_roots(fam.lambda, fam.eta, fam.snr, gu, pc.gamma_l_max, roots.data(), count,
                                               &count));
            const auto n_roots = static_cast<long long>(count);
            if (roots.empty()) emit("endpoint_condition", std::nullopt, n_roots, "none", Cell{});
            // Smallest root first; further crossings follow as extra rows.
            for (std::size_t i = 0; i < roots.size(); ++i)
                emit("endpoint_condition", roots[i], n_roots,
                     i > 0 ? "additional_root" : (roots.size() > 1 ? "multiple_roots" : "ok"),
                     static_cast<long long>(i));
            double gs = 0.0;
            check(rs_stability_boundary(fam.lambda, fam.eta, fam.snr, gu, &gs));
            // A boundary this close to zero means alpha = 1 is never a local minimum.
            emit("stability_boundary", gs > 0.0 ? std::optional<double>(gs) : std::nullopt, Cell{},
                 gs > kDegenerateBoundary ? "ok" : "degenerate", Cell{});
        }
    }
    return out;
}

CommandOutput substitution_rate(const ExperimentConfig& cfg) {
    const char* cmd = "substitution-rate";
    const ModelBlock& m = need_model(cfg, cmd);
    const double p = need(m.p, "p", cmd);
    const double n_u = m.n_u.value_or(p / need(m.gamma_u, "gamma_u (or n_u)", cmd));
    const double n_l = m.n_l.value_or(p / need(m.gamma_l, "gamma_l (or n_l)", cmd));
    const SpecPtr test = make_test_spec(cfg);
    const GridPtr grid = make_grid(cfg.alpha_grid);
    rs_model_params tmpl = params_of(m, p / n_u, p / n_l, 1.0);
    double rate = 0.0;
    int one_sided = 0;
    check(rs_substitution_rate(&tmpl, p, n_u, n_l, cfg.substitution_rate.h_u, cfg.substitution_rate.h_l, test.get(),
                               grid.get(), &rate, &one_sided));
    CommandOutput out;
    out.table.columns = {"n_u", "n_l", "substitution_rate", "one_sided"};
    out.table.rows.push_back({n_u, n_l, num(rate), flag(one_sided != 0)});
    return out;
}

CommandOutput validate(const ExperimentConfig& cfg) {
    const char* cmd = "validate";
    const ModelBlock& m = need_model(cfg, cmd);
    const ValidateBlock& v = cfg.validate;
    const double gu = need(m.gamma_u, "gamma_u (or n_u)", cmd);
    const double gl = need(m.gamma_l, "gamma_l (or n_l)", cmd);
    const rs_finite_instance inst = finite_instance(cfg, gu, gl, cmd);
    // The simulation sees the realised sample sizes, so the theory does too.
    const double gu_sim = static_cast<double>(inst.p) / inst.n_u;
    const double gl_sim = static_cast<double>(inst.p) / inst.n_l;
    const double lambda_theory = v.lambda_override.value_or(m.lambda);

    std::vector<double> alphas;
    for (double a : v.alphas.expand())
        if (std::abs(a * gl_sim - 1.0) >= v.exclusion) alphas.push_back(a);
    if (alphas.empty()) throw ConfigError("validate: every alpha falls inside the exclusion band");

    const SpecPtr test = make_test_spec(cfg);
    std::vector<rs_trial_stats> stats(alphas.size());
    check(rs_mc_alpha_curve(&inst, alphas.data(), alphas.size(), v.trials, test.get(), method_of(McMethod::pretrained),
                            cfg.threads, stats.data()));

    CommandOutput out;
    out.table.columns = {"check", "alpha", "theory", "mc_mean", "mc_se", "deviation", "tolerance", "pass"};
    auto record = [&](const char* name, Cell alpha, double theory, double mean, double se, double dev, double tol) {
        const bool pass = std::isfinite(dev) && dev <= tol;
        out.all_passed = out.all_passed && pass;
        out.table.rows.push_back({std::string(name), alpha, num(theory), num(mean), num(se), num(dev), num(tol),
                                  flag(pass)});
    };
    const double sqrt_n = std::sqrt(static_cast<double>(v.trials));
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        rs_model_params p{gu_sim, gl_sim, alphas[i], lambda_theory, m.eta, m.w_star_norm_sq, m.noise_var};
        rs_risk_breakdown r{};
        check(rs_generalisation_error(&p, test.get(), &r));
        const auto& s = stats[i];
        const double se_gen = s.e_gen_sd / sqrt_n, se_train = s.e_train_sd / sqrt_n;
        record("e_gen", alphas[i], r.e_gen, s.e_gen_mean, se_gen, std::abs(s.e_gen_mean - r.e_gen),
               std::max({v.rel_tol * std::abs(r.e_gen), v.se_tol * se_gen, v.interpolation_tol}));
        record("e_train", alphas[i], r.e_train, s.e_train_mean, se_train, std::abs(s.e_train_mean - r.e_train),
               std::max({v.rel_tol * std::abs(r.e_train), v.se_tol * se_train, v.interpolation_tol}));
        const double parts = r.missing_signal + r.leaked_signal + r.variance;
        const double scale = std::max(1.0, std::abs(r.e_gen));
        record("additivity", alphas[i], r.e_est, std::nan(""), std::nan(""),
               std::max(std::abs(r.e_est - parts),
                        std::abs(r.e_gen - (r.e_est + r.test_spike_bias + r.irreducible))),
               1e-12 * scale);
    }
    double overlap = 0.0;
    check(rs_bbp_overlap(lambda_theory, gu_sim, &overlap));
    const auto& s0 = stats.front();
    record("spike_overlap", Cell{}, overlap, s0.spike_overlap_sq_mean, s0.spike_overlap_sq_sd / sqrt_n,
           std::abs(s0.spike_overlap_sq_mean - overlap), v.overlap_tol);
    return out;
}

void append_double(std::string& s, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    s += buf;
}

}  // namespace

std::string render_csv(const Table& t) {
    std::string s;
    for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
    s += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) s += ',';
            const Cell& c = row[i];
            if (const auto* d = std::get_if<double>(&c)) append_double(s, *d);
            else if (const auto* n = std::get_if<long long>(&c)) s += std::to_string(*n);
            else if (const auto* str = std::get_if<std::string>(&c)) s += *str;
        }
        s += '\n';
    }
    return s;
}

std::string render_json(const Table& t, const std::string& command) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["columns"] = t.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        auto obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            const Cell& c = row[i];
            if (const auto* d = std::get_if<double>(&c)) obj[t.columns[i]] = *d;
            else if (const auto* n = std::get_if<long long>(&c)) obj[t.columns[i]] = *n;
            else if (const auto* str = std::get_if<std::string>(&c)) obj[t.columns[i]] = *str;
            else obj[t.columns[i]] = nullptr;
        }
        rows.push_back(std::move(obj));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"error-curve", "heatmap", "phase-curve",
                                                "optimal-alpha", "validate", "substitution-rate"};
    return names;
}

CommandOutput run_command(const std::string& name, const ExperimentConfig& cfg) {
    using Fn = CommandOutput (*)(const ExperimentConfig&);
    static const std::map<std::string, Fn> table{{"error-curve", error_curve},
                                                 {"heatmap", heatmap},
                                                 {"phase-curve", phase_curve},
                                                 {"optimal-alpha", optimal_alpha},
                                                 {"validate", validate},
                                                 {"substitution-rate", substitution_rate}};
    const auto it = table.find(name);
    if (it == table.end()) throw ConfigError("unknown command '" + name + "'");
    return it->second(cfg);
}

}  // namespace reprsize::cli
