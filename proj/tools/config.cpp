#include "config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace reprsize::cli {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) fail(where, "unknown key '" + key + "'");
    }
}

double get_double(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(where, "expected a finite number");
    return v;
}

int get_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    const auto v = j.get<long long>();
    if (v < -1'000'000'000LL || v > 1'000'000'000LL) fail(where, "integer out of range");
    return static_cast<int>(v);
}

bool get_bool(const json& j, const std::string& where) {
    if (!j.is_boolean()) fail(where, "expected true or false");
    return j.get<bool>();
}

std::string get_string(const json& j, const std::string& where) {
    if (!j.is_string()) fail(where, "expected a string");
    return j.get<std::string>();
}

std::vector<double> get_doubles(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(get_double(j[i], where + "[" + std::to_string(i) + "]"));
    return v;
}

template <class F>
void optional_field(const json& j, const char* key, const std::string& where, F&& f) {
    if (j.contains(key)) f(j.at(key), where + "." + key);
}

Sweep parse_sweep(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, where, {"values", "lo", "hi", "count", "spacing"});
    Sweep s;
    if (j.contains("values")) {
        if (j.contains("lo") || j.contains("hi") || j.contains("count") || j.contains("spacing"))
            fail(where, "give either 'values' or 'lo'/'hi'/'count'");
        s.values = get_doubles(j.at("values"), where + ".values");
        return s;
    }
    for (const char* k : {"lo", "hi", "count"})
        if (!j.contains(k)) fail(where, std::string("missing '") + k + "'");
    s.lo = get_double(j.at("lo"), where + ".lo");
    s.hi = get_double(j.at("hi"), where + ".hi");
    s.count = get_int(j.at("count"), where + ".count");
    optional_field(j, "spacing", where, [&](const json& v, const std::string& w) {
        const auto name = get_string(v, w);
        if (name == "linear") s.spacing = Spacing::linear;
        else if (name == "log") s.spacing = Spacing::log;
        else fail(w, "expected 'linear' or 'log'");
    });
    if (s.count < 1) fail(where + ".count", "must be at least 1");
    if (s.hi < s.lo) fail(where, "hi must not be below lo");
    if (s.spacing == Spacing::log && !(s.lo > 0.0)) fail(where, "log spacing needs lo > 0");
    return s;
}

json dump_sweep(const Sweep& s) {
    json j = json::object();
    if (!s.values.empty()) {
        j["values"] = s.values;
        return j;
    }
    j["lo"] = s.lo;
    j["hi"] = s.hi;
    j["count"] = s.count;
    j["spacing"] = s.spacing == Spacing::log ? "log" : "linear";
    return j;
}

void check_sweep_range(const Sweep& s, double lo, double hi, const std::string& where) {
    for (double v : s.expand())
        if (v < lo || v > hi) fail(where, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                                              std::to_string(hi) + "]");
}

LinearRange parse_range(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, where, {"lo", "hi", "count"});
    for (const char* k : {"lo", "hi", "count"})
        if (!j.contains(k)) fail(where, std::string("missing '") + k + "'");
    LinearRange r{get_double(j.at("lo"), where + ".lo"), get_double(j.at("hi"), where + ".hi"),
                  get_int(j.at("count"), where + ".count")};
    if (r.count < 1) fail(where + ".count", "must be at least 1");
    if (!(r.lo > 0.0) || r.hi < r.lo) fail(where, "need 0 < lo <= hi");
    return r;
}

json dump_range(const LinearRange& r) { return json{{"lo", r.lo}, {"hi", r.hi}, {"count", r.count}}; }

ModelBlock parse_model(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, where,
                   {"n_u", "n_l", "p", "gamma_u", "gamma_l", "lambda", "eta", "snr", "w_star_norm_sq", "noise_var"});
    ModelBlock m;
    const bool counts = j.contains("n_u") || j.contains("n_l");
    const bool ratios = j.contains("gamma_u") || j.contains("gamma_l");
    if (counts && ratios) fail(where, "give sample sizes either as n_u/n_l (with p) or as gamma_u/gamma_l, not both");
    optional_field(j, "p", where, [&](const json& v, const std::string& w) {
        m.p = get_double(v, w);
        if (!(*m.p >= 1.0)) fail(w, "must be at least 1");
    });
    auto positive = [&](const char* key, std::optional<double>& dst) {
        optional_field(j, key, where, [&](const json& v, const std::string& w) {
            dst = get_double(v, w);
            if (!(*dst > 0.0)) fail(w, "must be positive");
        });
    };
    positive("n_u", m.n_u);
    positive("n_l", m.n_l);
    positive("gamma_u", m.gamma_u);
    positive("gamma_l", m.gamma_l);
    if (counts) {
        if (!m.p) fail(where, "n_u/n_l need p");
        if (m.n_u) m.gamma_u = *m.p / *m.n_u;
        if (m.n_l) m.gamma_l = *m.p / *m.n_l;
    }
    for (const char* k : {"lambda", "eta"})
        if (!j.contains(k)) fail(where, std::string("missing '") + k + "'");
    m.lambda = get_double(j.at("lambda"), where + ".lambda");
    if (!(m.lambda > 1.0)) fail(where + ".lambda", "must exceed 1");
    m.eta = get_double(j.at("eta"), where + ".eta");
    if (!(m.eta >= 0.0 && m.eta <= 1.0)) fail(where + ".eta", "must lie in [0, 1]");
    optional_field(j, "noise_var", where, [&](const json& v, const std::string& w) {
        m.noise_var = get_double(v, w);
        if (!(m.noise_var >= 0.0)) fail(w, "must be non-negative");
    });
    if (j.contains("snr") == j.contains("w_star_norm_sq")) fail(where, "give exactly one of 'snr' or 'w_star_norm_sq'");
    if (j.contains("snr")) {
        const double snr = get_double(j.at("snr"), where + ".snr");
        if (!(snr >= 0.0)) fail(where + ".snr", "must be non-negative");
        if (!(m.noise_var > 0.0)) fail(where, "'snr' needs a positive noise_var");
        m.w_star_norm_sq = snr * m.noise_var;
    } else {
        m.w_star_norm_sq = get_double(j.at("w_star_norm_sq"), where + ".w_star_norm_sq");
        if (!(m.w_star_norm_sq >= 0.0)) fail(where + ".w_star_norm_sq", "must be non-negative");
    }
    return m;
}

json dump_model(const ModelBlock& m) {
    json j = json::object();
    if (m.uses_counts()) {
        if (m.n_u) j["n_u"] = *m.n_u;
        if (m.n_l) j["n_l"] = *m.n_l;
    } else {
        if (m.gamma_u) j["gamma_u"] = *m.gamma_u;
        if (m.gamma_l) j["gamma_l"] = *m.gamma_l;
    }
    if (m.p) j["p"] = *m.p;
    j["lambda"] = m.lambda;
    j["eta"] = m.eta;
    j["w_star_norm_sq"] = m.w_star_norm_sq;
    j["noise_var"] = m.noise_var;
    return j;
}

std::vector<SpikeBlock> parse_spikes(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array");
    std::vector<SpikeBlock> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string w = where + "[" + std::to_string(i) + "]";
        require_object(j[i], w);
        reject_unknown(j[i], w, {"nu", "rho_w_new", "rho_v_new"});
        for (const char* k : {"nu", "rho_w_new", "rho_v_new"})
            if (!j[i].contains(k)) fail(w, std::string("missing '") + k + "'");
        SpikeBlock s{get_double(j[i].at("nu"), w + ".nu"), get_double(j[i].at("rho_w_new"), w + ".rho_w_new"),
                     get_double(j[i].at("rho_v_new"), w + ".rho_v_new")};
        if (!(s.nu > 1.0)) fail(w + ".nu", "must exceed 1");
        if (std::abs(s.rho_w_new) > 1.0 || std::abs(s.rho_v_new) > 1.0) fail(w, "overlaps must lie in [-1, 1]");
        out.push_back(s);
    }
    return out;
}

void check_spikes_against_model(const std::vector<SpikeBlock>& spikes, const ModelBlock& m) {
    // The new direction must be a unit vector compatible with the overlap between w* and v.
    const double a = std::sqrt(m.eta);
    for (std::size_t i = 0; i < spikes.size(); ++i) {
        const double r = spikes[i].rho_w_new, q = spikes[i].rho_v_new;
        if (1.0 + 2.0 * a * q * r - m.eta - r * r - q * q < -1e-12)
            fail("test_spikes[" + std::to_string(i) + "]", "overlaps are inconsistent with the signal alignment eta");
    }
}

AlphaGridBlock parse_alpha_grid(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, where, {"values", "count", "lo", "guard_band"});
    AlphaGridBlock g;
    if (j.contains("values") && (j.contains("count") || j.contains("lo")))
        fail(where, "give either 'values' or 'count'/'lo'");
    optional_field(j, "values", where, [&](const json& v, const std::string& w) {
        g.values = get_doubles(v, w);
        if (g.values.front() != 0.0 || g.values.back() != 1.0) fail(w, "must start at 0 and end at 1");
        for (std::size_t i = 1; i < g.values.size(); ++i)
            if (!(g.values[i] > g.values[i - 1])) fail(w, "must be strictly increasing");
    });
    optional_field(j, "count", where, [&](const json& v, const std::string& w) { g.count = get_int(v, w); });
    optional_field(j, "lo", where, [&](const json& v, const std::string& w) { g.lo = get_double(v, w); });
    optional_field(j, "guard_band", where, [&](const json& v, const std::string& w) { g.guard_band = get_double(v, w); });
    if (g.values.empty()) {
        if (g.count < 1) fail(where + ".count", "must be at least 1");
        if (!(g.lo > 0.0 && g.lo <= 1.0)) fail(where + ".lo", "must lie in (0, 1]");
    }
    if (!(g.guard_band >= 0.0)) fail(where + ".guard_band", "must be non-negative");
    return g;
}

json dump_alpha_grid(const AlphaGridBlock& g) {
    json j = json::object();
    if (!g.values.empty()) {
        j["values"] = g.values;
    } else {
        j["count"] = g.count;
        j["lo"] = g.lo;
    }
    j["guard_band"] = g.guard_band;
    return j;
}

HeatmapBlock parse_heatmap(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, where, {"n_u", "n_l", "substitution_rate", "train_optimal_alpha"});
    for (const char* k : {"n_u", "n_l"})
        if (!j.contains(k)) fail(where, std::string("missing '") + k + "'");
    HeatmapBlock h;
    h.n_u = parse_range(j.at("n_u"), where + ".n_u");
    h.n_l = parse_range(j.at("n_l"), where + ".n_l");
    optional_field(j, "substitution_rate", where,
                   [&](const json& v, const std::string& w) { h.substitution_rate = get_bool(v, w); });
    optional_field(j, "train_optimal_alpha", where,
                   [&](const json& v, const std::string& w) { h.train_optimal_alpha = get_bool(v, w); });
    return h;
}

PhaseCurveBlock parse_phase_curve(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, where, {"gamma_u", "n_u", "families", "gamma_l_max"});
    PhaseCurveBlock pc;
    if (j.contains("gamma_u") == j.contains("n_u")) fail(where, "give exactly one of 'gamma_u' or 'n_u'");
    pc.by_counts = j.contains("n_u");
    const char* key = pc.by_counts ? "n_u" : "gamma_u";
    pc.sweep = parse_sweep(j.at(key), where + "." + key);
    for (double v : pc.sweep.expand())
        if (pc.by_counts ? !(v > 0.0) : !(v >= 0.0)) fail(where + "." + key, "values out of range");
    optional_field(j, "families", where, [&](const json& v, const std::string& w) {
        if (!v.is_array() || v.empty()) fail(w, "expected a non-empty array");
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string wi = w + "[" + std::to_string(i) + "]";
            require_object(v[i], wi);
            reject_unknown(v[i], wi, {"snr", "lambda", "eta"});
            for (const char* k : {"snr", "lambda", "eta"})
                if (!v[i].contains(k)) fail(wi, std::string("missing '") + k + "'");
            Family f{get_double(v[i].at("snr"), wi + ".snr"), get_double(v[i].at("lambda"), wi + ".lambda"),
                     get_double(v[i].at("eta"), wi + ".eta")};
            if (!(f.snr > 0.0)) fail(wi + ".snr", "must be positive");
            if (!(f.lambda > 1.0)) fail(wi + ".lambda", "must exceed 1");
            if (!(f.eta >= 0.0 && f.eta <= 1.0)) fail(wi + ".eta", "must lie in [0, 1]");
            pc.families.push_back(f);
        }
    });
    optional_field(j, "gamma_l_max", where, [&](const json& v, const std::string& w) {
        pc.gamma_l_max = get_double(v, w);
        if (!(pc.gamma_l_max > 1.0)) fail(w, "must exceed 1");
    });
    return pc;
}

json dump_phase_curve(const PhaseCurveBlock& pc) {
    json j = json::object();
    j[pc.by_counts ? "n_u" : "gamma_u"] = dump_sweep(pc.sweep);
    if (!pc.families.empty()) {
        json fams = json::array();
        for (const auto& f : pc.families) fams.push_back({{"snr", f.snr}, {"lambda", f.lambda}, {"eta", f.eta}});
        j["families"] = fams;
    }
    j["gamma_l_max"] = pc.gamma_l_max;
    return j;
}

MonteCarloBlock parse_monte_carlo(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, where, {"enabled", "trials", "method"});
    MonteCarloBlock mc;
    optional_field(j, "enabled", where, [&](const json& v, const std::string& w) { mc.enabled = get_bool(v, w); });
    optional_field(j, "trials", where, [&](const json& v, const std::string& w) { mc.trials = get_int(v, w); });
    optional_field(j, "method", where, [&](const json& v, const std::string& w) {
        const auto name = get_string(v, w);
        if (name == "pretrained") mc.method = McMethod::pretrained;
        else if (name == "pcr") mc.method = McMethod::pcr;
        else if (name == "ols") mc.method = McMethod::ols;
        else fail(w, "expected 'pretrained', 'pcr' or 'ols'");
    });
    if (mc.trials < 1) fail(where + ".trials", "must be at least 1");
    return mc;
}

const char* method_name(McMethod m) {
    switch (m) {
        case McMethod::pcr: return "pcr";
        case McMethod::ols: return "ols";
        default: return "pretrained";
    }
}

ValidateBlock parse_validate(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, where, {"trials", "alphas", "exclusion", "rel_tol", "se_tol", "overlap_tol",
                              "interpolation_tol", "lambda_override"});
    ValidateBlock v;
    optional_field(j, "trials", where, [&](const json& x, const std::string& w) { v.trials = get_int(x, w); });
    optional_field(j, "alphas", where, [&](const json& x, const std::string& w) {
        v.alphas = parse_sweep(x, w);
        check_sweep_range(v.alphas, 0.0, 1.0, w);
    });
    auto nonneg = [&](const char* key, double& dst) {
        optional_field(j, key, where, [&](const json& x, const std::string& w) {
            dst = get_double(x, w);
            if (!(dst >= 0.0)) fail(w, "must be non-negative");
        });
    };
    nonneg("exclusion", v.exclusion);
    nonneg("rel_tol", v.rel_tol);
    nonneg("se_tol", v.se_tol);
    nonneg("overlap_tol", v.overlap_tol);
    nonneg("interpolation_tol", v.interpolation_tol);
    optional_field(j, "lambda_override", where, [&](const json& x, const std::string& w) {
        if (x.is_null()) return;
        v.lambda_override = get_double(x, w);
        if (!(*v.lambda_override > 1.0)) fail(w, "must exceed 1");
    });
    if (v.trials < 2) fail(where + ".trials", "must be at least 2");
    return v;
}

json dump_validate(const ValidateBlock& v) {
    json j = json::object();
    j["trials"] = v.trials;
    j["alphas"] = dump_sweep(v.alphas);
    j["exclusion"] = v.exclusion;
    j["rel_tol"] = v.rel_tol;
    j["se_tol"] = v.se_tol;
    j["overlap_tol"] = v.overlap_tol;
    j["interpolation_tol"] = v.interpolation_tol;
    if (v.lambda_override) j["lambda_override"] = *v.lambda_override;
    return j;
}

}  // namespace

std::vector<double> Sweep::expand() const {
    if (!values.empty()) return values;
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        v[i] = spacing == Spacing::log ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                                       : lo + t * (hi - lo);
    }
    if (count > 1) v.back() = hi;
    return v;
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    const std::string root = "config";
    require_object(j, root);
    reject_unknown(j, root,
                   {"version", "model", "test_spikes", "alpha_grid", "alphas", "heatmap", "phase_curve",
                    "substitution_rate", "monte_carlo", "validate", "seed", "threads", "output"});
    if (!j.contains("version")) fail(root, "missing 'version'");
    ExperimentConfig cfg;
    cfg.version = get_int(j.at("version"), "version");
    if (cfg.version != kConfigVersion)
        fail("version", "unsupported schema version " + std::to_string(cfg.version));

    optional_field(j, "model", root, [&](const json& v, const std::string&) { cfg.model = parse_model(v, "model"); });
    optional_field(j, "test_spikes", root,
                   [&](const json& v, const std::string&) { cfg.test_spikes = parse_spikes(v, "test_spikes"); });
    optional_field(j, "alpha_grid", root,
                   [&](const json& v, const std::string&) { cfg.alpha_grid = parse_alpha_grid(v, "alpha_grid"); });
    optional_field(j, "alphas", root, [&](const json& v, const std::string&) {
        cfg.alphas = parse_sweep(v, "alphas");
        check_sweep_range(*cfg.alphas, 0.0, 1.0, "alphas");
    });
    optional_field(j, "heatmap", root,
                   [&](const json& v, const std::string&) { cfg.heatmap = parse_heatmap(v, "heatmap"); });
    optional_field(j, "phase_curve", root,
                   [&](const json& v, const std::string&) { cfg.phase_curve = parse_phase_curve(v, "phase_curve"); });
    optional_field(j, "substitution_rate", root, [&](const json& v, const std::string& w) {
        require_object(v, w);
        reject_unknown(v, w, {"h_u", "h_l"});
        optional_field(v, "h_u", w, [&](const json& x, const std::string& wx) { cfg.substitution_rate.h_u = get_double(x, wx); });
        optional_field(v, "h_l", w, [&](const json& x, const std::string& wx) { cfg.substitution_rate.h_l = get_double(x, wx); });
        if (!(cfg.substitution_rate.h_u > 0.0) || !(cfg.substitution_rate.h_l > 0.0)) fail(w, "steps must be positive");
    });
    optional_field(j, "monte_carlo", root,
                   [&](const json& v, const std::string&) { cfg.monte_carlo = parse_monte_carlo(v, "monte_carlo"); });
    optional_field(j, "validate", root,
                   [&](const json& v, const std::string&) { cfg.validate = parse_validate(v, "validate"); });
    optional_field(j, "seed", root, [&](const json& v, const std::string& w) {
        if (!v.is_number_unsigned()) fail(w, "expected a non-negative integer");
        cfg.seed = v.get<std::uint64_t>();
    });
    optional_field(j, "threads", root, [&](const json& v, const std::string& w) {
        cfg.threads = get_int(v, w);
        if (cfg.threads < 0) fail(w, "must be non-negative (0 = all cores)");
    });
    optional_field(j, "output", root, [&](const json& v, const std::string& w) {
        require_object(v, w);
        reject_unknown(v, w, {"path", "format"});
        optional_field(v, "path", w, [&](const json& x, const std::string& wx) { cfg.output_path = get_string(x, wx); });
        optional_field(v, "format", w, [&](const json& x, const std::string& wx) {
            const auto name = get_string(x, wx);
            if (name == "csv") cfg.format = Format::csv;
            else if (name == "json") cfg.format = Format::json;
            else fail(wx, "expected 'csv' or 'json'");
        });
    });

    if (cfg.model && cfg.test_spikes) check_spikes_against_model(*cfg.test_spikes, *cfg.model);
    if (cfg.test_spikes && !cfg.model) fail("test_spikes", "need a model block");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json j = json::object();
    j["version"] = cfg.version;
    if (cfg.model) j["model"] = dump_model(*cfg.model);
    if (cfg.test_spikes) {
        json arr = json::array();
        for (const auto& s : *cfg.test_spikes)
            arr.push_back({{"nu", s.nu}, {"rho_w_new", s.rho_w_new}, {"rho_v_new", s.rho_v_new}});
        j["test_spikes"] = arr;
    }
    j["alpha_grid"] = dump_alpha_grid(cfg.alpha_grid);
    if (cfg.alphas) j["alphas"] = dump_sweep(*cfg.alphas);
    if (cfg.heatmap)
        j["heatmap"] = {{"n_u", dump_range(cfg.heatmap->n_u)},
                        {"n_l", dump_range(cfg.heatmap->n_l)},
                        {"substitution_rate", cfg.heatmap->substitution_rate},
                        {"train_optimal_alpha", cfg.heatmap->train_optimal_alpha}};
    if (cfg.phase_curve) j["phase_curve"] = dump_phase_curve(*cfg.phase_curve);
    j["substitution_rate"] = {{"h_u", cfg.substitution_rate.h_u}, {"h_l", cfg.substitution_rate.h_l}};
    j["monte_carlo"] = {{"enabled", cfg.monte_carlo.enabled},
                        {"trials", cfg.monte_carlo.trials},
                        {"method", method_name(cfg.monte_carlo.method)}};
    j["validate"] = dump_validate(cfg.validate);
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["output"] = {{"path", cfg.output_path}, {"format", cfg.format == Format::json ? "json" : "csv"}};
    return j.dump(2) + "\n";
}

}  // namespace reprsize::cli
