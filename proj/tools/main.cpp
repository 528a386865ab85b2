#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"

using namespace reprsize::cli;

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
    std::optional<std::string> format;
};

int execute(const std::string& command, const Overrides& o) {
    ExperimentConfig cfg;
    CommandOutput result;
    try {
        cfg = load_config(o.config_path);
        if (o.seed) cfg.seed = *o.seed;
        if (o.threads) cfg.threads = *o.threads;
        if (o.out) cfg.output_path = *o.out;
        if (o.format) cfg.format = *o.format == "json" ? Format::json : Format::csv;
        result = run_command(command, cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ApiError& e) {
        std::cerr << (e.status == RS_ERR_DOMAIN ? "config error: " : "numeric error: ") << e.what() << "\n";
        return e.status == RS_ERR_DOMAIN ? kExitConfig : kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }

    const std::string text =
        cfg.format == Format::json ? render_json(result.table, command) : render_csv(result.table);
    if (cfg.output_path.empty()) {
        std::cout << text << std::flush;
    } else {
        std::ofstream f(cfg.output_path, std::ios::binary | std::ios::trunc);
        f << text;
        if (!f) {
            std::cerr << "config error: cannot write '" << cfg.output_path << "'\n";
            return kExitConfig;
        }
    }
    if (!result.all_passed) {
        std::cerr << "validation failed\n";
        return kExitValidation;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asymptotic and simulated risk of PCA-pretrained linear probes"};
    app.require_subcommand(1);
    Overrides o;
    std::string chosen;
    for (const auto& name : command_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", o.config_path, "experiment config (JSON)")->required();
        sub->add_option("--seed", o.seed, "master seed for simulations");
        sub->add_option("--threads", o.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
        sub->add_option("--out", o.out, "output file (default: standard output)");
        sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
        sub->callback([&chosen, name] { chosen = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    return execute(chosen, o);
}
