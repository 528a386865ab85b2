// Subcommands of the command-line tool. Each turns a validated config into one output table.
#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "config.hpp"
#include "reprsize/reprsize.h"

namespace reprsize::cli {

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitNumeric = 2, kExitValidation = 3 };

// Failure reported by the library.
struct ApiError : std::runtime_error {
    rs_status status;
    ApiError(rs_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

using Cell = std::variant<std::monostate, double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct CommandOutput {
    Table table;
    bool all_passed = true;  // validation checks only
};

std::string render_csv(const Table& t);
std::string render_json(const Table& t, const std::string& command);

const std::vector<std::string>& command_names();
CommandOutput run_command(const std::string& name, const ExperimentConfig& cfg);

}  // namespace reprsize::cli
