// app.hpp: subcommand dispatch and error reporting for the cqed tool
#pragma once

#include "cqed/config.hpp"
#include "cqed/errors.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cqed::cli {

struct RunOptions {
    std::optional<std::uint64_t> seed;            // overrides every seed in the config
    std::optional<std::filesystem::path> out_dir; // overrides output_dir
    std::filesystem::path input_base{"."};        // relative input paths resolve here
    std::ostream* log{nullptr};                   // progress messages; null when quiet
};

// Folds command-line overrides into the config.
void apply_overrides(RunConfig& config, const RunOptions& options);

// Runs the configured subcommand and returns the files written.
std::vector<std::filesystem::path> dispatch(const RunConfig& config, const RunOptions& options);

int exit_code(ErrorKind kind) noexcept;

// {"error": {"module", "operation", "kind", "message"}}
std::string error_json(const Error& error);

// Full entry point: parses argv, reads the config, dispatches, maps errors.
int run_main(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace cqed::cli
