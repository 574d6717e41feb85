#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace cfx::cli {

/// Stable process exit codes.
enum ExitCode : int { kPass = 0, kRefuted = 1, kInputError = 2, kDiverged = 3 };

/// Command-line flags; each one overrides the matching config key.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> max_iter;
};

/**
 * Each command validates `config` (unknown keys are rejected), resolves
 * relative paths against `base_dir`, writes its artifacts atomically into the
 * output directory, and returns an ExitCode. Input problems raise cfx::Error.
 */
int cmd_check(const nlohmann::json& config, const Overrides& flags,
              const std::filesystem::path& base_dir, std::ostream& log);
int cmd_solve(const nlohmann::json& config, const Overrides& flags,
              const std::filesystem::path& base_dir, std::ostream& log);
int cmd_compare(const nlohmann::json& config, const Overrides& flags,
                const std::filesystem::path& base_dir, std::ostream& log);

/// Full front-end: parses argv, loads the config, maps errors to exit codes.
int run(int argc, char** argv, std::ostream& log, std::ostream& err);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace cfx::cli
