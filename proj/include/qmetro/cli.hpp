#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace qmetro {

/// Effective per-run settings assembled from CLI flags; flag values
/// override the corresponding config keys.
struct CliContext {
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
    std::optional<int> dim;
    int threads = 1;
};

// Each command reads its JSON config (unknown keys are rejected by name),
// writes its outputs plus a config echo into ctx.out, and is deterministic
// given config + seed.
void cmd_qfi(const std::string& config_text, const CliContext& ctx);
void cmd_optimize(const std::string& config_text, const CliContext& ctx);
void cmd_cfi(const std::string& config_text, const CliContext& ctx);
void cmd_estimate(const std::string& config_text, const CliContext& ctx);
void cmd_entropy(const std::string& config_text, const CliContext& ctx);

/// Full CLI entry point. Exit codes: 0 success, 1 validation error,
/// 2 numerical failure; errors emit a one-line JSON record on stderr.
int run_cli(int argc, char** argv);

}  // namespace qmetro
