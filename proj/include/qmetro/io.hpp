#pragma once

#include <filesystem>
#include <string>

namespace qmetro {

/// Fixed 17-significant-digit decimal formatting for every numeric output,
/// so regression diffs on CSV/JSON files are meaningful.
std::string format_g17(double value);

/// Write-temp-then-rename so partially written outputs are never observed.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

/// SplitMix64 step; used to derive independent per-trial RNG streams from a
/// master seed, so results do not depend on how trials are scheduled.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t index);

}  // namespace qmetro
