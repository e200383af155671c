#pragma once

// End-to-end pipelines behind the command-line subcommands.

#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rodtrap/config.hpp"
#include "rodtrap/manifest.hpp"

namespace rodtrap::commands {

namespace fs = std::filesystem;

enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_invalid_config = 2,
  exit_io = 3,
  exit_missing_artifact = 4,
};

int exit_code_for(const std::exception& e);

inline constexpr const char* kOutRootEnv = "RODTRAP_OUT_ROOT";

/// $RODTRAP_OUT_ROOT when set, otherwise `fallback`.
fs::path default_output_root(const fs::path& fallback = "runs");

struct SimulateSummary {
  fs::path dir;
  manifest::RunManifest manifest;
};

/// Writes tags.bin, detector.ts, the three aperture images with sidecars,
/// config.yaml and truth.json, then manifest.json. An existing manifest in
/// `dir` is removed first so a failed run never leaves one behind.
SimulateSummary simulate(const config::ExperimentConfig& cfg, const fs::path& dir);

/// Verifies the dataset in `dir` and writes results.json plus CSV tables to
/// `out` (defaults to `dir`). `max_lag` overrides the dataset's g² side-peak
/// range. Returns the results.json text.
std::string analyze(const fs::path& dir, const fs::path& out = {}, std::optional<int> max_lag = std::nullopt);

const std::vector<std::string>& figure_ids();

/// Runs a synthetic campaign and writes <figure>.csv and <figure>.json into
/// `out_dir`. Returns the JSON summary text.
std::string reproduce(const std::string& figure, const fs::path& out_dir, const config::ExperimentConfig& base,
                      unsigned threads = 1);

}  // namespace rodtrap::commands
