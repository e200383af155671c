#pragma once

// Run manifests: per-artifact SHA-256 checksums written as the final,
// atomic step of a run. A directory without a valid manifest is incomplete.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rodtrap::manifest {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename.
void atomic_write(const std::filesystem::path& path, std::string_view content);

struct ArtifactEntry {
  std::string name;  // relative to the run directory
  std::string sha256;
  std::uint64_t bytes = 0;
};

struct RunManifest {
  std::string config_hash;
  std::string version;
  std::vector<ArtifactEntry> artifacts;
  std::string created_utc;
  double wall_seconds = 0.0;

  [[nodiscard]] const ArtifactEntry* find(std::string_view name) const;
};

inline constexpr const char* kManifestName = "manifest.json";

/// Checksums the named files in `dir` and writes manifest.json last.
RunManifest write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& files,
                           const std::string& config_hash, double wall_seconds);

/// Parses manifest.json and verifies every listed checksum. Throws
/// MissingArtifact naming the manifest or the offending file.
RunManifest verify_manifest(const std::filesystem::path& dir);

std::string toolkit_version();

}  // namespace rodtrap::manifest
