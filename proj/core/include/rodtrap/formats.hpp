#pragma once

// On-disk dataset formats.
//
// Binary files (time series, time tags): u64 little-endian header length,
// a UTF-8 JSON header of that length, then the little-endian payload:
//   time series: f64 samples
//   time tags:   packed records of (u8 channel, f64 time in seconds)
// Images are CSV matrices (row 0 at the top) with a JSON sidecar carrying
// pixel pitch, centre, channel and the mirror's bore/rim radii.

#include <filesystem>
#include <string>
#include <vector>

#include "rodtrap/emitter.hpp"
#include "rodtrap/langevin.hpp"
#include "rodtrap/optics.hpp"

namespace rodtrap::formats {

namespace fs = std::filesystem;

/// `extra_header` is a JSON object whose members are merged into the header.
void write_time_series(const fs::path& path, const langevin::TimeSeries& ts, const std::string& extra_header = "{}");
langevin::TimeSeries read_time_series(const fs::path& path);

void write_time_tags(const fs::path& path, const emitter::TimeTagStream& s, const std::string& extra_header = "{}");
emitter::TimeTagStream read_time_tags(const fs::path& path);
void write_time_tags_csv(const fs::path& path, const emitter::TimeTagStream& s);

/// Returns the header object of a binary file as JSON text.
std::string read_header(const fs::path& path);

fs::path sidecar_path(const fs::path& image_csv);
void write_image(const fs::path& csv_path, const optics::ApertureImage& img, const optics::MirrorGeometry& geom);
optics::ApertureImage read_image(const fs::path& csv_path);

void write_profile_csv(const fs::path& path, const optics::RadialProfile& p);

/// Column-oriented CSV with a header row; all columns must have equal length.
void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

/// Shortest round-trip decimal text for a double.
std::string format_double(double v);

}  // namespace rodtrap::formats
