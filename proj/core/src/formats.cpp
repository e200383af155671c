#include "rodtrap/formats.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rodtrap/error.hpp"
#include "rodtrap/manifest.hpp"

namespace rodtrap::formats {

using nlohmann::json;

namespace {

constexpr const char* kSeriesFormat = "rodtrap.timeseries/1";
constexpr const char* kTagsFormat = "rodtrap.timetags/1";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}
double get_f64(const char* p) { return std::bit_cast<double>(get_u64(p)); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact(path.filename().string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json merged_header(json base, const std::string& extra) {
  json e;
  try {
    e = json::parse(extra);
  } catch (const json::exception&) {
    throw InvalidArgument("extra header is not valid JSON");
  }
  if (!e.is_object()) throw InvalidArgument("extra header must be a JSON object");
  for (auto it = e.begin(); it != e.end(); ++it)
    if (!base.contains(it.key())) base[it.key()] = it.value();
  return base;
}

std::string frame(const json& header, const std::string& payload) {
  const std::string h = header.dump();
  std::string out;
  out.reserve(8 + h.size() + payload.size());
  put_u64(out, h.size());
  out += h;
  out += payload;
  return out;
}

struct Framed {
  json header;
  std::string_view payload;
};

Framed unframe(const std::string& bytes, const fs::path& path, const char* format) {
  const std::string name = path.filename().string();
  if (bytes.size() < 8) throw MissingArtifact(name);
  const std::uint64_t hlen = get_u64(bytes.data());
  if (hlen > bytes.size() - 8) throw MissingArtifact(name);
  Framed f;
  try {
    f.header = json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(hlen));
    if (f.header.at("format").get<std::string>() != format) throw MissingArtifact(name);
  } catch (const json::exception&) {
    throw MissingArtifact(name);
  }
  f.payload = std::string_view(bytes).substr(8 + hlen);
  return f;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_time_series(const fs::path& path, const langevin::TimeSeries& ts, const std::string& extra_header) {
  json h = {{"format", kSeriesFormat},
            {"sample_interval", ts.sample_interval},
            {"units", ts.units},
            {"seed", ts.seed},
            {"count", ts.samples.size()}};
  h = merged_header(std::move(h), extra_header);
  std::string payload;
  payload.reserve(8 * ts.samples.size());
  for (double v : ts.samples) put_f64(payload, v);
  manifest::atomic_write(path, frame(h, payload));
}

langevin::TimeSeries read_time_series(const fs::path& path) {
  const std::string bytes = slurp(path);
  const auto f = unframe(bytes, path, kSeriesFormat);
  langevin::TimeSeries ts;
  std::uint64_t count = 0;
  try {
    ts.sample_interval = f.header.at("sample_interval").get<double>();
    ts.units = f.header.at("units").get<std::string>();
    ts.seed = f.header.at("seed").get<std::uint64_t>();
    count = f.header.at("count").get<std::uint64_t>();
  } catch (const json::exception&) {
    throw MissingArtifact(path.filename().string());
  }
  if (f.payload.size() != 8 * count) throw MissingArtifact(path.filename().string());
  ts.samples.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) ts.samples[i] = get_f64(f.payload.data() + 8 * i);
  return ts;
}

void write_time_tags(const fs::path& path, const emitter::TimeTagStream& s, const std::string& extra_header) {
  json h = {{"format", kTagsFormat},
            {"duration", s.duration},
            {"seed", s.seed},
            {"count", s.events.size()},
            {"record", "u8 channel, f64 time [s]"}};
  h = merged_header(std::move(h), extra_header);
  std::string payload;
  payload.reserve(9 * s.events.size());
  for (const auto& ev : s.events) {
    payload.push_back(static_cast<char>(ev.channel));
    put_f64(payload, ev.time);
  }
  manifest::atomic_write(path, frame(h, payload));
}

emitter::TimeTagStream read_time_tags(const fs::path& path) {
  const std::string bytes = slurp(path);
  const auto f = unframe(bytes, path, kTagsFormat);
  emitter::TimeTagStream s;
  std::uint64_t count = 0;
  try {
    s.duration = f.header.at("duration").get<double>();
    s.seed = f.header.at("seed").get<std::uint64_t>();
    count = f.header.at("count").get<std::uint64_t>();
  } catch (const json::exception&) {
    throw MissingArtifact(path.filename().string());
  }
  if (f.payload.size() != 9 * count) throw MissingArtifact(path.filename().string());
  s.events.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const char* p = f.payload.data() + 9 * i;
    s.events[i].channel = static_cast<std::uint8_t>(p[0]);
    s.events[i].time = get_f64(p + 1);
  }
  return s;
}

void write_time_tags_csv(const fs::path& path, const emitter::TimeTagStream& s) {
  std::string out = "channel,time_s\n";
  for (const auto& ev : s.events) {
    out += std::to_string(ev.channel);
    out += ',';
    out += format_double(ev.time);
    out += '\n';
  }
  manifest::atomic_write(path, out);
}

std::string read_header(const fs::path& path) {
  const std::string bytes = slurp(path);
  if (bytes.size() < 8) throw MissingArtifact(path.filename().string());
  const std::uint64_t hlen = get_u64(bytes.data());
  if (hlen > bytes.size() - 8) throw MissingArtifact(path.filename().string());
  return bytes.substr(8, hlen);
}

fs::path sidecar_path(const fs::path& image_csv) {
  fs::path p = image_csv;
  p.replace_extension(".json");
  return p;
}

void write_image(const fs::path& csv_path, const optics::ApertureImage& img, const optics::MirrorGeometry& geom) {
  std::string out;
  out.reserve(img.data.size() * 12);
  for (std::size_t r = 0; r < img.rows; ++r) {
    for (std::size_t c = 0; c < img.cols; ++c) {
      if (c) out += ',';
      out += format_double(img.at(r, c));
    }
    out += '\n';
  }
  manifest::atomic_write(csv_path, out);
  json side = {{"rows", img.rows},
               {"cols", img.cols},
               {"pitch", img.pitch},
               {"center_row", img.center_row},
               {"center_col", img.center_col},
               {"channel", optics::to_string(img.channel)},
               {"units", "focal lengths"},
               {"bore_R", geom.bore_R()},
               {"rim_R", geom.rim_R()},
               {"warnings", img.warnings}};
  manifest::atomic_write(sidecar_path(csv_path), side.dump(2) + "\n");
}

optics::ApertureImage read_image(const fs::path& csv_path) {
  const fs::path side = sidecar_path(csv_path);
  optics::ApertureImage img;
  try {
    const json j = json::parse(slurp(side));
    img.rows = j.at("rows").get<std::size_t>();
    img.cols = j.at("cols").get<std::size_t>();
    img.pitch = j.at("pitch").get<double>();
    img.center_row = j.at("center_row").get<double>();
    img.center_col = j.at("center_col").get<double>();
    img.channel = optics::channel_from_string(j.at("channel").get<std::string>());
    img.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception&) {
    throw MissingArtifact(side.filename().string());
  } catch (const InvalidArgument&) {
    throw MissingArtifact(side.filename().string());
  }
  const std::string text = slurp(csv_path);
  img.data.reserve(img.rows * img.cols);
  const char* p = text.data();
  const char* end = p + text.size();
  while (p < end) {
    double v = 0.0;
    const auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc()) throw MissingArtifact(csv_path.filename().string());
    img.data.push_back(v);
    p = res.ptr;
    while (p < end && (*p == ',' || *p == '\n' || *p == '\r')) ++p;
  }
  if (img.data.size() != img.rows * img.cols) throw MissingArtifact(csv_path.filename().string());
  return img;
}

void write_profile_csv(const fs::path& path, const optics::RadialProfile& p) {
  std::vector<double> counts(p.counts.begin(), p.counts.end());
  write_csv(path, {"R", "intensity", "variance", "pixels"}, {p.radii, p.intensities, p.variances, counts});
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw InvalidArgument("CSV header and column count differ");
  const std::size_t n = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != n) throw InvalidArgument("CSV columns differ in length");
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += format_double(columns[c][r]);
    }
    out += '\n';
  }
  manifest::atomic_write(path, out);
}

}  // namespace rodtrap::formats
