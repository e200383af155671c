#include "rodtrap/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>

#include <json.hpp>
#include <openssl/evp.h>

#include "rodtrap/error.hpp"
#include "rodtrap_version.hpp"

namespace rodtrap::manifest {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw Error("SHA-256 update failed");
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1) throw Error("SHA-256 final failed");
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact(path.filename().string());
  Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

void atomic_write(const fs::path& path, std::string_view content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

const ArtifactEntry* RunManifest::find(std::string_view name) const {
  for (const auto& a : artifacts)
    if (a.name == name) return &a;
  return nullptr;
}

std::string toolkit_version() { return RODTRAP_VERSION; }

RunManifest write_manifest(const fs::path& dir, const std::vector<std::string>& files, const std::string& config_hash,
                           double wall_seconds) {
  RunManifest m;
  m.config_hash = config_hash;
  m.version = toolkit_version();
  m.created_utc = utc_now();
  m.wall_seconds = wall_seconds;
  json arts = json::array();
  for (const auto& f : files) {
    const fs::path p = dir / f;
    std::error_code ec;
    const auto size = fs::file_size(p, ec);
    if (ec) throw IoError("artifact vanished before checksumming: " + p.string());
    ArtifactEntry e{f, sha256_file(p), static_cast<std::uint64_t>(size)};
    arts.push_back({{"name", e.name}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    m.artifacts.push_back(std::move(e));
  }
  json j = {{"config_hash", m.config_hash},
            {"toolkit_version", m.version},
            {"artifacts", arts},
            {"created_utc", m.created_utc},
            {"wall_seconds", m.wall_seconds}};
  atomic_write(dir / kManifestName, j.dump(2) + "\n");
  return m;
}

RunManifest verify_manifest(const fs::path& dir) {
  std::ifstream in(dir / kManifestName, std::ios::binary);
  if (!in) throw MissingArtifact(kManifestName);
  RunManifest m;
  try {
    const json j = json::parse(in);
    m.config_hash = j.at("config_hash").get<std::string>();
    m.version = j.at("toolkit_version").get<std::string>();
    m.created_utc = j.at("created_utc").get<std::string>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    for (const auto& a : j.at("artifacts"))
      m.artifacts.push_back({a.at("name").get<std::string>(), a.at("sha256").get<std::string>(),
                             a.at("bytes").get<std::uint64_t>()});
  } catch (const json::exception&) {
    throw MissingArtifact(kManifestName);
  }
  for (const auto& a : m.artifacts) {
    const fs::path p = dir / a.name;
    if (!fs::exists(p)) throw MissingArtifact(a.name);
    if (sha256_file(p) != a.sha256) throw MissingArtifact(a.name);
  }
  return m;
}

}  // namespace rodtrap::manifest
