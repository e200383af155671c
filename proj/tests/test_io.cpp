#include <doctest.h>

#include <fstream>

#include "rodtrap/config.hpp"
#include "rodtrap/error.hpp"
#include "rodtrap/formats.hpp"
#include "rodtrap/manifest.hpp"
#include "support.hpp"

using namespace rodtrap;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

bool has_issue(const ConfigError& e, const std::string& path) {
  for (const auto& i : e.issues())
    if (i.path == path) return true;
  return false;
}

}  // namespace

TEST_CASE("SHA-256 reference digests") {
  CHECK(manifest::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(manifest::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config round trip is the identity") {
  config::ExperimentConfig c;
  c.seed = 99;
  c.output_dir = "out \"quoted\"";
  c.mirror.bore_radius = 0.5e-3;
  c.cluster.sample.n_rods = 7;
  c.cluster.damping_model = trap::ClusterDamping::geometric;
  c.emitter.blink.mode = emitter::BlinkMode::burst;
  c.excitation.power = 1.0 / 3.0 * 1e-6;
  c.simulation.jitter = true;
  c.analysis.max_lag = 12;
  const std::string text = config::to_yaml(c);
  const auto back = config::parse_yaml(text);
  CHECK(back == c);
  CHECK(config::to_yaml(back) == text);
  CHECK(back.excitation.power == c.excitation.power);
  CHECK(back.output_dir == c.output_dir);
  CHECK(config::config_hash(back) == config::config_hash(c));
  CHECK(config::config_hash(c).size() == 64);

  config::ExperimentConfig d = c;
  d.seed = 100;
  CHECK_FALSE(d == c);
  CHECK(config::config_hash(d) != config::config_hash(c));
}

TEST_CASE("defaults and partial documents") {
  const auto empty = config::parse_yaml("");
  CHECK(empty == config::ExperimentConfig{});
  const auto partial = config::parse_yaml("seed: 5\ntrap:\n  power: 0.2\n");
  CHECK(partial.seed == 5);
  CHECK(partial.trap.params.power.value() == 0.2);
  CHECK(partial.mirror.focal_length == 2.1e-3);
  CHECK(partial.simulation.motion_duration == 10e-3);
}

TEST_CASE("unknown keys and bad values are reported by path") {
  try {
    config::parse_yaml("seed: 1\nmirror:\n  focal_lenght: 1e-3\nextra: 3\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(has_issue(e, "mirror.focal_lenght"));
    CHECK(has_issue(e, "extra"));
    CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
  }
  try {
    config::parse_yaml("analysis:\n  max_lag: 0\n  burst_r2: 2\nsimulation:\n  time_step: -1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.issues().size() == 3);
    CHECK(has_issue(e, "analysis.max_lag"));
    CHECK(has_issue(e, "analysis.burst_r2"));
    CHECK(has_issue(e, "simulation.time_step"));
  }
  try {
    config::parse_yaml("seed: banana\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(has_issue(e, "seed"));
  }
  CHECK_THROWS_AS(config::parse_yaml("mirror: [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_yaml("- 1\n- 2\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_yaml("cluster:\n  damping_model: stokes\n"), ConfigError);
  CHECK_THROWS_AS(config::load("does/not/exist.yaml"), IoError);
}

TEST_CASE("time series file round trip") {
  const auto dir = testing::scratch_dir("io_ts");
  langevin::TimeSeries ts;
  ts.sample_interval = 2e-8;
  ts.units = "V";
  ts.seed = 77;
  ts.samples = {0.0, -1.5, 3.25e-9, 1e300, -0.0};
  formats::write_time_series(dir / "a.ts", ts, R"({"note": "x"})");
  const auto back = formats::read_time_series(dir / "a.ts");
  CHECK(back.samples == ts.samples);
  CHECK(back.sample_interval == ts.sample_interval);
  CHECK(back.units == "V");
  CHECK(back.seed == 77);
  const std::string header = formats::read_header(dir / "a.ts");
  CHECK(header.find("rodtrap.timeseries/1") != std::string::npos);
  CHECK(header.find("note") != std::string::npos);

  std::string bytes = testing::slurp(dir / "a.ts");
  bytes.resize(bytes.size() - 3);
  std::ofstream(dir / "a.ts", std::ios::binary) << bytes;
  CHECK_THROWS_AS(formats::read_time_series(dir / "a.ts"), MissingArtifact);
  CHECK_THROWS_AS(formats::read_time_series(dir / "missing.ts"), MissingArtifact);
}

TEST_CASE("time tag file round trip") {
  const auto dir = testing::scratch_dir("io_tags");
  emitter::TimeTagStream s;
  s.duration = 1e-3;
  s.seed = 3;
  s.events = {{0, 0.0}, {1, 1e-6}, {1, 2e-6}, {0, 5.5e-4}};
  formats::write_time_tags(dir / "t.bin", s);
  const auto back = formats::read_time_tags(dir / "t.bin");
  CHECK(back.events == s.events);
  CHECK(back.duration == s.duration);
  CHECK(back.seed == 3);
  CHECK(fs::file_size(dir / "t.bin") > 4 * 9);
  formats::write_time_tags_csv(dir / "t.csv", s);
  CHECK(testing::slurp(dir / "t.csv").rfind("channel,time_s\n", 0) == 0);
}

TEST_CASE("image and sidecar round trip") {
  const auto dir = testing::scratch_dir("io_img");
  const optics::MirrorGeometry g;
  auto img = optics::mix_image(optics::DipoleMix::from_fraction(0.31), g, {33, 5.0});
  img.warnings.push_back("test warning");
  formats::write_image(dir / "img.csv", img, g);
  CHECK(fs::exists(formats::sidecar_path(dir / "img.csv")));
  const auto back = formats::read_image(dir / "img.csv");
  CHECK(back.rows == 33);
  CHECK(back.cols == 33);
  CHECK(back.pitch == img.pitch);
  CHECK(back.center_row == img.center_row);
  CHECK(back.data == img.data);
  CHECK(back.warnings == img.warnings);

  fs::remove(formats::sidecar_path(dir / "img.csv"));
  CHECK_THROWS_AS(formats::read_image(dir / "img.csv"), MissingArtifact);
}

TEST_CASE("CSV helpers") {
  const auto dir = testing::scratch_dir("io_csv");
  formats::write_csv(dir / "c.csv", {"x", "y"}, {{1.0, 2.0}, {0.1, 1e-300}});
  CHECK(testing::slurp(dir / "c.csv") == "x,y\n1,0.1\n2,1e-300\n");
  CHECK_THROWS_AS(formats::write_csv(dir / "d.csv", {"x", "y"}, {{1.0}, {1.0, 2.0}}), InvalidArgument);
  CHECK(formats::format_double(0.1) == "0.1");
  CHECK(formats::format_double(1.0 / 3.0) == "0.3333333333333333");
}

TEST_CASE("manifest detects missing and corrupted artifacts") {
  const auto dir = testing::scratch_dir("io_manifest");
  manifest::atomic_write(dir / "a.txt", "alpha");
  manifest::atomic_write(dir / "b.txt", "beta");
  CHECK_FALSE(fs::exists(dir / "a.txt.tmp"));
  const auto m = manifest::write_manifest(dir, {"a.txt", "b.txt"}, "cafe", 1.5);
  CHECK(m.artifacts.size() == 2);
  CHECK(m.find("a.txt")->sha256 == manifest::sha256_hex("alpha"));
  CHECK(m.find("a.txt")->bytes == 5);
  CHECK(m.find("zzz") == nullptr);
  CHECK(m.version == manifest::toolkit_version());

  const auto v = manifest::verify_manifest(dir);
  CHECK(v.config_hash == "cafe");
  CHECK(v.wall_seconds == 1.5);

  std::ofstream(dir / "b.txt") << "BETA";
  try {
    manifest::verify_manifest(dir);
    FAIL("expected MissingArtifact");
  } catch (const MissingArtifact& e) {
    CHECK(e.file() == "b.txt");
  }
  manifest::atomic_write(dir / "b.txt", "beta");
  fs::remove(dir / "a.txt");
  CHECK_THROWS_AS(manifest::verify_manifest(dir), MissingArtifact);

  manifest::atomic_write(dir / "a.txt", "alpha");
  manifest::atomic_write(dir / manifest::kManifestName, "{ not json");
  try {
    manifest::verify_manifest(dir);
    FAIL("expected MissingArtifact");
  } catch (const MissingArtifact& e) {
    CHECK(e.file() == manifest::kManifestName);
  }
  fs::remove(dir / manifest::kManifestName);
  CHECK_THROWS_AS(manifest::verify_manifest(dir), MissingArtifact);
}
