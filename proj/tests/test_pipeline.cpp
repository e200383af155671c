#include <doctest.h>

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "rodtrap/campaigns.hpp"
#include "rodtrap/commands.hpp"
#include "rodtrap/error.hpp"
#include "support.hpp"

using namespace rodtrap;
using doctest::Approx;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

config::ExperimentConfig quick_config(std::uint64_t seed) {
  config::ExperimentConfig c;
  c.seed = seed;
  c.simulation.tag_duration = 1.0;
  c.image.grid.pixels = 192;
  return c;
}

json read_json(const fs::path& p) { return json::parse(testing::slurp(p)); }

}  // namespace

TEST_CASE("simulate then analyze recovers the injected parameters") {
  const auto dir = testing::scratch_dir("pipeline_roundtrip");
  const auto cfg = quick_config(3);
  const auto sum = commands::simulate(cfg, dir);
  for (const char* f : {"tags.bin", "detector.ts", "image_total.csv", "image_total.json", "image_vertical.csv",
                        "image_horizontal.csv", "config.yaml", "truth.json", "manifest.json"})
    CHECK_MESSAGE(fs::exists(dir / f), f);
  CHECK(sum.manifest.config_hash == config::config_hash(cfg));
  CHECK(config::load(dir / "config.yaml") == cfg);

  const std::string text = commands::analyze(dir);
  const auto res = json::parse(text);
  const auto truth = read_json(dir / "truth.json");

  const double gamma = res["psd"]["gamma_over_2pi_hz"].get<double>();
  CHECK(gamma == Approx(truth["gamma_over_2pi_hz"].get<double>()).epsilon(0.05));
  // Peak of the damped response: √(f0² − (Γ/2π)²/2).
  const double f0 = truth["f0_hz"].get<double>(), w = truth["gamma_over_2pi_hz"].get<double>();
  CHECK(res["psd"]["f0_hz"].get<double>() == Approx(std::sqrt(f0 * f0 - 0.5 * w * w)).epsilon(0.01));
  CHECK(std::abs(res["image"]["a_pi"].get<double>() - truth["a_pi"].get<double>()) < 0.05);
  // Auger probability 1: every pulse yields at most one photon.
  CHECK(res["g2"]["zero_lag"].get<int>() == 0);
  CHECK(res["g2"]["g2_zero"].get<double>() < res["g2"]["g2_error"].get<double>());
  CHECK(res["blinking"]["classification"] == "grey_state_peak");
  CHECK(res["image"]["symmetry"] == "symmetric");
  for (const char* f : {"results.json", "psd.csv", "g2.csv", "blink_histogram.csv", "blink_trace.csv", "profile.csv"})
    CHECK_MESSAGE(fs::exists(dir / f), f);
}

TEST_CASE("analysis is idempotent and simulation deterministic") {
  const auto a = testing::scratch_dir("pipeline_det_a");
  const auto b = testing::scratch_dir("pipeline_det_b");
  const auto ma = commands::simulate(quick_config(8), a).manifest;
  const auto mb = commands::simulate(quick_config(8), b).manifest;
  REQUIRE(ma.artifacts.size() == mb.artifacts.size());
  for (std::size_t i = 0; i < ma.artifacts.size(); ++i) {
    CHECK(ma.artifacts[i].name == mb.artifacts[i].name);
    CHECK(ma.artifacts[i].sha256 == mb.artifacts[i].sha256);
  }

  commands::analyze(a);
  const std::string first = testing::slurp(a / "results.json");
  commands::analyze(a);
  CHECK(testing::slurp(a / "results.json") == first);

  const auto out = testing::scratch_dir("pipeline_det_out");
  commands::analyze(b, out);
  CHECK(testing::slurp(out / "results.json") == first);
  CHECK_FALSE(fs::exists(b / "results.json"));
}

TEST_CASE("a different seed changes g2 but not the emitter class") {
  const auto a = testing::scratch_dir("pipeline_seed_a");
  const auto b = testing::scratch_dir("pipeline_seed_b");
  auto ca = quick_config(11);
  auto cb = quick_config(12);
  for (auto* c : {&ca, &cb}) c->emitter.auger_probability = emitter::auger_probability_for_size(16);
  commands::simulate(ca, a);
  commands::simulate(cb, b);
  const auto ra = json::parse(commands::analyze(a));
  const auto rb = json::parse(commands::analyze(b));
  const double ga = ra["g2"]["g2_zero"].get<double>(), gb = rb["g2"]["g2_zero"].get<double>();
  CHECK(ga != gb);
  CHECK(std::abs(ga - gb) < 3.0 * std::hypot(ra["g2"]["g2_error"].get<double>(), rb["g2"]["g2_error"].get<double>()));
  CHECK(ra["blinking"]["classification"] == rb["blinking"]["classification"]);
  CHECK(ra["image"]["symmetry"] == rb["image"]["symmetry"]);
}

TEST_CASE("incomplete datasets are refused") {
  const auto dir = testing::scratch_dir("pipeline_corrupt");
  commands::simulate(quick_config(4), dir);

  std::string bytes = testing::slurp(dir / "tags.bin");
  bytes[bytes.size() / 2] ^= 0x5a;
  std::ofstream(dir / "tags.bin", std::ios::binary) << bytes;
  try {
    commands::analyze(dir);
    FAIL("expected MissingArtifact");
  } catch (const MissingArtifact& e) {
    CHECK(e.file() == "tags.bin");
    CHECK(commands::exit_code_for(e) == commands::exit_missing_artifact);
  }

  fs::remove(dir / "manifest.json");
  CHECK_THROWS_AS(commands::analyze(dir), MissingArtifact);
  CHECK_THROWS_AS(commands::analyze(testing::scratch_dir("pipeline_empty")), MissingArtifact);
}

TEST_CASE("a failed simulation leaves no manifest") {
  const auto dir = testing::scratch_dir("pipeline_failed");
  commands::simulate(quick_config(5), dir);
  REQUIRE(fs::exists(dir / "manifest.json"));
  auto bad = quick_config(5);
  bad.simulation.time_step = 50e-9;
  CHECK_THROWS_AS(commands::simulate(bad, dir), ConfigError);
  CHECK_FALSE(fs::exists(dir / "manifest.json"));
}

TEST_CASE("exit code mapping") {
  CHECK(commands::exit_code_for(ConfigError("x", "y")) == 2);
  CHECK(commands::exit_code_for(IoError("x")) == 3);
  CHECK(commands::exit_code_for(fs::filesystem_error("x", std::make_error_code(std::errc::permission_denied))) == 3);
  CHECK(commands::exit_code_for(MissingArtifact("x")) == 4);
  CHECK(commands::exit_code_for(FitError("x")) == 1);
  CHECK(commands::exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("reproduce writes figure data") {
  const auto dir = testing::scratch_dir("pipeline_reproduce");
  const auto s = json::parse(commands::reproduce("appB_pmin", dir, config::ExperimentConfig{}));
  CHECK(s["P_min_mW"].get<double>() == Approx(41.0));
  CHECK(fs::exists(dir / "appB_pmin.csv"));
  CHECK(fs::exists(dir / "appB_pmin.json"));
  CHECK_THROWS_AS(commands::reproduce("fig9", dir, config::ExperimentConfig{}), ConfigError);
  CHECK(commands::figure_ids().size() == 7);
}

TEST_CASE("campaign results do not depend on the thread count") {
  auto base = config::ExperimentConfig{};
  base.simulation.tag_duration = 0.2;
  base.image.grid.pixels = 64;
  const auto one = campaigns::sample_campaign(base, {2, 8, 32}, 1);
  const auto four = campaigns::sample_campaign(base, {2, 8, 32}, 4);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].g2 == four[i].g2);
    CHECK(one[i].asymmetry_score == four[i].asymmetry_score);
  }
  const auto r1 = campaigns::rate_campaign(base, 200000, 1);
  const auto r3 = campaigns::rate_campaign(base, 200000, 3);
  CHECK(r1.detected == r3.detected);
}
