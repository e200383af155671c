#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" RODTRAP_CLI_PATH "\" " + args + " >cli.log 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::vector<std::pair<std::string, std::string>> checksums(const fs::path& dir) {
  const auto m = json::parse(testing::slurp(dir / "manifest.json"));
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& a : m["artifacts"]) out.emplace_back(a["name"], a["sha256"]);
  return out;
}

}  // namespace

TEST_CASE("version and help") {
  CHECK(run("--version") == 0);
  CHECK(testing::slurp("cli.log").find('.') != std::string::npos);
  CHECK(run("--help") == 0);
}

TEST_CASE("invalid configuration exits with 2") {
  const auto dir = testing::scratch_dir("cli_config");
  write(dir / "bad.yaml", "mirror:\n  focal_length: -1\n  colour: red\n");
  CHECK(run("validate-config --config " + q(dir / "bad.yaml")) == 2);
  const std::string log = testing::slurp("cli.log");
  CHECK(log.find("mirror.colour") != std::string::npos);
  CHECK(run("simulate --config " + q(dir / "bad.yaml") + " --out " + q(dir / "x")) == 2);
  CHECK_FALSE(fs::exists(dir / "x" / "manifest.json"));

  write(dir / "good.yaml", "seed: 4\n");
  CHECK(run("validate-config --config " + q(dir / "good.yaml")) == 0);
  CHECK(run("validate-config --dump") == 0);
  CHECK(testing::slurp("cli.log").find("focal_length") != std::string::npos);

  CHECK(run("reproduce --figure fig9 --out " + q(dir / "r")) == 2);
  CHECK(run("reproduce") == 2);
  CHECK(run("simulate --bogus") == 2);
  CHECK(run("") == 2);
}

TEST_CASE("I/O failure exits with 3") {
  const auto dir = testing::scratch_dir("cli_io");
  write(dir / "blocker", "a file, not a directory\n");
  CHECK(run("simulate --out " + q(dir / "blocker" / "run")) == 3);
  CHECK(run("reproduce --figure appB_pmin --out " + q(dir / "blocker" / "rep")) == 3);
}

TEST_CASE("missing artifacts exit with 4") {
  const auto dir = testing::scratch_dir("cli_missing");
  CHECK(run("analyze " + q(dir)) == 4);

  write(dir / "tiny.yaml", "simulation:\n  tag_duration: 0.6\nimage:\n  pixels: 96\n");
  CHECK(run("simulate --config " + q(dir / "tiny.yaml") + " --out " + q(dir / "run")) == 0);
  fs::remove(dir / "run" / "detector.ts");
  CHECK(run("analyze " + q(dir / "run")) == 4);
  CHECK(testing::slurp("cli.log").find("detector.ts") != std::string::npos);
}

TEST_CASE("simulate and analyze end to end with deterministic checksums") {
  const auto dir = testing::scratch_dir("cli_e2e");
  write(dir / "tiny.yaml", "simulation:\n  tag_duration: 0.6\nimage:\n  pixels: 96\n");
  const std::string cfg = " --config " + q(dir / "tiny.yaml");
  CHECK(run("simulate" + cfg + " --seed 9 --out " + q(dir / "a")) == 0);
  CHECK(run("simulate" + cfg + " --seed 9 --out " + q(dir / "b")) == 0);
  CHECK(run("simulate" + cfg + " --seed 10 --out " + q(dir / "c")) == 0);
  CHECK(checksums(dir / "a") == checksums(dir / "b"));
  CHECK(checksums(dir / "a") != checksums(dir / "c"));

  CHECK(run("analyze " + q(dir / "a") + " --max-lag 20") == 0);
  const auto res = json::parse(testing::slurp(dir / "a" / "results.json"));
  CHECK(res["seed"] == 9);
  CHECK(res["g2"]["max_lag"] == 20);

  CHECK(run("simulate" + cfg + " --seed 2", "RODTRAP_OUT_ROOT=" + q(dir / "root")) == 0);
  CHECK(fs::exists(dir / "root" / "sim-2" / "manifest.json"));
  CHECK(run("reproduce --figure appA_efficiency", "RODTRAP_OUT_ROOT=" + q(dir / "root")) == 0);
  const auto eff = json::parse(testing::slurp(dir / "root" / "appA_efficiency" / "appA_efficiency.json"));
  CHECK(std::abs(eff["linear"].get<double>() - 0.94) < 0.005);
}
