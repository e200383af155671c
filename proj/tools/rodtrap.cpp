#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "rodtrap/commands.hpp"
#include "rodtrap/config.hpp"
#include "rodtrap/error.hpp"

namespace fs = std::filesystem;
using namespace rodtrap;

namespace {

config::ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
  config::ExperimentConfig cfg = path.empty() ? config::ExperimentConfig{} : config::load(path);
  if (seed) cfg.seed = *seed;
  cfg.validate();
  return cfg;
}

fs::path resolve_out(const std::string& flag, const config::ExperimentConfig& cfg, const std::string& leaf) {
  if (!flag.empty()) return flag;
  return commands::default_output_root(cfg.output_dir) / leaf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and analyse rod-shaped emitters trapped in a parabolic mirror"};
  app.require_subcommand(1);
  app.set_version_flag("--version", manifest::toolkit_version());

  std::string config_path, out, figure, dataset;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_lag;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  bool dump = false;

  auto* sim = app.add_subcommand("simulate", "Simulate one dataset (time tags, detector signal, images)");
  sim->add_option("--config", config_path, "YAML configuration file")->check(CLI::ExistingFile);
  sim->add_option("--seed", seed, "Override the root seed");
  sim->add_option("--out", out, "Dataset directory (default: $RODTRAP_OUT_ROOT or output_dir, /sim-<seed>)");
  sim->add_option("--threads", threads, "Worker threads");

  auto* ana = app.add_subcommand("analyze", "Analyse a simulated dataset");
  ana->add_option("dataset", dataset, "Dataset directory")->required();
  ana->add_option("--out", out, "Directory for results.json and CSV tables (default: the dataset)");
  ana->add_option("--max-lag", max_lag, "g2 side-peak range in pulses");
  ana->add_option("--threads", threads, "Worker threads");

  auto* rep = app.add_subcommand("reproduce", "Regenerate the data for one figure id");
  rep->add_option("--figure", figure, "Figure id")->required();
  rep->add_option("--config", config_path, "YAML configuration file")->check(CLI::ExistingFile);
  rep->add_option("--seed", seed, "Override the root seed");
  rep->add_option("--out", out, "Output directory (default: $RODTRAP_OUT_ROOT or output_dir, /<figure>)");
  rep->add_option("--threads", threads, "Worker threads");

  auto* val = app.add_subcommand("validate-config", "Check a configuration file and report every problem");
  val->add_option("--config", config_path, "YAML configuration file");
  val->add_flag("--dump", dump, "Print the canonical configuration (defaults when --config is absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return commands::exit_invalid_config;
  }

  try {
    if (*sim) {
      const auto cfg = load_config(config_path, seed);
      const auto dir = resolve_out(out, cfg, "sim-" + std::to_string(cfg.seed));
      const auto res = commands::simulate(cfg, dir);
      std::cout << "dataset " << res.dir.string() << " (" << res.manifest.artifacts.size() << " artifacts, config "
                << res.manifest.config_hash.substr(0, 12) << ")\n";
    } else if (*ana) {
      commands::analyze(dataset, out, max_lag);
      std::cout << "results " << (fs::path(out.empty() ? dataset : out) / "results.json").string() << "\n";
    } else if (*rep) {
      const auto cfg = load_config(config_path, seed);
      const auto dir = resolve_out(out, cfg, figure);
      std::cout << commands::reproduce(figure, dir, cfg, threads);
    } else if (*val) {
      if (config_path.empty() && !dump) throw ConfigError("--config", "no configuration file given");
      const auto cfg = config_path.empty() ? config::ExperimentConfig{} : config::load(config_path);
      if (dump)
        std::cout << config::to_yaml(cfg);
      else
        std::cout << "valid (" << config::config_hash(cfg).substr(0, 12) << ")\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return commands::exit_code_for(e);
  }
  return commands::exit_ok;
}
