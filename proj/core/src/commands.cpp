#include "rodtrap/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "rodtrap/analysis.hpp"
#include "rodtrap/error.hpp"
#include "rodtrap/formats.hpp"
#include "rodtrap/langevin.hpp"
#include "rodtrap/random.hpp"

namespace rodtrap::commands {

using nlohmann::ordered_json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return exit_invalid_config;
  if (dynamic_cast<const IoError*>(&e)) return exit_io;
  if (dynamic_cast<const MissingArtifact*>(&e)) return exit_missing_artifact;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return exit_io;
  return exit_failure;
}

fs::path default_output_root(const fs::path& fallback) {
  if (const char* env = std::getenv(kOutRootEnv); env && *env) return fs::path(env);
  return fallback;
}

namespace {

struct Physics {
  Polarizability alpha{0.0};
  Kilograms mass{0.0};
  langevin::TrapStiffness stiffness;
  trap::DampingRate damping;
  double omega = 0.0;
  Watts p_min{0.0};
};

Physics physics_of(const config::ExperimentConfig& cfg) {
  Physics p;
  const auto& cl = cfg.cluster.sample;
  p.alpha = trap::polarizability(cl);
  p.mass = trap::cluster_mass(cl);
  p.stiffness = langevin::TrapStiffness::from_depth(trap::trap_depth(p.alpha, cfg.trap.params),
                                                    Meters(cfg.trap.axial_width));
  p.damping = trap::cluster_damping(cl, cfg.gas, cfg.cluster.damping_model);
  p.omega = p.stiffness.angular_frequency(p.mass);
  p.p_min = trap::min_power(p.alpha, cfg.gas.temperature, cfg.trap.params.field_factor, cfg.trap.params.escape_kT);
  return p;
}

optics::ApertureImage with_noise(optics::ApertureImage img, double snr, Rng& rng) {
  if (snr <= 0.0) return img;
  double peak = 0.0;
  for (double v : img.data) peak = std::max(peak, v);
  std::normal_distribution<double> n(0.0, peak / snr);
  for (double& v : img.data) v += n(rng);
  return img;
}

}  // namespace

SimulateSummary simulate(const config::ExperimentConfig& cfg, const fs::path& dir) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  fs::remove(dir / manifest::kManifestName, ec);

  const Physics ph = physics_of(cfg);

  langevin::SimConfig sc;
  sc.time_step = Seconds(cfg.simulation.time_step);
  sc.duration = Seconds(cfg.simulation.motion_duration);
  sc.seed = cfg.seed;
  sc.record_stride = cfg.simulation.record_stride;
  sc.detector_gain = cfg.simulation.detector_gain;
  sc.noise_floor = cfg.simulation.noise_floor;
  try {
    langevin::validate_sim(sc, ph.damping.gamma, ph.omega);
  } catch (const InvalidArgument& e) {
    throw ConfigError("simulation", e.what());
  }
  const auto z = langevin::simulate_axial_motion(ph.stiffness, ph.damping.gamma, ph.mass, cfg.gas.temperature, sc);
  const auto det = langevin::detector_signal(z, sc);

  emitter::EmitterModel em = cfg.emitter;
  em.n_rods = cfg.cluster.sample.n_rods;
  emitter::GenerationStats stats;
  emitter::BlinkTrajectory traj;
  emitter::GenerationOptions gopts;
  gopts.jitter = cfg.simulation.jitter;
  gopts.stats = &stats;
  gopts.trajectory = &traj;
  const auto tags =
      emitter::generate_time_tags(cfg.excitation, em, cfg.detection, cfg.simulation.tag_duration, cfg.seed, gopts);

  const auto mix = optics::DipoleMix::from_fraction(cfg.detection.a_pi);
  const auto total = optics::mix_image(mix, cfg.mirror, cfg.image.grid);
  const auto vert = optics::polarized_projection(total, mix, optics::PolarizerAxis::vertical);
  const auto horiz = optics::polarized_projection(total, mix, optics::PolarizerAxis::horizontal);

  const std::string hash = config::config_hash(cfg);
  const ordered_json hdr = {{"config_hash", hash}};
  formats::write_time_series(dir / "detector.ts", det, hdr.dump());
  formats::write_time_tags(dir / "tags.bin", tags, hdr.dump());
  Rng img_rng = make_rng(cfg.seed, "simulate.image");
  formats::write_image(dir / "image_total.csv", with_noise(total, cfg.image.snr, img_rng), cfg.mirror);
  formats::write_image(dir / "image_vertical.csv", with_noise(vert, cfg.image.snr, img_rng), cfg.mirror);
  formats::write_image(dir / "image_horizontal.csv", with_noise(horiz, cfg.image.snr, img_rng), cfg.mirror);
  manifest::atomic_write(dir / "config.yaml", config::to_yaml(cfg));

  const auto rate = emitter::expected_count_rate(cfg.excitation, em, cfg.detection);
  ordered_json truth = {
      {"seed", cfg.seed},
      {"n_rods", cfg.cluster.sample.n_rods},
      {"damping_model", trap::to_string(cfg.cluster.damping_model)},
      {"gamma_rad_s", ph.damping.gamma.value()},
      {"gamma_over_2pi_hz", ph.damping.gamma_over_2pi.value()},
      {"knudsen", ph.damping.knudsen},
      {"f0_hz", ph.omega / (2.0 * std::numbers::pi)},
      {"p_min_w", ph.p_min.value()},
      {"a_pi", cfg.detection.a_pi},
      {"expected_rate_per_s", rate.rate},
      {"expected_rate_err_per_s", rate.uncertainty},
      {"blink_mode", emitter::to_string(em.blink.mode)},
      {"grey_factor", em.blink.grey_factor},
      {"bright_fraction", traj.time_fraction(0)},
      {"grey_fraction", traj.time_fraction(1)},
      {"pulses", stats.pulses},
      {"excitons", stats.excitons},
      {"radiating", stats.radiating},
      {"emitted", stats.emitted},
      {"detected", stats.detected},
  };
  manifest::atomic_write(dir / "truth.json", truth.dump(2) + "\n");

  const std::vector<std::string> files = {"config.yaml",        "truth.json",           "detector.ts",
                                          "tags.bin",           "image_total.csv",      "image_total.json",
                                          "image_vertical.csv", "image_vertical.json", "image_horizontal.csv",
                                          "image_horizontal.json"};
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  SimulateSummary out;
  out.dir = dir;
  out.manifest = manifest::write_manifest(dir, files, hash, wall);
  return out;
}

std::string analyze(const fs::path& dir, const fs::path& out_arg, std::optional<int> max_lag) {
  const auto man = manifest::verify_manifest(dir);
  for (const char* required : {"config.yaml", "detector.ts", "tags.bin", "image_total.csv", "image_total.json"})
    if (!man.find(required)) throw MissingArtifact(required);
  const fs::path out = out_arg.empty() ? dir : out_arg;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string());

  auto cfg = config::load(dir / "config.yaml");
  if (max_lag) {
    cfg.analysis.max_lag = *max_lag;
    cfg.validate();
  }
  ordered_json res;
  res["config_hash"] = man.config_hash;
  res["seed"] = cfg.seed;

  {
    const auto det = formats::read_time_series(dir / "detector.ts");
    ordered_json j;
    try {
      const auto spec = analysis::power_spectral_density(det, cfg.analysis.psd_segment, cfg.analysis.psd_overlap);
      formats::write_csv(out / "psd.csv", {"frequency_hz", "density_v2_per_hz"}, {spec.frequency, spec.density});
      j["averages"] = spec.averages;
      j["resolution_bandwidth_hz"] = spec.resolution_bandwidth;
      analysis::LorentzianOptions lo;
      lo.min_snr = cfg.analysis.min_snr;
      const auto fit = analysis::fit_lorentzian(spec, lo);
      j["f0_hz"] = fit.f0;
      j["gamma_over_2pi_hz"] = fit.width_hz;
      j["gamma_rad_s"] = fit.gamma;
      j["gamma_over_2pi_ci95_hz"] = {fit.width_ci_low, fit.width_ci_high};
      j["snr"] = fit.snr;
      j["iterations"] = fit.iterations;
    } catch (const Error& e) {
      j["error"] = e.what();
    }
    res["psd"] = j;
  }

  {
    const auto tags = formats::read_time_tags(dir / "tags.bin");
    ordered_json j;
    j["events"] = tags.events.size();
    j["count_rate_per_s"] = static_cast<double>(tags.events.size()) / tags.duration;
    try {
      const auto g = analysis::g2_zero(tags, 1.0 / cfg.excitation.repetition_rate, cfg.analysis.max_lag);
      std::vector<double> lags(g.lags.begin(), g.lags.end());
      std::vector<double> coinc(g.coincidences.begin(), g.coincidences.end());
      formats::write_csv(out / "g2.csv", {"lag_pulses", "coincidences"}, {lags, coinc});
      j["g2_zero"] = g.g2_zero;
      j["g2_error"] = g.error;
      j["zero_lag"] = g.zero_lag;
      j["side_mean"] = g.side_mean;
      j["max_lag"] = cfg.analysis.max_lag;
      j["warnings"] = g.warnings;
    } catch (const Error& e) {
      j["g2_error_message"] = e.what();
    }
    res["g2"] = j;

    ordered_json b;
    try {
      analysis::BlinkOptions bo;
      bo.burst_r2 = cfg.analysis.burst_r2;
      bo.peak_prominence = cfg.analysis.peak_prominence;
      const auto h = analysis::blink_analysis(tags, cfg.analysis.blink_bin, bo);
      std::vector<double> hist(h.histogram.begin(), h.histogram.end());
      formats::write_csv(out / "blink_histogram.csv", {"counts_per_bin", "occurrences"}, {h.rate_edges, hist});
      std::vector<double> t(h.trace.size()), c(h.trace.begin(), h.trace.end());
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) * h.bin_width;
      formats::write_csv(out / "blink_trace.csv", {"time_s", "counts"}, {t, c});
      b["bin_width_s"] = h.bin_width;
      b["classification"] = analysis::to_string(h.classification);
      b["burst_r2"] = h.burst_r2;
      b["peak_means"] = h.peak_means;
      b["grey_mean_counts"] = h.grey_mean;
      b["grey_rms_counts"] = h.grey_rms;
      b["grey_rate_per_s"] = h.grey_rate;
    } catch (const Error& e) {
      b["error"] = e.what();
    }
    res["blinking"] = b;
  }

  {
    const auto img = formats::read_image(dir / "image_total.csv");
    ordered_json j;
    try {
      const auto prof = optics::azimuthal_average(img);
      formats::write_profile_csv(out / "profile.csv", prof);
      const double r_min = std::max(cfg.analysis.fit_r_min, cfg.mirror.bore_R() + img.pitch);
      const double r_max = std::min(cfg.analysis.fit_r_max, cfg.mirror.rim_R() - img.pitch);
      const auto fit = optics::fit_dipole_fraction(prof, r_min, r_max);
      j["a_pi"] = fit.a_pi;
      j["a_pi_stderr"] = fit.a_pi_stderr;
      j["samples_used"] = fit.samples_used;
    } catch (const Error& e) {
      j["fit_error"] = e.what();
    }
    try {
      const auto asym =
          optics::asymmetry_metric(img, cfg.analysis.asymmetry, cfg.mirror.bore_R(), cfg.mirror.rim_R());
      j["asymmetry_score"] = asym.score;
      j["symmetry"] = optics::to_string(asym.symmetry);
    } catch (const Error& e) {
      j["asymmetry_error"] = e.what();
    }
    j["warnings"] = img.warnings;
    res["image"] = j;
  }

  const std::string text = res.dump(2) + "\n";
  manifest::atomic_write(out / "results.json", text);
  return text;
}

}  // namespace rodtrap::commands
