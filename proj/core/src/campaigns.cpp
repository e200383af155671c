#include "rodtrap/campaigns.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include <json.hpp>

#include "rodtrap/analysis.hpp"
#include "rodtrap/commands.hpp"
#include "rodtrap/error.hpp"
#include "rodtrap/formats.hpp"
#include "rodtrap/langevin.hpp"
#include "rodtrap/manifest.hpp"
#include "rodtrap/random.hpp"

namespace rodtrap::campaigns {

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

EfficiencyResult efficiency(const optics::MirrorGeometry& geom) {
  return {optics::collection_efficiency(optics::DipoleKind::linear, geom),
          optics::collection_efficiency(optics::DipoleKind::circular, geom)};
}

namespace {

trap::ClusterSample with_n(const config::ExperimentConfig& base, int n) {
  trap::ClusterSample c = base.cluster.sample;
  c.n_rods = n;
  return c;
}

Watts pmin_of(const config::ExperimentConfig& base, const trap::ClusterSample& c) {
  return trap::min_power(trap::polarizability(c), base.gas.temperature, base.trap.params.field_factor,
                         base.trap.params.escape_kT);
}

trap::PowerLawFit slope(const std::vector<ScalingPoint>& pts, double ScalingPoint::*gamma) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : pts) xy.emplace_back(p.p_min_w, p.*gamma);
  return trap::gamma_pmin_exponent(xy);
}

}  // namespace

std::vector<PminRow> pmin_table(const config::ExperimentConfig& base, const std::vector<int>& n_values) {
  std::vector<PminRow> rows;
  for (int n : n_values) rows.push_back({n, pmin_of(base, with_n(base, n)).value()});
  return rows;
}

std::vector<GammaRow> gamma_table(const config::ExperimentConfig& base, const std::vector<int>& n_values) {
  std::vector<GammaRow> rows;
  for (int n : n_values) {
    const auto c = with_n(base, n);
    const auto full = trap::cluster_damping(c, base.gas, trap::ClusterDamping::slip_corrected);
    const auto geo = trap::cluster_damping(c, base.gas, trap::ClusterDamping::geometric);
    rows.push_back({n, trap::effective_radius(c).value(), full.knudsen, full.gamma_over_2pi.value(),
                    geo.gamma_over_2pi.value()});
  }
  return rows;
}

ScalingCampaign scaling_campaign(const config::ExperimentConfig& base, const std::vector<int>& n_values,
                                 unsigned threads) {
  if (n_values.size() < 5) throw InvalidArgument("scaling campaign needs at least five cluster sizes");
  ScalingCampaign out;
  out.points.resize(n_values.size());
  std::vector<double> slip_corrected(n_values.size());
  parallel_for(n_values.size(), threads, [&](std::size_t i) {
    const auto c = with_n(base, n_values[i]);
    const auto alpha = trap::polarizability(c);
    const auto mass = trap::cluster_mass(c);
    const auto stiff = langevin::TrapStiffness::from_depth(trap::trap_depth(alpha, base.trap.params),
                                                           Meters(base.trap.axial_width));
    const auto damp = trap::cluster_damping(c, base.gas, trap::ClusterDamping::geometric);
    slip_corrected[i] = trap::cluster_damping(c, base.gas, trap::ClusterDamping::slip_corrected).gamma_over_2pi.value();

    langevin::SimConfig sc;
    sc.time_step = Seconds(base.simulation.time_step);
    sc.duration = Seconds(std::max(base.simulation.motion_duration, 4e-3));
    sc.record_stride = base.simulation.record_stride;
    sc.detector_gain = base.simulation.detector_gain;
    sc.noise_floor = base.simulation.noise_floor;
    sc.seed = derive_seed(base.seed, "campaign.fig1b", static_cast<std::uint64_t>(n_values[i]));
    const auto z = langevin::simulate_axial_motion(stiff, damp.gamma, mass, base.gas.temperature, sc);
    const auto det = langevin::detector_signal(z, sc);
    const auto spec = analysis::power_spectral_density(det, base.analysis.psd_segment, base.analysis.psd_overlap);
    analysis::LorentzianOptions lo;
    lo.min_snr = base.analysis.min_snr;
    const auto fit = analysis::fit_lorentzian(spec, lo);

    auto& p = out.points[i];
    p.n_rods = n_values[i];
    p.p_min_w = pmin_of(base, c).value();
    p.gamma_true_hz = damp.gamma_over_2pi.value();
    p.gamma_fit_hz = fit.width_hz;
    p.ci_low_hz = fit.width_ci_low;
    p.ci_high_hz = fit.width_ci_high;
  });
  out.fitted = slope(out.points, &ScalingPoint::gamma_fit_hz);
  out.truth = slope(out.points, &ScalingPoint::gamma_true_hz);
  std::vector<std::pair<double, double>> xy;
  for (std::size_t i = 0; i < out.points.size(); ++i) xy.emplace_back(out.points[i].p_min_w, slip_corrected[i]);
  out.slip_corrected = trap::gamma_pmin_exponent(xy);
  out.in_measured_band = out.fitted.exponent >= 0.45 && out.fitted.exponent <= 0.51;
  return out;
}

RateCampaign rate_campaign(const config::ExperimentConfig& base, std::uint64_t pulses, unsigned threads) {
  if (pulses == 0) throw InvalidArgument("rate campaign needs at least one pulse");
  constexpr std::uint64_t kChunks = 16;
  emitter::EmitterModel em = base.emitter;
  em.n_rods = base.cluster.sample.n_rods;
  const auto cf = emitter::expected_count_rate(base.excitation, em, base.detection);

  std::vector<std::uint64_t> detected(kChunks, 0), chunk_pulses(kChunks, 0);
  parallel_for(kChunks, threads, [&](std::size_t i) {
    const std::uint64_t n = pulses / kChunks + (i < pulses % kChunks ? 1 : 0);
    if (n == 0) return;
    emitter::GenerationStats st;
    emitter::GenerationOptions opts;
    opts.stats = &st;
    const double duration = static_cast<double>(n) / base.excitation.repetition_rate;
    emitter::generate_time_tags(base.excitation, em, base.detection, duration,
                                derive_seed(base.seed, "campaign.appE", i), opts);
    detected[i] = st.detected;
    chunk_pulses[i] = st.pulses;
  });

  RateCampaign r;
  r.closed_form = cf.rate;
  r.closed_form_err = cf.uncertainty;
  for (std::size_t i = 0; i < kChunks; ++i) {
    r.detected += detected[i];
    r.pulses += chunk_pulses[i];
  }
  const double t = static_cast<double>(r.pulses) / base.excitation.repetition_rate;
  r.monte_carlo = static_cast<double>(r.detected) / t;
  r.monte_carlo_err = std::sqrt(static_cast<double>(r.detected)) / t;
  r.relative_difference = (r.monte_carlo - r.closed_form) / r.closed_form;
  return r;
}

std::vector<AlignmentPoint> alignment_curve(const config::ExperimentConfig& base, const std::vector<double>& powers,
                                            std::size_t samples, unsigned threads) {
  const auto alpha = trap::polarizability(base.cluster.sample);
  const Polarizability aniso = alpha * base.trap.anisotropy_ratio;
  const double kappa = base.trap.params.field_factor;
  const Kelvin T = base.gas.temperature;
  const double intrinsic = base.dipole.intrinsic_a_pi;
  std::vector<AlignmentPoint> out(powers.size());
  parallel_for(powers.size(), threads, [&](std::size_t i) {
    const Watts P(powers[i]);
    const Joules depth = langevin::alignment_depth(P, aniso, kappa);
    auto& pt = out[i];
    pt.power_w = powers[i];
    pt.u = depth.value() / thermal_energy(T).value();
    pt.a_pi_quadrature = langevin::apparent_a_pi(P, intrinsic, aniso, kappa, T);
    const auto s = langevin::sample_tilt_distribution(depth, T, samples, derive_seed(base.seed, "campaign.fig2b", i));
    pt.a_pi_sampled = intrinsic * s.mean_cos2;
    pt.a_pi_sampled_err = intrinsic * s.stderr_cos2;
  });
  return out;
}

std::vector<SampleRow> sample_campaign(const config::ExperimentConfig& base, const std::vector<int>& n_values,
                                       unsigned threads) {
  std::vector<SampleRow> out(n_values.size());
  parallel_for(n_values.size(), threads, [&](std::size_t i) {
    const int n = n_values[i];
    const auto c = with_n(base, n);
    auto& row = out[i];
    row.n_rods = n;
    row.p_min_w = pmin_of(base, c).value();
    row.p_auger = emitter::auger_probability_for_size(n);

    emitter::EmitterModel em = base.emitter;
    em.n_rods = n;
    em.auger_probability = row.p_auger;
    const auto tags = emitter::generate_time_tags(base.excitation, em, base.detection, base.simulation.tag_duration,
                                                  derive_seed(base.seed, "campaign.fig1a", i));
    const auto g = analysis::g2_zero(tags, 1.0 / base.excitation.repetition_rate, base.analysis.max_lag);
    row.g2 = g.g2_zero;
    row.g2_err = g.error;

    // Frozen orientations of a few rods of the cluster, drawn from the
    // thermal tilt distribution at the configured trap power.
    const auto aniso = trap::polarizability(c) * base.trap.anisotropy_ratio;
    const auto depth = langevin::alignment_depth(base.trap.params.power, aniso, base.trap.params.field_factor);
    const std::size_t k = static_cast<std::size_t>(std::min(n, 4));
    const auto tilts =
        langevin::sample_tilt_distribution(depth, base.gas.temperature, k, derive_seed(base.seed, "campaign.tilt", i));
    Rng rng = make_rng(base.seed, "campaign.fig1a.image", i);
    std::uniform_real_distribution<double> phi(0.0, 2.0 * std::numbers::pi);
    std::vector<optics::ApertureImage> imgs;
    imgs.reserve(k);
    for (double beta : tilts.beta)
      imgs.push_back(optics::general_dipole_image(optics::DipoleOrientation::tilted(beta, phi(rng)), base.mirror,
                                                  base.image.grid));
    std::vector<std::pair<double, const optics::ApertureImage*>> terms;
    for (const auto& im : imgs) terms.emplace_back(1.0 / static_cast<double>(k), &im);
    auto total = optics::incoherent_sum(terms);
    if (base.image.snr > 0.0) {
      double peak = 0.0;
      for (double v : total.data) peak = std::max(peak, v);
      std::normal_distribution<double> noise(0.0, peak / base.image.snr);
      for (double& v : total.data) v += noise(rng);
    }
    const auto asym =
        optics::asymmetry_metric(total, base.analysis.asymmetry, base.mirror.bore_R(), base.mirror.rim_R());
    row.asymmetry_score = asym.score;
    row.symmetry = asym.symmetry;
  });
  return out;
}

}  // namespace rodtrap::campaigns

namespace rodtrap::commands {

using nlohmann::ordered_json;

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids = {"fig1a",    "fig1b",      "fig2b",          "appE_rate",
                                               "appB_pmin", "appC_gamma", "appA_efficiency"};
  return ids;
}

namespace {

std::vector<double> col(std::size_t n, const std::function<double(std::size_t)>& f) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(i);
  return v;
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

}  // namespace

std::string reproduce(const std::string& figure, const fs::path& out_dir, const config::ExperimentConfig& base,
                      unsigned threads) {
  if (std::find(figure_ids().begin(), figure_ids().end(), figure) == figure_ids().end())
    throw ConfigError("figure", "unknown figure id '" + figure + "'");
  base.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());
  const fs::path csv = out_dir / (figure + ".csv");
  ordered_json s = {{"figure", figure}, {"seed", base.seed}};

  if (figure == "appA_efficiency") {
    const auto e = campaigns::efficiency(base.mirror);
    s["linear"] = e.linear;
    s["circular"] = e.circular;
    const std::vector<double> bores = {0.0, 0.25e-3, 0.5e-3, 0.75e-3, 1.0e-3, 1.5e-3};
    std::vector<double> lin, cir;
    for (double b : bores) {
      auto g = base.mirror;
      g.bore_radius = b;
      const auto r = campaigns::efficiency(g);
      lin.push_back(r.linear);
      cir.push_back(r.circular);
    }
    formats::write_csv(csv, {"bore_radius_m", "linear", "circular"}, {bores, lin, cir});
  } else if (figure == "appB_pmin") {
    const auto rows = campaigns::pmin_table(base, range(1, 64));
    const double p1 = rows.front().p_min_w;
    s["P_min_mW"] = p1 * 1e3;
    s["P_min_N16_mW"] = rows[15].p_min_w * 1e3;
    const auto est = trap::rods_from_pmin(milliwatts(2.5), Watts(p1));
    s["rods_for_2_5_mW"] = est.n_rods;
    formats::write_csv(csv, {"n_rods", "p_min_mw"},
                       {col(rows.size(), [&](std::size_t i) { return double(rows[i].n_rods); }),
                        col(rows.size(), [&](std::size_t i) { return rows[i].p_min_w * 1e3; })});
  } else if (figure == "appC_gamma") {
    const auto rows = campaigns::gamma_table(base, range(1, 64));
    s["gamma_over_2pi_MHz"] = rows.front().slip_corrected_hz * 1e-6;
    s["knudsen"] = rows.front().knudsen;
    s["effective_radius_nm"] = rows.front().radius_m * 1e9;
    formats::write_csv(csv, {"n_rods", "radius_m", "knudsen", "gamma_over_2pi_slip_corrected_hz", "gamma_over_2pi_geometric_hz"},
                       {col(rows.size(), [&](std::size_t i) { return double(rows[i].n_rods); }),
                        col(rows.size(), [&](std::size_t i) { return rows[i].radius_m; }),
                        col(rows.size(), [&](std::size_t i) { return rows[i].knudsen; }),
                        col(rows.size(), [&](std::size_t i) { return rows[i].slip_corrected_hz; }),
                        col(rows.size(), [&](std::size_t i) { return rows[i].geometric_hz; })});
  } else if (figure == "appE_rate") {
    const auto r = campaigns::rate_campaign(base, 10'000'000, threads);
    s["closed_form_per_s"] = r.closed_form;
    s["closed_form_err_per_s"] = r.closed_form_err;
    s["monte_carlo_per_s"] = r.monte_carlo;
    s["monte_carlo_err_per_s"] = r.monte_carlo_err;
    s["relative_difference"] = r.relative_difference;
    s["pulses"] = r.pulses;
    formats::write_csv(csv, {"closed_form_per_s", "closed_form_err_per_s", "monte_carlo_per_s", "monte_carlo_err_per_s"},
                       {{r.closed_form}, {r.closed_form_err}, {r.monte_carlo}, {r.monte_carlo_err}});
  } else if (figure == "fig1b") {
    const std::vector<int> ns = {4, 6, 8, 12, 16, 24, 32, 48, 64};
    const auto c = campaigns::scaling_campaign(base, ns, threads);
    s["exponent"] = c.fitted.exponent;
    s["exponent_stderr"] = c.fitted.standard_error;
    s["injected_exponent"] = c.truth.exponent;
    s["slip_corrected_exponent"] = c.slip_corrected.exponent;
    s["measured_exponent"] = 0.48;
    s["measured_exponent_err"] = 0.03;
    s["measured_band"] = {0.45, 0.51};
    s["in_measured_band"] = c.in_measured_band;
    const auto& p = c.points;
    formats::write_csv(csv, {"n_rods", "p_min_mw", "gamma_over_2pi_fit_hz", "ci95_low_hz", "ci95_high_hz",
                             "gamma_over_2pi_injected_hz"},
                       {col(p.size(), [&](std::size_t i) { return double(p[i].n_rods); }),
                        col(p.size(), [&](std::size_t i) { return p[i].p_min_w * 1e3; }),
                        col(p.size(), [&](std::size_t i) { return p[i].gamma_fit_hz; }),
                        col(p.size(), [&](std::size_t i) { return p[i].ci_low_hz; }),
                        col(p.size(), [&](std::size_t i) { return p[i].ci_high_hz; }),
                        col(p.size(), [&](std::size_t i) { return p[i].gamma_true_hz; })});
  } else if (figure == "fig2b") {
    std::vector<double> powers;
    for (int i = 0; i <= 24; ++i) powers.push_back(1e-3 * std::pow(400.0, i / 24.0));
    const auto pts = campaigns::alignment_curve(base, powers, 20000, threads);
    s["intrinsic_a_pi"] = base.dipole.intrinsic_a_pi;
    s["a_pi_at_min_power"] = pts.front().a_pi_quadrature;
    s["a_pi_at_max_power"] = pts.back().a_pi_quadrature;
    formats::write_csv(csv, {"trap_power_mw", "u_align", "a_pi_quadrature", "a_pi_sampled", "a_pi_sampled_err"},
                       {col(pts.size(), [&](std::size_t i) { return pts[i].power_w * 1e3; }),
                        col(pts.size(), [&](std::size_t i) { return pts[i].u; }),
                        col(pts.size(), [&](std::size_t i) { return pts[i].a_pi_quadrature; }),
                        col(pts.size(), [&](std::size_t i) { return pts[i].a_pi_sampled; }),
                        col(pts.size(), [&](std::size_t i) { return pts[i].a_pi_sampled_err; })});
  } else {  // fig1a
    const std::vector<int> ns = {2, 4, 8, 12, 16, 24, 32, 48, 64};
    const auto rows = campaigns::sample_campaign(base, ns, threads);
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows)
      arr.push_back({{"n_rods", r.n_rods},
                     {"p_min_mW", r.p_min_w * 1e3},
                     {"g2", r.g2},
                     {"g2_err", r.g2_err},
                     {"symmetry", optics::to_string(r.symmetry)}});
    s["samples"] = arr;
    s["symmetry_code"] = "0 symmetric, 1 asymmetric, 2 inconclusive";
    formats::write_csv(csv, {"n_rods", "p_min_mw", "p_auger", "g2_zero", "g2_err", "asymmetry_score", "symmetry_code"},
                       {col(rows.size(), [&](std::size_t i) { return double(rows[i].n_rods); }),
                        col(rows.size(), [&](std::size_t i) { return rows[i].p_min_w * 1e3; }),
                        col(rows.size(), [&](std::size_t i) { return rows[i].p_auger; }),
                        col(rows.size(), [&](std::size_t i) { return rows[i].g2; }),
                        col(rows.size(), [&](std::size_t i) { return rows[i].g2_err; }),
                        col(rows.size(), [&](std::size_t i) { return rows[i].asymmetry_score; }),
                        col(rows.size(), [&](std::size_t i) { return double(static_cast<int>(rows[i].symmetry)); })});
  }

  const std::string text = s.dump(2) + "\n";
  manifest::atomic_write(out_dir / (figure + ".json"), text);
  return text;
}

}  // namespace rodtrap::commands
