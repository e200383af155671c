#pragma once

// Experiment configuration: one YAML document, SI units throughout.
// Unknown keys are rejected; every problem is reported with its key path.

#include <cstdint>
#include <filesystem>
#include <string>

#include "rodtrap/emitter.hpp"
#include "rodtrap/optics.hpp"
#include "rodtrap/trap.hpp"

namespace rodtrap::config {

struct ImageConfig {
  optics::GridSpec grid{};
  double snr = 10.0;  // peak/σ of additive Gaussian pixel noise, 0 = noiseless
};

struct ClusterConfig {
  trap::ClusterSample sample{};
  trap::ClusterDamping damping_model = trap::ClusterDamping::slip_corrected;
};

struct TrapConfig {
  trap::TrapParams params{};
  double axial_width = 50e-9;      // m, harmonic width w_z
  double anisotropy_ratio = 0.5;   // Δα/α
};

struct DipoleConfig {
  double intrinsic_a_pi = 1.0;
};

struct SimulationConfig {
  double time_step = 1e-9;         // s
  double motion_duration = 10e-3;  // s
  std::size_t record_stride = 20;
  double detector_gain = 1e6;      // V/m
  double noise_floor = 0.0;        // V/√Hz
  double tag_duration = 2.0;       // s of photon time tags
  bool jitter = false;
};

struct AnalysisConfig {
  std::size_t psd_segment = 4096;
  std::size_t psd_overlap = 2048;
  double min_snr = 3.0;
  int max_lag = 50;
  double blink_bin = 500e-6;
  double burst_r2 = 0.95;
  double peak_prominence = 3.0;
  optics::AsymmetryThresholds asymmetry{};
  double fit_r_min = 0.0;
  double fit_r_max = 1e300;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "runs";
  optics::MirrorGeometry mirror{};
  ImageConfig image{};
  ClusterConfig cluster{};
  trap::GasParams gas{};
  TrapConfig trap{};
  DipoleConfig dipole{};
  emitter::EmitterModel emitter{};
  emitter::ExcitationConfig excitation{};
  emitter::DetectionChain detection{};
  SimulationConfig simulation{};
  AnalysisConfig analysis{};

  /// Collects every invariant violation; throws ConfigError if any.
  void validate() const;
};

ExperimentConfig parse_yaml(const std::string& text);
ExperimentConfig load(const std::filesystem::path& path);
std::string to_yaml(const ExperimentConfig& cfg);

/// SHA-256 of the canonical serialization.
std::string config_hash(const ExperimentConfig& cfg);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace rodtrap::config
