#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rodtrap/units.hpp"

namespace rodtrap::langevin {

/// Harmonic expansion of the axial trap: k_z = 2·U0/w_z².
struct TrapStiffness {
  double k_z = 0.0;  // N/m
  Meters width{0.0};

  static TrapStiffness from_depth(Joules depth, Meters width = nanometers(532.0));
  [[nodiscard]] double angular_frequency(Kilograms m) const;
};

struct SimConfig {
  Seconds time_step{1e-9};
  Seconds duration{1e-3};
  std::uint64_t seed = 1;
  std::size_t record_stride = 1;  // keep every n-th integrator step
  double detector_gain = 1e6;     // V/m
  double noise_floor = 0.0;       // V/√Hz, one-sided
  bool thermal = true;            // draw noise and start from equilibrium
  std::optional<double> initial_z;  // m; overrides the equilibrium draw
  double initial_v = 0.0;           // m/s, used with initial_z

  [[nodiscard]] Seconds sample_interval() const { return time_step * static_cast<double>(record_stride); }
};

struct TimeSeries {
  double sample_interval = 0.0;  // s
  std::string units;             // "m" or "V"
  std::uint64_t seed = 0;
  std::vector<double> samples;

  void validate() const;
};

/// Checks the step-size and duration invariants for the given dynamics.
void validate_sim(const SimConfig& cfg, RadPerSec gamma, double omega);

// Integrates m z̈ = −k z − mΓ ż + √(2mΓk_BT)·ξ with the BAOAB splitting:
// half kick, half drift, exact Ornstein-Uhlenbeck velocity update, half
// drift, half kick. For Γ = 0 it reduces to velocity Verlet.
TimeSeries simulate_axial_motion(const TrapStiffness& stiffness, RadPerSec gamma, Kilograms mass,
                                 Kelvin temperature, const SimConfig& cfg);

/// gain·z(t) plus white Gaussian noise of one-sided density noise_floor².
TimeSeries detector_signal(const TimeSeries& z, const SimConfig& cfg);

struct TiltSamples {
  std::vector<double> beta;
  double mean_cos2 = 0.0;
  double stderr_cos2 = 0.0;
};

/// Draws tilt angles from p(β) ∝ exp(−u·sin²β)·sinβ on [0, π/2], u = ΔU/k_BT.
TiltSamples sample_tilt_distribution(Joules align_depth, Kelvin temperature, std::size_t n_samples,
                                     std::uint64_t seed);

/// ⟨cos²β⟩ of the same distribution by quadrature, as a function of u = ΔU/k_BT.
double mean_cos2_tilt(double u);

/// Alignment well depth (Δα/2)·κ·P.
Joules alignment_depth(Watts power, Polarizability anisotropy, double field_factor);

/// Time-averaged linear-dipole fraction seen through thermal tilt:
/// intrinsic · ⟨cos²β⟩(P).
double apparent_a_pi(Watts power, double intrinsic_a_pi, Polarizability anisotropy,
                     double field_factor, Kelvin temperature);

}  // namespace rodtrap::langevin
