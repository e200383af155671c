#pragma once

// Rayleigh-regime trap depth, escape power and gas damping for CdSe/CdS
// rods and parallel bundles of them.

#include <string>
#include <utility>
#include <vector>

#include "rodtrap/units.hpp"

namespace rodtrap::trap {

struct RodGeometry {
  Meters length = nanometers(35.0);
  Meters diameter = nanometers(7.0);
  Meters core_diameter = nanometers(2.7);  // informational
  Meters shell_thickness = nanometers(1.6);  // alkyl ligand layer

  void validate() const;
  /// Bare CdS cylinder volume (no ligand shell).
  [[nodiscard]] double volume() const;
};

struct MaterialParams {
  double refractive_index = 2.34;  // CdS at 1064 nm
  double density = 4826.0;         // kg/m³, bulk CdS

  void validate() const;
};

struct GasParams {
  PascalSeconds viscosity{1.82e-5};
  Meters mean_free_path = nanometers(68.0);
  Kelvin temperature{296.0};

  void validate() const;
};

enum class Packing { parallel_close_packed };

struct ClusterSample {
  int n_rods = 1;
  RodGeometry rod{};
  MaterialParams material{};
  Packing packing = Packing::parallel_close_packed;

  void validate() const;
};

/// Field factor κ = E_max²/P for the reference rod calibration: the value at
/// which the default single rod escapes at 41 mW and 296 K.
double reference_field_factor();

struct TrapParams {
  Meters wavelength = nanometers(1064.0);
  Watts power = milliwatts(360.0);
  double field_factor = reference_field_factor();  // V²/(m²·W)
  double escape_kT = 1.0;  // trap depth in units of k_B·T at which the particle escapes

  void validate() const;
};

Polarizability polarizability(const RodGeometry& rod, const MaterialParams& material);
Polarizability polarizability(const ClusterSample& cluster);

Joules trap_depth(Polarizability alpha, const TrapParams& trap);

Watts min_power(Polarizability alpha, Kelvin temperature, double field_factor = reference_field_factor(),
                double escape_kT = 1.0);

struct RodCountEstimate {
  double n_rods = 0.0;
  bool out_of_model = false;
  std::string warning;
};

/// Inverse of min_power: N = P_min(single rod)/P_min.
RodCountEstimate rods_from_pmin(Watts pmin, Watts single_rod_pmin);

/// Radius of the equal-area disc seen along the optical axis, ligand shell included.
Meters effective_radius(const ClusterSample& cluster);
Kilograms cluster_mass(const ClusterSample& cluster);

struct DampingRate {
  RadPerSec gamma{0.0};
  Hertz gamma_over_2pi{0.0};
  double knudsen = 0.0;
  double slip_factor = 1.0;  // 0.619/(0.619+Kn)·(1+c_K)
};

/// Rarefied-gas correction to Stokes drag as a function of Knudsen number.
double slip_factor(double knudsen);

DampingRate damping_rate(Meters radius, Kilograms mass, const GasParams& gas);

// How cluster damping is evaluated:
//   slip_corrected - full slip-corrected drag at the cluster's own r_z and m
//   geometric      - single-rod damping scaled by (r_z/r_1)·(m_1/m), i.e. with the
//                    slip factor frozen at its single-rod value (Γ ∝ r/m)
enum class ClusterDamping { slip_corrected, geometric };

std::string to_string(ClusterDamping m);
ClusterDamping cluster_damping_from_string(const std::string& s);

DampingRate cluster_damping(const ClusterSample& cluster, const GasParams& gas,
                            ClusterDamping model = ClusterDamping::slip_corrected);

struct PowerLawFit {
  double exponent = 0.0;
  double standard_error = 0.0;
  double log_prefactor = 0.0;
  std::size_t samples = 0;
};

/// Least-squares slope of log Γ against log P_min.
PowerLawFit gamma_pmin_exponent(const std::vector<std::pair<double, double>>& pmin_gamma);

}  // namespace rodtrap::trap
