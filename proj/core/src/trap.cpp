#include "rodtrap/trap.hpp"

#include <cmath>
#include <numbers>

#include "rodtrap/error.hpp"

namespace rodtrap::trap {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double kReferencePmin = 0.041;     // W
constexpr double kReferenceTemperature = 296.0;  // K
}  // namespace

void RodGeometry::validate() const {
  if (!(length.value() > 0 && diameter.value() > 0 && core_diameter.value() > 0 &&
        shell_thickness.value() > 0))
    throw InvalidArgument("rod lengths must be positive");
  if (!(core_diameter < diameter)) throw InvalidArgument("core diameter must be below rod diameter");
}

double RodGeometry::volume() const {
  const double r = 0.5 * diameter.value();
  return pi * r * r * length.value();
}

void MaterialParams::validate() const {
  if (!(refractive_index > 1.0)) throw InvalidArgument("refractive index must exceed 1");
  if (!(density > 0.0)) throw InvalidArgument("mass density must be positive");
}

void GasParams::validate() const {
  if (!(viscosity.value() > 0 && mean_free_path.value() > 0 && temperature.value() > 0))
    throw InvalidArgument("gas parameters must be positive");
}

void ClusterSample::validate() const {
  if (n_rods < 1) throw InvalidArgument("a cluster holds at least one rod");
  rod.validate();
  material.validate();
}

void TrapParams::validate() const {
  if (!(field_factor > 0.0)) throw InvalidArgument("field factor must be positive");
  if (!(power.value() >= 0.0)) throw InvalidArgument("trap power must be non-negative");
  if (!(wavelength.value() > 0.0)) throw InvalidArgument("trap wavelength must be positive");
  if (!(escape_kT > 0.0)) throw InvalidArgument("escape criterion must be positive");
}

Polarizability polarizability(const RodGeometry& rod, const MaterialParams& material) {
  rod.validate();
  const double n2 = material.refractive_index * material.refractive_index;
  return Polarizability(constants::vacuum_permittivity * rod.volume() * (n2 - 1.0));
}

Polarizability polarizability(const ClusterSample& cluster) {
  cluster.validate();
  return polarizability(cluster.rod, cluster.material) * static_cast<double>(cluster.n_rods);
}

double reference_field_factor() {
  const double alpha = polarizability(RodGeometry{}, MaterialParams{}).value();
  return 2.0 * constants::boltzmann * kReferenceTemperature / (alpha * kReferencePmin);
}

Joules trap_depth(Polarizability alpha, const TrapParams& trap) {
  trap.validate();
  if (!(alpha.value() > 0.0)) throw InvalidArgument("polarizability must be positive");
  return Joules(0.5 * alpha.value() * trap.field_factor * trap.power.value());
}

Watts min_power(Polarizability alpha, Kelvin temperature, double field_factor, double escape_kT) {
  if (!(alpha.value() > 0.0)) throw InvalidArgument("polarizability must be positive");
  if (!(field_factor > 0.0)) throw InvalidArgument("field factor must be positive");
  return Watts(2.0 * escape_kT * constants::boltzmann * temperature.value() /
               (alpha.value() * field_factor));
}

RodCountEstimate rods_from_pmin(Watts pmin, Watts single_rod_pmin) {
  if (!(pmin.value() > 0.0)) throw InvalidArgument("P_min must be positive");
  RodCountEstimate e;
  e.n_rods = single_rod_pmin / pmin;
  if (e.n_rods < 1.0) {
    e.out_of_model = true;
    e.warning = "P_min exceeds the single-rod value; fewer than one rod is outside the model";
  }
  return e;
}

Meters effective_radius(const ClusterSample& cluster) {
  cluster.validate();
  if (cluster.packing != Packing::parallel_close_packed) throw InvalidArgument("unsupported packing model");
  const double r1 = 0.5 * cluster.rod.diameter.value() + cluster.rod.shell_thickness.value();
  return Meters(r1 * std::sqrt(static_cast<double>(cluster.n_rods)));
}

Kilograms cluster_mass(const ClusterSample& cluster) {
  cluster.validate();
  return Kilograms(cluster.n_rods * cluster.material.density * cluster.rod.volume());
}

double slip_factor(double kn) {
  const double ck = 0.31 * kn / (0.785 + 1.152 * kn + kn * kn);
  return 0.619 / (0.619 + kn) * (1.0 + ck);
}

DampingRate damping_rate(Meters radius, Kilograms mass, const GasParams& gas) {
  gas.validate();
  if (!(radius.value() > 0 && mass.value() > 0)) throw InvalidArgument("radius and mass must be positive");
  DampingRate d;
  d.knudsen = gas.mean_free_path / radius;
  d.slip_factor = slip_factor(d.knudsen);
  d.gamma = RadPerSec(6.0 * pi * gas.viscosity.value() * radius.value() / mass.value() * d.slip_factor);
  d.gamma_over_2pi = to_hertz(d.gamma);
  return d;
}

std::string to_string(ClusterDamping m) { return m == ClusterDamping::slip_corrected ? "slip_corrected" : "geometric"; }

ClusterDamping cluster_damping_from_string(const std::string& s) {
  if (s == "slip_corrected") return ClusterDamping::slip_corrected;
  if (s == "geometric") return ClusterDamping::geometric;
  throw InvalidArgument("unknown cluster damping model '" + s + "'");
}

DampingRate cluster_damping(const ClusterSample& cluster, const GasParams& gas, ClusterDamping model) {
  const Meters r = effective_radius(cluster);
  const Kilograms m = cluster_mass(cluster);
  if (model == ClusterDamping::slip_corrected) return damping_rate(r, m, gas);

  ClusterSample single = cluster;
  single.n_rods = 1;
  const DampingRate one = damping_rate(effective_radius(single), cluster_mass(single), gas);
  DampingRate d = one;
  d.knudsen = gas.mean_free_path / r;
  d.gamma = one.gamma * ((r / effective_radius(single)) * (cluster_mass(single) / m));
  d.gamma_over_2pi = to_hertz(d.gamma);
  return d;
}

PowerLawFit gamma_pmin_exponent(const std::vector<std::pair<double, double>>& pmin_gamma) {
  if (pmin_gamma.size() < 5) throw InsufficientData("power-law fit needs at least 5 samples");
  const auto n = static_cast<double>(pmin_gamma.size());
  double sx = 0, sy = 0;
  for (const auto& [p, g] : pmin_gamma) {
    if (!(p > 0.0 && g > 0.0)) throw InvalidArgument("power-law samples must be positive");
    sx += std::log(p);
    sy += std::log(g);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [p, g] : pmin_gamma) {
    const double dx = std::log(p) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(g) - my);
  }
  if (!(sxx > 0.0)) throw InsufficientData("P_min values do not vary");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.log_prefactor = my - fit.exponent * mx;
  double rss = 0;
  for (const auto& [p, g] : pmin_gamma) {
    const double e = std::log(g) - fit.log_prefactor - fit.exponent * std::log(p);
    rss += e * e;
  }
  fit.standard_error = std::sqrt(rss / (n - 2.0) / sxx);
  fit.samples = pmin_gamma.size();
  return fit;
}

}  // namespace rodtrap::trap
