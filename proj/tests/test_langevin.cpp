#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "rodtrap/error.hpp"
#include "rodtrap/langevin.hpp"
#include "rodtrap/trap.hpp"

using namespace rodtrap;
using namespace rodtrap::langevin;
using doctest::Approx;

namespace {

struct RodTrap {
  TrapStiffness stiffness;
  Kilograms mass;
  RadPerSec gamma;
  Kelvin temperature;
};

RodTrap default_trap() {
  trap::ClusterSample c;
  trap::GasParams gas;
  const auto depth = trap::trap_depth(trap::polarizability(c), trap::TrapParams{});
  return {TrapStiffness::from_depth(depth, nanometers(50.0)), trap::cluster_mass(c),
          trap::cluster_damping(c, gas).gamma, gas.temperature};
}

}  // namespace

TEST_CASE("harmonic expansion of the trap") {
  const auto t = default_trap();
  CHECK(t.stiffness.angular_frequency(t.mass) / (2 * std::numbers::pi) == Approx(10.58e6).epsilon(2e-3));
  const auto s = TrapStiffness::from_depth(Joules(2e-20), nanometers(100.0));
  CHECK(s.k_z == Approx(2 * 2e-20 / 1e-14));
  CHECK_THROWS_AS(TrapStiffness::from_depth(Joules(0.0)), InvalidArgument);
}

TEST_CASE("equipartition of the thermal trajectory") {
  const auto t = default_trap();
  SimConfig sc;
  sc.duration = Seconds(10e-3);
  sc.record_stride = 10;
  sc.seed = 21;
  const auto z = simulate_axial_motion(t.stiffness, t.gamma, t.mass, t.temperature, sc);
  CHECK(z.units == "m");
  CHECK(z.samples.size() == 1'000'000);
  CHECK(z.sample_interval == Approx(1e-8));
  const double n = static_cast<double>(z.samples.size());
  const double mean = std::accumulate(z.samples.begin(), z.samples.end(), 0.0) / n;
  double var = 0.0;
  for (double v : z.samples) var += (v - mean) * (v - mean);
  var /= n - 1;
  const double kT = thermal_energy(t.temperature).value();
  CHECK(t.stiffness.k_z * var / kT == Approx(1.0).epsilon(0.02));
  CHECK(std::abs(mean) < 0.02 * std::sqrt(var));
}

TEST_CASE("undamped motion is symplectic velocity Verlet") {
  const auto t = default_trap();
  SimConfig sc;
  sc.duration = Seconds(10e-6);
  sc.thermal = false;
  sc.initial_z = 10e-9;
  const auto z = simulate_axial_motion(t.stiffness, RadPerSec(0.0), t.mass, t.temperature, sc);
  const double omega = t.stiffness.angular_frequency(t.mass);
  const auto per_period = static_cast<std::size_t>(2 * std::numbers::pi / omega / 1e-9) + 1;
  auto peak = [&](std::size_t from) {
    double m = 0.0;
    for (std::size_t i = from; i < from + 3 * per_period; ++i) m = std::max(m, std::abs(z.samples[i]));
    return m;
  };
  const double early = peak(0);
  const double late = peak(z.samples.size() - 3 * per_period - 1);
  CHECK(early == Approx(10e-9).epsilon(1e-3));
  CHECK(late == Approx(early).epsilon(1e-3));

  std::size_t crossings = 0;
  for (std::size_t i = 1; i < z.samples.size(); ++i)
    if ((z.samples[i - 1] < 0) != (z.samples[i] < 0)) ++crossings;
  const double f_est = 0.5 * static_cast<double>(crossings) / 10e-6;
  CHECK(f_est == Approx(omega / (2 * std::numbers::pi)).epsilon(0.02));
}

TEST_CASE("trajectories are reproducible from the seed") {
  const auto t = default_trap();
  SimConfig sc;
  sc.duration = Seconds(200e-6);
  sc.record_stride = 20;
  sc.seed = 5;
  const auto a = simulate_axial_motion(t.stiffness, t.gamma, t.mass, t.temperature, sc);
  const auto b = simulate_axial_motion(t.stiffness, t.gamma, t.mass, t.temperature, sc);
  CHECK(a.samples == b.samples);
  sc.seed = 6;
  const auto c = simulate_axial_motion(t.stiffness, t.gamma, t.mass, t.temperature, sc);
  CHECK(a.samples != c.samples);
}

TEST_CASE("step size and duration checks") {
  const auto t = default_trap();
  SimConfig sc;
  sc.time_step = Seconds(20e-9);
  CHECK_THROWS_AS(simulate_axial_motion(t.stiffness, t.gamma, t.mass, t.temperature, sc), InvalidArgument);
  sc.time_step = Seconds(1e-9);
  sc.duration = Seconds(1e-6);
  CHECK_THROWS_AS(simulate_axial_motion(t.stiffness, t.gamma, t.mass, t.temperature, sc), InvalidArgument);
  sc.duration = Seconds(1e-3);
  sc.record_stride = 0;
  CHECK_THROWS_AS(validate_sim(sc, t.gamma, 1e6), InvalidArgument);
}

TEST_CASE("detector signal scaling and noise floor") {
  TimeSeries z;
  z.sample_interval = 1e-8;
  z.units = "m";
  z.samples.assign(200000, 1e-9);
  SimConfig sc;
  sc.detector_gain = 2e6;
  sc.noise_floor = 1e-6;
  const auto s = detector_signal(z, sc);
  CHECK(s.units == "V");
  const double n = static_cast<double>(s.samples.size());
  const double mean = std::accumulate(s.samples.begin(), s.samples.end(), 0.0) / n;
  double var = 0.0;
  for (double v : s.samples) var += (v - mean) * (v - mean);
  var /= n - 1;
  CHECK(mean == Approx(2e-3).epsilon(1e-3));
  CHECK(var == Approx(1e-12 * 0.5 / 1e-8).epsilon(0.02));
}

TEST_CASE("thermal tilt distribution") {
  CHECK(mean_cos2_tilt(0.0) == Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(mean_cos2_tilt(10.0) == Approx(0.89272776140925092).epsilon(1e-10));
  // Deep alignment: ⟨sin²β⟩ → 1/u.
  CHECK(1.0 - mean_cos2_tilt(1e4) == Approx(1e-4).epsilon(1e-3));
  double prev = 0.0;
  for (double u = 0.0; u < 200.0; u += 5.0) {
    const double m = mean_cos2_tilt(u);
    CHECK(m > prev);
    prev = m;
  }

  const double kT = thermal_energy(Kelvin(296.0)).value();
  const auto s = sample_tilt_distribution(Joules(3.0 * kT), Kelvin(296.0), 40000, 9);
  CHECK(s.beta.size() == 40000);
  CHECK(std::abs(s.mean_cos2 - mean_cos2_tilt(3.0)) < 3.0 * s.stderr_cos2);
  for (double b : s.beta) {
    CHECK(b >= 0.0);
    CHECK(b <= std::numbers::pi / 2 + 1e-12);
  }
}

TEST_CASE("apparent linear fraction grows from intrinsic/3 to intrinsic") {
  const auto aniso = trap::polarizability(trap::ClusterSample{}) * 0.5;
  const double kappa = trap::reference_field_factor();
  const Kelvin temp(296.0);
  CHECK(apparent_a_pi(Watts(0.0), 0.9, aniso, kappa, temp) == Approx(0.3).epsilon(1e-10));
  CHECK(apparent_a_pi(Watts(1e3), 0.9, aniso, kappa, temp) == Approx(0.9).epsilon(1e-3));
  double prev = 0.0;
  for (int i = 0; i <= 30; ++i) {
    const double a = apparent_a_pi(Watts(1e-3 * std::pow(2.0, i * 0.5)), 0.9, aniso, kappa, temp);
    CHECK(a > prev);
    prev = a;
  }
  CHECK_THROWS_AS(apparent_a_pi(Watts(1.0), 1.2, aniso, kappa, temp), InvalidArgument);
}
