#pragma once

#include <compare>
#include <numbers>

namespace rodtrap {

// Unit-tagged scalar. Only same-unit arithmetic is allowed; crossing units
// goes through value() at the call site so the conversion is visible.
template <class Tag>
class Quantity {
 public:
  constexpr Quantity() = default;
  constexpr explicit Quantity(double v) : v_(v) {}

  [[nodiscard]] constexpr double value() const { return v_; }

  constexpr Quantity& operator+=(Quantity o) { v_ += o.v_; return *this; }
  constexpr Quantity& operator-=(Quantity o) { v_ -= o.v_; return *this; }
  constexpr Quantity& operator*=(double s) { v_ *= s; return *this; }
  constexpr Quantity& operator/=(double s) { v_ /= s; return *this; }

  friend constexpr Quantity operator+(Quantity a, Quantity b) { return Quantity(a.v_ + b.v_); }
  friend constexpr Quantity operator-(Quantity a, Quantity b) { return Quantity(a.v_ - b.v_); }
  friend constexpr Quantity operator-(Quantity a) { return Quantity(-a.v_); }
  friend constexpr Quantity operator*(Quantity a, double s) { return Quantity(a.v_ * s); }
  friend constexpr Quantity operator*(double s, Quantity a) { return Quantity(a.v_ * s); }
  friend constexpr Quantity operator/(Quantity a, double s) { return Quantity(a.v_ / s); }
  friend constexpr double operator/(Quantity a, Quantity b) { return a.v_ / b.v_; }
  friend constexpr auto operator<=>(Quantity, Quantity) = default;

 private:
  double v_ = 0.0;
};

// clang-format off
struct LengthTag; struct MassTag; struct TimeTag_; struct PowerTag; struct EnergyTag;
struct TemperatureTag; struct FrequencyTag; struct AngularRateTag; struct ViscosityTag;
struct PolarizabilityTag; struct StiffnessTag;
// clang-format on

using Meters = Quantity<LengthTag>;
using Kilograms = Quantity<MassTag>;
using Seconds = Quantity<TimeTag_>;
using Watts = Quantity<PowerTag>;
using Joules = Quantity<EnergyTag>;
using Kelvin = Quantity<TemperatureTag>;
using Hertz = Quantity<FrequencyTag>;
using RadPerSec = Quantity<AngularRateTag>;
using PascalSeconds = Quantity<ViscosityTag>;
using Polarizability = Quantity<PolarizabilityTag>;  // C·m²/V
using NewtonsPerMeter = Quantity<StiffnessTag>;

constexpr Meters nanometers(double v) { return Meters(v / 1e9); }
constexpr Watts milliwatts(double v) { return Watts(v / 1e3); }
constexpr Watts microwatts(double v) { return Watts(v / 1e6); }

constexpr Hertz to_hertz(RadPerSec w) { return Hertz(w.value() / (2.0 * std::numbers::pi)); }
constexpr RadPerSec to_angular(Hertz f) { return RadPerSec(f.value() * 2.0 * std::numbers::pi); }

namespace constants {
inline constexpr double boltzmann = 1.380649e-23;        // J/K (exact, SI 2019)
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
}  // namespace constants

constexpr Joules thermal_energy(Kelvin t) { return Joules(constants::boltzmann * t.value()); }

}  // namespace rodtrap
