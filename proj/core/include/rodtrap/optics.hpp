#pragma once

// Dipole emission collimated by a deep parabolic mirror.
//
// Aperture coordinates are dimensionless, in units of the focal length f.
// A ray leaving the focus at polar angle θ (measured from the axis pointing
// at the vertex) exits the aperture at radius R with θ = 2·atan(R/2). The
// aperture intensity of an emitter with angular pattern dP/dΩ is
// dP/dΩ · dΩ/dA with dΩ/dA = (1 + R²/4)^-2.

#include <cstddef>
#include <string>
#include <vector>

namespace rodtrap::optics {

struct MirrorGeometry {
  double focal_length = 2.1e-3;     // m
  double aperture_radius = 10e-3;   // m
  double bore_radius = 0.75e-3;     // m (1.5 mm diameter hole at the vertex)
  double reflectivity = 0.72;

  void validate() const;
  [[nodiscard]] double rim_R() const { return aperture_radius / focal_length; }
  [[nodiscard]] double bore_R() const { return bore_radius / focal_length; }
  [[nodiscard]] double rim_angle() const;
  [[nodiscard]] double bore_angle() const;
};

double theta_from_R(double R);
double R_from_theta(double theta);

/// Aperture profile of a dipole along the mirror axis, unit amplitude.
double intensity_linear(double R);
/// Aperture profile of a dipole rotating in the plane normal to the axis.
double intensity_circular(double R);

struct Vec3 {
  double x = 0, y = 0, z = 0;
  [[nodiscard]] double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  [[nodiscard]] double norm() const;
};

// A linear dipole oscillating along `axis`, or a circular dipole rotating in
// the plane perpendicular to `axis`. Angular patterns (unnormalized, both
// integrate to 8π/3 over the sphere):
//   linear:   1 − (d̂·k̂)²
//   circular: (1 + (n̂·k̂)²)/2
class DipoleOrientation {
 public:
  enum class Kind { linear, circular };

  static DipoleOrientation linear(Vec3 axis);
  static DipoleOrientation circular(Vec3 axis);
  static DipoleOrientation linear_on_axis() { return linear({0, 0, 1}); }
  static DipoleOrientation circular_on_axis() { return circular({0, 0, 1}); }
  /// Linear dipole tilted by `beta` from the mirror axis towards azimuth `phi`.
  static DipoleOrientation tilted(double beta, double phi = 0.0);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] const Vec3& axis() const { return axis_; }
  [[nodiscard]] double pattern(const Vec3& k) const;

 private:
  DipoleOrientation(Kind k, Vec3 a) : kind_(k), axis_(a) {}
  Kind kind_;
  Vec3 axis_;
};

struct DipoleMix {
  double i0_pi = 0.0;
  double i0_sigma = 0.0;

  static DipoleMix from_fraction(double a_pi, double total = 1.0);
  [[nodiscard]] double a_pi() const;
  [[nodiscard]] double profile(double R) const;
};

enum class Channel { total, vertical, horizontal };
enum class PolarizerAxis { vertical, horizontal };

std::string to_string(Channel c);
Channel channel_from_string(const std::string& s);

struct GridSpec {
  std::size_t pixels = 256;
  double half_extent = 5.0;  // image covers [-half_extent, half_extent]² in units of f
};

// Row-major pixel grid. Pixel (row, col) sits at
//   x = (col − center_col)·pitch,  y = (center_row − row)·pitch
// so +y points up in the stored image and the vertical polarizer axis is ŷ.
struct ApertureImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double pitch = 0.0;
  double center_row = 0.0;
  double center_col = 0.0;
  Channel channel = Channel::total;
  std::vector<double> data;
  std::vector<std::string> warnings;

  static ApertureImage blank(const GridSpec& grid, Channel ch = Channel::total);

  [[nodiscard]] double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  [[nodiscard]] double x_of(std::size_t c) const { return (static_cast<double>(c) - center_col) * pitch; }
  [[nodiscard]] double y_of(std::size_t r) const { return (center_row - static_cast<double>(r)) * pitch; }
};

struct RadialProfile {
  std::vector<double> radii;        // mean pixel radius of each annulus
  std::vector<double> intensities;  // mean intensity
  std::vector<double> variances;    // intensity variance within the annulus
  std::vector<std::size_t> counts;

  [[nodiscard]] std::size_t size() const { return radii.size(); }
  void validate() const;
};

/// Image of a single dipole, clipped to the annulus R_bore ≤ R ≤ R_rim.
ApertureImage general_dipole_image(const DipoleOrientation& d, const MirrorGeometry& geom = {},
                                   const GridSpec& grid = {});

/// On-axis incoherent mix a·I_π + (1−a)·I_σ (amplitudes taken from `mix`).
ApertureImage mix_image(const DipoleMix& mix, const MirrorGeometry& geom = {},
                        const GridSpec& grid = {});

/// Pixelwise weighted incoherent sum; all images must share a grid.
ApertureImage incoherent_sum(const std::vector<std::pair<double, const ApertureImage*>>& terms);

ApertureImage polarized_projection(const ApertureImage& total, const DipoleMix& mix,
                                   PolarizerAxis axis);

enum class DipoleKind { linear, circular };

/// Fraction of the 4π emission reflected into the aperture (bore to rim).
double collection_efficiency(DipoleKind kind, const MirrorGeometry& geom);

/// Azimuthal average in annuli of width `bin_width` (pixel pitch when ≤ 0).
RadialProfile azimuthal_average(const ApertureImage& image, double bin_width = 0.0);

/// Synthesized noiseless profile a·I_π + (1−a)·I_σ at the given radii.
RadialProfile synthesize_profile(const std::vector<double>& radii, const DipoleMix& mix);

struct DipoleFit {
  DipoleMix mix;
  double a_pi = 0.0;
  double a_pi_stderr = 0.0;
  double residual_norm = 0.0;
  std::size_t samples_used = 0;
};

/// Non-negative least squares of the profile on {I_π, I_σ}. Only samples
/// with r_min ≤ R ≤ r_max enter the fit.
DipoleFit fit_dipole_fraction(const RadialProfile& profile, double r_min = 0.0,
                              double r_max = 1e300);

enum class Symmetry { symmetric, asymmetric, inconclusive };
std::string to_string(Symmetry s);

struct AsymmetryThresholds {
  double symmetric_below = 0.02;
  double asymmetric_above = 0.1;
};

struct AsymmetryResult {
  double score = 0.0;
  Symmetry symmetry = Symmetry::inconclusive;
};

// Energy in azimuthal harmonics m = 1..3 relative to m = 0, accumulated over
// pixel-wide annuli and weighted by their pixel count (so bright rings
// dominate). Rings outside [r_min, r_max] are ignored.
AsymmetryResult asymmetry_metric(const ApertureImage& image, const AsymmetryThresholds& th = {},
                                 double r_min = 0.0, double r_max = 1e300);

}  // namespace rodtrap::optics
