#include "rodtrap/optics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rodtrap/error.hpp"

namespace rodtrap::optics {

namespace {

constexpr double pi = std::numbers::pi;

Vec3 emission_direction(double R, double x, double y) {
  const double theta = theta_from_R(R);
  const double s = std::sin(theta);
  if (R == 0.0) return {0.0, 0.0, 1.0};
  return {s * x / R, s * y / R, std::cos(theta)};
}

double aperture_jacobian(double R) {
  const double q = 1.0 + 0.25 * R * R;
  return 1.0 / (q * q);
}

bool inside_annulus(double R, const MirrorGeometry& g) { return R >= g.bore_R() && R <= g.rim_R(); }

void check_same_grid(const ApertureImage& a, const ApertureImage& b) {
  if (a.rows != b.rows || a.cols != b.cols || a.pitch != b.pitch || a.center_row != b.center_row ||
      a.center_col != b.center_col)
    throw InvalidArgument("images do not share a grid");
}

}  // namespace

void MirrorGeometry::validate() const {
  if (!(focal_length > 0.0)) throw InvalidGeometry("focal length must be positive");
  if (!(bore_radius > 0.0 && bore_radius < aperture_radius))
    throw InvalidGeometry("require 0 < bore_radius < aperture_radius");
  if (!(reflectivity > 0.0 && reflectivity <= 1.0))
    throw InvalidGeometry("reflectivity must lie in (0, 1]");
  const double rim = rim_angle();
  if (!(rim > pi / 2 && rim < pi)) throw InvalidGeometry("rim half-angle must lie in (90°, 180°)");
}

double MirrorGeometry::rim_angle() const { return theta_from_R(rim_R()); }
double MirrorGeometry::bore_angle() const { return theta_from_R(bore_R()); }

double theta_from_R(double R) {
  if (!(R >= 0.0)) throw InvalidArgument("aperture radius must be non-negative");
  return 2.0 * std::atan(0.5 * R);
}

double R_from_theta(double theta) {
  if (!(theta >= 0.0 && theta < pi)) throw InvalidArgument("polar angle must lie in [0, π)");
  return 2.0 * std::tan(0.5 * theta);
}

double intensity_linear(double R) {
  if (!(R >= 0.0)) throw InvalidArgument("aperture radius must be non-negative");
  const double q = 0.25 * R * R + 1.0;
  const double q2 = q * q;
  return R * R / (q2 * q2);
}

double intensity_circular(double R) {
  if (!(R >= 0.0)) throw InvalidArgument("aperture radius must be non-negative");
  const double q = 0.25 * R * R + 1.0;
  const double q2 = q * q;
  return (R * R * R * R / 16.0 + 1.0) / (q2 * q2);
}

double Vec3::norm() const { return std::sqrt(dot(*this)); }

DipoleOrientation DipoleOrientation::linear(Vec3 axis) {
  if (std::abs(axis.norm() - 1.0) > 1e-12) throw InvalidArgument("dipole axis must be a unit vector");
  return {Kind::linear, axis};
}

DipoleOrientation DipoleOrientation::circular(Vec3 axis) {
  if (std::abs(axis.norm() - 1.0) > 1e-12) throw InvalidArgument("dipole axis must be a unit vector");
  return {Kind::circular, axis};
}

DipoleOrientation DipoleOrientation::tilted(double beta, double phi) {
  const double s = std::sin(beta);
  return linear({s * std::cos(phi), s * std::sin(phi), std::cos(beta)});
}

double DipoleOrientation::pattern(const Vec3& k) const {
  const double c = axis_.dot(k);
  return kind_ == Kind::linear ? 1.0 - c * c : 0.5 * (1.0 + c * c);
}

DipoleMix DipoleMix::from_fraction(double a_pi, double total) {
  if (!(a_pi >= 0.0 && a_pi <= 1.0)) throw InvalidArgument("a_pi must lie in [0, 1]");
  if (!(total >= 0.0)) throw InvalidArgument("mix amplitude must be non-negative");
  return {a_pi * total, (1.0 - a_pi) * total};
}

double DipoleMix::a_pi() const {
  const double s = i0_pi + i0_sigma;
  return s > 0.0 ? i0_pi / s : 0.0;
}

double DipoleMix::profile(double R) const {
  return i0_pi * intensity_linear(R) + i0_sigma * intensity_circular(R);
}

std::string to_string(Channel c) {
  switch (c) {
    case Channel::total: return "total";
    case Channel::vertical: return "vertical";
    case Channel::horizontal: return "horizontal";
  }
  return "total";
}

Channel channel_from_string(const std::string& s) {
  if (s == "total") return Channel::total;
  if (s == "vertical") return Channel::vertical;
  if (s == "horizontal") return Channel::horizontal;
  throw InvalidArgument("unknown polarization channel '" + s + "'");
}

ApertureImage ApertureImage::blank(const GridSpec& grid, Channel ch) {
  if (grid.pixels < 2 || !(grid.half_extent > 0.0)) throw InvalidArgument("degenerate image grid");
  ApertureImage img;
  img.rows = img.cols = grid.pixels;
  img.pitch = 2.0 * grid.half_extent / static_cast<double>(grid.pixels);
  img.center_row = img.center_col = 0.5 * static_cast<double>(grid.pixels - 1);
  img.channel = ch;
  img.data.assign(grid.pixels * grid.pixels, 0.0);
  return img;
}

void RadialProfile::validate() const {
  if (intensities.size() != radii.size()) throw InvalidArgument("profile radii/intensity length mismatch");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (i > 0 && !(radii[i] > radii[i - 1])) throw InvalidArgument("profile radii must be strictly increasing");
    if (!std::isfinite(intensities[i])) throw InvalidArgument("profile intensities must be finite");
  }
}

ApertureImage general_dipole_image(const DipoleOrientation& d, const MirrorGeometry& geom,
                                   const GridSpec& grid) {
  geom.validate();
  ApertureImage img = ApertureImage::blank(grid);
  if (geom.bore_R() < 2.0 * img.pitch)
    img.warnings.push_back("pixel pitch too coarse to resolve the bore hole");
  for (std::size_t r = 0; r < img.rows; ++r) {
    const double y = img.y_of(r);
    for (std::size_t c = 0; c < img.cols; ++c) {
      const double x = img.x_of(c);
      const double R = std::hypot(x, y);
      if (!inside_annulus(R, geom)) continue;
      img.at(r, c) = d.pattern(emission_direction(R, x, y)) * aperture_jacobian(R);
    }
  }
  return img;
}

ApertureImage mix_image(const DipoleMix& mix, const MirrorGeometry& geom, const GridSpec& grid) {
  geom.validate();
  ApertureImage img = ApertureImage::blank(grid);
  if (geom.bore_R() < 2.0 * img.pitch)
    img.warnings.push_back("pixel pitch too coarse to resolve the bore hole");
  for (std::size_t r = 0; r < img.rows; ++r) {
    const double y = img.y_of(r);
    for (std::size_t c = 0; c < img.cols; ++c) {
      const double R = std::hypot(img.x_of(c), y);
      if (inside_annulus(R, geom)) img.at(r, c) = mix.profile(R);
    }
  }
  return img;
}

ApertureImage incoherent_sum(const std::vector<std::pair<double, const ApertureImage*>>& terms) {
  if (terms.empty()) throw InvalidArgument("incoherent_sum needs at least one image");
  ApertureImage out = *terms.front().second;
  std::fill(out.data.begin(), out.data.end(), 0.0);
  for (const auto& [w, img] : terms) {
    check_same_grid(out, *img);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += w * img->data[i];
    out.warnings.insert(out.warnings.end(), img->warnings.begin(), img->warnings.end());
  }
  std::sort(out.warnings.begin(), out.warnings.end());
  out.warnings.erase(std::unique(out.warnings.begin(), out.warnings.end()), out.warnings.end());
  return out;
}

ApertureImage polarized_projection(const ApertureImage& total, const DipoleMix& mix,
                                   PolarizerAxis axis) {
  if (total.channel != Channel::total) throw InvalidArgument("projection needs the total channel");
  ApertureImage out = total;
  out.channel = axis == PolarizerAxis::vertical ? Channel::vertical : Channel::horizontal;
  for (std::size_t r = 0; r < total.rows; ++r) {
    const double y = total.y_of(r);
    for (std::size_t c = 0; c < total.cols; ++c) {
      const double x = total.x_of(c);
      const double R2 = x * x + y * y;
      const double R = std::sqrt(R2);
      const double lin = mix.i0_pi * intensity_linear(R);
      const double circ = mix.i0_sigma * intensity_circular(R);
      const double f_lin = (lin + circ) > 0.0 ? lin / (lin + circ) : 0.0;
      // Radial polarization of the on-axis linear dipole: |r̂·û|².
      double proj = 0.0;
      if (R2 > 0.0) proj = (axis == PolarizerAxis::vertical ? y * y : x * x) / R2;
      const double v = total.at(r, c);
      out.at(r, c) = v * f_lin * proj + v * (1.0 - f_lin) * 0.5;
    }
  }
  return out;
}

namespace {

double collected_fraction(DipoleKind kind, double theta_min, double theta_max) {
  using boost::math::quadrature::gauss_kronrod;
  // Normalized patterns times 2π·sinθ: (3/4)·sin³θ and (3/8)·(1+cos²θ)·sinθ.
  auto linear = [](double t) {
    const double s = std::sin(t);
    return 0.75 * s * s * s;
  };
  auto circular = [](double t) {
    const double c = std::cos(t);
    return 0.375 * (1.0 + c * c) * std::sin(t);
  };
  double err = 0.0;
  const double v = kind == DipoleKind::linear
                       ? gauss_kronrod<double, 61>::integrate(linear, theta_min, theta_max, 15, 1e-13, &err)
                       : gauss_kronrod<double, 61>::integrate(circular, theta_min, theta_max, 15, 1e-13, &err);
  return v;
}

}  // namespace

double collection_efficiency(DipoleKind kind, const MirrorGeometry& geom) {
  if (!(geom.focal_length > 0.0) || !(geom.aperture_radius > 0.0) || !(geom.bore_radius >= 0.0))
    throw InvalidGeometry("mirror lengths must be positive");
  const double tb = geom.bore_angle();
  const double tr = geom.rim_angle();
  if (tb >= tr) throw InvalidGeometry("bore angle must be smaller than rim angle");
  return collected_fraction(kind, tb, tr);
}

RadialProfile azimuthal_average(const ApertureImage& image, double bin_width) {
  if (image.center_row < -0.5 || image.center_col < -0.5 ||
      image.center_row > static_cast<double>(image.rows) - 0.5 ||
      image.center_col > static_cast<double>(image.cols) - 0.5)
    throw InvalidArgument("image center lies outside the pixel grid");
  if (!(image.pitch > 0.0)) throw InvalidArgument("pixel pitch must be positive");
  const double w = bin_width > 0.0 ? bin_width : image.pitch;

  struct Acc {
    double sr = 0, si = 0, sii = 0;
    std::size_t n = 0;
  };
  std::vector<Acc> bins;
  for (std::size_t r = 0; r < image.rows; ++r) {
    const double y = image.y_of(r);
    for (std::size_t c = 0; c < image.cols; ++c) {
      const double R = std::hypot(image.x_of(c), y);
      const auto k = static_cast<std::size_t>(R / w);
      if (k >= bins.size()) bins.resize(k + 1);
      const double v = image.at(r, c);
      bins[k].sr += R;
      bins[k].si += v;
      bins[k].sii += v * v;
      ++bins[k].n;
    }
  }
  RadialProfile p;
  for (const auto& b : bins) {
    if (b.n == 0) continue;
    const double n = static_cast<double>(b.n);
    const double mean = b.si / n;
    p.radii.push_back(b.sr / n);
    p.intensities.push_back(mean);
    p.variances.push_back(std::max(0.0, b.sii / n - mean * mean));
    p.counts.push_back(b.n);
  }
  return p;
}

RadialProfile synthesize_profile(const std::vector<double>& radii, const DipoleMix& mix) {
  RadialProfile p;
  p.radii = radii;
  p.intensities.reserve(radii.size());
  for (double R : radii) p.intensities.push_back(mix.profile(R));
  p.variances.assign(radii.size(), 0.0);
  p.counts.assign(radii.size(), 1);
  p.validate();
  return p;
}

DipoleFit fit_dipole_fraction(const RadialProfile& profile, double r_min, double r_max) {
  profile.validate();
  std::vector<double> a, b, y;
  bool inner = false, outer = false;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double R = profile.radii[i];
    if (R < r_min || R > r_max) continue;
    a.push_back(intensity_linear(R));
    b.push_back(intensity_circular(R));
    y.push_back(profile.intensities[i]);
    inner = inner || R < 1.0;
    outer = outer || R > 1.5;
  }
  const std::size_t n = y.size();
  if (n < 8) throw InsufficientData("dipole fit needs at least 8 radial samples");
  if (!inner || !outer) throw InsufficientData("dipole fit needs samples at R < 1 and R > 1.5");

  double aa = 0, ab = 0, bb = 0, ay = 0, by = 0, yy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    aa += a[i] * a[i];
    ab += a[i] * b[i];
    bb += b[i] * b[i];
    ay += a[i] * y[i];
    by += b[i] * y[i];
    yy += y[i] * y[i];
  }
  if (!(yy > 0.0)) throw FitError("degenerate profile: all intensities are zero");

  auto rss = [&](double p, double s) {
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - p * a[i] - s * b[i];
      acc += e * e;
    }
    return acc;
  };

  // Two-variable NNLS: the unconstrained optimum if feasible, otherwise the
  // better of the two single-component boundary solutions.
  const double det = aa * bb - ab * ab;
  double p = 0, s = 0;
  if (det > 0.0) {
    p = (bb * ay - ab * by) / det;
    s = (aa * by - ab * ay) / det;
  }
  if (!(det > 0.0) || p < 0.0 || s < 0.0) {
    const double p_only = std::max(0.0, ay / aa);
    const double s_only = std::max(0.0, by / bb);
    if (rss(p_only, 0.0) <= rss(0.0, s_only)) {
      p = p_only;
      s = 0.0;
    } else {
      p = 0.0;
      s = s_only;
    }
  }
  if (!(p + s > 0.0)) throw FitError("degenerate profile: no non-negative dipole mix fits");

  DipoleFit fit;
  fit.mix = {p, s};
  fit.a_pi = p / (p + s);
  const double r = rss(p, s);
  fit.residual_norm = std::sqrt(r);
  fit.samples_used = n;
  if (det > 0.0) {
    const double s2 = r / static_cast<double>(n - 2);
    const double cpp = s2 * bb / det, css = s2 * aa / det, cps = -s2 * ab / det;
    const double t = (p + s) * (p + s);
    const double gp = s / t, gs = -p / t;
    fit.a_pi_stderr = std::sqrt(std::max(0.0, gp * gp * cpp + 2 * gp * gs * cps + gs * gs * css));
  }
  return fit;
}

std::string to_string(Symmetry s) {
  switch (s) {
    case Symmetry::symmetric: return "symmetric";
    case Symmetry::asymmetric: return "asymmetric";
    case Symmetry::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

AsymmetryResult asymmetry_metric(const ApertureImage& image, const AsymmetryThresholds& th,
                                 double r_min, double r_max) {
  constexpr int kModes = 3;
  struct Ring {
    double n = 0, c0 = 0;
    std::array<std::complex<double>, kModes> cm{};
  };
  std::vector<Ring> rings;
  for (std::size_t r = 0; r < image.rows; ++r) {
    const double y = image.y_of(r);
    for (std::size_t c = 0; c < image.cols; ++c) {
      const double x = image.x_of(c);
      const double R = std::hypot(x, y);
      if (R < r_min || R > r_max) continue;
      const auto k = static_cast<std::size_t>(R / image.pitch);
      if (k >= rings.size()) rings.resize(k + 1);
      const double v = image.at(r, c);
      const double phi = std::atan2(y, x);
      Ring& ring = rings[k];
      ring.n += 1;
      ring.c0 += v;
      for (int m = 1; m <= kModes; ++m) ring.cm[m - 1] += v * std::polar(1.0, -m * phi);
    }
  }
  double num = 0, den = 0;
  for (const Ring& ring : rings) {
    if (ring.n < 8) continue;
    const double c0 = ring.c0 / ring.n;
    double e = 0;
    for (const auto& cm : ring.cm) e += 2.0 * std::norm(cm / ring.n);
    num += ring.n * e;
    den += ring.n * c0 * c0;
  }
  AsymmetryResult res;
  res.score = den > 0.0 ? num / den : 0.0;
  if (res.score < th.symmetric_below)
    res.symmetry = Symmetry::symmetric;
  else if (res.score > th.asymmetric_above)
    res.symmetry = Symmetry::asymmetric;
  else
    res.symmetry = Symmetry::inconclusive;
  return res;
}

}  // namespace rodtrap::optics
