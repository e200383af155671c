#include "rodtrap/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "rodtrap/error.hpp"
#include "rodtrap/manifest.hpp"

namespace rodtrap {

namespace {
std::string join_issues(const std::vector<FieldIssue>& issues) {
  std::string s = "invalid configuration";
  for (const auto& i : issues) s += "\n  " + i.path + ": " + i.message;
  return s;
}
}  // namespace

ConfigError::ConfigError(std::vector<FieldIssue> issues) : Error(join_issues(issues)), issues_(std::move(issues)) {}

}  // namespace rodtrap

namespace rodtrap::config {

namespace {

template <class T>
struct TypeName;
template <> struct TypeName<double> { static constexpr const char* value = "a number"; };
template <> struct TypeName<int> { static constexpr const char* value = "an integer"; };
template <> struct TypeName<std::size_t> { static constexpr const char* value = "a non-negative integer"; };
template <> struct TypeName<bool> { static constexpr const char* value = "true or false"; };
template <> struct TypeName<std::string> { static constexpr const char* value = "a string"; };

class Reader {
 public:
  std::vector<FieldIssue> issues;

  // Returns the child map, or an undefined node when absent or malformed.
  YAML::Node section(const YAML::Node& parent, const std::string& path, const std::string& key,
                     std::initializer_list<std::string_view> allowed) {
    const YAML::Node n = parent[key];
    const std::string p = join(path, key);
    if (!n) return YAML::Node(YAML::NodeType::Undefined);
    if (!n.IsMap()) {
      issues.push_back({p, "expected a mapping"});
      return YAML::Node(YAML::NodeType::Undefined);
    }
    check_keys(n, p, allowed);
    return n;
  }

  void check_keys(const YAML::Node& n, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (auto a : allowed) ok = ok || a == key;
      if (!ok) issues.push_back({join(path, key), "unknown key"});
    }
  }

  template <class T>
  void get(const YAML::Node& n, const std::string& path, const std::string& key, T& out) {
    if (!n || !n.IsMap()) return;
    const YAML::Node v = n[key];
    if (!v) return;
    const std::string p = join(path, key);
    if (!v.IsScalar()) {
      issues.push_back({p, std::string("expected ") + TypeName<T>::value});
      return;
    }
    if constexpr (std::is_same_v<T, std::size_t>) {
      if (!v.Scalar().empty() && v.Scalar()[0] == '-') {
        issues.push_back({p, std::string("expected ") + TypeName<T>::value});
        return;
      }
    }
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      issues.push_back({p, std::string("expected ") + TypeName<T>::value});
    }
  }

  template <class Tag>
  void get(const YAML::Node& n, const std::string& path, const std::string& key, Quantity<Tag>& out) {
    double v = out.value();
    get(n, path, key, v);
    out = Quantity<Tag>(v);
  }

  template <class Fn>
  void check(const std::string& path, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      issues.push_back({path, e.what()});
    }
  }

  void require(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) issues.push_back({path, msg});
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

void read(Reader& r, const YAML::Node& root, ExperimentConfig& c) {
  r.check_keys(root, "", {"seed", "output_dir", "mirror", "image", "cluster", "gas", "trap", "dipole", "emitter",
                          "excitation", "detection", "simulation", "analysis"});
  r.get(root, "", "seed", c.seed);
  r.get(root, "", "output_dir", c.output_dir);

  auto m = r.section(root, "", "mirror", {"focal_length", "aperture_radius", "bore_radius", "reflectivity"});
  r.get(m, "mirror", "focal_length", c.mirror.focal_length);
  r.get(m, "mirror", "aperture_radius", c.mirror.aperture_radius);
  r.get(m, "mirror", "bore_radius", c.mirror.bore_radius);
  r.get(m, "mirror", "reflectivity", c.mirror.reflectivity);

  auto im = r.section(root, "", "image", {"pixels", "half_extent", "snr"});
  r.get(im, "image", "pixels", c.image.grid.pixels);
  r.get(im, "image", "half_extent", c.image.grid.half_extent);
  r.get(im, "image", "snr", c.image.snr);

  auto cl = r.section(root, "", "cluster", {"n_rods", "rod", "material", "damping_model"});
  r.get(cl, "cluster", "n_rods", c.cluster.sample.n_rods);
  if (cl && cl["damping_model"]) {
    std::string s;
    r.get(cl, "cluster", "damping_model", s);
    r.check("cluster.damping_model", [&] { c.cluster.damping_model = trap::cluster_damping_from_string(s); });
  }
  auto rod = cl ? r.section(cl, "cluster", "rod", {"length", "diameter", "core_diameter", "shell_thickness"})
                : YAML::Node(YAML::NodeType::Undefined);
  r.get(rod, "cluster.rod", "length", c.cluster.sample.rod.length);
  r.get(rod, "cluster.rod", "diameter", c.cluster.sample.rod.diameter);
  r.get(rod, "cluster.rod", "core_diameter", c.cluster.sample.rod.core_diameter);
  r.get(rod, "cluster.rod", "shell_thickness", c.cluster.sample.rod.shell_thickness);
  auto mat = cl ? r.section(cl, "cluster", "material", {"refractive_index", "density"})
                : YAML::Node(YAML::NodeType::Undefined);
  r.get(mat, "cluster.material", "refractive_index", c.cluster.sample.material.refractive_index);
  r.get(mat, "cluster.material", "density", c.cluster.sample.material.density);

  auto gas = r.section(root, "", "gas", {"viscosity", "mean_free_path", "temperature"});
  r.get(gas, "gas", "viscosity", c.gas.viscosity);
  r.get(gas, "gas", "mean_free_path", c.gas.mean_free_path);
  r.get(gas, "gas", "temperature", c.gas.temperature);

  auto tr = r.section(root, "", "trap",
                      {"wavelength", "power", "field_factor", "escape_kT", "axial_width", "anisotropy_ratio"});
  r.get(tr, "trap", "wavelength", c.trap.params.wavelength);
  r.get(tr, "trap", "power", c.trap.params.power);
  r.get(tr, "trap", "field_factor", c.trap.params.field_factor);
  r.get(tr, "trap", "escape_kT", c.trap.params.escape_kT);
  r.get(tr, "trap", "axial_width", c.trap.axial_width);
  r.get(tr, "trap", "anisotropy_ratio", c.trap.anisotropy_ratio);

  auto dp = r.section(root, "", "dipole", {"intrinsic_a_pi"});
  r.get(dp, "dipole", "intrinsic_a_pi", c.dipole.intrinsic_a_pi);

  auto em = r.section(root, "", "emitter", {"quantum_yield", "auger_probability", "independent_emitters", "blink"});
  r.get(em, "emitter", "quantum_yield", c.emitter.quantum_yield);
  r.get(em, "emitter", "auger_probability", c.emitter.auger_probability);
  r.get(em, "emitter", "independent_emitters", c.emitter.independent_emitters);
  auto bl = em ? r.section(em, "emitter", "blink",
                           {"mode", "grey_factor", "bright_dwell", "grey_dwell", "burst_dwell", "burst_mean_level"})
               : YAML::Node(YAML::NodeType::Undefined);
  if (bl && bl["mode"]) {
    std::string s;
    r.get(bl, "emitter.blink", "mode", s);
    r.check("emitter.blink.mode", [&] { c.emitter.blink.mode = emitter::blink_mode_from_string(s); });
  }
  r.get(bl, "emitter.blink", "grey_factor", c.emitter.blink.grey_factor);
  r.get(bl, "emitter.blink", "bright_dwell", c.emitter.blink.bright_dwell);
  r.get(bl, "emitter.blink", "grey_dwell", c.emitter.blink.grey_dwell);
  r.get(bl, "emitter.blink", "burst_dwell", c.emitter.blink.burst_dwell);
  r.get(bl, "emitter.blink", "burst_mean_level", c.emitter.blink.burst_mean_level);

  auto ex = r.section(root, "", "excitation",
                      {"repetition_rate", "pulse_duration", "power", "saturation_power", "saturation_power_err"});
  r.get(ex, "excitation", "repetition_rate", c.excitation.repetition_rate);
  r.get(ex, "excitation", "pulse_duration", c.excitation.pulse_duration);
  r.get(ex, "excitation", "power", c.excitation.power);
  r.get(ex, "excitation", "saturation_power", c.excitation.saturation_power);
  r.get(ex, "excitation", "saturation_power_err", c.excitation.saturation_power_err);

  auto de = r.section(root, "", "detection",
                      {"apd_qe", "pm_reflectivity", "setup_transmission", "a_pi", "a_pi_err", "linear_efficiency",
                       "circular_efficiency", "splitter_ratio"});
  r.get(de, "detection", "apd_qe", c.detection.apd_qe);
  r.get(de, "detection", "pm_reflectivity", c.detection.pm_reflectivity);
  r.get(de, "detection", "setup_transmission", c.detection.setup_transmission);
  r.get(de, "detection", "a_pi", c.detection.a_pi);
  r.get(de, "detection", "a_pi_err", c.detection.a_pi_err);
  r.get(de, "detection", "linear_efficiency", c.detection.linear_efficiency);
  r.get(de, "detection", "circular_efficiency", c.detection.circular_efficiency);
  r.get(de, "detection", "splitter_ratio", c.detection.splitter_ratio);

  auto si = r.section(root, "", "simulation",
                      {"time_step", "motion_duration", "record_stride", "detector_gain", "noise_floor",
                       "tag_duration", "jitter"});
  r.get(si, "simulation", "time_step", c.simulation.time_step);
  r.get(si, "simulation", "motion_duration", c.simulation.motion_duration);
  r.get(si, "simulation", "record_stride", c.simulation.record_stride);
  r.get(si, "simulation", "detector_gain", c.simulation.detector_gain);
  r.get(si, "simulation", "noise_floor", c.simulation.noise_floor);
  r.get(si, "simulation", "tag_duration", c.simulation.tag_duration);
  r.get(si, "simulation", "jitter", c.simulation.jitter);

  auto an = r.section(root, "", "analysis",
                      {"psd_segment", "psd_overlap", "min_snr", "max_lag", "blink_bin", "burst_r2",
                       "peak_prominence", "symmetric_below", "asymmetric_above", "fit_r_min", "fit_r_max"});
  r.get(an, "analysis", "psd_segment", c.analysis.psd_segment);
  r.get(an, "analysis", "psd_overlap", c.analysis.psd_overlap);
  r.get(an, "analysis", "min_snr", c.analysis.min_snr);
  r.get(an, "analysis", "max_lag", c.analysis.max_lag);
  r.get(an, "analysis", "blink_bin", c.analysis.blink_bin);
  r.get(an, "analysis", "burst_r2", c.analysis.burst_r2);
  r.get(an, "analysis", "peak_prominence", c.analysis.peak_prominence);
  r.get(an, "analysis", "symmetric_below", c.analysis.asymmetry.symmetric_below);
  r.get(an, "analysis", "asymmetric_above", c.analysis.asymmetry.asymmetric_above);
  r.get(an, "analysis", "fit_r_min", c.analysis.fit_r_min);
  r.get(an, "analysis", "fit_r_max", c.analysis.fit_r_max);
}

void validate_into(Reader& r, const ExperimentConfig& c) {
  r.require(!c.output_dir.empty(), "output_dir", "must not be empty");
  r.check("mirror", [&] { c.mirror.validate(); });
  r.require(c.image.grid.pixels >= 16, "image.pixels", "must be at least 16");
  r.require(c.image.grid.half_extent > 0.0, "image.half_extent", "must be positive");
  r.require(c.image.snr >= 0.0, "image.snr", "must be non-negative");
  r.check("cluster", [&] { c.cluster.sample.validate(); });
  r.check("gas", [&] { c.gas.validate(); });
  r.check("trap", [&] { c.trap.params.validate(); });
  r.require(c.trap.axial_width > 0.0, "trap.axial_width", "must be positive");
  r.require(c.trap.anisotropy_ratio >= 0.0, "trap.anisotropy_ratio", "must be non-negative");
  r.require(c.dipole.intrinsic_a_pi >= 0.0 && c.dipole.intrinsic_a_pi <= 1.0, "dipole.intrinsic_a_pi",
            "must lie in [0, 1]");
  r.check("emitter", [&] { c.emitter.validate(); });
  r.check("excitation", [&] { c.excitation.validate(); });
  r.check("detection", [&] { c.detection.validate(true); });
  const auto& s = c.simulation;
  r.require(s.time_step > 0.0, "simulation.time_step", "must be positive");
  r.require(s.motion_duration > 0.0, "simulation.motion_duration", "must be positive");
  r.require(s.record_stride >= 1, "simulation.record_stride", "must be at least 1");
  r.require(s.detector_gain > 0.0, "simulation.detector_gain", "must be positive");
  r.require(s.noise_floor >= 0.0, "simulation.noise_floor", "must be non-negative");
  r.require(s.tag_duration > 0.0, "simulation.tag_duration", "must be positive");
  const auto& a = c.analysis;
  r.require(a.psd_segment >= 8, "analysis.psd_segment", "must be at least 8");
  r.require(a.psd_overlap < a.psd_segment, "analysis.psd_overlap", "must be smaller than psd_segment");
  r.require(a.min_snr > 0.0, "analysis.min_snr", "must be positive");
  r.require(a.max_lag >= 1, "analysis.max_lag", "must be at least 1");
  r.require(a.blink_bin > 0.0, "analysis.blink_bin", "must be positive");
  r.require(a.burst_r2 > 0.0 && a.burst_r2 <= 1.0, "analysis.burst_r2", "must lie in (0, 1]");
  r.require(a.peak_prominence > 0.0, "analysis.peak_prominence", "must be positive");
  r.require(a.asymmetry.symmetric_below > 0.0 && a.asymmetry.symmetric_below <= a.asymmetry.asymmetric_above,
            "analysis.symmetric_below", "must be positive and not exceed asymmetric_above");
  r.require(a.fit_r_min >= 0.0 && a.fit_r_min < a.fit_r_max, "analysis.fit_r_min",
            "must be non-negative and below fit_r_max");
}

// Shortest round-trip decimal form.
std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

class Writer {
 public:
  void open(const std::string& key, const std::string& comment = {}) {
    line(key + ":", comment);
    ++depth_;
  }
  void close() { --depth_; }
  void kv(const std::string& key, const std::string& value, const std::string& comment = {}) {
    line(key + ": " + value, comment);
  }
  void kv(const std::string& key, double v, const std::string& comment = {}) { kv(key, num(v), comment); }
  void kv_int(const std::string& key, long long v, const std::string& comment = {}) {
    kv(key, std::to_string(v), comment);
  }
  void kv_uint(const std::string& key, unsigned long long v, const std::string& comment = {}) {
    kv(key, std::to_string(v), comment);
  }
  [[nodiscard]] std::string str() const { return os_.str(); }

 private:
  void line(const std::string& s, const std::string& comment) {
    os_ << std::string(2 * static_cast<std::size_t>(depth_), ' ') << s;
    if (!comment.empty()) os_ << "  # " << comment;
    os_ << '\n';
  }
  std::ostringstream os_;
  int depth_ = 0;
};

}  // namespace

void ExperimentConfig::validate() const {
  Reader r;
  validate_into(r, *this);
  if (!r.issues.empty()) throw ConfigError(std::move(r.issues));
}

ExperimentConfig parse_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", std::string("YAML syntax error: ") + e.what());
  }
  ExperimentConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw ConfigError("<document>", "top level must be a mapping");
  Reader r;
  read(r, root, c);
  if (r.issues.empty()) validate_into(r, c);
  if (!r.issues.empty()) throw ConfigError(std::move(r.issues));
  return c;
}

ExperimentConfig load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_yaml(ss.str());
}

std::string to_yaml(const ExperimentConfig& c) {
  Writer w;
  w.kv_uint("seed", c.seed, "root seed; every random stream is derived from it");
  w.kv("output_dir", quoted(c.output_dir));

  w.open("mirror");
  w.kv("focal_length", c.mirror.focal_length, "m");
  w.kv("aperture_radius", c.mirror.aperture_radius, "m");
  w.kv("bore_radius", c.mirror.bore_radius, "m");
  w.kv("reflectivity", c.mirror.reflectivity);
  w.close();

  w.open("image");
  w.kv_uint("pixels", c.image.grid.pixels);
  w.kv("half_extent", c.image.grid.half_extent, "units of the focal length");
  w.kv("snr", c.image.snr, "peak over pixel noise; 0 disables noise");
  w.close();

  const auto& s = c.cluster.sample;
  w.open("cluster");
  w.kv_int("n_rods", s.n_rods);
  w.kv("damping_model", trap::to_string(c.cluster.damping_model), "slip_corrected | geometric");
  w.open("rod");
  w.kv("length", s.rod.length.value(), "m");
  w.kv("diameter", s.rod.diameter.value(), "m");
  w.kv("core_diameter", s.rod.core_diameter.value(), "m");
  w.kv("shell_thickness", s.rod.shell_thickness.value(), "m, ligand layer");
  w.close();
  w.open("material");
  w.kv("refractive_index", s.material.refractive_index);
  w.kv("density", s.material.density, "kg/m^3");
  w.close();
  w.close();

  w.open("gas");
  w.kv("viscosity", c.gas.viscosity.value(), "Pa s");
  w.kv("mean_free_path", c.gas.mean_free_path.value(), "m");
  w.kv("temperature", c.gas.temperature.value(), "K");
  w.close();

  w.open("trap");
  w.kv("wavelength", c.trap.params.wavelength.value(), "m");
  w.kv("power", c.trap.params.power.value(), "W");
  w.kv("field_factor", c.trap.params.field_factor, "E_max^2/P, V^2/(m^2 W)");
  w.kv("escape_kT", c.trap.params.escape_kT);
  w.kv("axial_width", c.trap.axial_width, "m");
  w.kv("anisotropy_ratio", c.trap.anisotropy_ratio, "polarizability anisotropy over polarizability");
  w.close();

  w.open("dipole");
  w.kv("intrinsic_a_pi", c.dipole.intrinsic_a_pi);
  w.close();

  const auto& e = c.emitter;
  w.open("emitter");
  w.kv("quantum_yield", e.quantum_yield);
  w.kv("auger_probability", e.auger_probability);
  w.kv_int("independent_emitters", e.independent_emitters);
  w.open("blink");
  w.kv("mode", emitter::to_string(e.blink.mode), "none | two_state | burst");
  w.kv("grey_factor", e.blink.grey_factor);
  w.kv("bright_dwell", e.blink.bright_dwell, "s");
  w.kv("grey_dwell", e.blink.grey_dwell, "s");
  w.kv("burst_dwell", e.blink.burst_dwell, "s");
  w.kv("burst_mean_level", e.blink.burst_mean_level);
  w.close();
  w.close();

  const auto& x = c.excitation;
  w.open("excitation");
  w.kv("repetition_rate", x.repetition_rate, "1/s");
  w.kv("pulse_duration", x.pulse_duration, "s");
  w.kv("power", x.power, "W");
  w.kv("saturation_power", x.saturation_power, "W");
  w.kv("saturation_power_err", x.saturation_power_err, "W");
  w.close();

  const auto& d = c.detection;
  w.open("detection");
  w.kv("apd_qe", d.apd_qe);
  w.kv("pm_reflectivity", d.pm_reflectivity);
  w.kv("setup_transmission", d.setup_transmission);
  w.kv("a_pi", d.a_pi);
  w.kv("a_pi_err", d.a_pi_err);
  w.kv("linear_efficiency", d.linear_efficiency);
  w.kv("circular_efficiency", d.circular_efficiency);
  w.kv("splitter_ratio", d.splitter_ratio);
  w.close();

  const auto& si = c.simulation;
  w.open("simulation");
  w.kv("time_step", si.time_step, "s");
  w.kv("motion_duration", si.motion_duration, "s");
  w.kv_uint("record_stride", si.record_stride);
  w.kv("detector_gain", si.detector_gain, "V/m");
  w.kv("noise_floor", si.noise_floor, "V/sqrt(Hz)");
  w.kv("tag_duration", si.tag_duration, "s");
  w.kv("jitter", si.jitter ? "true" : "false");
  w.close();

  const auto& a = c.analysis;
  w.open("analysis");
  w.kv_uint("psd_segment", a.psd_segment, "samples");
  w.kv_uint("psd_overlap", a.psd_overlap, "samples");
  w.kv("min_snr", a.min_snr);
  w.kv_int("max_lag", a.max_lag, "pulses");
  w.kv("blink_bin", a.blink_bin, "s");
  w.kv("burst_r2", a.burst_r2);
  w.kv("peak_prominence", a.peak_prominence);
  w.kv("symmetric_below", a.asymmetry.symmetric_below);
  w.kv("asymmetric_above", a.asymmetry.asymmetric_above);
  w.kv("fit_r_min", a.fit_r_min);
  w.kv("fit_r_max", a.fit_r_max);
  w.close();
  return w.str();
}

std::string config_hash(const ExperimentConfig& cfg) { return manifest::sha256_hex(to_yaml(cfg)); }

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return to_yaml(a) == to_yaml(b); }

}  // namespace rodtrap::config
