#pragma once

// Declarative scenario description. JSON in, JSON out; unknown keys are errors.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include "nfrems/em_core.hpp"
#include "nfrems/error.hpp"
#include "nfrems/io/text.hpp"

namespace nfrems {

using json = nlohmann::json;

enum class ScenarioKind { UlaFocus, UlaTaper, UlaObstacle, RisFocus };
enum class ModelSelection { Both, SphericalWave, PhysicallyConsistent };
enum class SweepAxis { Distance, Angle, Frequency, Grid2D };

inline double deg2rad(double deg) { return deg * kPi / 180.0; }

struct PointSpec {
  double r_m = 1.0;
  double theta_deg = 0.0;
  double phi_deg = 0.0;

  /// Signed polar angles fold onto phi + 180 deg.
  [[nodiscard]] SphericalCoord sph() const { return in_plane(r_m, deg2rad(theta_deg), deg2rad(phi_deg)); }
  bool operator==(const PointSpec&) const = default;
};

struct CircuitSpec {
  std::optional<double> resistance_ohm;   // default: Hertzian radiation resistance at the carrier
  std::optional<double> resonance_hz;     // default: carrier
  double q = 30.0;
  std::optional<double> q_reference_ohm;  // default: R0 + R + R_rad
};

struct ArraySpec {
  int elements = 128;
  double spacing_wavelengths = 0.5;
  double dipole_length_wavelengths = 0.05;
  bool mutual_coupling = true;
  CircuitSpec circuit;
};

struct VaractorSpec {
  double c_min_f = 0.1e-12;
  double c_max_f = 2.0e-12;
  double series_resistance_ohm = 0.5;
};

struct RisSpec {
  int cells_x = 32;
  int cells_y = 4;
  double spacing_wavelengths = 0.58;
  double dipole_length_wavelengths = 0.05;
  double cell_height_wavelengths = 0.1;  // above the ground plane; 0 removes the plane from the cells
  double cell_resistance_ohm = 0.2;
  std::optional<double> cell_inductance_h;  // default: port resonates with sqrt(C_min C_max) at the carrier
  VaractorSpec varactor;
  bool specular_background = true;
  double po_points_per_wavelength = 12.0;
  bool mutual_coupling = true;
};

struct IncidentSpec {
  double theta_deg = 30.0;
  double phi_deg = 0.0;
  std::string polarization = "phi";  // "theta" | "phi"
};

struct ObstacleSpec {
  PointSpec center;
  double radius_m = 0.1;
};

struct SweepSpec {
  SweepAxis axis = SweepAxis::Distance;
  double start = 0.0;  // m | deg | Hz
  double stop = 0.0;
  int points = 1;
  // grid2d, metres in the x-z plane
  double x_start = 0.0, x_stop = 0.0;
  int x_points = 1;
  double z_start = 0.0, z_stop = 0.0;
  int z_points = 1;
};

struct OptimizerSpec {
  double eig_tol = 1e-10;
  int eig_max_iter = 10000;
  double ascent_tol = 1e-6;
  int ascent_max_iter = 300;
  double fd_step = 1e-6;
  std::string gradient = "analytic";  // "analytic" | "finite-difference"
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::UlaFocus;
  double frequency_hz = 10e9;
  double reference_impedance_ohm = 50.0;
  ModelSelection models = ModelSelection::Both;
  std::uint64_t seed = 0;
  std::optional<std::string> operator_file;    // NFOP-CSV; synthetic when empty
  std::optional<std::string> tuning_touchstone;
  ArraySpec array;
  RisSpec ris;
  PointSpec focus;
  std::optional<PointSpec> normalization_focus;
  IncidentSpec incident;
  std::optional<ObstacleSpec> obstacle;
  std::optional<double> taper_sidelobe_db;
  SweepSpec sweep;
  OptimizerSpec optimizer;

  [[nodiscard]] bool wants_sw() const { return models != ModelSelection::PhysicallyConsistent; }
  [[nodiscard]] bool wants_pc() const { return models != ModelSelection::SphericalWave; }
  [[nodiscard]] bool is_ula() const { return kind != ScenarioKind::RisFocus; }
};

inline std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::UlaFocus: return "ula-focus";
    case ScenarioKind::UlaTaper: return "ula-taper";
    case ScenarioKind::UlaObstacle: return "ula-obstacle";
    case ScenarioKind::RisFocus: return "ris-focus";
  }
  return "";
}

inline std::string to_string(ModelSelection m) {
  switch (m) {
    case ModelSelection::Both: return "both";
    case ModelSelection::SphericalWave: return "sw";
    case ModelSelection::PhysicallyConsistent: return "pc";
  }
  return "";
}

inline std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Distance: return "distance";
    case SweepAxis::Angle: return "angle";
    case SweepAxis::Frequency: return "frequency";
    case SweepAxis::Grid2D: return "grid2d";
  }
  return "";
}

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "distance") return SweepAxis::Distance;
  if (s == "angle") return SweepAxis::Angle;
  if (s == "frequency") return SweepAxis::Frequency;
  if (s == "grid2d") return SweepAxis::Grid2D;
  throw Error(ErrorCode::ConfigError, "unknown sweep axis '" + s + "'");
}

namespace detail {

/// Object reader that remembers which keys were consumed.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, path_ + " must be an object");
  }

  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw Error(ErrorCode::ConfigError, path_ + "." + key + " is required");
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    const json& v = raw(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::ConfigError, path_ + "." + key + " has the wrong type");
    }
  }

  template <class T>
  void maybe(const std::string& key, T& out) {
    used_.insert(key);
    if (has(key)) out = get<T>(key);
  }

  template <class T>
  void maybe(const std::string& key, std::optional<T>& out) {
    used_.insert(key);
    if (has(key)) out = get<T>(key);
  }

  /// Accepts an absent or null key without reading it.
  void touch(const std::string& key) { used_.insert(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw Error(ErrorCode::ConfigError, "unknown key " + path_ + "." + it.key());
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline PointSpec parse_point(const json& j, const std::string& path) {
  StrictObject o(j, path);
  PointSpec p;
  p.r_m = o.get<double>("r_m");
  p.theta_deg = o.get<double>("theta_deg");
  p.phi_deg = o.get<double>("phi_deg");
  o.finish();
  return p;
}

inline json point_json(const PointSpec& p) { return {{"r_m", p.r_m}, {"theta_deg", p.theta_deg}, {"phi_deg", p.phi_deg}}; }

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorCode::ConfigError, msg);
}

inline bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace detail

/// Range and consistency checks that do not need the file system.
inline void validate_config(const ScenarioConfig& c) {
  using detail::finite_positive;
  using detail::require;
  require(finite_positive(c.frequency_hz), "frequency_hz must be > 0");
  require(finite_positive(c.reference_impedance_ohm), "reference_impedance_ohm must be > 0");
  require(finite_positive(c.focus.r_m), "focus.r_m must be > 0");
  if (c.is_ula()) {
    require(c.array.elements >= 1, "array.elements must be >= 1");
    require(finite_positive(c.array.spacing_wavelengths), "array.spacing_wavelengths must be > 0");
    require(finite_positive(c.array.dipole_length_wavelengths), "array.dipole_length_wavelengths must be > 0");
    require(finite_positive(c.array.circuit.q), "array.circuit.q must be > 0");
  } else {
    require(c.ris.cells_x >= 1 && c.ris.cells_y >= 1, "ris.cells_x and ris.cells_y must be >= 1");
    require(finite_positive(c.ris.spacing_wavelengths), "ris.spacing_wavelengths must be > 0");
    require(finite_positive(c.ris.dipole_length_wavelengths), "ris.dipole_length_wavelengths must be > 0");
    require(finite_positive(c.ris.cell_resistance_ohm), "ris.cell_resistance_ohm must be > 0");
    require(std::isfinite(c.ris.cell_height_wavelengths) && c.ris.cell_height_wavelengths >= 0.0,
            "ris.cell_height_wavelengths must be >= 0");
    require(finite_positive(c.ris.varactor.c_min_f) && c.ris.varactor.c_max_f > c.ris.varactor.c_min_f,
            "ris.varactor needs 0 < c_min_f < c_max_f");
    require(c.ris.varactor.series_resistance_ohm >= 0.0, "ris.varactor.series_resistance_ohm must be >= 0");
    require(c.incident.polarization == "theta" || c.incident.polarization == "phi",
            "incident.polarization must be \"theta\" or \"phi\"");
    require(c.incident.theta_deg >= 0.0 && c.incident.theta_deg < 90.0, "incident.theta_deg must be in [0, 90)");
    require(!c.operator_file, "ris-focus supports synthetic operators only");
  }
  if (c.kind == ScenarioKind::UlaTaper) require(c.taper_sidelobe_db.has_value(), "ula-taper needs taper.sidelobe_db");
  if (c.taper_sidelobe_db) require(finite_positive(*c.taper_sidelobe_db), "taper.sidelobe_db must be > 0");
  if (c.kind == ScenarioKind::UlaObstacle) {
    require(c.obstacle.has_value(), "ula-obstacle needs an obstacle");
    require(!c.wants_pc() || c.operator_file.has_value(),
            "the physically consistent obstacle model needs an ingested operator (operator_source.nfop); "
            "use \"models\": \"sw\" with synthetic structures");
  }
  if (c.obstacle) require(finite_positive(c.obstacle->radius_m), "obstacle.radius_m must be > 0");

  const SweepSpec& s = c.sweep;
  if (s.axis == SweepAxis::Grid2D) {
    require(s.x_points >= 1 && s.z_points >= 1, "sweep grid2d needs x_points, z_points >= 1");
    require(s.x_stop >= s.x_start && s.z_stop >= s.z_start, "sweep grid2d ranges must be ascending");
    const CartesianCoord fc = sph_to_cart(c.focus.sph());
    require(std::abs(fc.y) < 1e-9 * c.focus.r_m && fc.x >= s.x_start - 1e-12 && fc.x <= s.x_stop + 1e-12 &&
                fc.z >= s.z_start - 1e-12 && fc.z <= s.z_stop + 1e-12,
            "focus must lie inside the grid2d sweep rectangle");
  } else {
    require(s.points >= 1, "sweep.points must be >= 1");
    require(s.stop >= s.start, "sweep range must be ascending");
    require(s.points > 1 || s.start == s.stop, "a single-point sweep needs start == stop");
    double focus_value = 0.0;
    switch (s.axis) {
      case SweepAxis::Distance:
        require(s.start > 0.0, "distance sweep must start at r > 0");
        focus_value = c.focus.r_m;
        break;
      case SweepAxis::Angle: focus_value = c.focus.theta_deg; break;
      case SweepAxis::Frequency:
        require(s.start > 0.0, "frequency sweep must start above 0 Hz");
        focus_value = c.frequency_hz;
        break;
      case SweepAxis::Grid2D: break;
    }
    const double slack = 1e-9 * std::max(std::abs(s.start), std::abs(s.stop));
    require(focus_value >= s.start - slack && focus_value <= s.stop + slack, "focus must lie inside the sweep range");
  }
}

inline ScenarioConfig parse_config(const json& j) {
  detail::StrictObject o(j, "config");
  ScenarioConfig c;

  const std::string kind = o.get<std::string>("scenario");
  if (kind == "ula-focus") c.kind = ScenarioKind::UlaFocus;
  else if (kind == "ula-taper") c.kind = ScenarioKind::UlaTaper;
  else if (kind == "ula-obstacle") c.kind = ScenarioKind::UlaObstacle;
  else if (kind == "ris-focus") c.kind = ScenarioKind::RisFocus;
  else throw Error(ErrorCode::ConfigError, "unknown scenario '" + kind + "'");

  c.frequency_hz = o.get<double>("frequency_hz");
  o.maybe("reference_impedance_ohm", c.reference_impedance_ohm);
  o.maybe("seed", c.seed);
  if (o.has("models")) {
    const std::string m = o.get<std::string>("models");
    if (m == "both") c.models = ModelSelection::Both;
    else if (m == "sw") c.models = ModelSelection::SphericalWave;
    else if (m == "pc") c.models = ModelSelection::PhysicallyConsistent;
    else throw Error(ErrorCode::ConfigError, "models must be both, sw or pc");
  } else {
    o.touch("models");
  }

  if (o.has("operator_source")) {
    const json& src = o.raw("operator_source");
    if (src.is_string()) {
      if (src.get<std::string>() != "synthetic") throw Error(ErrorCode::ConfigError, "operator_source must be \"synthetic\" or {\"nfop\": path}");
    } else {
      detail::StrictObject so(src, "config.operator_source");
      c.operator_file = so.get<std::string>("nfop");
      so.finish();
    }
  } else {
    o.touch("operator_source");
  }

  if (o.has("tuning_network")) {
    detail::StrictObject t(o.raw("tuning_network"), "config.tuning_network");
    c.tuning_touchstone = t.get<std::string>("touchstone");
    t.finish();
  } else {
    o.touch("tuning_network");
  }

  if (o.has("array")) {
    detail::StrictObject a(o.raw("array"), "config.array");
    a.maybe("elements", c.array.elements);
    a.maybe("spacing_wavelengths", c.array.spacing_wavelengths);
    a.maybe("dipole_length_wavelengths", c.array.dipole_length_wavelengths);
    a.maybe("mutual_coupling", c.array.mutual_coupling);
    if (a.has("circuit")) {
      detail::StrictObject cc(a.raw("circuit"), "config.array.circuit");
      cc.maybe("resistance_ohm", c.array.circuit.resistance_ohm);
      cc.maybe("resonance_hz", c.array.circuit.resonance_hz);
      cc.maybe("q", c.array.circuit.q);
      cc.maybe("q_reference_ohm", c.array.circuit.q_reference_ohm);
      cc.finish();
    } else {
      a.touch("circuit");
    }
    a.finish();
  } else {
    o.touch("array");
  }

  if (o.has("ris")) {
    detail::StrictObject r(o.raw("ris"), "config.ris");
    r.maybe("cells_x", c.ris.cells_x);
    r.maybe("cells_y", c.ris.cells_y);
    r.maybe("spacing_wavelengths", c.ris.spacing_wavelengths);
    r.maybe("dipole_length_wavelengths", c.ris.dipole_length_wavelengths);
    r.maybe("cell_height_wavelengths", c.ris.cell_height_wavelengths);
    r.maybe("cell_resistance_ohm", c.ris.cell_resistance_ohm);
    r.maybe("cell_inductance_h", c.ris.cell_inductance_h);
    r.maybe("specular_background", c.ris.specular_background);
    r.maybe("po_points_per_wavelength", c.ris.po_points_per_wavelength);
    r.maybe("mutual_coupling", c.ris.mutual_coupling);
    if (r.has("varactor")) {
      detail::StrictObject v(r.raw("varactor"), "config.ris.varactor");
      v.maybe("c_min_f", c.ris.varactor.c_min_f);
      v.maybe("c_max_f", c.ris.varactor.c_max_f);
      v.maybe("series_resistance_ohm", c.ris.varactor.series_resistance_ohm);
      v.finish();
    } else {
      r.touch("varactor");
    }
    r.finish();
  } else {
    o.touch("ris");
  }

  c.focus = detail::parse_point(o.raw("focus"), "config.focus");
  if (o.has("normalization_focus")) {
    c.normalization_focus = detail::parse_point(o.raw("normalization_focus"), "config.normalization_focus");
  } else {
    o.touch("normalization_focus");
  }

  if (o.has("incident")) {
    detail::StrictObject in(o.raw("incident"), "config.incident");
    c.incident.theta_deg = in.get<double>("theta_deg");
    c.incident.phi_deg = in.get<double>("phi_deg");
    in.maybe("polarization", c.incident.polarization);
    in.finish();
  } else {
    o.touch("incident");
  }

  if (o.has("obstacle")) {
    detail::StrictObject ob(o.raw("obstacle"), "config.obstacle");
    ObstacleSpec obs;
    obs.center.r_m = ob.get<double>("r_m");
    obs.center.theta_deg = ob.get<double>("theta_deg");
    obs.center.phi_deg = ob.get<double>("phi_deg");
    obs.radius_m = ob.get<double>("radius_m");
    ob.finish();
    c.obstacle = obs;
  } else {
    o.touch("obstacle");
  }

  if (o.has("taper")) {
    detail::StrictObject t(o.raw("taper"), "config.taper");
    c.taper_sidelobe_db = t.get<double>("sidelobe_db");
    t.finish();
  } else {
    o.touch("taper");
  }

  {
    detail::StrictObject s(o.raw("sweep"), "config.sweep");
    c.sweep.axis = parse_axis(s.get<std::string>("axis"));
    if (c.sweep.axis == SweepAxis::Grid2D) {
      c.sweep.x_start = s.get<double>("x_start");
      c.sweep.x_stop = s.get<double>("x_stop");
      c.sweep.x_points = s.get<int>("x_points");
      c.sweep.z_start = s.get<double>("z_start");
      c.sweep.z_stop = s.get<double>("z_stop");
      c.sweep.z_points = s.get<int>("z_points");
    } else {
      c.sweep.start = s.get<double>("start");
      c.sweep.stop = s.get<double>("stop");
      c.sweep.points = s.get<int>("points");
    }
    s.finish();
  }

  if (o.has("optimizer")) {
    detail::StrictObject op(o.raw("optimizer"), "config.optimizer");
    op.maybe("eig_tol", c.optimizer.eig_tol);
    op.maybe("eig_max_iter", c.optimizer.eig_max_iter);
    op.maybe("ascent_tol", c.optimizer.ascent_tol);
    op.maybe("ascent_max_iter", c.optimizer.ascent_max_iter);
    op.maybe("fd_step", c.optimizer.fd_step);
    op.maybe("gradient", c.optimizer.gradient);
    op.finish();
    if (c.optimizer.gradient != "analytic" && c.optimizer.gradient != "finite-difference") {
      throw Error(ErrorCode::ConfigError, "optimizer.gradient must be \"analytic\" or \"finite-difference\"");
    }
  } else {
    o.touch("optimizer");
  }

  o.finish();
  validate_config(c);
  return c;
}

inline json config_to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = to_string(c.kind);
  j["frequency_hz"] = c.frequency_hz;
  j["reference_impedance_ohm"] = c.reference_impedance_ohm;
  j["models"] = to_string(c.models);
  j["seed"] = c.seed;
  j["operator_source"] = c.operator_file ? json{{"nfop", *c.operator_file}} : json("synthetic");
  if (c.tuning_touchstone) j["tuning_network"] = {{"touchstone", *c.tuning_touchstone}};
  if (c.is_ula()) {
    json circuit = {{"q", c.array.circuit.q}};
    if (c.array.circuit.resistance_ohm) circuit["resistance_ohm"] = *c.array.circuit.resistance_ohm;
    if (c.array.circuit.resonance_hz) circuit["resonance_hz"] = *c.array.circuit.resonance_hz;
    if (c.array.circuit.q_reference_ohm) circuit["q_reference_ohm"] = *c.array.circuit.q_reference_ohm;
    j["array"] = {{"elements", c.array.elements},
                  {"spacing_wavelengths", c.array.spacing_wavelengths},
                  {"dipole_length_wavelengths", c.array.dipole_length_wavelengths},
                  {"mutual_coupling", c.array.mutual_coupling},
                  {"circuit", circuit}};
  } else {
    json ris = {{"cells_x", c.ris.cells_x},
                {"cells_y", c.ris.cells_y},
                {"spacing_wavelengths", c.ris.spacing_wavelengths},
                {"dipole_length_wavelengths", c.ris.dipole_length_wavelengths},
                {"cell_height_wavelengths", c.ris.cell_height_wavelengths},
                {"cell_resistance_ohm", c.ris.cell_resistance_ohm},
                {"varactor",
                 {{"c_min_f", c.ris.varactor.c_min_f},
                  {"c_max_f", c.ris.varactor.c_max_f},
                  {"series_resistance_ohm", c.ris.varactor.series_resistance_ohm}}},
                {"specular_background", c.ris.specular_background},
                {"po_points_per_wavelength", c.ris.po_points_per_wavelength},
                {"mutual_coupling", c.ris.mutual_coupling}};
    if (c.ris.cell_inductance_h) ris["cell_inductance_h"] = *c.ris.cell_inductance_h;
    j["ris"] = ris;
    j["incident"] = {{"theta_deg", c.incident.theta_deg},
                     {"phi_deg", c.incident.phi_deg},
                     {"polarization", c.incident.polarization}};
  }
  j["focus"] = detail::point_json(c.focus);
  if (c.normalization_focus) j["normalization_focus"] = detail::point_json(*c.normalization_focus);
  if (c.obstacle) {
    j["obstacle"] = {{"r_m", c.obstacle->center.r_m},
                     {"theta_deg", c.obstacle->center.theta_deg},
                     {"phi_deg", c.obstacle->center.phi_deg},
                     {"radius_m", c.obstacle->radius_m}};
  }
  if (c.taper_sidelobe_db) j["taper"] = {{"sidelobe_db", *c.taper_sidelobe_db}};
  if (c.sweep.axis == SweepAxis::Grid2D) {
    j["sweep"] = {{"axis", "grid2d"},
                  {"x_start", c.sweep.x_start}, {"x_stop", c.sweep.x_stop}, {"x_points", c.sweep.x_points},
                  {"z_start", c.sweep.z_start}, {"z_stop", c.sweep.z_stop}, {"z_points", c.sweep.z_points}};
  } else {
    j["sweep"] = {{"axis", to_string(c.sweep.axis)},
                  {"start", c.sweep.start}, {"stop", c.sweep.stop}, {"points", c.sweep.points}};
  }
  j["optimizer"] = {{"eig_tol", c.optimizer.eig_tol},
                    {"eig_max_iter", c.optimizer.eig_max_iter},
                    {"ascent_tol", c.optimizer.ascent_tol},
                    {"ascent_max_iter", c.optimizer.ascent_max_iter},
                    {"fd_step", c.optimizer.fd_step},
                    {"gradient", c.optimizer.gradient}};
  return j;
}

/// Relative file references resolve against the config file's directory;
/// every referenced file must exist.
inline void resolve_paths(ScenarioConfig& c, const std::filesystem::path& base_dir) {
  auto fix = [&](std::optional<std::string>& p) {
    if (!p) return;
    std::filesystem::path q(*p);
    if (q.is_relative()) q = base_dir / q;
    if (!std::filesystem::exists(q)) throw Error(ErrorCode::ConfigError, "referenced file does not exist: " + q.string());
    *p = q.string();
  };
  fix(c.operator_file);
  fix(c.tuning_touchstone);
}

inline ScenarioConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, "'" + path + "' is not valid JSON: " + e.what());
  }
  ScenarioConfig c = parse_config(j);
  resolve_paths(c, std::filesystem::absolute(path).parent_path());
  return c;
}

/// 64-bit FNV-1a of the canonical JSON form, as 16 hex digits.
inline std::string config_hash(const ScenarioConfig& c) {
  const std::string canon = config_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Default sweep for one axis, centred on the configured focus.
inline SweepSpec default_sweep(const ScenarioConfig& c, SweepAxis axis) {
  SweepSpec s;
  s.axis = axis;
  const double lambda = 1.0 / (std::sqrt(kEpsilon0 * kMu0) * c.frequency_hz);
  switch (axis) {
    case SweepAxis::Distance: {
      const double extent = c.is_ula() ? (c.array.elements - 1) * c.array.spacing_wavelengths * lambda
                                       : std::hypot(c.ris.cells_x, c.ris.cells_y) * c.ris.spacing_wavelengths * lambda;
      const double step = 0.02;
      const double lo = std::ceil((0.5 * extent + 0.2 * lambda) / step) * step;
      s.start = std::min(lo, c.focus.r_m);
      s.stop = std::max(2.0 * c.focus.r_m, s.start + step);
      s.points = static_cast<int>(std::lround((s.stop - s.start) / step)) + 1;
      break;
    }
    case SweepAxis::Angle:
      if (c.is_ula()) {
        s.start = 0.0;
        s.stop = 180.0;
        s.points = 721;
      } else {
        s.start = -80.0;
        s.stop = 80.0;
        s.points = 641;
      }
      break;
    case SweepAxis::Frequency:
      s.start = 0.95 * c.frequency_hz;
      s.stop = 1.05 * c.frequency_hz;
      s.points = 61;
      break;
    case SweepAxis::Grid2D: {
      const CartesianCoord fc = sph_to_cart(c.focus.sph());
      const double reach = 1.5 * c.focus.r_m;
      s.x_start = std::min(0.0, fc.x) - (c.is_ula() ? 0.0 : reach);
      s.x_stop = std::max(fc.x, 0.0) + reach;
      s.z_start = c.is_ula() ? fc.z - reach : 0.05;
      s.z_stop = fc.z + reach;
      s.x_points = 61;
      s.z_points = 61;
      break;
    }
  }
  return s;
}

/// The three paper configurations.
inline ScenarioConfig scenario_template(int which) {
  ScenarioConfig c;
  switch (which) {
    case 1:
      c.kind = ScenarioKind::UlaFocus;
      c.frequency_hz = 10e9;
      c.array.elements = 128;
      c.array.spacing_wavelengths = 0.5;
      c.focus = {1.92, 30.0, 0.0};
      c.sweep = {SweepAxis::Distance, 1.0, 4.0, 151};
      return c;
    case 2:
      c.kind = ScenarioKind::UlaObstacle;
      c.frequency_hz = 10e9;
      c.models = ModelSelection::SphericalWave;
      c.array.elements = 128;
      c.array.spacing_wavelengths = 0.5;
      c.focus = {2.5, 30.0, 0.0};
      c.normalization_focus = PointSpec{1.92, 30.0, 0.0};
      c.obstacle = ObstacleSpec{{1.77, 30.0, 0.0}, 0.10};
      c.sweep = {SweepAxis::Distance, 1.0, 4.0, 151};
      return c;
    case 3:
      c.kind = ScenarioKind::RisFocus;
      c.frequency_hz = 5.8e9;
      c.ris.cells_x = 32;
      c.ris.cells_y = 4;
      c.ris.spacing_wavelengths = 0.58;
      c.incident = {30.0, 0.0, "phi"};
      c.focus = {0.96, 0.0, 0.0};
      c.sweep = {SweepAxis::Angle, -80.0, 80.0, 641};
      return c;
    default:
      throw Error(ErrorCode::ConfigError, "scenario template must be 1, 2 or 3");
  }
}

}  // namespace nfrems
