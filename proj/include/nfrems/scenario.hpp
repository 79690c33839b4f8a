#pragma once

// Scenario orchestration: builds both models from a ScenarioConfig, computes
// the focusing solutions, and evaluates normalized energy densities over a
// sweep.
//
// Normalization (per model, at the normalization focus p0, PC solution v0):
//   SW rows are divided by |c(p0)^T v0|^2          (RIS: |c^T diag(gamma0) g|^2)
//   PC rows are divided by |G(p0) v0|^2             (RIS: |a_N(p0; gamma0)|^2)
// Every quantity at a point is computed from that point's own 6 x M block, so
// a sample equal to p0 reproduces the denominator bit for bit.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nfrems/baseline.hpp"
#include "nfrems/config.hpp"
#include "nfrems/em_core.hpp"
#include "nfrems/error.hpp"
#include "nfrems/io/csv.hpp"
#include "nfrems/io/nfop.hpp"
#include "nfrems/io/touchstone.hpp"
#include "nfrems/multiport.hpp"
#include "nfrems/optimize.hpp"
#include "nfrems/synthetic.hpp"

namespace nfrems {

inline constexpr const char* kVersion = "1.0.0";

/// Radiating-structure blocks evaluated one sample point at a time.
class FieldSource {
 public:
  virtual ~FieldSource() = default;
  [[nodiscard]] virtual const CMat& s_rr() const = 0;
  [[nodiscard]] virtual const CMat& s_rf() const = 0;
  [[nodiscard]] virtual CMat s_nr_block(const SphericalCoord& p) const = 0;  // 6 x M
  [[nodiscard]] virtual CMat s_nf_block(const SphericalCoord& p) const = 0;  // 6 x P
};

class SyntheticSource final : public FieldSource {
 public:
  SyntheticSource(ArrayLayout layout, const FrequencySpec& f, std::vector<PlaneWave> incident, SyntheticOptions opts)
      : layout_(std::move(layout)), f_(f), incident_(std::move(incident)), opts_(std::move(opts)) {
    pm_ = port_model(layout_, incident_, f_, opts_);
    std::tie(centre_, radius_) = exclusion_sphere(layout_, f_, opts_);
  }

  [[nodiscard]] const CMat& s_rr() const override { return pm_.s_rr; }
  [[nodiscard]] const CMat& s_rf() const override { return pm_.s_rf; }

  [[nodiscard]] CMat s_nr_block(const SphericalCoord& p) const override {
    return unit_current_field_block(layout_, checked(p), f_) * pm_.current_per_wave;
  }

  [[nodiscard]] CMat s_nf_block(const SphericalCoord& p) const override {
    const CartesianCoord x = checked(p);
    CMat out = CMat::Zero(6, static_cast<Eigen::Index>(incident_.size()));
    if (!opts_.background) return out;
    for (std::size_t w = 0; w < incident_.size(); ++w) {
      out.col(static_cast<Eigen::Index>(w)) =
          specular_background(*opts_.background, incident_[w], {x}, f_, opts_.po_points_per_wavelength);
    }
    return out;
  }

 private:
  CartesianCoord checked(const SphericalCoord& p) const {
    const CartesianCoord x = sph_to_cart(p);
    if (!((x.vec() - centre_).norm() > radius_)) {
      throw Error(ErrorCode::GridTooClose, "sample point inside the structure's exclusion sphere");
    }
    return x;
  }

  ArrayLayout layout_;
  FrequencySpec f_;
  std::vector<PlaneWave> incident_;
  SyntheticOptions opts_;
  PortModel pm_;
  Vec3 centre_;
  double radius_ = 0.0;
};

/// Blocks read from a stored operator; only its grid points can be sampled.
class SampledSource final : public FieldSource {
 public:
  explicit SampledSource(RadiatingStructureOperator op) : op_(std::move(op)) { op_.validate(); }

  [[nodiscard]] const CMat& s_rr() const override { return op_.s_rr; }
  [[nodiscard]] const CMat& s_rf() const override { return op_.s_rf; }
  [[nodiscard]] CMat s_nr_block(const SphericalCoord& p) const override { return op_.s_nr.middleRows(6 * index(p), 6); }
  [[nodiscard]] CMat s_nf_block(const SphericalCoord& p) const override { return op_.s_nf.middleRows(6 * index(p), 6); }
  [[nodiscard]] const RadiatingStructureOperator& op() const { return op_; }

 private:
  Eigen::Index index(const SphericalCoord& p) const {
    const long i = op_.grid.find(p, 1e-9);
    if (i < 0) throw Error(ErrorCode::InvalidParams, "sample point is not on the ingested operator's grid");
    return static_cast<Eigen::Index>(i);
  }

  RadiatingStructureOperator op_;
};

/// One sweep sample; `inside_obstacle` rows carry NaN values.
struct SweepSample {
  SphericalCoord p;
  double f_hz = 0.0;
};

/// ULA elements and circuit from the configuration (geometry fixed at the carrier).
inline ArrayLayout ula_from_config(const ScenarioConfig& c) {
  const FrequencySpec f(c.frequency_hz);
  const double dl = c.array.dipole_length_wavelengths * f.lambda();
  const double r_rad = hertzian_radiation_resistance(dl, f);
  const double r = c.array.circuit.resistance_ohm.value_or(r_rad);
  const double f_res = c.array.circuit.resonance_hz.value_or(c.frequency_hz);
  const double q_ref = c.array.circuit.q_reference_ohm.value_or(c.reference_impedance_ohm + r + r_rad);
  const ElementCircuit circuit = ElementCircuit::from_resonance(r, f_res, c.array.circuit.q, q_ref);
  return ula_layout(c.array.elements, c.array.spacing_wavelengths * f.lambda(), dl, circuit);
}

struct RisSetup {
  ArrayLayout layout;
  SyntheticOptions opts;
  PlaneWave wave;  // physical incident wave
  Varactor varactor;
  cplx z_cell;  // isolated cell port impedance, image included
  double spacing = 0.0;
};

/// The printed RIS channel exp(-j k d (m v_x + n v_y)) is the phase progression
/// of a wave travelling along +x for (theta_P, 0), i.e. one arriving from
/// azimuth phi_P + pi. The physical plane wave is built that way so both
/// models see the same excitation.
inline RisSetup ris_from_config(const ScenarioConfig& c) {
  const FrequencySpec f(c.frequency_hz);
  RisSetup s;
  s.spacing = c.ris.spacing_wavelengths * f.lambda();
  const double dl = c.ris.dipole_length_wavelengths * f.lambda();
  s.varactor = {c.ris.varactor.c_min_f, c.ris.varactor.c_max_f, c.ris.varactor.series_resistance_ohm};
  s.varactor.validate();
  s.layout = ris_layout(c.ris.cells_x, c.ris.cells_y, s.spacing, dl, Vec3::UnitY(),
                        ElementCircuit::series_rl(c.ris.cell_resistance_ohm, 0.0),
                        c.ris.cell_height_wavelengths * f.lambda());
  ArrayLayout single = s.layout;
  single.elements.resize(1);
  if (c.ris.cell_inductance_h) {
    s.layout.circuit.inductance = *c.ris.cell_inductance_h;
  } else {
    // Cancel the isolated cell's reactance (image term included) at C_mid.
    const double c_mid = std::sqrt(s.varactor.c_min * s.varactor.c_max);
    const double x_cell = impedance_matrix(single, f, false)(0, 0).imag();
    s.layout.circuit.inductance = (1.0 / (f.omega() * c_mid) - x_cell) / f.omega();
  }
  if (!(s.layout.circuit.inductance >= 0.0)) {
    throw Error(ErrorCode::ConfigError, "cell reactance cannot be tuned to resonance with a series inductor");
  }
  single.circuit = s.layout.circuit;
  s.z_cell = impedance_matrix(single, f, false)(0, 0);
  s.opts.mutual_coupling = c.ris.mutual_coupling;
  s.opts.r0 = c.reference_impedance_ohm;
  s.opts.po_points_per_wavelength = c.ris.po_points_per_wavelength;
  if (c.ris.specular_background) s.opts.background = RISAperture::around(s.layout, 0.5 * s.spacing);
  s.wave.theta = deg2rad(c.incident.theta_deg);
  s.wave.phi = wrap_azimuth(deg2rad(c.incident.phi_deg) + kPi);
  s.wave.pol_theta = c.incident.polarization == "theta" ? 1.0 : 0.0;
  s.wave.pol_phi = c.incident.polarization == "phi" ? 1.0 : 0.0;
  return s;
}

inline SWRISModel sw_ris_model(const ScenarioConfig& c, const RisSetup& s, const FrequencySpec& f) {
  SWRISModel m;
  m.cells_x = c.ris.cells_x;
  m.cells_y = c.ris.cells_y;
  m.spacing = s.spacing;
  m.f = f;
  m.theta_p = deg2rad(c.incident.theta_deg);
  m.phi_p = deg2rad(c.incident.phi_deg);
  return m;
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return out;
}

/// Sweep samples in output order. grid2d points inside the exclusion sphere
/// are dropped; any other axis rejects them with GridTooClose.
inline std::vector<SweepSample> sweep_samples(const ScenarioConfig& c, const Vec3& centre, double radius) {
  std::vector<SweepSample> out;
  const SweepSpec& s = c.sweep;
  auto outside = [&](const SphericalCoord& p) { return (sph_to_cart(p).vec() - centre).norm() > radius; };
  auto push = [&](const SphericalCoord& p, double f) {
    if (!outside(p)) {
      throw Error(ErrorCode::GridTooClose, "sweep point at r = " + io::fmt_g17(p.r) + " m lies inside the structure's exclusion sphere");
    }
    out.push_back({p, f});
  };
  switch (s.axis) {
    case SweepAxis::Distance:
      for (double r : linspace(s.start, s.stop, s.points)) push(PointSpec{r, c.focus.theta_deg, c.focus.phi_deg}.sph(), c.frequency_hz);
      break;
    case SweepAxis::Angle:
      for (double t : linspace(s.start, s.stop, s.points)) push(PointSpec{c.focus.r_m, t, c.focus.phi_deg}.sph(), c.frequency_hz);
      break;
    case SweepAxis::Frequency:
      for (double f : linspace(s.start, s.stop, s.points)) push(c.focus.sph(), f);
      break;
    case SweepAxis::Grid2D:
      for (double x : linspace(s.x_start, s.x_stop, s.x_points)) {
        for (double z : linspace(s.z_start, s.z_stop, s.z_points)) {
          const SphericalCoord p = cart_to_sph({x, 0.0, z});
          if (outside(p)) out.push_back({p, c.frequency_hz});
        }
      }
      break;
  }
  return out;
}

namespace detail {

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

inline double sw_value(const CVec& c, const CVec& v) { return std::norm((c.transpose() * v)(0)); }

inline double pc_value(const CMat& g_block, const CVec& v) { return (g_block * v).squaredNorm(); }

inline bool inside(const std::optional<ObstacleSpec>& obs, const SphericalCoord& p) {
  if (!obs) return false;
  return (sph_to_cart(p).vec() - sph_to_cart(obs->center.sph()).vec()).norm() <= obs->radius_m;
}

inline void check_denominator(double d, const char* what) {
  if (!(d > 0.0) || !std::isfinite(d)) throw Error(ErrorCode::ZeroDenominator, std::string(what) + " normalization is zero");
}

/// Stage tag prefixed to propagated errors.
template <class F>
auto stage(const char* name, F&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("[") + name + "] " + e.what());
  }
}

}  // namespace detail

/// Tuning network and frontend for the ULA cascade.
struct Cascade {
  TuningNetwork tn;
  RFFrontend fe;
};

inline Cascade ula_cascade(const ScenarioConfig& c, Eigen::Index m, const FrequencySpec& f) {
  if (!c.tuning_touchstone) return {pass_through_network(m), RFFrontend::matched(m, c.reference_impedance_ohm)};
  const io::TouchstoneData data = io::read_touchstone(*c.tuning_touchstone);
  if (std::abs(data.r0 - c.reference_impedance_ohm) > 1e-12 * c.reference_impedance_ohm) {
    throw Error(ErrorCode::ConfigError, "tuning network reference impedance differs from reference_impedance_ohm");
  }
  const CMat& s = data.at(f.hz());
  if (s.rows() != 2 * m) {
    throw Error(ErrorCode::DimensionMismatch, "tuning network needs " + std::to_string(2 * m) + " ports (N = M = " +
                                                  std::to_string(m) + "), file has " + std::to_string(s.rows()));
  }
  return {partition_network(s, m), RFFrontend::matched(m, c.reference_impedance_ohm)};
}

inline std::unique_ptr<FieldSource> ula_source(const ScenarioConfig& c, const ArrayLayout& layout, const FrequencySpec& f) {
  if (c.operator_file) {
    RadiatingStructureOperator op = io::read_nfop(*c.operator_file);
    if (std::abs(op.f.hz() - f.hz()) > 1e-9 * f.hz()) {
      throw Error(ErrorCode::OutOfRange, "ingested operator is only available at " + io::fmt_g17(op.f.hz()) + " Hz");
    }
    if (op.ports() != static_cast<Eigen::Index>(layout.size())) {
      throw Error(ErrorCode::DimensionMismatch, "ingested operator has " + std::to_string(op.ports()) +
                                                    " ports, the array has " + std::to_string(layout.size()));
    }
    return std::make_unique<SampledSource>(std::move(op));
  }
  SyntheticOptions opts;
  opts.mutual_coupling = c.array.mutual_coupling;
  opts.r0 = c.reference_impedance_ohm;
  return std::make_unique<SyntheticSource>(layout, f, std::vector<PlaneWave>{}, opts);
}

/// PC block G_v at one point: S_NR(p) times the incoming port waves per PA voltage.
inline CMat ula_gain_block(const FieldSource& src, const CMat& port_waves, const SphericalCoord& p) {
  return src.s_nr_block(p) * port_waves;
}

inline ResultSet run_ula(const ScenarioConfig& c) {
  const FrequencySpec fc(c.frequency_hz);
  const ArrayLayout layout = ula_from_config(c);
  const auto m = static_cast<Eigen::Index>(layout.size());
  const auto [centre, radius] = exclusion_sphere(layout, fc);
  const std::vector<SweepSample> samples = detail::stage("sweep", [&] { return sweep_samples(c, centre, radius); });
  const SphericalCoord focus = c.focus.sph();
  const SphericalCoord norm_focus = c.normalization_focus.value_or(c.focus).sph();
  const bool obstacle = c.obstacle.has_value();
  if (detail::inside(c.obstacle, focus)) throw Error(ErrorCode::PointInsideObstacle, "focus lies inside the obstacle");

  auto src_c = detail::stage("structure", [&] { return ula_source(c, layout, fc); });
  const Cascade cas = detail::stage("cascade", [&] { return ula_cascade(c, m, fc); });
  const CMat y_c = detail::stage("cascade", [&] { return port_waves_vtx(src_c->s_rr(), cas.tn, cas.fe); });

  std::optional<RVec> window;
  if (c.taper_sidelobe_db) window = dolph_chebyshev(static_cast<int>(m), *c.taper_sidelobe_db);
  auto shape = [&](const CVec& v) { return window ? apply_taper(v, *window) : v; };

  ResultSet rs;
  auto pc_vector = [&](const FieldSource& src, const CMat& y, const SphericalCoord& p) {
    const EigenResult e = pc_focus_vector(ula_gain_block(src, y, p), c.optimizer.eig_tol, c.optimizer.eig_max_iter);
    rs.eigen_degenerate = rs.eigen_degenerate || e.degenerate;
    return shape(e.v);
  };

  // Focusing solutions.
  const SWArrayModel sw_c{layout.positions(), fc};
  std::optional<std::vector<bool>> focus_mask;
  if (obstacle) {
    const SphereObstacle obs{c.obstacle->center.sph(), c.obstacle->radius_m};
    focus_mask = obstacle_mask(sw_c, obs, focus);
  }
  const CVec v_sw = detail::stage("sw-focus", [&] {
    CVec cf = array_factor(sw_c, focus);
    if (focus_mask) cf = masked(cf, *focus_mask);
    return shape(sw_focus_vector(cf));
  });
  // With a synthetic structure the obstacle is invisible to the PC model, so
  // no PC solution exists for it there.
  const bool pc_rows = c.wants_pc();
  const bool pc_solution = !obstacle || c.operator_file.has_value();
  CVec v_pc;
  if (pc_solution) v_pc = detail::stage("pc-focus", [&] { return pc_vector(*src_c, y_c, focus); });

  // Normalization. An obstacle scenario keeps the free-space constant of the
  // reference focus; the SW side then uses the synthetic free-space solution.
  CVec v_norm_pc, v_norm_sw;
  detail::stage("normalize", [&] {
    if (c.normalization_focus.value_or(c.focus) == c.focus && pc_solution && !obstacle) {
      v_norm_pc = v_pc;
    } else if (pc_rows) {
      v_norm_pc = pc_vector(*src_c, y_c, norm_focus);
    }
    if (obstacle) {
      ScenarioConfig free = c;
      free.operator_file.reset();
      auto free_src = ula_source(free, layout, fc);
      const CMat y_free = port_waves_vtx(free_src->s_rr(), cas.tn, cas.fe);
      v_norm_sw = pc_vector(*free_src, y_free, norm_focus);
    } else {
      v_norm_sw = v_norm_pc;
    }
    rs.denominators.sw = detail::sw_value(array_factor(sw_c, norm_focus), v_norm_sw);
    detail::check_denominator(rs.denominators.sw, "SW");
    if (pc_rows) {
      rs.denominators.pc = detail::pc_value(ula_gain_block(*src_c, y_c, norm_focus), v_norm_pc);
      detail::check_denominator(rs.denominators.pc, "PC");
    }
    return 0;
  });

  // Per-frequency evaluation state (the carrier entry reuses the focus-time objects).
  struct FreqState {
    std::shared_ptr<FieldSource> src;
    CMat y;
    SWArrayModel sw;
  };
  std::map<double, FreqState> states;
  std::shared_ptr<FieldSource> src_shared(std::move(src_c));
  states.emplace(fc.hz(), FreqState{src_shared, y_c, sw_c});
  auto state_for = [&](double f_hz) -> const FreqState& {
    auto it = states.find(f_hz);
    if (it != states.end()) return it->second;
    const FrequencySpec f(f_hz);
    std::shared_ptr<FieldSource> src;
    CMat y;
    if (pc_rows) {
      src = ula_source(c, layout, f);
      const Cascade cf = ula_cascade(c, m, f);
      y = port_waves_vtx(src->s_rr(), cf.tn, cf.fe);
    }
    return states.emplace(f_hz, FreqState{src, y, SWArrayModel{layout.positions(), f}}).first->second;
  };

  std::optional<SphereObstacle> obs;
  if (obstacle) obs = SphereObstacle{c.obstacle->center.sph(), c.obstacle->radius_m};
  rs.rows.reserve(samples.size());
  detail::stage("evaluate", [&] {
    for (const SweepSample& s : samples) {
      ResultRow row{s.p.r, s.p.theta, s.p.phi, s.f_hz, detail::nan(), detail::nan(), detail::nan(), detail::nan()};
      if (!detail::inside(c.obstacle, s.p)) {
        const FreqState& st = state_for(s.f_hz);
        if (c.wants_sw()) {
          CVec cp = array_factor(st.sw, s.p);
          if (obs) cp = masked(cp, obstacle_mask(st.sw, *obs, s.p));
          row.u_sw_swfocus = detail::sw_value(cp, v_sw) / rs.denominators.sw;
          if (pc_solution) row.u_sw_pcfocus = detail::sw_value(cp, v_pc) / rs.denominators.sw;
        }
        if (pc_rows) {
          const CMat g = ula_gain_block(*st.src, st.y, s.p);
          row.u_pc_swfocus = detail::pc_value(g, v_sw) / rs.denominators.pc;
          row.u_pc_pcfocus = detail::pc_value(g, v_pc) / rs.denominators.pc;
        }
      }
      rs.rows.push_back(row);
    }
    return 0;
  });
  return rs;
}

/// Focus energy of the RIS as a function of varactor capacitances, with its
/// adjoint gradient. With G = diag(gamma), A = I - S_RR G:
///   b_R = A^-1 S_RF,  a_N = Q G b_R + n
///   d a_N / d gamma_i = (Q + Q G A^-1 S_RR) e_i b_R,i
class RisFocusProblem {
 public:
  RisFocusProblem(const FieldSource& src, const SphericalCoord& focus, const Varactor& v, const FrequencySpec& f, double r0)
      : s_rr_(src.s_rr()), s_rf_(src.s_rf().col(0)), q_(src.s_nr_block(focus)), n_(src.s_nf_block(focus).col(0)),
        v_(v), f_(f), r0_(r0) {}

  [[nodiscard]] CVec gammas(const RVec& c) const {
    CVec g(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) g[i] = varactor_gamma(c[i], v_, f_, r0_);
    return g;
  }

  [[nodiscard]] double energy(const RVec& c) const {
    const CVec g = gammas(c);
    const CMat a = system(g);
    const CVec b = Eigen::PartialPivLU<CMat>(a).solve(s_rf_);
    return (q_ * g.cwiseProduct(b) + n_).squaredNorm();
  }

  [[nodiscard]] RVec gradient(const RVec& c) const {
    const CVec g = gammas(c);
    Eigen::PartialPivLU<CMat> lu(system(g));
    const CVec b = lu.solve(s_rf_);
    const CVec a = q_ * g.cwiseProduct(b) + n_;
    const CMat qg = q_ * g.asDiagonal();
    const CMat yt = lu.transpose().solve(CMat(qg.transpose()));  // (Q G A^-1)^T
    const CMat r = q_ + yt.transpose() * s_rr_;
    RVec grad(c.size());
    const double w = f_.omega();
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      const cplx z = v_.impedance(c[i], f_);
      const cplx dgamma = 2.0 * r0_ / ((z + r0_) * (z + r0_)) * (kJ / (w * c[i] * c[i]));
      grad[i] = 2.0 * (a.dot(r.col(i)) * b[i] * dgamma).real();
    }
    return grad;
  }

 private:
  [[nodiscard]] CMat system(const CVec& g) const {
    return CMat::Identity(s_rr_.rows(), s_rr_.cols()) - s_rr_ * g.asDiagonal();
  }

  CMat s_rr_;
  CVec s_rf_;
  CMat q_;
  CVec n_;
  Varactor v_;
  FrequencySpec f_;
  double r0_;
};

/// Incoming port waves of the loaded RIS under the single incident wave.
inline CVec ris_port_waves(const FieldSource& src, const CVec& gammas, double r0) {
  return port_waves_bf(src.s_rr(), src.s_rf(), load_network(gammas), RFFrontend::matched(0, r0)).col(0);
}

inline double ris_pc_value(const FieldSource& src, const CVec& port_waves, const SphericalCoord& p) {
  return (src.s_nr_block(p) * port_waves + src.s_nf_block(p).col(0)).squaredNorm();
}

struct RisSolution {
  CVec gamma_sw;           // ideal unit-modulus SW solution
  RVec c_init;             // varactor states whose cell phases follow arg(gamma_sw)
  RVec c_opt;              // after gradient ascent
  AscentResult ascent;
};

inline ResultSet run_ris(const ScenarioConfig& c) {
  const FrequencySpec fc(c.frequency_hz);
  const double r0 = c.reference_impedance_ohm;
  const RisSetup setup = ris_from_config(c);
  const auto [centre, radius] = exclusion_sphere(setup.layout, fc, setup.opts);
  const std::vector<SweepSample> samples = detail::stage("sweep", [&] { return sweep_samples(c, centre, radius); });
  const SphericalCoord focus = c.focus.sph();
  const SphericalCoord norm_focus = c.normalization_focus.value_or(c.focus).sph();

  auto make_source = [&](const FrequencySpec& f) {
    return std::make_shared<SyntheticSource>(setup.layout, f, std::vector<PlaneWave>{setup.wave}, setup.opts);
  };
  const auto src_c = detail::stage("structure", [&] { return make_source(fc); });
  const SWRISModel sw_c = sw_ris_model(c, setup, fc);

  RisSolution sol;
  detail::stage("sw-focus", [&] {
    sol.gamma_sw = ris_sw_gamma(array_factor(sw_c.array(), focus), ris_channel_g(sw_c));
    // The SW reflection coefficient is the cell's re-radiation phase, not the
    // port reflection against R0; the two differ wildly for a low-resistance cell.
    const CellResponseMap map(setup.z_cell, setup.varactor, fc);
    sol.c_init.resize(sol.gamma_sw.size());
    for (Eigen::Index i = 0; i < sol.gamma_sw.size(); ++i) {
      sol.c_init[i] = map.capacitance_for_phase(std::arg(sol.gamma_sw[i]));
    }
    return 0;
  });

  ResultSet rs;
  detail::stage("pc-focus", [&] {
    const RisFocusProblem problem(*src_c, focus, setup.varactor, fc, r0);
    FocusObjective obj;
    obj.evaluate = [&](const RVec& x) { return problem.energy(x); };
    if (c.optimizer.gradient == "analytic") obj.gradient = [&](const RVec& x) { return problem.gradient(x); };
    const auto n = sol.c_init.size();
    obj.domain = {RVec::Constant(n, setup.varactor.c_min), RVec::Constant(n, setup.varactor.c_max)};
    AscentOptions opts;
    opts.tol = c.optimizer.ascent_tol;
    opts.max_iter = c.optimizer.ascent_max_iter;
    opts.fd_step = c.optimizer.fd_step;
    sol.ascent = ris_gradient_ascent(obj, sol.c_init, opts);
    sol.c_opt = sol.ascent.x;
    return 0;
  });
  rs.ascent_trace = sol.ascent.trace;
  rs.ascent_converged = sol.ascent.converged;

  auto realized = [&](const RVec& caps, const FrequencySpec& f) {
    CVec g(caps.size());
    for (Eigen::Index i = 0; i < caps.size(); ++i) g[i] = varactor_gamma(caps[i], setup.varactor, f, r0);
    return g;
  };
  const CVec gamma_pc_c = realized(sol.c_opt, fc);
  // The PC solution as the SW model sees it: per-cell re-radiation coefficients.
  const CellResponseMap cells(setup.z_cell, setup.varactor, fc);
  CVec rho_pc(sol.c_opt.size());
  for (Eigen::Index i = 0; i < rho_pc.size(); ++i) rho_pc[i] = cells.response(sol.c_opt[i]);

  detail::stage("normalize", [&] {
    rs.denominators.sw = ris_sw_energy(sw_c, rho_pc, norm_focus);
    detail::check_denominator(rs.denominators.sw, "SW");
    rs.denominators.pc = ris_pc_value(*src_c, ris_port_waves(*src_c, gamma_pc_c, r0), norm_focus);
    detail::check_denominator(rs.denominators.pc, "PC");
    return 0;
  });

  struct FreqState {
    std::shared_ptr<SyntheticSource> src;
    CVec waves_sw, waves_pc;
    SWRISModel sw;
  };
  std::map<double, FreqState> states;
  auto state_for = [&](double f_hz) -> const FreqState& {
    auto it = states.find(f_hz);
    if (it != states.end()) return it->second;
    const FrequencySpec f(f_hz);
    FreqState st{f_hz == fc.hz() ? src_c : nullptr, {}, {}, sw_ris_model(c, setup, f)};
    if (c.wants_pc()) {
      if (!st.src) st.src = make_source(f);
      st.waves_sw = ris_port_waves(*st.src, realized(sol.c_init, f), r0);
      st.waves_pc = ris_port_waves(*st.src, realized(sol.c_opt, f), r0);
    }
    return states.emplace(f_hz, std::move(st)).first->second;
  };

  rs.rows.reserve(samples.size());
  detail::stage("evaluate", [&] {
    for (const SweepSample& s : samples) {
      ResultRow row{s.p.r, s.p.theta, s.p.phi, s.f_hz, detail::nan(), detail::nan(), detail::nan(), detail::nan()};
      const FreqState& st = state_for(s.f_hz);
      if (c.wants_sw()) {
        row.u_sw_swfocus = ris_sw_energy(st.sw, sol.gamma_sw, s.p) / rs.denominators.sw;
        row.u_sw_pcfocus = ris_sw_energy(st.sw, rho_pc, s.p) / rs.denominators.sw;
      }
      if (c.wants_pc()) {
        row.u_pc_swfocus = ris_pc_value(*st.src, st.waves_sw, s.p) / rs.denominators.pc;
        row.u_pc_pcfocus = ris_pc_value(*st.src, st.waves_pc, s.p) / rs.denominators.pc;
      }
      rs.rows.push_back(row);
    }
    return 0;
  });
  return rs;
}

inline ResultSet run_scenario(const ScenarioConfig& c) {
  validate_config(c);
  ResultSet rs = c.is_ula() ? run_ula(c) : run_ris(c);
  rs.config_hash = config_hash(c);
  rs.version = kVersion;
  return rs;
}

/// Divides raw (unnormalized) rows by the given denominators.
inline ResultSet normalize(ResultSet raw, const Denominators& d) {
  detail::check_denominator(d.sw, "SW");
  detail::check_denominator(d.pc, "PC");
  for (ResultRow& r : raw.rows) {
    r.u_sw_swfocus /= d.sw;
    r.u_sw_pcfocus /= d.sw;
    r.u_pc_swfocus /= d.pc;
    r.u_pc_pcfocus /= d.pc;
  }
  raw.denominators = d;
  return raw;
}

inline json metadata_json(const ResultSet& rs, const ScenarioConfig& c) {
  json j;
  j["config_hash"] = rs.config_hash;
  j["version"] = rs.version;
  j["scenario"] = to_string(c.kind);
  j["normalization"] = {{"sw", rs.denominators.sw}, {"pc", rs.denominators.pc}};
  j["rows"] = rs.rows.size();
  j["eigen_degenerate"] = rs.eigen_degenerate;
  if (!rs.ascent_trace.empty()) {
    j["ascent"] = {{"iterations", rs.ascent_trace.size() - 1},
                   {"converged", rs.ascent_converged},
                   {"initial", rs.ascent_trace.front()},
                   {"final", rs.ascent_trace.back()}};
  }
  return j;
}

}  // namespace nfrems
