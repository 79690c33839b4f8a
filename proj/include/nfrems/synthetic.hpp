#pragma once

// Analytic radiating structures: arrays of electrically short (Hertzian)
// dipoles with induced-EMF mutual coupling, an optional physical-optics
// background for a conducting RIS ground plate, and a varactor load model.
//
// Port conventions: the port current I flows into the element, the port
// voltage is V = Z I + V_oc, and power waves are a = (V + R0 I) / (2 sqrt R0),
// b = (V - R0 I) / (2 sqrt R0).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nfrems/em_core.hpp"
#include "nfrems/error.hpp"
#include "nfrems/multiport.hpp"

namespace nfrems {

struct DipoleSpec {
  CartesianCoord position;
  Vec3 orientation{0.0, 0.0, 1.0};
  double dl = 0.0;  // effective length, m

  void validate() const {
    if (!(dl > 0.0)) throw Error(ErrorCode::InvalidParams, "dipole length must be > 0");
    if (std::abs(orientation.norm() - 1.0) > 1e-12) {
      throw Error(ErrorCode::InvalidParams, "dipole orientation must be a unit vector");
    }
  }
};

/// Radiation resistance of a Hertzian dipole for RMS currents: Z0 k^2 dl^2 / (6 pi).
inline double hertzian_radiation_resistance(double dl, const FrequencySpec& f) {
  const double kl = f.k() * dl;
  return f.z0() * kl * kl / (6.0 * kPi);
}

/// Exact field of an infinitesimal current element with complex moment
/// `moment` = I dl u (A m) located at `source`, including the 1/R^2 and 1/R^3
/// terms so it stays valid in the reactive near field.
inline FieldSample hertzian_field_moment(const CVec3& moment, const Vec3& source, const CartesianCoord& point,
                                         const FrequencySpec& f) {
  const Vec3 d = point.vec() - source;
  const double r = d.norm();
  if (!(r > 0.0)) throw Error(ErrorCode::SingularPoint, "field requested at the source location");
  const double k = f.k();
  const double eta = f.z0();
  const CVec3 rhat = (d / r).cast<cplx>();
  const cplx inv_jkr = 1.0 / (kJ * k * r);
  const cplx g = std::exp(-kJ * k * r) / (4.0 * kPi * r);
  const cplx radial_term = 1.0 + inv_jkr;
  const cplx transverse_term = 1.0 + inv_jkr + inv_jkr * inv_jkr;

  const cplx p_r = rhat.dot(moment);  // rhat is real, so no conjugation happens
  const CVec3 p_perp = moment - p_r * rhat;

  FieldSample s;
  s.E = -kJ * eta * k * g * transverse_term * p_perp + (2.0 * eta * g * radial_term / r) * p_r * rhat;
  s.H = kJ * k * g * radial_term * cross(moment, rhat);
  s.at = point;
  return s;
}

inline FieldSample hertzian_field(const DipoleSpec& d, cplx current, const CartesianCoord& point,
                                  const FrequencySpec& f) {
  if ((point.vec() - d.position.vec()).norm() <= d.dl) {
    throw Error(ErrorCode::SingularPoint, "observation point within one dipole length of the element");
  }
  return hertzian_field_moment(current * d.dl * d.orientation.cast<cplx>(), d.position.vec(), point, f);
}

/// Series circuit behind each element port: Z(f) = R + j w L + 1 / (j w C).
/// A capacitance of 0 means no series capacitor.
struct ElementCircuit {
  double resistance = 0.0;   // ohm
  double inductance = 0.0;   // H
  double capacitance = 0.0;  // F

  /// Series resonator R + j Q R_q (f / f_res - f_res / f). With R_q = R this is
  /// R (1 + j Q (f / f_res - f_res / f)); choosing R_q as the loop resistance
  /// seen from a source makes Q the loaded quality factor.
  static ElementCircuit from_resonance(double resistance, double f_res, double q, double q_reference) {
    if (!(resistance > 0.0) || !(f_res > 0.0) || !(q > 0.0) || !(q_reference > 0.0)) {
      throw Error(ErrorCode::InvalidParams, "resonant circuit needs R, f_res, Q and R_q > 0");
    }
    const double w0 = 2.0 * kPi * f_res;
    return {resistance, q * q_reference / w0, 1.0 / (q * q_reference * w0)};
  }

  static ElementCircuit series_rl(double resistance, double inductance) {
    if (!(resistance > 0.0) || !(inductance >= 0.0)) {
      throw Error(ErrorCode::InvalidParams, "series RL circuit needs R > 0 and L >= 0");
    }
    return {resistance, inductance, 0.0};
  }

  [[nodiscard]] cplx impedance(const FrequencySpec& f) const {
    const double w = f.omega();
    double x = w * inductance;
    if (capacitance > 0.0) x -= 1.0 / (w * capacitance);
    return {resistance, x};
  }
};

struct ArrayLayout {
  std::vector<DipoleSpec> elements;
  ElementCircuit circuit;
  std::string geometry;
  std::optional<double> ground_plane_z;  // infinite conducting plane below every element, handled by images

  [[nodiscard]] std::size_t size() const { return elements.size(); }

  void validate() const {
    if (elements.empty()) throw Error(ErrorCode::InvalidParams, "layout has no elements");
    for (std::size_t i = 0; i < elements.size(); ++i) {
      elements[i].validate();
      for (std::size_t j = 0; j < i; ++j) {
        const double sep = (elements[i].position.vec() - elements[j].position.vec()).norm();
        if (sep <= std::max(elements[i].dl, elements[j].dl)) {
          throw Error(ErrorCode::InvalidParams, "elements " + std::to_string(j) + " and " + std::to_string(i) +
                                                    " closer than one dipole length");
        }
      }
    }
    if (!(circuit.resistance > 0.0)) throw Error(ErrorCode::InvalidParams, "element resistance must be > 0");
    if (ground_plane_z) {
      for (const auto& e : elements) {
        if (!(e.position.z - *ground_plane_z > 0.5 * e.dl)) {
          throw Error(ErrorCode::InvalidParams, "element closer to the ground plane than half its length");
        }
      }
    }
  }

  [[nodiscard]] std::vector<CartesianCoord> positions() const {
    std::vector<CartesianCoord> out;
    out.reserve(elements.size());
    for (const auto& e : elements) out.push_back(e.position);
    return out;
  }

  /// Centre and radius of a sphere enclosing every element.
  [[nodiscard]] std::pair<Vec3, double> enclosing_sphere() const {
    Vec3 lo = elements.front().position.vec(), hi = lo;
    for (const auto& e : elements) {
      lo = lo.cwiseMin(e.position.vec());
      hi = hi.cwiseMax(e.position.vec());
    }
    const Vec3 centre = 0.5 * (lo + hi);
    double radius = 0.0;
    for (const auto& e : elements) radius = std::max(radius, (e.position.vec() - centre).norm() + 0.5 * e.dl);
    return {centre, radius};
  }
};

/// Image of a dipole in a conducting plane z = z0: mirrored position,
/// tangential moment reversed, normal moment kept.
inline DipoleSpec image_dipole(const DipoleSpec& d, double z0) {
  return {{d.position.x, d.position.y, 2.0 * z0 - d.position.z},
          Vec3(-d.orientation.x(), -d.orientation.y(), d.orientation.z()), d.dl};
}

/// Field the plane reflects under an external source: R E(M r), R H(M r) with
/// R = diag(-1, -1, 1) for E and diag(1, 1, -1) for H (H is a pseudovector).
inline FieldSample mirror_field(const FieldSample& at_mirror) {
  FieldSample s;
  s.E = CVec3(-at_mirror.E.x(), -at_mirror.E.y(), at_mirror.E.z());
  s.H = CVec3(at_mirror.H.x(), at_mirror.H.y(), -at_mirror.H.z());
  return s;
}

inline CartesianCoord mirror_point(const CartesianCoord& p, double z0) { return {p.x, p.y, 2.0 * z0 - p.z}; }

/// N y-oriented dipoles on the z axis, centred on the origin:
/// z_i = (i - (N + 1) / 2) spacing, i = 1..N.
inline ArrayLayout ula_layout(int n, double spacing, double dl, const ElementCircuit& circuit) {
  if (n < 1 || !(spacing > 0.0)) throw Error(ErrorCode::InvalidParams, "ULA needs n >= 1 and spacing > 0");
  ArrayLayout layout{{}, circuit, "ula-z", std::nullopt};
  for (int i = 1; i <= n; ++i) {
    const double z = (i - (n + 1) / 2.0) * spacing;
    layout.elements.push_back({{0.0, 0.0, z}, Vec3::UnitY(), dl});
  }
  return layout;
}

/// nx x ny unit cells at height `height` over a ground plane z = 0, centred
/// on the z axis, x-major order (cell (m, n) at index (n - 1) + ny (m - 1),
/// m = 1..nx, n = 1..ny). height = 0 gives free-standing cells in z = 0.
inline ArrayLayout ris_layout(int nx, int ny, double spacing, double dl, const Vec3& orientation,
                              const ElementCircuit& circuit, double height = 0.0) {
  if (nx < 1 || ny < 1 || !(spacing > 0.0)) throw Error(ErrorCode::InvalidParams, "RIS needs nx, ny >= 1");
  if (height < 0.0) throw Error(ErrorCode::InvalidParams, "cell height must be >= 0");
  ArrayLayout layout{{}, circuit, "ris-grid", std::nullopt};
  if (height > 0.0) layout.ground_plane_z = 0.0;
  for (int m = 1; m <= nx; ++m) {
    for (int n = 1; n <= ny; ++n) {
      const double x = (m - (nx + 1) / 2.0) * spacing;
      const double y = (n - (ny + 1) / 2.0) * spacing;
      layout.elements.push_back({{x, y, height}, orientation, dl});
    }
  }
  return layout;
}

/// Induced-EMF mutual impedance of two point dipoles, Z_ab = -E_a(r_b) . u_b dl_b / I_a.
inline cplx mutual_impedance(const DipoleSpec& a, const DipoleSpec& b, const FrequencySpec& f) {
  const Vec3 d = b.position.vec() - a.position.vec();
  if (!(d.norm() > 0.0)) throw Error(ErrorCode::SingularPoint, "mutual impedance of coincident dipoles");
  const FieldSample s = hertzian_field_moment(a.dl * a.orientation.cast<cplx>(), a.position.vec(), b.position, f);
  return -b.orientation.cast<cplx>().dot(s.E) * b.dl;
}

inline cplx self_impedance(const DipoleSpec& d, const ElementCircuit& circuit, const FrequencySpec& f) {
  return circuit.impedance(f) + hertzian_radiation_resistance(d.dl, f);
}

/// Port impedance matrix. With `coupling` false the off-diagonal terms are
/// forced to zero (decoupled reference model).
inline CMat impedance_matrix(const ArrayLayout& layout, const FrequencySpec& f, bool coupling = true) {
  layout.validate();
  const auto m = static_cast<Eigen::Index>(layout.size());
  CMat z = CMat::Zero(m, m);
  const auto& el = layout.elements;
  for (Eigen::Index i = 0; i < m; ++i) {
    const DipoleSpec& a = el[static_cast<std::size_t>(i)];
    z(i, i) = self_impedance(a, layout.circuit, f);
    if (layout.ground_plane_z) z(i, i) += mutual_impedance(image_dipole(a, *layout.ground_plane_z), a, f);
    if (!coupling) continue;
    for (Eigen::Index j = 0; j < i; ++j) {
      const DipoleSpec& b = el[static_cast<std::size_t>(j)];
      cplx zij = mutual_impedance(b, a, f);
      if (layout.ground_plane_z) zij += mutual_impedance(image_dipole(b, *layout.ground_plane_z), a, f);
      z(i, j) = zij;
      z(j, i) = zij;
    }
  }
  return z;
}

/// Conducting rectangle in the z = 0 plane, normal +z.
struct RISAperture {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  bool pec = true;

  [[nodiscard]] double width() const { return x_max - x_min; }
  [[nodiscard]] double height() const { return y_max - y_min; }

  void validate() const {
    if (!(width() >= 0.0) || !(height() >= 0.0)) throw Error(ErrorCode::InvalidParams, "aperture extents must be >= 0");
  }

  /// Rectangle circumscribing the layout with `margin` on every side.
  static RISAperture around(const ArrayLayout& layout, double margin) {
    Vec3 lo = layout.elements.front().position.vec(), hi = lo;
    for (const auto& e : layout.elements) {
      lo = lo.cwiseMin(e.position.vec());
      hi = hi.cwiseMax(e.position.vec());
    }
    return {lo.x() - margin, hi.x() + margin, lo.y() - margin, hi.y() + margin, true};
  }
};

inline constexpr double kMinQuadraturePointsPerWavelength = 10.0;

/// Physical-optics field scattered by the conducting aperture under one plane
/// wave: surface current 2 n x H_inc on the lit face, radiated through the
/// exact dipole kernel with a tensor-product midpoint rule. Returns the
/// sampled outgoing field vector (6 rows per point).
inline CVec specular_background(const RISAperture& aperture, const PlaneWave& wave,
                                const std::vector<CartesianCoord>& points, const FrequencySpec& f,
                                double points_per_wavelength = 12.0) {
  aperture.validate();
  if (points_per_wavelength < kMinQuadraturePointsPerWavelength) {
    throw Error(ErrorCode::QuadratureUnderresolved,
                "physical-optics rule needs >= 10 points per wavelength, got " + std::to_string(points_per_wavelength));
  }
  if (!(wave.propagation().z() < 0.0)) {
    throw Error(ErrorCode::InvalidParams, "plane wave must arrive from the +z half-space");
  }
  const double lambda = f.lambda();
  const auto nx = std::max<long>(1, static_cast<long>(std::ceil(aperture.width() / lambda * points_per_wavelength)));
  const auto ny = std::max<long>(1, static_cast<long>(std::ceil(aperture.height() / lambda * points_per_wavelength)));
  const double dx = aperture.width() / static_cast<double>(nx);
  const double dy = aperture.height() / static_cast<double>(ny);
  const double area = dx * dy;
  const CVec3 normal = Vec3::UnitZ().cast<cplx>();

  std::vector<Vec3> nodes;
  std::vector<CVec3> moments;
  nodes.reserve(static_cast<std::size_t>(nx * ny));
  moments.reserve(static_cast<std::size_t>(nx * ny));
  for (long i = 0; i < nx; ++i) {
    for (long j = 0; j < ny; ++j) {
      const CartesianCoord q{aperture.x_min + (static_cast<double>(i) + 0.5) * dx,
                             aperture.y_min + (static_cast<double>(j) + 0.5) * dy, 0.0};
      const FieldSample inc = plane_wave_field(wave, q, f);
      nodes.push_back(q.vec());
      moments.push_back(2.0 * cross(normal, inc.H) * area);
    }
  }

  CVec out = CVec::Zero(6 * static_cast<Eigen::Index>(points.size()));
  if (area == 0.0) return out;
  for (std::size_t k = 0; k < points.size(); ++k) {
    FieldSample acc;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const FieldSample s = hertzian_field_moment(moments[q], nodes[q], points[k], f);
      acc.E += s.E;
      acc.H += s.H;
    }
    out.segment<6>(6 * static_cast<Eigen::Index>(k)) = outgoing_field_vector(acc);
  }
  return out;
}

struct SyntheticOptions {
  bool mutual_coupling = true;
  double r0 = kDefaultReferenceImpedance;
  std::optional<RISAperture> background;  // physical-optics plate, RIS only
  double po_points_per_wavelength = 12.0;
  double grid_clearance_wavelengths = 0.1;
};

/// Sampled outgoing field per unit port current of every element, 6 x M.
inline CMat unit_current_field_block(const ArrayLayout& layout, const CartesianCoord& point, const FrequencySpec& f) {
  CMat block(6, static_cast<Eigen::Index>(layout.size()));
  for (std::size_t e = 0; e < layout.size(); ++e) {
    FieldSample s = hertzian_field(layout.elements[e], 1.0, point, f);
    if (layout.ground_plane_z) {
      const FieldSample img = hertzian_field(image_dipole(layout.elements[e], *layout.ground_plane_z), 1.0, point, f);
      s.E += img.E;
      s.H += img.H;
    }
    block.col(static_cast<Eigen::Index>(e)) = outgoing_field_vector(s);
  }
  return block;
}

/// Port-side quantities of a dipole array at one frequency.
struct PortModel {
  CMat z;                 // M x M impedance matrix
  CMat s_rr;              // z_to_s(Z)
  CMat current_per_wave;  // port currents per unit incoming wave: 2 sqrt(R0) (Z + R0 I)^-1
  CMat s_rf;              // outgoing port waves per unit incident plane wave, M x P
};

inline PortModel port_model(const ArrayLayout& layout, const std::vector<PlaneWave>& incident, const FrequencySpec& f,
                            const SyntheticOptions& opts = {}) {
  layout.validate();
  const auto m = static_cast<Eigen::Index>(layout.size());
  const auto p = static_cast<Eigen::Index>(incident.size());
  const double sqrt_r0 = std::sqrt(opts.r0);

  PortModel pm;
  pm.z = impedance_matrix(layout, f, opts.mutual_coupling);
  Eigen::PartialPivLU<CMat> lu(pm.z + opts.r0 * CMat::Identity(m, m));
  if (!(lu.rcond() * kTransformConditionLimit >= 1.0)) {
    throw Error(ErrorCode::SingularTransform, "Z + R0 I is singular for this layout");
  }
  pm.s_rr = lu.solve(pm.z - opts.r0 * CMat::Identity(m, m));
  pm.current_per_wave = lu.solve(2.0 * sqrt_r0 * CMat::Identity(m, m));

  CMat v_oc(m, p);
  for (Eigen::Index w = 0; w < p; ++w) {
    for (Eigen::Index e = 0; e < m; ++e) {
      const DipoleSpec& d = layout.elements[static_cast<std::size_t>(e)];
      const PlaneWave& wave = incident[static_cast<std::size_t>(w)];
      CVec3 e_inc = plane_wave_field(wave, d.position, f).E;
      if (layout.ground_plane_z) {
        e_inc += mirror_field(plane_wave_field(wave, mirror_point(d.position, *layout.ground_plane_z), f)).E;
      }
      v_oc(e, w) = -d.orientation.cast<cplx>().dot(e_inc) * d.dl;
    }
  }
  pm.s_rf = lu.solve(sqrt_r0 * v_oc);
  return pm;
}

/// Radius of the exclusion sphere around the structure (elements plus plate).
inline std::pair<Vec3, double> exclusion_sphere(const ArrayLayout& layout, const FrequencySpec& f,
                                                const SyntheticOptions& opts = {}) {
  auto [centre, radius] = layout.enclosing_sphere();
  if (opts.background) {
    const RISAperture& ap = *opts.background;
    for (double x : {ap.x_min, ap.x_max}) {
      for (double y : {ap.y_min, ap.y_max}) radius = std::max(radius, (Vec3(x, y, 0.0) - centre).norm());
    }
  }
  return {centre, radius + opts.grid_clearance_wavelengths * f.lambda()};
}

/// Radiating-structure operator of a dipole array sampled on `grid`.
///
///   S_RR = z_to_s(Z)
///   S_NR = F 2 sqrt(R0) (Z + R0 I)^-1        F: field per unit port current
///   S_RF = sqrt(R0) (Z + R0 I)^-1 V_oc       V_oc: open-circuit voltages
///   S_NF = 0, or the physical-optics plate field when a background is set
inline RadiatingStructureOperator build_radiating_operator(const ArrayLayout& layout, const SampleGrid& grid,
                                                           const std::vector<PlaneWave>& incident,
                                                           const FrequencySpec& f,
                                                           const SyntheticOptions& opts = {}) {
  layout.validate();
  const auto [centre, radius] = exclusion_sphere(layout, f, opts);
  grid.validate(radius, centre);

  const auto m = static_cast<Eigen::Index>(layout.size());
  const auto p = static_cast<Eigen::Index>(incident.size());
  const auto k = static_cast<Eigen::Index>(grid.size());
  const std::vector<CartesianCoord> pts = grid.cartesian();
  const PortModel pm = port_model(layout, incident, f, opts);

  RadiatingStructureOperator op;
  op.f = f;
  op.grid = grid;
  op.reciprocal = true;
  op.s_rr = pm.s_rr;
  op.s_rf = pm.s_rf;
  op.s_nr.resize(6 * k, m);
  for (Eigen::Index i = 0; i < k; ++i) {
    op.s_nr.middleRows(6 * i, 6) = unit_current_field_block(layout, pts[static_cast<std::size_t>(i)], f) * pm.current_per_wave;
  }
  op.s_nf = CMat::Zero(6 * k, p);
  if (opts.background) {
    for (Eigen::Index w = 0; w < p; ++w) {
      op.s_nf.col(w) = specular_background(*opts.background, incident[static_cast<std::size_t>(w)], pts, f,
                                           opts.po_points_per_wavelength);
    }
  }
  return op;
}

/// Varactor load R_s + 1 / (j w C) over a tuning range.
struct Varactor {
  double c_min = 0.1e-12;  // F
  double c_max = 2.0e-12;  // F
  double series_resistance = 0.5;  // ohm

  void validate() const {
    if (!(c_min > 0.0) || !(c_max > c_min)) throw Error(ErrorCode::InvalidParams, "varactor range must be 0 < C_min < C_max");
    if (!(series_resistance >= 0.0)) throw Error(ErrorCode::InvalidParams, "varactor series resistance must be >= 0");
  }

  [[nodiscard]] cplx impedance(double c, const FrequencySpec& f) const {
    return {series_resistance, -1.0 / (f.omega() * c)};
  }
};

/// Reflection coefficient of the varactor load at `c`, referred to R0.
inline cplx varactor_gamma(double c, const Varactor& v, const FrequencySpec& f,
                           double r0 = kDefaultReferenceImpedance) {
  if (!(c >= v.c_min * (1.0 - 1e-12)) || !(c <= v.c_max * (1.0 + 1e-12))) {
    throw Error(ErrorCode::OutOfRange, "capacitance " + std::to_string(c) + " F outside the varactor range");
  }
  return z_to_gamma(v.impedance(c, f), r0);
}

/// Capacitance <-> reflection phase map of one varactor at one frequency.
class VaractorMap {
 public:
  VaractorMap(Varactor v, FrequencySpec f, double r0 = kDefaultReferenceImpedance, int samples = 2001)
      : v_(v), f_(f), r0_(r0) {
    v_.validate();
    double prev_phase = 0.0;
    cplx prev_gamma{};
    for (int i = 0; i < samples; ++i) {
      const double t = static_cast<double>(i) / (samples - 1);
      const double c = v_.c_min * std::pow(v_.c_max / v_.c_min, t);
      const cplx g = gamma(c);
      const double ph = i == 0 ? std::arg(g) : prev_phase + std::arg(g / prev_gamma);
      if (i > 0) {
        const double step = ph - prev_phase;
        if (step == 0.0 || (i > 1 && (step > 0.0) != increasing_)) {
          throw Error(ErrorCode::NonMonotonicPhase, "reflection phase is not monotonic over the capacitance range");
        }
        increasing_ = step > 0.0;
      }
      c_.push_back(c);
      phase_.push_back(ph);
      prev_phase = ph;
      prev_gamma = g;
    }
  }

  [[nodiscard]] cplx gamma(double c) const { return varactor_gamma(c, v_, f_, r0_); }
  [[nodiscard]] const Varactor& varactor() const { return v_; }

  /// Continuous (unwrapped) phase, consistent with the sampled table.
  [[nodiscard]] double phase(double c) const {
    auto it = std::upper_bound(c_.begin(), c_.end(), c);
    std::size_t idx = it == c_.begin() ? 0 : static_cast<std::size_t>(it - c_.begin()) - 1;
    idx = std::min(idx, c_.size() - 1);
    return phase_[idx] + std::arg(gamma(c) / gamma(c_[idx]));
  }

  [[nodiscard]] double phase_min() const { return std::min(phase_.front(), phase_.back()); }
  [[nodiscard]] double phase_max() const { return std::max(phase_.front(), phase_.back()); }

  /// Capacitance realizing reflection phase `target` (any branch). Phases
  /// outside the reachable arc raise OutOfRange unless `clamp` is set, in which
  /// case the nearest end of the range (by circular distance) is returned.
  [[nodiscard]] double capacitance_for_phase(double target, bool clamp = false) const {
    const double lo = phase_min(), hi = phase_max();
    double t = lo + std::fmod(std::fmod(target - lo, 2.0 * kPi) + 2.0 * kPi, 2.0 * kPi);
    if (t > hi) {
      if (!clamp) throw Error(ErrorCode::OutOfRange, "reflection phase not reachable with this varactor");
      const double past_hi = t - hi;
      const double before_lo = lo + 2.0 * kPi - t;
      t = past_hi <= before_lo ? hi : lo;
    }
    // Bracket in the table, then bisect on the continuous phase.
    std::size_t a = 0, b = c_.size() - 1;
    auto key = [&](double ph) { return increasing_ ? ph : -ph; };
    if (key(t) <= key(phase_[a])) return c_[a];
    if (key(t) >= key(phase_[b])) return c_[b];
    while (b - a > 1) {
      const std::size_t mid = (a + b) / 2;
      (key(phase_[mid]) <= key(t) ? a : b) = mid;
    }
    double c_lo = c_[a], c_hi = c_[b];
    for (int it = 0; it < 200 && c_hi - c_lo > 1e-15 * c_hi; ++it) {
      const double c_mid = std::sqrt(c_lo * c_hi);
      (key(phase(c_mid)) <= key(t) ? c_lo : c_hi) = c_mid;
    }
    return 0.5 * (c_lo + c_hi);
  }

 private:
  Varactor v_;
  FrequencySpec f_;
  double r0_;
  bool increasing_ = true;
  std::vector<double> c_;
  std::vector<double> phase_;
};

/// Re-radiation coefficient of one isolated loaded cell,
///   rho(C) = R_loop / (Z_cell + Z_load(C)),
/// the induced port current per open-circuit voltage relative to its value at
/// resonance: |rho| <= 1 and rho = 1 at resonance. Its phase falls
/// monotonically with C over an arc shorter than pi.
class CellResponseMap {
 public:
  CellResponseMap(cplx z_cell, Varactor v, FrequencySpec f) : z_(z_cell), v_(v), f_(f) {
    v_.validate();
    if (!(loop_resistance() > 0.0)) throw Error(ErrorCode::InvalidParams, "cell loop resistance must be > 0");
  }

  [[nodiscard]] double loop_resistance() const { return z_.real() + v_.series_resistance; }
  [[nodiscard]] cplx response(double c) const { return loop_resistance() / (z_ + v_.impedance(c, f_)); }
  [[nodiscard]] double phase(double c) const { return std::arg(response(c)); }
  [[nodiscard]] double phase_min() const { return phase(v_.c_max); }
  [[nodiscard]] double phase_max() const { return phase(v_.c_min); }

  /// Capacitance whose response phase equals `target`; unreachable targets go
  /// to the circularly nearer end of the range.
  [[nodiscard]] double capacitance_for_phase(double target) const {
    const double t = std::remainder(target, 2.0 * kPi);
    const double lo = phase_min(), hi = phase_max();
    if (t >= hi || t <= lo) {
      const double to_hi = std::abs(std::remainder(t - hi, 2.0 * kPi));
      const double to_lo = std::abs(std::remainder(t - lo, 2.0 * kPi));
      return to_hi <= to_lo ? v_.c_min : v_.c_max;
    }
    const double c = 1.0 / (f_.omega() * (z_.imag() + loop_resistance() * std::tan(t)));
    return std::clamp(c, v_.c_min, v_.c_max);
  }

 private:
  cplx z_;
  Varactor v_;
  FrequencySpec f_;
};

}  // namespace nfrems
