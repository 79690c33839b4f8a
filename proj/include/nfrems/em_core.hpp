#pragma once

// Free-space constants, coordinates, field samples and the energy density.
//
// Conventions:
//   time dependence e^{+jwt}; outgoing waves carry e^{-jkr}
//   phasors are RMS values (no factor 1/2 in power or energy expressions)
//   spherical coordinates are the physicist's (r, theta, phi)

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "nfrems/error.hpp"

namespace nfrems {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using CVec6 = Eigen::Matrix<cplx, 6, 1>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kJ{0.0, 1.0};

// CODATA 2018
inline constexpr double kEpsilon0 = 8.8541878128e-12;  // F/m
inline constexpr double kMu0 = 1.25663706212e-6;        // H/m

inline double free_space_impedance() { return std::sqrt(kMu0 / kEpsilon0); }
inline double speed_of_light() { return 1.0 / std::sqrt(kMu0 * kEpsilon0); }

/// Single analysis frequency with its derived free-space quantities.
class FrequencySpec {
 public:
  explicit FrequencySpec(double hz) : hz_(hz) {
    if (!(hz > 0.0) || !std::isfinite(hz)) {
      throw Error(ErrorCode::InvalidParams, "frequency must be finite and > 0");
    }
  }

  [[nodiscard]] double hz() const { return hz_; }
  [[nodiscard]] double omega() const { return 2.0 * kPi * hz_; }
  [[nodiscard]] double k() const { return 2.0 * kPi * hz_ * std::sqrt(kMu0 * kEpsilon0); }
  [[nodiscard]] double lambda() const { return 1.0 / (std::sqrt(kEpsilon0 * kMu0) * hz_); }
  [[nodiscard]] double z0() const { return free_space_impedance(); }

 private:
  double hz_;
};

struct CartesianCoord {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  [[nodiscard]] Vec3 vec() const { return {x, y, z}; }
  static CartesianCoord from(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
  [[nodiscard]] bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

struct SphericalCoord {
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;

  [[nodiscard]] bool valid() const {
    return r >= 0.0 && theta >= 0.0 && theta <= kPi && phi >= 0.0 && phi < 2.0 * kPi;
  }
};

/// Unconjugated cross product. Eigen's MatrixBase::cross returns conj(a x b)
/// for complex scalars, which breaks phasor superposition.
inline CVec3 cross(const CVec3& a, const CVec3& b) {
  return {a.y() * b.z() - a.z() * b.y(), a.z() * b.x() - a.x() * b.z(), a.x() * b.y() - a.y() * b.x()};
}

/// Maps an arbitrary angle into [0, 2pi).
inline double wrap_azimuth(double phi) {
  double w = std::fmod(phi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  if (w >= 2.0 * kPi) w = 0.0;
  return w;
}

/// Point in a half-plane through the z axis, addressed by a signed polar angle.
/// Negative angles fold over to the opposite azimuth (phi + pi).
inline SphericalCoord in_plane(double r, double signed_theta, double phi) {
  if (signed_theta < 0.0) return {r, -signed_theta, wrap_azimuth(phi + kPi)};
  return {r, signed_theta, wrap_azimuth(phi)};
}

inline CartesianCoord sph_to_cart(const SphericalCoord& p) {
  const double st = std::sin(p.theta);
  return {p.r * st * std::cos(p.phi), p.r * st * std::sin(p.phi), p.r * std::cos(p.theta)};
}

inline SphericalCoord cart_to_sph(const CartesianCoord& c) {
  const double rho = std::hypot(c.x, c.y);
  const double r = std::hypot(rho, c.z);
  return {r, std::atan2(rho, c.z), wrap_azimuth(std::atan2(c.y, c.x))};
}

struct UnitTriad {
  Vec3 r_hat;
  Vec3 theta_hat;
  Vec3 phi_hat;
};

enum class PolePolicy {
  Throw,
  // At theta in {0, pi} evaluate the triad in the phi = 0 limit, so theta_hat is +-x.
  XAlignedLimit,
};

inline UnitTriad local_unit_vectors(const SphericalCoord& p, PolePolicy policy = PolePolicy::Throw) {
  constexpr double kPoleTol = 1e-12;
  double phi = p.phi;
  if (std::abs(p.theta) <= kPoleTol || std::abs(p.theta - kPi) <= kPoleTol) {
    if (policy == PolePolicy::Throw) {
      throw Error(ErrorCode::PoleAmbiguity, "theta_hat and phi_hat are undefined on the polar axis");
    }
    phi = 0.0;
  }
  const double st = std::sin(p.theta), ct = std::cos(p.theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  return {Vec3(st * cp, st * sp, ct), Vec3(ct * cp, ct * sp, -st), Vec3(-sp, cp, 0.0)};
}

/// RMS field phasors at one point.
struct FieldSample {
  CVec3 E = CVec3::Zero();
  CVec3 H = CVec3::Zero();
  CartesianCoord at;

  [[nodiscard]] bool finite() const { return E.allFinite() && H.allFinite(); }
};

/// Stacked [E / sqrt(Z0); sqrt(Z0) H], both halves in sqrt(W)/m.
inline CVec6 outgoing_field_vector(const FieldSample& s) {
  const double sz = std::sqrt(free_space_impedance());
  CVec6 a;
  a.head<3>() = s.E / sz;
  a.tail<3>() = s.H * sz;
  return a;
}

inline FieldSample field_from_outgoing(const Eigen::Ref<const CVec>& a, const CartesianCoord& at) {
  if (a.size() != 6) throw Error(ErrorCode::DimensionMismatch, "outgoing field vector must have 6 entries");
  const double sz = std::sqrt(free_space_impedance());
  FieldSample s;
  s.E = a.head<3>() * sz;
  s.H = a.tail<3>() / sz;
  s.at = at;
  return s;
}

/// u = eps0 |E|^2 + mu0 |H|^2 in J/m^3 (RMS phasors).
inline double energy_density(const FieldSample& s) {
  return kEpsilon0 * s.E.squaredNorm() + kMu0 * s.H.squaredNorm();
}

/// Same quantity evaluated from the outgoing field vector: sqrt(mu0 eps0) |a_N|^2.
inline double energy_density_from_outgoing(const Eigen::Ref<const CVec>& a) {
  return std::sqrt(kMu0 * kEpsilon0) * a.squaredNorm();
}

/// Incident plane wave. `theta`/`phi` name the direction the wave arrives from;
/// it propagates along -r_hat(theta, phi). The polarization pair are the
/// theta_hat / phi_hat components of the incoming power-wave amplitude in
/// sqrt(W) units, so E = sqrt(Z0) (pol_theta theta_hat + pol_phi phi_hat).
struct PlaneWave {
  double theta = 0.0;
  double phi = 0.0;
  cplx pol_theta{1.0, 0.0};
  cplx pol_phi{0.0, 0.0};

  [[nodiscard]] Vec3 propagation() const {
    return -local_unit_vectors({1.0, theta, phi}, PolePolicy::XAlignedLimit).r_hat;
  }
  [[nodiscard]] CVec3 amplitude() const {
    const UnitTriad t = local_unit_vectors({1.0, theta, phi}, PolePolicy::XAlignedLimit);
    return std::sqrt(free_space_impedance()) *
           (pol_theta * t.theta_hat.cast<cplx>() + pol_phi * t.phi_hat.cast<cplx>());
  }
};

inline FieldSample plane_wave_field(const PlaneWave& wave, const CartesianCoord& point, const FrequencySpec& f) {
  const Vec3 khat = wave.propagation();
  const cplx phase = std::exp(-kJ * f.k() * khat.dot(point.vec()));
  FieldSample s;
  s.E = wave.amplitude() * phase;
  s.H = cross(khat.cast<cplx>(), s.E) / f.z0();
  s.at = point;
  return s;
}

/// Ordered observation points in a region of interest.
struct SampleGrid {
  std::vector<SphericalCoord> points;
  std::string plane = "x-z";

  [[nodiscard]] std::size_t size() const { return points.size(); }

  [[nodiscard]] std::vector<CartesianCoord> cartesian() const {
    std::vector<CartesianCoord> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(sph_to_cart(p));
    return out;
  }

  /// Index of the point within `tol` metres of `p`, or -1.
  [[nodiscard]] long find(const SphericalCoord& p, double tol = 1e-9) const {
    const Vec3 target = sph_to_cart(p).vec();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if ((sph_to_cart(points[i]).vec() - target).norm() <= tol) return static_cast<long>(i);
    }
    return -1;
  }

  void validate(double min_radius = 0.0, const Vec3& centre = Vec3::Zero()) const {
    if (points.empty()) throw Error(ErrorCode::InvalidParams, "sample grid is empty");
    std::vector<Vec3> cart;
    cart.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!points[i].valid()) throw Error(ErrorCode::InvalidParams, "grid point out of coordinate range");
      const Vec3 c = sph_to_cart(points[i]).vec();
      if ((c - centre).norm() <= min_radius) {
        throw Error(ErrorCode::GridTooClose, "grid point " + std::to_string(i) + " inside the enclosing sphere");
      }
      for (const Vec3& prev : cart) {
        if ((prev - c).norm() <= 1e-12) {
          throw Error(ErrorCode::InvalidParams, "duplicate grid point " + std::to_string(i));
        }
      }
      cart.push_back(c);
    }
  }
};

}  // namespace nfrems
