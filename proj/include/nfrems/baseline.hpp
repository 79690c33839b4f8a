#pragma once

// Spherical-wave reference models: array factor focusing, Dolph-Chebyshev
// tapering, a perfectly absorbing spherical obstacle and the cascaded
// plane-wave / spherical-wave RIS model. All energies are unnormalized.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

#include "nfrems/em_core.hpp"
#include "nfrems/error.hpp"

namespace nfrems {

struct SWArrayModel {
  std::vector<CartesianCoord> elements;
  FrequencySpec f{1.0};

  [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(elements.size()); }
};

/// Entry i is exp(-j k d_i) / d_i with d_i the distance from element i to `p`.
inline CVec array_factor(const SWArrayModel& model, const SphericalCoord& p) {
  const Vec3 x = sph_to_cart(p).vec();
  const double k = model.f.k();
  CVec c(model.size());
  for (Eigen::Index i = 0; i < model.size(); ++i) {
    const double d = (x - model.elements[static_cast<std::size_t>(i)].vec()).norm();
    if (!(d > 0.0)) throw Error(ErrorCode::CoincidentPoint, "observation point coincides with element " + std::to_string(i));
    c[i] = std::exp(-kJ * k * d) / d;
  }
  return c;
}

/// conj(c) / |c|: maximizes |c^T v| over unit-norm v.
inline CVec sw_focus_vector(const CVec& c_focus) {
  const double n = c_focus.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::ZeroVector, "array factor at the focus is zero");
  return c_focus.conjugate() / n;
}

/// Dolph-Chebyshev window with the given sidelobe level, peak normalized to 1.
/// Built as the inverse DFT of T_{N-1}(x0 cos(pi k / N)).
inline RVec dolph_chebyshev(int n, double sidelobe_db) {
  if (n < 2 || !(sidelobe_db > 0.0)) throw Error(ErrorCode::InvalidParams, "Dolph-Chebyshev needs N >= 2 and sidelobe > 0 dB");
  const double order = n - 1.0;
  const double ratio = std::pow(10.0, sidelobe_db / 20.0);
  const double x0 = std::cosh(std::acosh(ratio) / order);

  auto cheb = [order](double x) {
    if (x > 1.0) return std::cosh(order * std::acosh(x));
    if (x < -1.0) return (static_cast<int>(order) % 2 == 0 ? 1.0 : -1.0) * std::cosh(order * std::acosh(-x));
    return std::cos(order * std::acos(x));
  };

  std::vector<cplx> spectrum(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double p = cheb(x0 * std::cos(kPi * k / n));
    // Even lengths need a half-sample shift to land on a symmetric window.
    spectrum[static_cast<std::size_t>(k)] = n % 2 == 1 ? cplx(p, 0.0) : p * std::exp(kJ * (kPi * k / n));
  }
  std::vector<double> dft(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    cplx acc{};
    for (int k = 0; k < n; ++k) acc += spectrum[static_cast<std::size_t>(k)] * std::exp(-kJ * (2.0 * kPi * k * m / n));
    dft[static_cast<std::size_t>(m)] = acc.real();
  }

  RVec w(n);
  if (n % 2 == 1) {
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
      w[half - 1 + i] = dft[static_cast<std::size_t>(i)];
      w[half - 1 - i] = dft[static_cast<std::size_t>(i)];
    }
  } else {
    const int half = n / 2 + 1;
    // [dft[half-1], ..., dft[1], dft[1], ..., dft[half-1]]
    for (int i = 1; i < half; ++i) {
      w[half - 1 - i] = dft[static_cast<std::size_t>(i)];
      w[half - 2 + i] = dft[static_cast<std::size_t>(i)];
    }
  }
  return w / w.maxCoeff();
}

/// Elementwise window, renormalized to unit norm.
inline CVec apply_taper(const CVec& v, const RVec& w) {
  if (v.size() != w.size()) throw Error(ErrorCode::DimensionMismatch, "taper length differs from excitation length");
  CVec out = v.cwiseProduct(w.cast<cplx>());
  const double n = out.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::ZeroVector, "tapered excitation vanished");
  return out / n;
}

struct SphereObstacle {
  SphericalCoord center;
  double radius = 0.0;
};

/// Entry i is true when the segment from element i to `p` passes within the
/// obstacle radius (line of sight blocked).
inline std::vector<bool> obstacle_mask(const SWArrayModel& model, const SphereObstacle& obs, const SphericalCoord& p) {
  if (!(obs.radius > 0.0)) throw Error(ErrorCode::InvalidParams, "obstacle radius must be > 0");
  const Vec3 c = sph_to_cart(obs.center).vec();
  const Vec3 x = sph_to_cart(p).vec();
  if ((x - c).norm() <= obs.radius) throw Error(ErrorCode::PointInsideObstacle, "observation point inside the obstacle");
  std::vector<bool> blocked(model.elements.size(), false);
  for (std::size_t i = 0; i < model.elements.size(); ++i) {
    const Vec3 e = model.elements[i].vec();
    if ((e - c).norm() <= obs.radius) throw Error(ErrorCode::InvalidParams, "obstacle contains an array element");
    const Vec3 seg = x - e;
    const double len2 = seg.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((c - e).dot(seg) / len2, 0.0, 1.0) : 0.0;
    blocked[i] = (e + t * seg - c).norm() <= obs.radius;
  }
  return blocked;
}

inline CVec masked(const CVec& c, const std::vector<bool>& blocked) {
  if (static_cast<std::size_t>(c.size()) != blocked.size()) {
    throw Error(ErrorCode::DimensionMismatch, "mask length differs from array factor length");
  }
  CVec out = c;
  for (std::size_t i = 0; i < blocked.size(); ++i) {
    if (blocked[i]) out[static_cast<Eigen::Index>(i)] = 0.0;
  }
  return out;
}

/// |c(p)^T v|^2, with blocked paths removed when a mask is given.
inline double sw_energy(const SWArrayModel& model, const CVec& v, const SphericalCoord& p,
                        const std::optional<std::vector<bool>>& mask = std::nullopt) {
  if (v.size() != model.size()) throw Error(ErrorCode::DimensionMismatch, "excitation length differs from array size");
  CVec c = array_factor(model, p);
  if (mask) c = masked(c, *mask);
  return std::norm((c.transpose() * v)(0));
}

/// Cascaded RIS model: plane wave -> cells (channel g) -> spherical waves (c).
struct SWRISModel {
  int cells_x = 32;
  int cells_y = 4;
  double spacing = 0.0;  // m
  FrequencySpec f{1.0};
  double theta_p = 0.0;
  double phi_p = 0.0;

  [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(cells_x) * cells_y; }

  /// Cell centres, x-major, centred on the origin in the z = 0 plane.
  [[nodiscard]] std::vector<CartesianCoord> positions() const {
    std::vector<CartesianCoord> out;
    for (int m = 1; m <= cells_x; ++m) {
      for (int n = 1; n <= cells_y; ++n) {
        out.push_back({(m - (cells_x + 1) / 2.0) * spacing, (n - (cells_y + 1) / 2.0) * spacing, 0.0});
      }
    }
    return out;
  }

  [[nodiscard]] SWArrayModel array() const { return {positions(), f}; }
};

/// Entry for cell (m, n), 1-based, is exp(-j k d (m v_x + n v_y)) with
/// v_x = sin(theta) cos(phi), v_y = sin(theta) sin(phi).
inline CVec ris_channel_g(const SWRISModel& model) {
  if (!(model.spacing > 0.0)) throw Error(ErrorCode::InvalidParams, "RIS spacing must be > 0");
  const double vx = std::sin(model.theta_p) * std::cos(model.phi_p);
  const double vy = std::sin(model.theta_p) * std::sin(model.phi_p);
  const double kd = model.f.k() * model.spacing;
  CVec g(model.size());
  Eigen::Index i = 0;
  for (int m = 1; m <= model.cells_x; ++m) {
    for (int n = 1; n <= model.cells_y; ++n) g[i++] = std::exp(-kJ * kd * (m * vx + n * vy));
  }
  return g;
}

/// Phase-conjugating reflection coefficients conj(c_i) conj(g_i) / |c_i g_i|.
inline CVec ris_sw_gamma(const CVec& c_focus, const CVec& g) {
  if (c_focus.size() != g.size()) throw Error(ErrorCode::DimensionMismatch, "c and g lengths differ");
  CVec gamma(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const cplx prod = c_focus[i] * g[i];
    if (std::abs(prod) == 0.0) throw Error(ErrorCode::ZeroEntry, "zero entry " + std::to_string(i) + " in c or g");
    gamma[i] = std::conj(prod) / std::abs(prod);
  }
  return gamma;
}

/// |c(p)^T diag(gamma) g|^2 with isotropic cells.
inline double ris_sw_energy(const SWRISModel& model, const CVec& gamma, const SphericalCoord& p) {
  if (gamma.size() != model.size()) throw Error(ErrorCode::DimensionMismatch, "gamma length differs from cell count");
  const CVec c = array_factor(model.array(), p);
  const CVec g = ris_channel_g(model);
  return std::norm((c.cwiseProduct(gamma).transpose() * g)(0));
}

}  // namespace nfrems
