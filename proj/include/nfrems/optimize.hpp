#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "nfrems/em_core.hpp"
#include "nfrems/error.hpp"

namespace nfrems {

using LinearMap = std::function<CVec(const CVec&)>;

struct EigenResult {
  CVec v;
  double lambda = 0.0;
  int iterations = 0;
  bool degenerate = false;  // second eigenvalue within 1e-6 (relative) of the first
};

namespace detail {

inline CVec phase_spread_start(Eigen::Index dim) {
  // Deterministic fallback start with no structured nullspace alignment.
  CVec x(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double t = 0.6180339887498949 * static_cast<double>(i * (i + 1));
    x[i] = std::polar(1.0 + 0.5 * std::sin(3.0 * static_cast<double>(i) + 1.0), 2.0 * kPi * (t - std::floor(t)));
  }
  return x.normalized();
}

}  // namespace detail

/// Largest eigenpair of A = G^H G via power iteration, touching G only through
/// `apply` (x -> G x) and `apply_adj` (y -> G^H y). Stops once
/// |A v - lambda v| <= tol lambda. Starts from the all-ones vector, so for a
/// degenerate top eigenspace the start vector's projection is returned.
inline EigenResult dominant_eigvec(const LinearMap& apply, const LinearMap& apply_adj, Eigen::Index dim,
                                   double tol = 1e-10, int max_iter = 10000) {
  if (dim < 1) throw Error(ErrorCode::InvalidParams, "dominant_eigvec needs dim >= 1");
  auto op = [&](const CVec& x) { return apply_adj(apply(x)); };

  CVec v = CVec::Ones(dim) / std::sqrt(static_cast<double>(dim));
  CVec y = op(v);
  if (y.norm() <= 1e-300) {
    const CVec alt = detail::phase_spread_start(dim);
    const CVec y_alt = op(alt);
    if (y_alt.norm() > 0.0) {
      v = alt;
      y = y_alt;
    }
  }

  EigenResult res;
  for (int it = 0; it <= max_iter; ++it) {
    const double lambda = v.dot(y).real();
    const double residual = (y - lambda * v).norm();
    if (residual <= tol * std::abs(lambda) || y.norm() == 0.0) {
      res.v = v;
      res.lambda = lambda;
      res.iterations = it;
      break;
    }
    if (it == max_iter) {
      throw Error(ErrorCode::NoConvergence, "power iteration did not converge in " + std::to_string(max_iter) +
                                                " iterations; the top eigenvalues may be nearly degenerate");
    }
    v = y / y.norm();
    y = op(v);
  }

  // Probe the deflated operator for a second eigenvalue close to the first.
  if (dim > 1 && res.lambda > 0.0) {
    auto deflated = [&](const CVec& x) { return CVec(op(x) - res.lambda * res.v * res.v.dot(x)); };
    CVec w = detail::phase_spread_start(dim);
    w -= res.v * res.v.dot(w);
    double second = 0.0;
    for (int it = 0; it < 60 && w.norm() > 0.0; ++it) {
      w.normalize();
      const CVec z = deflated(w);
      second = w.dot(z).real();
      w = z - res.v * res.v.dot(z);
    }
    res.degenerate = second >= res.lambda * (1.0 - 1e-6);
  }
  return res;
}

/// Unit-norm excitation maximizing |G v|^2 for a (typically 6 x N) focus block.
inline EigenResult pc_focus_vector(const CMat& focus_block, double tol = 1e-10, int max_iter = 10000) {
  if (focus_block.cols() < 1) throw Error(ErrorCode::InvalidParams, "focus block has no columns");
  return dominant_eigvec([&](const CVec& x) { return CVec(focus_block * x); },
                         [&](const CVec& y) { return CVec(focus_block.adjoint() * y); }, focus_block.cols(), tol,
                         max_iter);
}

using RealObjective = std::function<double(const RVec&)>;

/// Box-bounded real parameter domain.
struct Box {
  RVec lower;
  RVec upper;

  [[nodiscard]] RVec width() const { return upper - lower; }
  [[nodiscard]] RVec clip(const RVec& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
  [[nodiscard]] bool contains(const RVec& x) const {
    return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
  }
};

using RealGradient = std::function<RVec(const RVec&)>;

/// Maximization problem: objective plus its domain. Without an explicit
/// gradient the ascent falls back to finite differences.
struct FocusObjective {
  RealObjective evaluate;
  Box domain;
  RealGradient gradient;

  [[nodiscard]] Eigen::Index dimension() const { return domain.lower.size(); }
};

/// Central differences with step h max(|x_i|, scale); one-sided where the
/// central stencil would leave the box.
inline RVec finite_diff_gradient(const RealObjective& objective, const RVec& x, double h, double scale = 1.0,
                                 const Box* box = nullptr) {
  RVec grad(x.size());
  const double fx_cache = box ? objective(x) : 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(std::abs(x[i]), scale);
    RVec xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    const bool up_ok = !box || xp[i] <= box->upper[i];
    const bool down_ok = !box || xm[i] >= box->lower[i];
    if (up_ok && down_ok) {
      grad[i] = (objective(xp) - objective(xm)) / (2.0 * step);
    } else if (up_ok) {
      grad[i] = (objective(xp) - fx_cache) / step;
    } else if (down_ok) {
      grad[i] = (fx_cache - objective(xm)) / step;
    } else {
      grad[i] = 0.0;
    }
  }
  return grad;
}

struct AscentOptions {
  double tol = 1e-6;
  int max_iter = 500;
  double initial_step = 0.1;  // fraction of the box width
  double shrink = 0.5;
  double armijo = 1e-4;
  double fd_step = 1e-6;      // relative finite-difference step
  int min_step_halvings = 40;
};

struct AscentResult {
  RVec x;
  std::vector<double> trace;  // objective after each accepted step, starting with the initial value
  int iterations = 0;
  bool converged = false;
};

/// Projected gradient ascent with Armijo backtracking. Every accepted step
/// satisfies f(x+) >= f(x) + c g^T (x+ - x) >= f(x), so the trace is
/// non-decreasing.
inline AscentResult projected_gradient_ascent(const FocusObjective& problem, const RVec& x0,
                                              const AscentOptions& opts = {}) {
  const Box& box = problem.domain;
  if (!box.contains(x0)) throw Error(ErrorCode::OutOfRange, "initial point outside the parameter box");
  const RVec width = box.width();
  const double scale = width.maxCoeff();

  AscentResult res;
  res.x = x0;
  double fx = problem.evaluate(x0);
  if (!std::isfinite(fx)) throw Error(ErrorCode::NonFiniteObjective, "objective is not finite at the initial point");
  res.trace.push_back(fx);

  for (int it = 0; it < opts.max_iter; ++it) {
    res.iterations = it + 1;
    const RVec g = problem.gradient ? problem.gradient(res.x)
                                    : finite_diff_gradient(problem.evaluate, res.x, opts.fd_step, scale, &box);
    if (!g.allFinite()) throw Error(ErrorCode::NonFiniteObjective, "gradient is not finite");
    RVec pg = g;
    for (Eigen::Index i = 0; i < pg.size(); ++i) {
      if ((res.x[i] <= box.lower[i] && pg[i] < 0.0) || (res.x[i] >= box.upper[i] && pg[i] > 0.0)) pg[i] = 0.0;
    }
    const double pg_norm = pg.cwiseProduct(width).cwiseAbs().maxCoeff();
    if (!(pg_norm > opts.tol * std::max(std::abs(fx), 1e-300))) {
      res.converged = true;
      break;
    }
    const RVec dir = pg.cwiseProduct(width) / pg_norm;

    double t = opts.initial_step;
    bool accepted = false;
    for (int k = 0; k < opts.min_step_halvings; ++k, t *= opts.shrink) {
      const RVec candidate = box.clip(res.x + t * dir.cwiseProduct(width));
      const RVec delta = candidate - res.x;
      if (delta.cwiseAbs().maxCoeff() == 0.0) break;
      const double fc = problem.evaluate(candidate);
      if (std::isfinite(fc) && fc >= fx + opts.armijo * g.dot(delta) && fc >= fx) {
        res.x = candidate;
        fx = fc;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.converged = true;
      break;
    }
    res.trace.push_back(fx);
    const std::size_t n = res.trace.size();
    if (n > 5 && (res.trace[n - 1] - res.trace[n - 6]) <= opts.tol * std::abs(res.trace[n - 1])) {
      res.converged = true;
      break;
    }
  }
  return res;
}

/// Gradient ascent over varactor capacitances (box-bounded), started from a
/// capacitance state derived from the spherical-wave solution.
inline AscentResult ris_gradient_ascent(const FocusObjective& objective, const RVec& c_init,
                                        const AscentOptions& opts = {}) {
  return projected_gradient_ascent(objective, c_init, opts);
}

}  // namespace nfrems
