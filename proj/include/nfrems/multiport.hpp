#pragma once

// Circuit-theoretic multiport model: radiating structure, tuning network and
// RF frontend, cascaded into gain operators from PA voltages and incident
// waves to sampled outgoing fields.
//
// Wave naming follows the radiating structure's point of view:
//   a_R  incoming port waves     b_R  outgoing port waves
//   b_F  incident excitation     a_N  sampled outgoing field (6 rows per point)

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "nfrems/em_core.hpp"
#include "nfrems/error.hpp"

namespace nfrems {

inline constexpr double kDefaultReferenceImpedance = 50.0;
inline constexpr double kFeedbackConditionLimit = 1e10;
inline constexpr double kTransformConditionLimit = 1e12;

struct RadiatingStructureOperator {
  FrequencySpec f{1.0};
  SampleGrid grid;
  CMat s_rr;  // M x M
  CMat s_rf;  // M x P
  CMat s_nr;  // 6K x M
  CMat s_nf;  // 6K x P
  bool reciprocal = true;

  [[nodiscard]] Eigen::Index ports() const { return s_rr.rows(); }
  [[nodiscard]] Eigen::Index excitations() const { return s_rf.cols(); }
  [[nodiscard]] Eigen::Index samples() const { return s_nr.rows() / 6; }

  void validate() const {
    const Eigen::Index m = s_rr.rows();
    const Eigen::Index p = s_rf.cols();
    const auto k = static_cast<Eigen::Index>(grid.size());
    if (s_rr.cols() != m || s_rf.rows() != m || s_nr.cols() != m || s_nr.rows() != 6 * k ||
        s_nf.rows() != 6 * k || s_nf.cols() != p) {
      throw Error(ErrorCode::DimensionMismatch, "radiating structure blocks disagree with (M, P, K)");
    }
    if (!s_rr.allFinite() || !s_rf.allFinite() || !s_nr.allFinite() || !s_nf.allFinite()) {
      throw Error(ErrorCode::InvalidParams, "radiating structure contains non-finite entries");
    }
  }
};

/// Four-block scattering matrix of the tuning network.
/// Frontend side has N ports, radiating side M ports.
struct TuningNetwork {
  CMat s_tt;  // N x N
  CMat s_tr;  // N x M
  CMat s_rt;  // M x N
  CMat s_rr;  // M x M

  [[nodiscard]] Eigen::Index frontend_ports() const { return s_tt.rows(); }
  [[nodiscard]] Eigen::Index radiating_ports() const { return s_rr.rows(); }

  [[nodiscard]] CMat full() const {
    const Eigen::Index n = frontend_ports(), m = radiating_ports();
    CMat s(n + m, n + m);
    s.topLeftCorner(n, n) = s_tt;
    s.topRightCorner(n, m) = s_tr;
    s.bottomLeftCorner(m, n) = s_rt;
    s.bottomRightCorner(m, m) = s_rr;
    return s;
  }

  void validate() const {
    const Eigen::Index n = s_tt.rows(), m = s_rr.rows();
    if (s_tt.cols() != n || s_rr.cols() != m || s_tr.rows() != n || s_tr.cols() != m ||
        s_rt.rows() != m || s_rt.cols() != n) {
      throw Error(ErrorCode::DimensionMismatch, "tuning network blocks disagree with (N, M)");
    }
  }
};

/// Power amplifiers as Thevenin sources (diagonal source impedances).
struct RFFrontend {
  CVec v_tx;  // V RMS, may be left empty when only the gain operators are needed
  CVec z_tx;  // ohm
  double r0 = kDefaultReferenceImpedance;

  [[nodiscard]] Eigen::Index ports() const { return z_tx.size(); }

  static RFFrontend matched(Eigen::Index n, double r0 = kDefaultReferenceImpedance) {
    return {CVec::Zero(n), CVec::Constant(n, cplx(r0, 0.0)), r0};
  }

  void validate() const {
    if (!(r0 > 0.0)) throw Error(ErrorCode::InvalidParams, "reference impedance must be > 0");
    for (Eigen::Index i = 0; i < z_tx.size(); ++i) {
      if (!(z_tx[i].real() > 0.0)) throw Error(ErrorCode::InvalidParams, "PA source resistance must be > 0");
    }
    if (v_tx.size() != 0 && v_tx.size() != z_tx.size()) {
      throw Error(ErrorCode::DimensionMismatch, "v_tx and z_tx lengths differ");
    }
  }
};

struct GainOperators {
  CMat g_v;  // 6K x N
  CMat g_b;  // 6K x P
  FrequencySpec f{1.0};
  SampleGrid grid;

  /// The six rows belonging to grid point `k`.
  [[nodiscard]] CMat point_block_v(Eigen::Index k) const { return g_v.middleRows(6 * k, 6); }
  [[nodiscard]] CMat point_block_b(Eigen::Index k) const { return g_b.middleRows(6 * k, 6); }
};

namespace detail {

inline CMat identity(Eigen::Index n) { return CMat::Identity(n, n); }

/// Solves A X = B through an LU factorization; rejects ill-conditioned A.
inline CMat guarded_solve(const CMat& a, const CMat& b, double cond_limit, ErrorCode code, const char* what) {
  if (a.rows() == 0) return CMat::Zero(0, b.cols());
  Eigen::PartialPivLU<CMat> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond * cond_limit >= 1.0)) {
    throw Error(code, std::string(what) + " is singular or ill-conditioned (rcond " + std::to_string(rcond) + ")");
  }
  return lu.solve(b);
}

}  // namespace detail

/// S = (Z + R0 I)^-1 (Z - R0 I).
inline CMat z_to_s(const CMat& z, double r0 = kDefaultReferenceImpedance) {
  if (z.rows() != z.cols()) throw Error(ErrorCode::DimensionMismatch, "impedance matrix must be square");
  const CMat i = detail::identity(z.rows());
  return detail::guarded_solve(z + r0 * i, z - r0 * i, kTransformConditionLimit, ErrorCode::SingularTransform,
                               "Z + R0 I");
}

/// Z = R0 (I - S)^-1 (I + S).
inline CMat s_to_z(const CMat& s, double r0 = kDefaultReferenceImpedance) {
  if (s.rows() != s.cols()) throw Error(ErrorCode::DimensionMismatch, "scattering matrix must be square");
  const CMat i = detail::identity(s.rows());
  return r0 * detail::guarded_solve(i - s, i + s, kTransformConditionLimit, ErrorCode::SingularTransform, "I - S");
}

inline cplx z_to_gamma(cplx z, double r0 = kDefaultReferenceImpedance) { return (z - r0) / (z + r0); }

struct FrontendMatrices {
  CMat source_gain;  // K_vTx = (Z_Tx + R0 I)^-1 sqrt(R0)
  CMat reflection;   // (Z_Tx + R0 I)^-1 (Z_Tx - R0 I)
};

inline FrontendMatrices frontend_matrices(const RFFrontend& fe) {
  fe.validate();
  const Eigen::Index n = fe.ports();
  FrontendMatrices out{CMat::Zero(n, n), CMat::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx denom = fe.z_tx[i] + fe.r0;
    out.source_gain(i, i) = std::sqrt(fe.r0) / denom;
    out.reflection(i, i) = (fe.z_tx[i] - fe.r0) / denom;
  }
  return out;
}

namespace detail {

inline void check_cascade(Eigen::Index rs_ports, const TuningNetwork& tn, const RFFrontend& fe) {
  tn.validate();
  if (tn.radiating_ports() != rs_ports) {
    throw Error(ErrorCode::DimensionMismatch, "tuning network M (" + std::to_string(tn.radiating_ports()) +
                                                  ") != radiating structure M (" + std::to_string(rs_ports) + ")");
  }
  if (tn.frontend_ports() != fe.ports()) {
    throw Error(ErrorCode::DimensionMismatch, "tuning network N (" + std::to_string(tn.frontend_ports()) +
                                                  ") != frontend N (" + std::to_string(fe.ports()) + ")");
  }
}

}  // namespace detail

/// Incoming radiating-port waves a_R per unit PA voltage (M x N):
///   (I - L2)^-1 S_RT (I - L1 - L3)^-1 K
/// with L1 = G S_TT, L2 = S_T,RR S_R,RR, L3 = G S_TR S_R,RR (I - L2)^-1 S_RT,
/// where G is the frontend reflection.
inline CMat port_waves_vtx(const CMat& s_rr, const TuningNetwork& tn, const RFFrontend& fe) {
  detail::check_cascade(s_rr.rows(), tn, fe);
  const Eigen::Index n = fe.ports(), m = s_rr.rows();
  const FrontendMatrices fm = frontend_matrices(fe);
  const CMat& gamma = fm.reflection;

  const CMat l1 = gamma * tn.s_tt;
  const CMat l2 = tn.s_rr * s_rr;
  const CMat ports_from_frontend = detail::guarded_solve(detail::identity(m) - l2, tn.s_rt, kFeedbackConditionLimit,
                                                         ErrorCode::FeedbackSingular, "I - L2");
  const CMat l3 = gamma * tn.s_tr * s_rr * ports_from_frontend;
  const CMat launched = detail::guarded_solve(detail::identity(n) - l1 - l3, fm.source_gain, kFeedbackConditionLimit,
                                              ErrorCode::FeedbackSingular, "I - L1 - L3");
  return ports_from_frontend * launched;
}

/// Incoming radiating-port waves a_R per unit incident excitation (M x P):
///   (S_RT G (I - L5)^-1 S_TR + S_T,RR) (I - L6 - L7)^-1 S_R,RF
/// with L5 = S_TT G, L6 = S_R,RR S_T,RR, L7 = S_R,RR S_RT G (I - L5)^-1 S_TR.
inline CMat port_waves_bf(const CMat& s_rr, const CMat& s_rf, const TuningNetwork& tn, const RFFrontend& fe) {
  detail::check_cascade(s_rr.rows(), tn, fe);
  const Eigen::Index n = fe.ports(), m = s_rr.rows();
  const FrontendMatrices fm = frontend_matrices(fe);
  const CMat& gamma = fm.reflection;

  const CMat l5 = tn.s_tt * gamma;
  const CMat back_to_frontend = detail::guarded_solve(detail::identity(n) - l5, tn.s_tr, kFeedbackConditionLimit,
                                                      ErrorCode::FeedbackSingular, "I - L5");
  // Effective load seen by the radiating ports: b_R -> a_R.
  const CMat load = tn.s_rt * gamma * back_to_frontend + tn.s_rr;
  const CMat outgoing = detail::guarded_solve(detail::identity(m) - s_rr * load, s_rf, kFeedbackConditionLimit,
                                              ErrorCode::FeedbackSingular, "I - L6 - L7");
  return load * outgoing;
}

/// Gain operator from PA Thevenin voltages to sampled outgoing fields:
///   G_v = S_NR (I - L2)^-1 S_RT (I - L1 - L3)^-1 K
inline CMat assemble_gain_vtx(const RadiatingStructureOperator& rs, const TuningNetwork& tn, const RFFrontend& fe) {
  rs.validate();
  return rs.s_nr * port_waves_vtx(rs.s_rr, tn, fe);
}

/// Gain operator from incident excitation to sampled outgoing fields:
///   G_b = S_NR (S_RT G (I - L5)^-1 S_TR + S_T,RR) (I - L6 - L7)^-1 S_R,RF + S_NF
inline CMat assemble_gain_bf(const RadiatingStructureOperator& rs, const TuningNetwork& tn, const RFFrontend& fe) {
  rs.validate();
  return rs.s_nr * port_waves_bf(rs.s_rr, rs.s_rf, tn, fe) + rs.s_nf;
}

inline GainOperators assemble_gain_operators(const RadiatingStructureOperator& rs, const TuningNetwork& tn,
                                             const RFFrontend& fe) {
  return {assemble_gain_vtx(rs, tn, fe), assemble_gain_bf(rs, tn, fe), rs.f, rs.grid};
}

/// a_N = G_v v_Tx + G_b b_F, unpacked into one FieldSample per grid point.
inline std::vector<FieldSample> predict_field(const GainOperators& g, const CVec& v_tx, const CVec& b_f) {
  if (v_tx.size() != g.g_v.cols() || b_f.size() != g.g_b.cols() || g.g_v.rows() != g.g_b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "input vectors do not match gain operator dimensions");
  }
  const Eigen::Index k = g.g_v.rows() / 6;
  CVec a = CVec::Zero(g.g_v.rows());
  if (v_tx.size() > 0) a += g.g_v * v_tx;
  if (b_f.size() > 0) a += g.g_b * b_f;
  const std::vector<CartesianCoord> at = g.grid.cartesian();
  std::vector<FieldSample> out;
  out.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    out.push_back(field_from_outgoing(a.segment(6 * i, 6),
                                      static_cast<std::size_t>(i) < at.size() ? at[static_cast<std::size_t>(i)]
                                                                              : CartesianCoord{}));
  }
  return out;
}

/// Splits a full (N + M)-port scattering matrix, frontend ports first.
inline TuningNetwork partition_network(const CMat& s, Eigen::Index n) {
  if (s.rows() != s.cols() || n < 0 || n > s.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "cannot split a " + std::to_string(s.rows()) + "-port network at " +
                                                  std::to_string(n));
  }
  const Eigen::Index m = s.rows() - n;
  return {s.topLeftCorner(n, n), s.topRightCorner(n, m), s.bottomLeftCorner(m, n), s.bottomRightCorner(m, m)};
}

/// Ideal M-port through connection (no tuning network).
inline TuningNetwork pass_through_network(Eigen::Index m) {
  if (m < 1) throw Error(ErrorCode::InvalidParams, "pass-through network needs at least one port");
  return {CMat::Zero(m, m), CMat::Identity(m, m), CMat::Identity(m, m), CMat::Zero(m, m)};
}

/// Terminating loads on every radiating port, no frontend (N = 0).
inline TuningNetwork load_network(const CVec& gammas) {
  const Eigen::Index m = gammas.size();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::abs(gammas[i]) > 1.0 + 1e-9) {
      warn("ActiveLoad: |gamma_" + std::to_string(i) + "| = " + std::to_string(std::abs(gammas[i])) + " > 1");
      break;
    }
  }
  return {CMat::Zero(0, 0), CMat::Zero(0, m), CMat::Zero(m, 0), gammas.asDiagonal()};
}

struct PassivityReport {
  double max_eigenvalue = 0.0;  // of S^H S
  double tol = 0.0;
  bool passed = true;
};

struct ReciprocityReport {
  double relative_asymmetry = 0.0;  // |S - S^T|_F / |S|_F
  double tol = 0.0;
  bool passed = true;
};

inline PassivityReport check_passivity(const CMat& s, double tol) {
  if (s.rows() != s.cols()) throw Error(ErrorCode::DimensionMismatch, "passivity check needs a square matrix");
  PassivityReport rep{0.0, tol, true};
  if (s.size() == 0) return rep;
  const double sigma = Eigen::JacobiSVD<CMat>(s).singularValues()(0);
  rep.max_eigenvalue = sigma * sigma;
  rep.passed = rep.max_eigenvalue <= 1.0 + tol;
  return rep;
}

inline ReciprocityReport check_reciprocity(const CMat& s, double tol) {
  if (s.rows() != s.cols()) throw Error(ErrorCode::DimensionMismatch, "reciprocity check needs a square matrix");
  ReciprocityReport rep{0.0, tol, true};
  const double norm = s.norm();
  if (norm == 0.0) return rep;
  rep.relative_asymmetry = (s - s.transpose()).norm() / norm;
  rep.passed = rep.relative_asymmetry <= tol;
  return rep;
}

}  // namespace nfrems
