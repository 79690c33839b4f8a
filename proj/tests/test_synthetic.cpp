#include <gtest/gtest.h>

#include <random>

#include "nfrems/baseline.hpp"
#include "nfrems/multiport.hpp"
#include "nfrems/synthetic.hpp"

using namespace nfrems;

namespace {

const FrequencySpec kF10(10e9);

// E of a current element from its vector potential A = mu I dl u G(R),
//   E = -j w A + grad(div A) / (j w mu eps),
// with every derivative of G taken by central differences.
CVec3 field_from_potential(const DipoleSpec& d, cplx current, const Vec3& p, const FrequencySpec& f) {
  const double k = f.k();
  auto g = [&](const Vec3& x) {
    const double r = (x - d.position.vec()).norm();
    return std::exp(-kJ * k * r) / (4.0 * kPi * r);
  };
  const double h = 3e-4 / k;
  Eigen::Matrix3cd hess;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Vec3 ei = Vec3::Unit(i) * h, ej = Vec3::Unit(j) * h;
      hess(i, j) = (g(p + ei + ej) - g(p + ei - ej) - g(p - ei + ej) + g(p - ei - ej)) / (4.0 * h * h);
    }
  }
  const cplx moment = kMu0 * current * d.dl;
  const CVec3 a = moment * g(p) * d.orientation.cast<cplx>();
  const CVec3 grad_div = moment * (hess * d.orientation.cast<cplx>());
  const double w = f.omega();
  return -kJ * w * a + grad_div / (kJ * w * kMu0 * kEpsilon0);
}

double sphere_power(const std::function<FieldSample(const CartesianCoord&)>& field, double r, int n_theta = 400,
                    int n_phi = 16) {
  double p = 0.0;
  const double dt = kPi / n_theta, dp = 2.0 * kPi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    const double t = (i + 0.5) * dt;
    for (int j = 0; j < n_phi; ++j) {
      const double ph = j * dp;
      const SphericalCoord s{r, t, ph};
      const FieldSample fs = field(sph_to_cart(s));
      const Vec3 rhat = local_unit_vectors(s).r_hat;
      const CVec3 e = fs.E, hc = fs.H.conjugate();
      const CVec3 poynting(e(1) * hc(2) - e(2) * hc(1), e(2) * hc(0) - e(0) * hc(2), e(0) * hc(1) - e(1) * hc(0));
      p += poynting.real().dot(rhat) * r * r * std::sin(t) * dt * dp;
    }
  }
  return p;
}

ArrayLayout small_ula(int n, const FrequencySpec& f) {
  const double dl = 0.05 * f.lambda();
  const double rh = hertzian_radiation_resistance(dl, f);
  return ula_layout(n, 0.5 * f.lambda(), dl, ElementCircuit::from_resonance(rh, f.hz(), 30.0, 50.0 + 2.0 * rh));
}

}  // namespace

TEST(Hertzian, FarZoneImpedance) {
  const DipoleSpec d{{0, 0, 0}, Vec3::UnitZ(), 1e-3};
  const double r = 100.0 / kF10.k();
  const FieldSample s = hertzian_field(d, 1.0, sph_to_cart({r, 1.0, 0.4}), kF10);
  EXPECT_NEAR(s.E.norm() / s.H.norm() / free_space_impedance(), 1.0, 0.01);
}

TEST(Hertzian, OnAxisField) {
  const DipoleSpec d{{0, 0, 0}, Vec3::UnitZ(), 1e-3};
  const FieldSample s = hertzian_field(d, 1.0, {0, 0, 0.2}, kF10);
  EXPECT_LT(std::abs(s.E(0)) + std::abs(s.E(1)), 1e-15 * s.E.norm());
  EXPECT_LT(s.H.norm(), 1e-15);
  EXPECT_THROW(hertzian_field(d, 1.0, {0, 0, 5e-4}, kF10), Error);
}

TEST(Hertzian, MatchesVectorPotentialOracle) {
  const DipoleSpec d{{0.01, -0.02, 0.03}, Vec3(1, 2, 2) / 3.0, 1.5e-3};
  for (const Vec3& p : {Vec3(0.2, 0.1, -0.05), Vec3(0.02, 0.0, 0.05), Vec3(-1.0, 0.3, 0.7)}) {
    const CVec3 e = hertzian_field(d, cplx(0.7, -0.2), CartesianCoord::from(p), kF10).E;
    const CVec3 ref = field_from_potential(d, cplx(0.7, -0.2), p, kF10);
    EXPECT_LT((e - ref).norm() / ref.norm(), 1e-6);
  }
}

TEST(Hertzian, RadiatedPowerQuadrature) {
  const DipoleSpec d{{0, 0, 0}, Vec3::UnitX(), 1.5e-3};
  const cplx current(0.3, 0.4);
  const double p = sphere_power([&](const CartesianCoord& x) { return hertzian_field(d, current, x, kF10); }, 2.0);
  const double expect = std::norm(current) * hertzian_radiation_resistance(d.dl, kF10);
  EXPECT_NEAR(p / expect, 1.0, 1e-3);
}

TEST(MutualImpedance, SymmetricAndMatchesOracle) {
  const double lam = kF10.lambda(), dl = 0.05 * lam;
  const DipoleSpec a{{0, 0, 0}, Vec3::UnitY(), dl};
  const DipoleSpec parallel{{0, 0, 0.5 * lam}, Vec3::UnitY(), dl};
  const DipoleSpec collinear{{0, 0.5 * lam, 0}, Vec3::UnitY(), dl};
  for (const DipoleSpec& b : {parallel, collinear}) {
    const cplx z = mutual_impedance(a, b, kF10);
    EXPECT_NEAR(std::abs(z - mutual_impedance(b, a, kF10)) / std::abs(z), 0.0, 1e-12);
    const cplx ref = -b.orientation.cast<cplx>().dot(field_from_potential(a, 1.0, b.position.vec(), kF10)) * b.dl;
    EXPECT_LT(std::abs(z - ref) / std::abs(ref), 1e-6);
  }
  EXPECT_THROW(mutual_impedance(a, a, kF10), Error);
}

TEST(MutualImpedance, DecaysWithSeparation) {
  const double lam = kF10.lambda(), dl = 0.05 * lam;
  const DipoleSpec a{{0, 0, 0}, Vec3::UnitY(), dl};
  double prev = 1e300;
  for (double s = 3.0; s <= 40.0; s += 0.25) {
    const double z = std::abs(mutual_impedance(a, {{0, 0, s * lam}, Vec3::UnitY(), dl}, kF10));
    EXPECT_LT(z, prev) << "separation " << s << " lambda";
    prev = z;
  }
}

TEST(ImpedanceMatrix, SingleElementAndStructure) {
  const ArrayLayout one = small_ula(1, kF10);
  const CMat z1 = impedance_matrix(one, kF10);
  const cplx expect = one.circuit.impedance(kF10) + hertzian_radiation_resistance(one.elements[0].dl, kF10);
  EXPECT_NEAR(std::abs(z1(0, 0) - expect), 0.0, 1e-12);

  const CMat z4 = impedance_matrix(small_ula(4, kF10), kF10);
  EXPECT_LT((z4 - z4.transpose()).norm(), 1e-12 * z4.norm());
  EXPECT_GT(std::abs(z4(0, 1)), 0.0);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(z4.real()).eigenvalues();
  EXPECT_GE(ev.minCoeff(), -1e-9 * z4.norm());
  const CMat zd = impedance_matrix(small_ula(4, kF10), kF10, false);
  EXPECT_EQ((zd - CMat(zd.diagonal().asDiagonal())).norm(), 0.0);
}

TEST(ElementCircuit, ResonanceAndQ) {
  const ElementCircuit c = ElementCircuit::from_resonance(2.0, 1e9, 30.0, 2.0);
  EXPECT_NEAR(c.impedance(FrequencySpec(1e9)).imag(), 0.0, 1e-9);
  const double f = 1.1e9;
  EXPECT_NEAR(c.impedance(FrequencySpec(f)).imag(), 2.0 * 30.0 * (f / 1e9 - 1e9 / f), 1e-9);
  EXPECT_THROW(ElementCircuit::from_resonance(0.0, 1e9, 30.0, 2.0), Error);
}

TEST(SyntheticOperator, ReciprocalAndPassive) {
  for (int n : {8, 32}) {
    const PortModel pm = port_model(small_ula(n, kF10), {}, kF10);
    EXPECT_TRUE(check_reciprocity(pm.s_rr, 1e-10).passed) << n;
    EXPECT_TRUE(check_passivity(pm.s_rr, 1e-6).passed) << n;
  }
  const FrequencySpec f(5.8e9);
  const ArrayLayout ris = ris_layout(6, 3, 0.58 * f.lambda(), 0.05 * f.lambda(), Vec3::UnitY(),
                                     ElementCircuit::series_rl(0.2, 1.6e-9), 0.1 * f.lambda());
  const PortModel pm = port_model(ris, {}, f);
  EXPECT_TRUE(check_reciprocity(pm.s_rr, 1e-10).passed);
  EXPECT_TRUE(check_passivity(pm.s_rr, 1e-6).passed);
}

TEST(SyntheticOperator, SingleElementClosedForm) {
  const ArrayLayout one = small_ula(1, kF10);
  SampleGrid g;
  g.points = {{0.5, 0.7, 0.0}, {1.0, 2.0, 1.0}};
  const RadiatingStructureOperator op = build_radiating_operator(one, g, {}, kF10);
  const cplx z = one.circuit.impedance(kF10) + hertzian_radiation_resistance(one.elements[0].dl, kF10);
  const cplx current = 2.0 * std::sqrt(50.0) / (z + 50.0);
  for (Eigen::Index k = 0; k < 2; ++k) {
    const CVec6 ref = outgoing_field_vector(hertzian_field(one.elements[0], current, sph_to_cart(g.points[k]), kF10));
    EXPECT_LT((op.s_nr.middleRows(6 * k, 6).col(0) - ref).norm() / ref.norm(), 1e-10);
  }
  EXPECT_EQ(op.s_nf.cols(), 0);
}

TEST(SyntheticOperator, MatchedElementRadiatesAtMostAvailablePower) {
  const ArrayLayout one = small_ula(1, kF10);
  const PortModel pm = port_model(one, {}, kF10);
  const double r = 5.0;
  const double p = sphere_power(
      [&](const CartesianCoord& x) {
        return field_from_outgoing(unit_current_field_block(one, x, kF10) * pm.current_per_wave, x);
      },
      r);
  EXPECT_LE(p, 1.0 + 1e-3);
  EXPECT_NEAR(p, 1.0 - std::norm(pm.s_rr(0, 0)) - std::norm(std::abs(pm.current_per_wave(0, 0))) * one.circuit.resistance,
              2e-3);
}

TEST(SyntheticOperator, ReceiveTransmitReciprocity) {
  const ArrayLayout ula = small_ula(4, kF10);
  std::vector<PlaneWave> waves = {{0.7, 0.0, 0.0, 1.0}, {2.1, kPi, 0.0, 1.0}, {1.2, 0.0, 1.0, 0.0}};
  const PortModel pm = port_model(ula, waves, kF10);
  const double r = 1e9 / kF10.k();
  for (std::size_t w = 0; w < waves.size(); ++w) {
    const CartesianCoord far = sph_to_cart({r, waves[w].theta, waves[w].phi});
    const CMat block = unit_current_field_block(ula, far, kF10) * pm.current_per_wave;
    const CVec3 e0 = waves[w].amplitude();
    for (Eigen::Index m = 0; m < 4; ++m) {
      const CVec3 e_far = block.col(m).head<3>() * std::sqrt(free_space_impedance());
      const cplx predicted = 2.0 * kPi * r * std::exp(kJ * kF10.k() * r) / (kJ * free_space_impedance() * kF10.k()) *
                             (e_far.transpose() * e0)(0);
      const cplx actual = pm.s_rf(m, static_cast<Eigen::Index>(w));
      if (std::abs(actual) < 1e-9) continue;
      EXPECT_LT(std::abs(predicted - actual) / std::abs(actual), 1e-6) << "wave " << w << " port " << m;
    }
  }
}

TEST(SyntheticOperator, DecoupledArrayFieldIsWeightedArrayFactor) {
  // y dipoles, x-z plane, no coupling: E = y_hat sum_n K c_n(p) T(k R_n) I_n
  // with T = 1 + 1/(jkR) + 1/(jkR)^2 the only departure from c^T v.
  const int n = 8;
  const ArrayLayout ula = small_ula(n, kF10);
  const PortModel pm = port_model(ula, {}, kF10, {false});
  const SWArrayModel sw{ula.positions(), kF10};
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  CVec v(n);
  for (int i = 0; i < n; ++i) v[i] = {nd(rng), nd(rng)};
  const CVec current = pm.current_per_wave * v;
  const double dl = ula.elements[0].dl, k = kF10.k();
  double worst_plain = 0.0;
  for (double r : {0.3, 1.0, 3.0}) {
    for (double t : {0.2, 0.9, 1.6}) {
      const SphericalCoord p{r, t, 0.0};
      const CartesianCoord x = sph_to_cart(p);
      const CVec3 e = (unit_current_field_block(ula, x, kF10) * current).head<3>() * std::sqrt(free_space_impedance());
      const CVec c = array_factor(sw, p);
      cplx weighted = 0.0;
      for (int i = 0; i < n; ++i) {
        const double rn = (x.vec() - ula.elements[static_cast<std::size_t>(i)].position.vec()).norm();
        const cplx ijkr = 1.0 / (kJ * k * rn);
        weighted += c[i] * (1.0 + ijkr + ijkr * ijkr) * current[i];
      }
      const cplx scale = -kJ * free_space_impedance() * k * dl / (4.0 * kPi);
      EXPECT_LT(std::abs(e(0)) + std::abs(e(2)), 1e-14 * e.norm());
      EXPECT_LT(std::abs(e(1) - scale * weighted) / std::abs(e(1)), 1e-12);
      worst_plain = std::max(worst_plain, std::abs(std::abs(e(1)) / std::abs(scale * (c.transpose() * current)(0)) - 1.0));
    }
  }
  // The plain array factor misses the reactive terms by O(1 / kR).
  EXPECT_LT(worst_plain, 10.0 / (k * 0.3));
}

TEST(GroundPlane, ImageCancelsTangentialField) {
  const FrequencySpec f(5.8e9);
  ArrayLayout lay = ris_layout(1, 1, 0.58 * f.lambda(), 0.05 * f.lambda(), Vec3::UnitY(),
                               ElementCircuit::series_rl(0.2, 1e-9), 0.1 * f.lambda());
  for (const CartesianCoord& x : {CartesianCoord{0.03, 0.01, 0.0}, CartesianCoord{-0.2, 0.1, 0.0}}) {
    const CVec6 a = unit_current_field_block(lay, x, f).col(0);
    EXPECT_LT(std::abs(a(0)) + std::abs(a(1)), 1e-12 * a.norm());
    EXPECT_LT(std::abs(a(5)), 1e-12 * a.norm());
  }
  lay.elements[0].position.z = 0.001;
  EXPECT_THROW(lay.validate(), Error);
}

TEST(Background, NormalIncidenceMirrorsTangentialField) {
  // Image limit E_scat(z) = -E_inc(-z). The plate edges add a ripple that
  // shrinks like 1 / sqrt(width), so a 12 lambda plate sits ~10 % off and
  // 5 % needs ~100 lambda.
  const FrequencySpec f(5.8e9);
  const double lam = f.lambda();
  const PlaneWave w{0.0, 0.0, 1.0, 0.0};
  const CartesianCoord p{0.0, 0.0, 0.25 * lam};
  const CVec3 e_mirror = plane_wave_field(w, {0.0, 0.0, -p.z}, f).E;
  std::vector<double> err;
  for (double half : {6.0, 24.0, 60.0}) {
    const RISAperture ap{-half * lam, half * lam, -half * lam, half * lam, true};
    const CVec3 e_scat = specular_background(ap, w, {p}, f).head<3>() * std::sqrt(free_space_impedance());
    const cplx ratio = e_scat(0) / e_mirror(0);
    EXPECT_LT(ratio.real(), -0.85) << half;
    err.push_back((e_scat + e_mirror).norm() / e_mirror.norm());
  }
  EXPECT_LT(err[0], 0.2);
  EXPECT_LT(err[1], err[0]);
  EXPECT_LT(err[2], err[1]);
  EXPECT_LT(err[2], 0.05);
}

TEST(Background, ObliqueIncidencePeaksAtSpecularAngle) {
  const FrequencySpec f(5.8e9);
  const double lam = f.lambda();
  const RISAperture ap{-9 * lam, 9 * lam, -9 * lam, 9 * lam, true};
  const PlaneWave w{kPi / 6, kPi, 0.0, 1.0};
  double best = -1.0, best_deg = 0.0, sum = 0.0;
  int count = 0;
  for (int deg = -80; deg <= 80; ++deg) {
    const CVec a = specular_background(ap, w, {sph_to_cart(in_plane(30.0, deg * kPi / 180, 0.0))}, f);
    const double u = a.squaredNorm();
    sum += u;
    ++count;
    if (u > best) {
      best = u;
      best_deg = deg;
    }
  }
  EXPECT_NEAR(best_deg, 30.0, 1.0);
  EXPECT_GT(best / (sum / count), 10.0);
}

TEST(Background, VanishingApertureAndResolution) {
  const FrequencySpec f(5.8e9);
  const PlaneWave w{0.3, 0.0, 1.0, 0.0};
  const RISAperture dot{0.0, 0.0, 0.0, 0.0, true};
  EXPECT_EQ(specular_background(dot, w, {{0, 0, 1}}, f).norm(), 0.0);
  const RISAperture ap{-0.1, 0.1, -0.1, 0.1, true};
  try {
    (void)specular_background(ap, w, {{0, 0, 1}}, f, 8.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::QuadratureUnderresolved);
  }
  EXPECT_THROW(specular_background(ap, PlaneWave{2.5, 0.0, 1.0, 0.0}, {{0, 0, 1}}, f), Error);
}

TEST(Varactor, LosslessUnitModulus) {
  const FrequencySpec f(5.8e9);
  const Varactor v{0.1e-12, 2e-12, 0.0};
  for (double c = v.c_min; c <= v.c_max; c += 0.1e-12) EXPECT_NEAR(std::abs(varactor_gamma(c, v, f)), 1.0, 1e-14);
  const Varactor big{1e-9, 1e-3, 3.0};
  EXPECT_NEAR(std::abs(varactor_gamma(1e-3, big, f) - (3.0 - 50.0) / (3.0 + 50.0)), 0.0, 1e-9);
  EXPECT_THROW(varactor_gamma(3e-12, v, f), Error);
}

TEST(Varactor, PhaseRoundTrip) {
  const FrequencySpec f(5.8e9);
  const VaractorMap map({0.1e-12, 2e-12, 0.5}, f);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double c = 0.1e-12 * std::pow(20.0, u(rng));
    const double back = map.capacitance_for_phase(std::arg(map.gamma(c)));
    EXPECT_NEAR(back / c, 1.0, 1e-9);
  }
  EXPECT_THROW((void)map.capacitance_for_phase(map.phase_max() + 1.0), Error);
}

TEST(CellResponse, ResonanceAndInverse) {
  const FrequencySpec f(5.8e9);
  const Varactor v{0.1e-12, 2e-12, 0.5};
  const double c_res = 0.5e-12;
  const cplx z_cell(0.8, 1.0 / (f.omega() * c_res));
  const CellResponseMap map(z_cell, v, f);
  EXPECT_NEAR(std::abs(map.response(c_res) - 1.0), 0.0, 1e-12);
  for (double c = v.c_min; c <= v.c_max; c *= 1.1) {
    EXPECT_LE(std::abs(map.response(c)), 1.0 + 1e-15);
    EXPECT_NEAR(map.capacitance_for_phase(map.phase(c)) / c, 1.0, 1e-9);
  }
  EXPECT_EQ(map.capacitance_for_phase(map.phase_max() + 0.1), v.c_min);
  EXPECT_EQ(map.capacitance_for_phase(map.phase_min() - 0.1), v.c_max);
}
