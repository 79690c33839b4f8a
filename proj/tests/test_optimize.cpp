#include <gtest/gtest.h>

#include <random>

#include "nfrems/optimize.hpp"
#include "nfrems/scenario.hpp"
#include "oracles.hpp"

using namespace nfrems;

namespace {

EigenResult top_of(const CMat& g, double tol = 1e-10) { return pc_focus_vector(g, tol); }

struct DenseTop {
  double lambda;
  CVec v;
};

DenseTop dense_top(const CMat& g) {
  Eigen::SelfAdjointEigenSolver<CMat> es(g.adjoint() * g);
  const Eigen::Index n = g.cols();
  return {es.eigenvalues()[n - 1], es.eigenvectors().col(n - 1)};
}

double quotient(const CMat& g, const CVec& v) { return (g * v).squaredNorm() / v.squaredNorm(); }

struct SmallRis {
  ScenarioConfig cfg;
  RisSetup setup;
  std::shared_ptr<SyntheticSource> src;
  SphericalCoord focus;
};

SmallRis small_ris(int nx, int ny) {
  SmallRis s;
  s.cfg = scenario_template(3);
  s.cfg.ris.cells_x = nx;
  s.cfg.ris.cells_y = ny;
  s.setup = ris_from_config(s.cfg);
  const FrequencySpec f(s.cfg.frequency_hz);
  s.src = std::make_shared<SyntheticSource>(s.setup.layout, f, std::vector<PlaneWave>{s.setup.wave}, s.setup.opts);
  s.focus = s.cfg.focus.sph();
  return s;
}

}  // namespace

TEST(DominantEigvec, DiagonalAndIdentity) {
  CMat g = CMat::Zero(2, 2);
  g(0, 0) = 1.0;
  g(1, 1) = 2.0;
  const EigenResult r = top_of(g);
  EXPECT_NEAR(r.lambda, 4.0, 1e-9);
  EXPECT_LT(std::abs(r.v[0]), 1e-5);
  EXPECT_NEAR(std::abs(r.v[1]), 1.0, 1e-9);
  EXPECT_FALSE(r.degenerate);

  const EigenResult id = top_of(CMat::Identity(3, 3));
  EXPECT_NEAR(id.lambda, 1.0, 1e-15);
  EXPECT_TRUE(id.degenerate);
  EXPECT_LT((id.v - CVec::Ones(3) / std::sqrt(3.0)).norm(), 1e-15);
}

TEST(DominantEigvec, MatchesDenseEigensolver) {
  std::mt19937_64 rng(30);
  for (int t = 0; t < 50; ++t) {
    const CMat g = oracle::random_cmat(rng, 3, 5);
    const EigenResult r = top_of(g, 1e-12);
    const DenseTop ref = dense_top(g);
    EXPECT_LE(std::abs(r.lambda - ref.lambda), 1e-9 * ref.lambda);
    EXPECT_GE(std::abs(r.v.dot(ref.v)), 1.0 - 1e-8);
    EXPECT_NEAR(r.v.norm(), 1.0, 1e-14);
  }
}

TEST(DominantEigvec, RowPhaseInvariance) {
  std::mt19937_64 rng(31);
  const CMat g = oracle::random_cmat(rng, 6, 8);
  CMat gp = g;
  for (Eigen::Index i = 0; i < 6; ++i) gp.row(i) *= std::polar(1.0, 0.7 * static_cast<double>(i) + 0.3);
  const EigenResult a = top_of(g, 1e-13), b = top_of(gp, 1e-13);
  EXPECT_NEAR(a.lambda / b.lambda, 1.0, 1e-12);
  EXPECT_NEAR(std::abs(a.v.dot(b.v)), 1.0, 1e-10);
}

TEST(DominantEigvec, ReportsNoConvergence) {
  std::mt19937_64 rng(32);
  const CMat g = oracle::random_cmat(rng, 6, 6);
  try {
    (void)pc_focus_vector(g, 1e-14, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoConvergence);
  }
  EXPECT_THROW(dominant_eigvec([](const CVec& x) { return x; }, [](const CVec& x) { return x; }, 0), Error);
}

TEST(PcFocus, SingleColumn) {
  CMat g(6, 1);
  for (int i = 0; i < 6; ++i) g(i, 0) = cplx(i - 2.0, 0.5 * i);
  const EigenResult r = top_of(g);
  EXPECT_NEAR(std::abs(r.v[0]), 1.0, 1e-15);
  EXPECT_NEAR(r.lambda, g.squaredNorm(), 1e-12 * g.squaredNorm());
}

TEST(PcFocus, BeatsRandomExcitations) {
  std::mt19937_64 rng(33);
  const CMat g = oracle::random_cmat(rng, 6, 32);
  const EigenResult r = top_of(g);
  const double best = quotient(g, r.v);
  for (int t = 0; t < 1000; ++t) EXPECT_LE(quotient(g, oracle::random_cmat(rng, 32, 1)), best * (1.0 + 1e-12));
}

TEST(PcFocus, BruteForceMeshSmallDimensions) {
  std::mt19937_64 rng(34);
  {
    // N = 2: v = (cos a, sin a e^{j p}), up to a global phase; 1000 x 1000 mesh.
    const CMat g = oracle::random_cmat(rng, 6, 2);
    const double best = quotient(g, top_of(g).v);
    double mesh = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double a = 0.5 * kPi * i / 999.0;
      for (int j = 0; j < 1000; ++j) {
        const CVec v = (CVec(2) << std::cos(a), std::sin(a) * std::polar(1.0, 2.0 * kPi * j / 1000.0)).finished();
        mesh = std::max(mesh, quotient(g, v));
      }
    }
    EXPECT_LE(mesh, best * (1.0 + 1e-6));
    EXPECT_GE(mesh, best * (1.0 - 1e-4));
  }
  {
    // N = 3: two amplitude angles and two relative phases, 32^4 points.
    const CMat g = oracle::random_cmat(rng, 6, 3);
    const double best = quotient(g, top_of(g).v);
    double mesh = 0.0;
    const int n = 32;
    for (int i = 0; i < n; ++i) {
      const double a = 0.5 * kPi * i / (n - 1);
      for (int j = 0; j < n; ++j) {
        const double b = 0.5 * kPi * j / (n - 1);
        for (int k = 0; k < n; ++k) {
          for (int l = 0; l < n; ++l) {
            const CVec v = (CVec(3) << std::cos(a), std::sin(a) * std::cos(b) * std::polar(1.0, 2.0 * kPi * k / n),
                            std::sin(a) * std::sin(b) * std::polar(1.0, 2.0 * kPi * l / n))
                               .finished();
            mesh = std::max(mesh, quotient(g, v));
          }
        }
      }
    }
    EXPECT_LE(mesh, best * (1.0 + 1e-6));
  }
}

TEST(PcFocus, DecoupledArrayMatchesSphericalWaveSolution) {
  for (int n : {8, 32}) {
    ScenarioConfig c = scenario_template(1);
    c.array.elements = n;
    c.array.mutual_coupling = false;
    const FrequencySpec f(c.frequency_hz);
    const ArrayLayout lay = ula_from_config(c);
    const auto src = ula_source(c, lay, f);
    const CMat y = port_waves_vtx(src->s_rr(), pass_through_network(n), RFFrontend::matched(n));
    const CVec v_pc = top_of(ula_gain_block(*src, y, c.focus.sph()), 1e-13).v;
    const CVec v_sw = sw_focus_vector(array_factor(SWArrayModel{lay.positions(), f}, c.focus.sph()));
    EXPECT_GE(std::abs(v_pc.dot(v_sw)), 1.0 - 1e-6) << n;
  }
}

TEST(FiniteDiff, LinearConstantCubic) {
  const RVec a = (RVec(3) << 1.5, -2.0, 0.25).finished();
  const RVec x = (RVec(3) << 0.3, -1.2, 2.0).finished();
  EXPECT_LT((finite_diff_gradient([&](const RVec& y) { return a.dot(y); }, x, 1e-6) - a).norm(), 1e-10);
  EXPECT_EQ(finite_diff_gradient([](const RVec&) { return 4.0; }, x, 1e-6).norm(), 0.0);
  // Central differences are exact on quadratics, so the O(h^2) check uses a cubic.
  auto cubic = [](const RVec& y) { return std::pow(y[0], 3); };
  const RVec x1 = (RVec(1) << 1.0).finished();
  const double e1 = std::abs(finite_diff_gradient(cubic, x1, 1e-2)[0] - 3.0);
  const double e2 = std::abs(finite_diff_gradient(cubic, x1, 5e-3)[0] - 3.0);
  EXPECT_NEAR(e1 / e2, 4.0, 1e-3);
}

TEST(FiniteDiff, OneSidedAtBoundary) {
  const Box box{RVec::Zero(1), RVec::Ones(1)};
  auto f = [](const RVec& y) {
    if (y[0] < 0.0 || y[0] > 1.0) throw Error(ErrorCode::OutOfRange, "outside");
    return 2.0 * y[0];
  };
  EXPECT_NEAR(finite_diff_gradient(f, RVec::Ones(1), 1e-6, 1.0, &box)[0], 2.0, 1e-8);
  EXPECT_NEAR(finite_diff_gradient(f, RVec::Zero(1), 1e-6, 1.0, &box)[0], 2.0, 1e-8);
}

TEST(Ascent, ConcaveQuadratic) {
  FocusObjective obj;
  obj.evaluate = [](const RVec& x) { return -std::pow(x[0] - 0.3, 2); };
  obj.domain = {RVec::Constant(1, -1.0), RVec::Constant(1, 1.0)};
  AscentOptions o;
  o.tol = 1e-12;
  const AscentResult r = projected_gradient_ascent(obj, RVec::Constant(1, -0.9), o);
  EXPECT_NEAR(r.x[0], 0.3, 1e-8);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GE(r.trace[i], r.trace[i - 1]);
  EXPECT_THROW(projected_gradient_ascent(obj, RVec::Constant(1, 2.0)), Error);
}

TEST(Ascent, BoxConstrainedMaximumOnBoundary) {
  FocusObjective obj;
  obj.evaluate = [](const RVec& x) { return x[0] + 2.0 * x[1]; };
  obj.domain = {RVec::Zero(2), RVec::Ones(2)};
  const AscentResult r = projected_gradient_ascent(obj, RVec::Constant(2, 0.5));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.x[1], 1.0, 1e-12);
}

TEST(Ascent, NonFiniteObjective) {
  FocusObjective obj;
  obj.evaluate = [](const RVec&) { return std::numeric_limits<double>::quiet_NaN(); };
  obj.domain = {RVec::Zero(1), RVec::Ones(1)};
  try {
    (void)projected_gradient_ascent(obj, RVec::Constant(1, 0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteObjective);
  }
}

TEST(RisGradient, AnalyticMatchesFiniteDifference) {
  const SmallRis s = small_ris(4, 2);
  const FrequencySpec f(s.cfg.frequency_hz);
  const RisFocusProblem p(*s.src, s.focus, s.setup.varactor, f, 50.0);
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Varactor& v = s.setup.varactor;
  for (int t = 0; t < 3; ++t) {
    RVec c(8);
    for (auto& x : c) x = v.c_min * std::pow(v.c_max / v.c_min, 0.1 + 0.8 * u(rng));
    const RVec g = p.gradient(c);
    const RVec fd = finite_diff_gradient([&](const RVec& x) { return p.energy(x); }, c, 1e-5, v.c_max);
    EXPECT_LT((g - fd).norm() / g.norm(), 1e-5);
    // Directional derivatives along random directions.
    for (int d = 0; d < 10; ++d) {
      RVec dir(8);
      for (auto& x : dir) x = u(rng) - 0.5;
      dir *= 1e-17 / dir.norm();
      const double slope = (p.energy(c + dir) - p.energy(c - dir)) / 2.0;
      EXPECT_NEAR(fd.dot(dir) / slope, 1.0, 0.01);
      EXPECT_NEAR(g.dot(dir) / slope, 1.0, 1e-3);
    }
  }
}

TEST(RisGradient, AscentTraceMonotone) {
  const SmallRis s = small_ris(4, 2);
  const FrequencySpec f(s.cfg.frequency_hz);
  const RisFocusProblem p(*s.src, s.focus, s.setup.varactor, f, 50.0);
  const Varactor& v = s.setup.varactor;
  FocusObjective obj;
  obj.evaluate = [&](const RVec& x) { return p.energy(x); };
  obj.gradient = [&](const RVec& x) { return p.gradient(x); };
  obj.domain = {RVec::Constant(8, v.c_min), RVec::Constant(8, v.c_max)};
  for (double start : {0.2e-12, 0.6e-12, 1.5e-12}) {
    const AscentResult r = ris_gradient_ascent(obj, RVec::Constant(8, start));
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GE(r.trace[i], r.trace[i - 1]);
    EXPECT_GE(r.trace.back(), r.trace.front());
    EXPECT_TRUE(obj.domain.contains(r.x));
  }
}
