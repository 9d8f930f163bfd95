#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "twophase/radial.hpp"
#include "twophase/residuals.hpp"
#include "twophase/ripening.hpp"

using namespace twophase;

namespace {

constexpr double kPi = std::numbers::pi;

double oracle_ball(int n, double r) { return n == 2 ? kPi * r * r : 4.0 / 3.0 * kPi * r * r * r; }
double oracle_sphere(int n, double r) { return n == 2 ? 2.0 * kPi * r : 4.0 * kPi * r * r; }

// Uniform temperature carrying energy E for psi_i = a_i - b_i t - c_i t (log t - 1) and
// sigma = s0 (1 - t^2 / tc^2): eps_i = a_i + c_i t, eps_G = s0 (1 + t^2 / tc^2), a quadratic in t.
double oracle_uniform_temperature(const MaterialSet& ms, int n, double R, double Ro, double E) {
  const double V1 = oracle_ball(n, R), V2 = oracle_ball(n, Ro) - V1, A = oracle_sphere(n, R);
  const auto& p1 = ms.phase1;
  const auto& p2 = ms.phase2;
  const double s0 = ms.surface.sigma().coeffs()[0];
  const double tc = ms.thetaC();
  const double qa = s0 * A / (tc * tc);
  const double qb = p1.rho * p1.psi.c() * V1 + p2.rho * p2.psi.c() * V2;
  const double qc = p1.rho * p1.psi.a() * V1 + p2.rho * p2.psi.a() * V2 + s0 * A - E;
  return (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
}

MaterialSet with_surface_scale(double s0) {
  MaterialSet ms = default_materials();
  ms.surface = SurfaceLaw::make(Polynomial::quadratic_surface_tension(s0, 2.0), Polynomial::constant(1.0),
                                Polynomial::constant(0.1));
  return ms;
}

std::vector<double> all_nodes(const RadialState& s) {
  std::vector<double> x(s.theta1);
  x.push_back(s.thetaGamma);
  x.insert(x.end(), s.theta2.begin(), s.theta2.end());
  return x;
}

// Gap of the discrete entropy identity at t = tstar: (Phi(t) - Phi(t - dt)) / dt - P(t).
double identity_gap(int n, int N, double dt, double tstar) {
  const MaterialSet ms = default_materials();
  RadialGrid g;
  g.n = n;
  g.N1 = g.N2 = N;
  RadialState s = radial_initial(g, RadialProfile::Cosine, 1.0, 0.3);
  RadialState prev = s;
  const int steps = static_cast<int>(std::lround(tstar / dt));
  for (int k = 0; k < steps; ++k) {
    prev = s;
    s = radial_step(ms, g, s, dt);
  }
  const double dPhi = radial_totals(ms, g, s).Phi - radial_totals(ms, g, prev).Phi;
  return dPhi / dt - radial_entropy_production(ms, g, s);
}

double observed_order(double a, double b, double c) { return std::log2(std::abs(a - b) / std::abs(b - c)); }

double half_time(const RadialTrajectory& tr) {
  const double target = tr.diagnostics.thetaInfinity;
  const double d0 = std::abs(tr.samples.front().thetaGamma - target);
  for (const auto& s : tr.samples)
    if (std::abs(s.thetaGamma - target) <= 0.5 * d0) return s.t;
  return std::numeric_limits<double>::infinity();
}

}  // namespace

TEST(Radial, UniformTemperatureIsFixedPoint) {
  const MaterialSet ms = default_materials();
  for (int n : {2, 3}) {
    RadialGrid g;
    g.n = n;
    const RadialState s = radial_state_from_profile(g, [](double) { return 1.0; });
    const RadialState next = radial_step(ms, g, s, 0.01);
    const auto a = all_nodes(s), b = all_nodes(next);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
    EXPECT_DOUBLE_EQ(next.t, 0.01);
  }
}

TEST(Radial, UniformTemperatureGivesFlatDiagnostics) {
  const MaterialSet ms = default_materials();
  RadialGrid g;
  const RadialState s = radial_state_from_profile(g, [](double) { return 1.0; });
  const RadialTrajectory tr = simulate_radial(ms, g, s, 0.01, 200, 10);
  for (const auto& x : tr.samples) {
    EXPECT_EQ(x.E, tr.samples.front().E);
    EXPECT_EQ(x.Phi, tr.samples.front().Phi);
    EXPECT_EQ(x.production, 0.0);
    EXPECT_EQ(x.thetaMin, 1.0);
    EXPECT_EQ(x.thetaMax, 1.0);
  }
  EXPECT_EQ(tr.diagnostics.monotonicityViolations, 0);
}

TEST(Radial, NodeQuadratureMatchesClosedFormTotals) {
  const MaterialSet ms = default_materials();
  for (int n : {2, 3}) {
    RadialGrid g;
    g.n = n;
    const RadialState s = radial_state_from_profile(g, [](double) { return 0.8; });
    const ConservedTotals t = radial_totals(ms, g, s);
    const double V1 = oracle_ball(n, 1.0), V2 = oracle_ball(n, 2.0) - V1;
    EXPECT_NEAR(t.M, 2.0 * V1 + 1.0 * V2, 1e-12 * t.M);
    const double A = oracle_sphere(n, 1.0);
    const double E = 2.0 * 2.0 * 0.8 * V1 + 1.0 * 1.0 * 0.8 * V2 + (1.0 + 0.8 * 0.8 / 4.0) * A;
    EXPECT_NEAR(t.E, E, 1e-12 * E);
    EXPECT_NEAR(oracle_uniform_temperature(ms, n, 1.0, 2.0, t.E), 0.8, 1e-12);
  }
}

TEST(Radial, LyapunovStructureOverLongRuns) {
  const MaterialSet ms = default_materials();
  for (int n : {2, 3}) {
    RadialGrid g;
    g.n = n;
    for (RadialProfile kind : {RadialProfile::TwoConstant, RadialProfile::Cosine, RadialProfile::CentralSpot}) {
      const RadialState s0 = radial_initial(g, kind, 1.0, 0.3);
      const RadialTrajectory tr = simulate_radial(ms, g, s0, 5e-3, 10000, 500);
      const double E0 = radial_totals(ms, g, s0).E;
      const double thetaInf = oracle_uniform_temperature(ms, n, g.R, g.R_Omega, E0);
      EXPECT_LT(tr.diagnostics.energyDrift, 1e-6);
      EXPECT_GE(tr.diagnostics.minEntropyStep, -1e-10);
      EXPECT_EQ(tr.diagnostics.monotonicityViolations, 0);
      EXPECT_NEAR(tr.diagnostics.thetaInfinity, thetaInf, 1e-10);
      for (double x : all_nodes(tr.final)) EXPECT_NEAR(x, thetaInf, 1e-6);
      EXPECT_GT(tr.samples.back().Phi, tr.samples.front().Phi);
    }
  }
}

TEST(Radial, EntropyIdentityConvergesFirstOrderInTime) {
  for (int n : {2, 3}) {
    const double a = identity_gap(n, 64, 4e-3, 0.2), b = identity_gap(n, 64, 2e-3, 0.2),
                 c = identity_gap(n, 64, 1e-3, 0.2);
    EXPECT_GE(observed_order(a, b, c), 0.95) << "n=" << n;
  }
}

TEST(Radial, EntropyIdentityConvergesSecondOrderInSpace) {
  for (int n : {2, 3}) {
    const double a = identity_gap(n, 16, 1e-3, 0.2), b = identity_gap(n, 32, 1e-3, 0.2),
                 c = identity_gap(n, 64, 1e-3, 0.2);
    EXPECT_GE(observed_order(a, b, c), 1.95) << "n=" << n;
  }
}

TEST(Radial, InterfaceTemperatureRelaxesMonotonically) {
  // Equal rho kappa and d in both phases; only the interface starts off theta_*.
  MaterialSet ms = default_materials();
  ms.phase1.psi = FreeEnergy(0.0, 0.0, 1.0);
  ms.phase2.psi = FreeEnergy(0.0, 0.5, 2.0);
  RadialGrid g;
  RadialState s = radial_state_from_profile(g, [](double) { return 1.0; });
  s.thetaGamma = 1.2;
  const RadialTrajectory tr = simulate_radial(ms, g, s, 1e-3, 3000, 1);
  for (std::size_t k = 1; k < tr.samples.size(); ++k) {
    EXPECT_LE(tr.samples[k].thetaGamma, tr.samples[k - 1].thetaGamma + 1e-14);
    EXPECT_GE(tr.samples[k].thetaGamma, tr.diagnostics.thetaInfinity - 1e-14);
    EXPECT_LE(tr.samples[k].thetaMax, tr.samples[k - 1].thetaMax + 1e-14);
    EXPECT_GE(tr.samples[k].thetaMin, tr.samples[k - 1].thetaMin - 1e-14);
  }
}

TEST(Radial, LargerSurfaceCapacityRelaxesSlower) {
  RadialGrid g;
  RadialState s = radial_state_from_profile(g, [](double) { return 1.0; });
  s.thetaGamma = 1.1;
  const RadialTrajectory small = simulate_radial(with_surface_scale(1.0), g, s, 1e-3, 4000, 1);
  const RadialTrajectory large = simulate_radial(with_surface_scale(20.0), g, s, 1e-3, 4000, 1);
  EXPECT_LT(half_time(small), half_time(large));
  EXPECT_TRUE(std::isfinite(half_time(large)));
}

TEST(Radial, LeavingTheTemperatureRangeStopsTheRun) {
  const MaterialSet ms = default_materials();
  RadialGrid g;
  RadialState s = radial_state_from_profile(g, [](double) { return 1.0; });
  s.theta1[0] = 2.5;
  try {
    radial_step(ms, g, s, 0.01);
    FAIL() << "expected RangeExit";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RangeExit);
  }
}

TEST(Radial, StateMustMatchGrid) {
  const MaterialSet ms = default_materials();
  RadialGrid g;
  RadialState s = radial_state_from_profile(g, [](double) { return 1.0; });
  s.theta2.pop_back();
  EXPECT_THROW(radial_step(ms, g, s, 0.01), Error);
}

TEST(Ripening, EqualRadiiAreStationary) {
  const RipeningParams p = RipeningParams::at(default_materials(), 1.0, 3);
  EXPECT_EQ(ripening_rhs(p, Eigen::VectorXd::Constant(4, 0.3)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(ripening_rhs(p, Eigen::VectorXd::Constant(1, 0.7)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Ripening, RatesPreserveTotalVolume) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.2, 1.5);
  for (int n : {2, 3}) {
    const RipeningParams p = RipeningParams::at(default_materials(), 1.0, n);
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd R(5);
      for (int k = 0; k < 5; ++k) R[k] = U(rng);
      const Eigen::VectorXd dR = ripening_rhs(p, R);
      double dot = 0.0, scale = 0.0;
      for (int k = 0; k < 5; ++k) {
        dot += std::pow(R[k], n - 1) * dR[k];
        scale += std::abs(std::pow(R[k], n - 1) * dR[k]);
      }
      EXPECT_LE(std::abs(dot), 1e-12 * scale);
    }
  }
}

TEST(Ripening, LargerDropletGrowsAtTheLinearRate) {
  for (int n : {2, 3}) {
    const RipeningParams p = RipeningParams::at(default_materials(), 1.0, n);
    const double eps = 1e-6;
    const Eigen::VectorXd dR = ripening_rhs(p, Eigen::Vector2d(1.0 + eps, 1.0 - eps));
    EXPECT_GT(dR[0] - dR[1], 0.0);
    const double growth = (dR[0] - dR[1]) / (2.0 * eps);
    EXPECT_NEAR(growth, volume_exchange_spectrum(p, 2, 1.0).front(), 1e-5 * growth);
  }
}

TEST(Ripening, CollapsedDropletIsReported) {
  const RipeningParams p = RipeningParams::at(default_materials(), 1.0, 3);
  try {
    ripening_rhs(p, Eigen::Vector2d(1.0, 1e-4), 1e-3);
    FAIL() << "expected DropletCollapse";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DropletCollapse);
  }
}

TEST(Ripening, ZeroKineticCoefficientIsRejected) {
  MaterialSet ms = default_materials();
  ms.surface = SurfaceLaw::make(Polynomial::quadratic_surface_tension(1.0, 2.0), Polynomial::constant(1.0),
                                Polynomial::constant(0.0));
  EXPECT_THROW(RipeningParams::at(ms, 1.0, 3), Error);
}

TEST(Ripening, TwoDropletsEndInConservationRadius) {
  for (int n : {2, 3}) {
    const RipeningParams p = RipeningParams::at(default_materials(), 1.0, n);
    DropletState s;
    s.R = Eigen::Vector2d(1.01, 0.99);
    const RipeningTrajectory tr = simulate_ripening(p, s, 100.0, 1e-3);
    ASSERT_EQ(tr.events.size(), 1u);
    EXPECT_EQ(tr.events.front().index, 1);
    EXPECT_NEAR(tr.events.front().radius, tr.diagnostics.Rmin, 1e-9);
    ASSERT_EQ(tr.final.R.size(), 1);
    const double expected = std::pow(std::pow(1.01, n) + std::pow(0.99, n), 1.0 / n);
    EXPECT_NEAR(tr.final.R[0], expected, 1e-8 * expected);
    EXPECT_LE(tr.diagnostics.volumeDrift, 1e-8);
    EXPECT_LE(tr.diagnostics.volumeDriftBetweenEvents, 1e-10);
    EXPECT_EQ(tr.diagnostics.areaIncreases, 0);
  }
}

TEST(Ripening, SingleDropletIsStationary) {
  const RipeningParams p = RipeningParams::at(default_materials(), 1.0, 3);
  DropletState s;
  s.R = Eigen::VectorXd::Constant(1, 0.6);
  const RipeningTrajectory tr = simulate_ripening(p, s, 10.0, 1e-2);
  EXPECT_TRUE(tr.events.empty());
  EXPECT_EQ(tr.final.R[0], 0.6);
  EXPECT_EQ(tr.final.t, 10.0);
}

TEST(Ripening, EscapeRateMatchesLeadingReducedEigenvalue) {
  for (int n : {2, 3}) {
    const RipeningParams p = RipeningParams::at(default_materials(), 1.0, n);
    const double R0 = 0.5;
    DropletState s;
    s.R = Eigen::Vector3d(R0 * (1.0 + 2e-8), R0 * (1.0 - 1e-8), R0 * (1.0 - 1e-8));
    const RipeningTrajectory tr = simulate_ripening(p, s, 20.0, 1e-4);
    const double fit = escape_rate(n, tr, 1e-6 * R0, 1e-3 * R0);
    const double lead = volume_exchange_spectrum(p, 3, R0).front();
    EXPECT_NEAR(fit, lead, 0.05 * lead);
    EXPECT_EQ(tr.final.R.size(), 1);
  }
}

TEST(Ripening, ManyDropletsCoarsenToOne) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.3, 0.6);
  for (int n : {2, 3}) {
    const RipeningParams p = RipeningParams::at(default_materials(), 1.0, n);
    DropletState s;
    s.R.resize(6);
    for (int k = 0; k < 6; ++k) s.R[k] = U(rng);
    const double W = s.R.array().pow(n).sum();
    const RipeningTrajectory tr = simulate_ripening(p, s, 1e3, 1e-3);
    EXPECT_EQ(tr.events.size(), 5u);
    ASSERT_EQ(tr.final.R.size(), 1);
    EXPECT_NEAR(tr.final.R[0], std::pow(W, 1.0 / n), 1e-8);
    EXPECT_LE(tr.diagnostics.volumeDrift, 1e-8);
    EXPECT_LE(tr.diagnostics.volumeDriftBetweenEvents, 1e-10);
    EXPECT_EQ(tr.diagnostics.areaIncreases, 0);
    for (std::size_t k = 1; k < tr.events.size(); ++k) EXPECT_GE(tr.events[k].t, tr.events[k - 1].t);
  }
}

TEST(Ripening, TrajectoriesAreEquivariantUnderRelabeling) {
  const RipeningParams p = RipeningParams::at(default_materials(), 1.0, 3);
  DropletState a, b;
  a.R = Eigen::Vector4d(0.45, 0.5, 0.4, 0.55);
  b.R = Eigen::Vector4d(0.55, 0.4, 0.5, 0.45);  // labels reversed
  const RipeningTrajectory ta = simulate_ripening(p, a, 50.0, 1e-3);
  const RipeningTrajectory tb = simulate_ripening(p, b, 50.0, 1e-3);
  ASSERT_EQ(ta.events.size(), tb.events.size());
  for (std::size_t k = 0; k < ta.events.size(); ++k) {
    EXPECT_NEAR(ta.events[k].t, tb.events[k].t, 1e-8 * ta.events[k].t);
    EXPECT_EQ(ta.events[k].index, 3 - tb.events[k].index);
  }
  ASSERT_EQ(ta.final.R.size(), tb.final.R.size());
  for (Eigen::Index k = 0; k < ta.final.R.size(); ++k) EXPECT_NEAR(ta.final.R[k], tb.final.R[k], 1e-10);
}

TEST(Ripening, PairwiseGapIsReportedWithCentres) {
  const RipeningParams p = RipeningParams::at(default_materials(), 1.0, 3);
  DropletState s;
  s.R = Eigen::Vector2d(0.3, 0.25);
  s.centers = {Point{-0.5, 0.0, 0.0}, Point{0.5, 0.0, 0.0}};
  const RipeningTrajectory tr = simulate_ripening(p, s, 10.0, 1e-3);
  EXPECT_NEAR(tr.samples.front().minGap, 1.0 - 0.55, 1e-15);
  EXPECT_EQ(tr.final.centers.size(), 1u);
}

TEST(Residuals, EquilibriumSnapshotHasZeroResiduals) {
  const MaterialSet ms = default_materials();
  for (int n : {2, 3})
    for (double theta : {0.5, 1.0, 1.7}) {
      const FieldSnapshot s = equilibrium_snapshot(ms, n, 0.8, 2.0, theta);
      const auto r = interface_residuals(ms, s);
      ASSERT_EQ(r.size(), 8u);
      for (const auto& e : r) EXPECT_LT(e.value, 1e-10) << e.name;
      EXPECT_TRUE(compatibility_check(ms, s).ok());
    }
}

TEST(Residuals, ManufacturedRadialFlowStressConverges) {
  // u = c / r^(n-1) e_r in phase 2, u = 0 in phase 1, j and V from the jump relations.
  // Continuum normal stress residual: [[1/rho]] j^2 + 2 mu_2 (n-1) c / R^n.
  const MaterialSet ms = default_materials();
  const double c = 0.1;
  for (int n : {2, 3}) {
    std::vector<double> err;
    for (int N : {16, 32, 64}) {
      FieldSnapshot s = equilibrium_snapshot(ms, n, 1.0, 2.0, 1.0, N);
      for (std::size_t i = 0; i < s.phase2.r.size(); ++i)
        s.phase2.ur.row(i).setConstant(c / std::pow(s.phase2.r[i], n - 1));
      const double jump = 1.0 / ms.phase2.rho - 1.0 / ms.phase1.rho;
      const double j = c / jump;
      s.j.setConstant(j);
      s.V.setConstant(-j / ms.phase1.rho);
      const auto r = interface_residuals(ms, s);
      EXPECT_LT(r[1].value, 1e-12);
      EXPECT_LT(r[7].value, 1e-12);
      EXPECT_LT(r[0].value, 1e-12);
      const double pointwise = jump * j * j + 2.0 * (n - 1) * c;
      const double norm = detail::surface_norm(n, 1.0, Eigen::RowVectorXd::Constant(s.angles, pointwise));
      err.push_back(std::abs(r[3].value - norm));
    }
    EXPECT_GE(std::log2(err[0] / err[1]), 1.8);
    EXPECT_GE(std::log2(err[1] / err[2]), 1.8);
  }
}

TEST(Residuals, ShearFlowTangentialStress) {
  // u_a = c r^2 sin(a) in phase 2: D_ra = c r sin(a) / 2, exact for the quadratic stencil.
  const MaterialSet ms = default_materials();
  const double c = 0.3;
  for (int n : {2, 3}) {
    FieldSnapshot s = equilibrium_snapshot(ms, n, 1.0, 2.0, 1.0, 12, 16);
    Eigen::RowVectorXd shear(s.angles), slip(s.angles);
    for (int k = 0; k < s.angles; ++k) {
      for (std::size_t i = 0; i < s.phase2.r.size(); ++i)
        s.phase2.ua(i, k) = c * s.phase2.r[i] * s.phase2.r[i] * std::sin(s.angle(k));
      shear[k] = -c * std::sin(s.angle(k));
      slip[k] = c * std::sin(s.angle(k));
    }
    const auto r = interface_residuals(ms, s);
    EXPECT_NEAR(r[4].value, detail::surface_norm(n, 1.0, shear), 1e-12);
    EXPECT_NEAR(r[0].value, detail::surface_norm(n, 1.0, slip), 1e-12);
  }
}

TEST(Residuals, RadialTrajectorySnapshotsSatisfyInterfaceConditions) {
  const MaterialSet ms = default_materials();
  for (int n : {2, 3}) {
    std::vector<double> energy;
    for (int N : {16, 32, 64}) {
      RadialGrid g;
      g.n = n;
      g.N1 = g.N2 = N;
      const double dt = 1e-4;
      RadialState s = radial_initial(g, RadialProfile::Cosine, 1.0, 0.3);
      for (int k = 0; k < 2000; ++k) s = radial_step(ms, g, s, dt);
      const RadialState next = radial_step(ms, g, s, dt);
      const auto r = interface_residuals(ms, snapshot_from_radial(ms, g, next, (next.thetaGamma - s.thetaGamma) / dt));
      for (const auto& e : r)
        if (e.name != "surface_energy") {
          EXPECT_LT(e.value, 1e-10) << e.name;
        }
      energy.push_back(r[5].value);
    }
    EXPECT_GE(std::log2(energy[0] / energy[1]), 1.8);
    EXPECT_GE(std::log2(energy[1] / energy[2]), 1.8);
  }
}

TEST(Residuals, ShapeMismatchIsRejected) {
  const MaterialSet ms = default_materials();
  FieldSnapshot s = equilibrium_snapshot(ms, 3, 1.0, 2.0, 1.0);
  s.j.resize(3);
  try {
    interface_residuals(ms, s);
    FAIL() << "expected GridMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridMismatch);
  }
  FieldSnapshot t = equilibrium_snapshot(ms, 3, 1.0, 2.0, 1.0);
  t.phase2.r.back() = 1.9;
  EXPECT_THROW(compatibility_check(ms, t), Error);
}

TEST(Compatibility, MarangoniConditionFailsForSurfaceGradient) {
  // theta_0 = theta_* + a cos(angle) throughout, u_0 = 0: the residual is the quadrature of
  // sigma'(theta) (1/R) d theta / d angle.
  const MaterialSet ms = default_materials();
  const double amp = 0.05;
  for (int n : {2, 3}) {
    std::vector<double> err;
    for (int Na : {16, 32, 64}) {
      FieldSnapshot s = equilibrium_snapshot(ms, n, 1.0, 2.0, 1.0, 8, Na);
      Eigen::RowVectorXd exact(Na);
      for (int k = 0; k < Na; ++k) {
        const double a = s.angle(k);
        const double th = 1.0 + amp * std::cos(a);
        s.phase1.theta.col(k).setConstant(th);
        s.phase2.theta.col(k).setConstant(th);
        s.thetaGamma[k] = th;
        exact[k] = ms.surface.sigma().at(th).d1 * (-amp * std::sin(a));
      }
      const CompatibilityReport rep = compatibility_check(ms, s);
      EXPECT_FALSE(rep.at("marangoni").pass);
      EXPECT_TRUE(rep.at("divergence").pass);
      EXPECT_TRUE(rep.at("temperature_continuity").pass);
      err.push_back(std::abs(rep.at("marangoni").value - detail::surface_norm(n, 1.0, exact)));
    }
    EXPECT_GE(std::log2(err[0] / err[1]), 1.8);
    EXPECT_GE(std::log2(err[1] / err[2]), 1.8);
  }
}

TEST(Compatibility, DivergenceFreeFieldPassesAtStencilOrder) {
  // Stream-function fields: n = 3 u_r = 2 f cos(a) / r^2, u_a = -f' sin(a) / r;
  // n = 2 u_r = f cos(a) / r, u_a = -f' sin(a); f = r^3 (2 - r)^2 vanishes to second order at the wall.
  const MaterialSet ms = default_materials();
  const auto f = [](double r) { return r * r * r * (2.0 - r) * (2.0 - r); };
  const auto fp = [](double r) { return 3.0 * r * r * (2.0 - r) * (2.0 - r) - 2.0 * r * r * r * (2.0 - r); };
  for (int n : {2, 3}) {
    std::vector<double> div;
    for (int N : {16, 32, 64}) {
      FieldSnapshot s = equilibrium_snapshot(ms, n, 1.0, 2.0, 1.0, N, N);
      for (PhaseField* pf : {&s.phase1, &s.phase2})
        for (std::size_t i = 0; i < pf->r.size(); ++i) {
          const double r = pf->r[i];
          if (r == 0.0) continue;
          for (int k = 0; k < s.angles; ++k) {
            const double a = s.angle(k);
            pf->ur(i, k) = n == 3 ? 2.0 * f(r) * std::cos(a) / (r * r) : f(r) * std::cos(a) / r;
            pf->ua(i, k) = n == 3 ? -fp(r) * std::sin(a) / r : -fp(r) * std::sin(a);
          }
        }
      const CompatibilityReport rep = compatibility_check(ms, s);
      EXPECT_LT(rep.at("wall_velocity").value, 1e-12);
      EXPECT_LT(rep.at("tangential_velocity").value, 1e-12);
      div.push_back(rep.at("divergence").value);
    }
    EXPECT_GE(std::log2(div[0] / div[1]), 1.8);
    EXPECT_GE(std::log2(div[1] / div[2]), 1.8);
  }
}

TEST(Compatibility, RadialSourceFlowDivergenceVanishesUnderRefinement) {
  const MaterialSet ms = default_materials();
  for (int n : {2, 3}) {
    std::vector<double> div;
    for (int N : {10, 20, 40}) {
      FieldSnapshot s = equilibrium_snapshot(ms, n, 1.0, 2.0, 1.0, N);
      for (std::size_t i = 0; i < s.phase2.r.size(); ++i)
        s.phase2.ur.row(i).setConstant(0.2 / std::pow(s.phase2.r[i], n - 1));
      const CompatibilityReport rep = compatibility_check(ms, s);
      EXPECT_FALSE(rep.at("wall_velocity").pass);
      div.push_back(rep.at("divergence").value);
    }
    EXPECT_GE(std::log2(div[0] / div[1]), 1.8);
    EXPECT_GE(std::log2(div[1] / div[2]), 1.8);
  }
}
