#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "twophase/equilibria.hpp"

using namespace twophase;

namespace {
constexpr double pi = std::numbers::pi;

SphereFamily single(double R) { return SphereFamily{{Point{0.0, 0.0, 0.0}}, R}; }
}  // namespace

TEST(Equilibria, RadiusFromMassSphere) {
  const MaterialSet ms = default_materials();
  const Domain dom{3, 2.0};
  const double R = radius_from_mass(dom, ms, 12.0 * pi, 1);
  EXPECT_NEAR(R, 1.0, 1e-14);
  EXPECT_NEAR(total_functionals(ms, dom, single(R), 1.0).M, 12.0 * pi, 1e-12 * 12.0 * pi);
}

TEST(Equilibria, RadiusFromMassDisks) {
  const MaterialSet ms = default_materials();
  const Domain dom{2, 1.0};
  const double R = radius_from_mass(dom, ms, pi + 2.0 * (pi / 8.0), 2);
  EXPECT_NEAR(R, std::sqrt(1.0 / 8.0), 1e-14);
}

TEST(Equilibria, RadiusFromMassEmptyPhase) {
  const MaterialSet ms = default_materials();
  const Domain dom{3, 2.0};
  try {
    radius_from_mass(dom, ms, ms.phase2.rho * dom.volume(), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyPhase);
  }
}

TEST(Equilibria, TemperatureFromEnergyWorkedExample) {
  const MaterialSet ms = default_materials();
  const Domain dom{3, 2.0};
  const double V1 = 4.0 * pi / 3.0, V2 = 28.0 * pi / 3.0;
  // Default eps_i = c_i theta (a = 0), so E(theta) = (4 V1 + V2) theta + 4 pi (1 + theta^2/4).
  auto E = [&](double t) { return (4.0 * V1 + 1.0 * V2) * t + 4.0 * pi * (1.0 + t * t / 4.0); };
  EXPECT_NEAR(total_functionals(ms, dom, single(1.0), 1.0).E, E(1.0), 1e-12);
  const TemperatureRoot r = temperature_from_energy(ms, dom, single(1.0), E(1.0));
  EXPECT_NEAR(r.theta, 1.0, 1e-10);
  EXPECT_FALSE(r.nonMonotone());
}

TEST(Equilibria, TemperatureFromEnergyBelowRange) {
  const MaterialSet ms = default_materials();
  const Domain dom{3, 2.0};
  try {
    temperature_from_energy(ms, dom, single(1.0), -1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoRootInRange);
  }
}

TEST(Equilibria, TinyInterfaceApproachesBulkOnly) {
  const MaterialSet ms = default_materials();
  const Domain dom{3, 2.0};
  const double R = 1e-4;
  const double V1 = ball_volume(3, R), V2 = dom.volume() - V1;
  const double E0 = 50.0;
  // bulk-only closed form: theta = E0 / (rho1 c1 V1 + rho2 c2 V2)
  const double bulkOnly = E0 / (4.0 * V1 + 1.0 * V2);
  const double t = temperature_from_energy(ms, dom, single(R), E0).theta;
  EXPECT_NEAR(t, bulkOnly, 1e-6);
}

TEST(Equilibria, PressuresSatisfyBothRelations) {
  const MaterialSet ms = default_materials();
  const auto [p1, p2] = equilibrium_pressures(ms, 1.0, 1.0, 3);
  const double s = ms.surface.sigma()(1.0) * 2.0;
  EXPECT_NEAR(p2 - p1, s, 1e-12 * std::abs(s));
  const double J = ms.phase2.psi(1.0) - ms.phase1.psi(1.0);
  EXPECT_NEAR(J + p2 / ms.phase2.rho - p1 / ms.phase1.rho, 0.0, 1e-12 * (1.0 + std::abs(J)));
}

TEST(Equilibria, PressuresZeroPsiJump) {
  MaterialSet ms = default_materials();
  ms.phase2.psi = ms.phase1.psi;
  const auto [p1, p2] = equilibrium_pressures(ms, 1.0, 1.0, 3);
  const double s = ms.surface.sigma()(1.0) * 2.0;
  EXPECT_NEAR(p2 - p1, s, 1e-14);
  EXPECT_NEAR(p2, p1 / 2.0, 1e-14);  // rho = (2, 1): pi2/rho2 = pi1/rho1
}

TEST(Equilibria, PressuresVanishNearCriticalTemperature) {
  MaterialSet ms = default_materials();
  ms.phase2.psi = ms.phase1.psi;
  const auto [p1, p2] = equilibrium_pressures(ms, ms.thetaC() * (1.0 - 1e-15), 1.0, 3);
  EXPECT_NEAR(p1, 0.0, 1e-13);
  EXPECT_NEAR(p2, 0.0, 1e-13);
}

TEST(Equilibria, NondegeneracyCases) {
  const Domain dom{3, 2.0};
  EXPECT_TRUE(validate_nondegenerate(single(0.5), dom).ok);
  SphereFamily touching{{Point{-0.5, 0.0, 0.0}, Point{0.5, 0.0, 0.0}}, 0.5};
  const NondegeneracyReport r = validate_nondegenerate(touching, dom);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.diagnostics.size(), 1u);
  EXPECT_FALSE(validate_nondegenerate(single(2.0), dom).ok);
}

TEST(Equilibria, NondegeneracyPermutationInvariant) {
  const Domain dom{2, 3.0};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    SphereFamily s;
    s.R = 0.3;
    for (int k = 0; k < 5; ++k) s.centers.push_back(Point{U(rng), U(rng), 0.0});
    bool brute = true;
    for (int i = 0; i < 5; ++i) {
      if (std::hypot(s.centers[i][0], s.centers[i][1]) + s.R >= dom.R_Omega) brute = false;
      for (int j = i + 1; j < 5; ++j)
        if (std::hypot(s.centers[i][0] - s.centers[j][0], s.centers[i][1] - s.centers[j][1]) <= 2 * s.R) brute = false;
    }
    EXPECT_EQ(validate_nondegenerate(s, dom).ok, brute);
    std::shuffle(s.centers.begin(), s.centers.end(), rng);
    EXPECT_EQ(validate_nondegenerate(s, dom).ok, brute);
  }
}

TEST(Equilibria, ConstantSigmaHasNoSurfaceEntropy) {
  MaterialSet ms = default_materials();
  ms.surface = SurfaceLaw::with_range(Polynomial::constant(0.8), Polynomial::constant(1.0), Polynomial::constant(0.1),
                                      2.0);
  const Domain dom{3, 2.0};
  const ConservedTotals t = total_functionals(ms, dom, single(1.0), 1.2);
  EXPECT_EQ(t.Phi_Gamma, 0.0);
  EXPECT_NEAR(t.E_Gamma, 0.8 * 4.0 * pi, 1e-14);
}

TEST(Equilibria, KineticEnergyIsAdditive) {
  const MaterialSet ms = default_materials();
  const Domain dom{3, 2.0};
  const ConservedTotals a = total_functionals(ms, dom, single(1.0), 1.0);
  const ConservedTotals b = total_functionals(ms, dom, single(1.0), 1.0, {KineticPatch{2, 0.5, 3.0}});
  EXPECT_NEAR(b.E - a.E, 0.5 * ms.phase2.rho * 9.0 * 0.5, 1e-12);
  EXPECT_EQ(b.Phi, a.Phi);
}

TEST(Equilibria, ManifoldDimension) {
  EXPECT_EQ(equilibrium_manifold_dimension(3, 1), 5);
  EXPECT_EQ(equilibrium_manifold_dimension(2, 1), 4);
  EXPECT_EQ(equilibrium_manifold_dimension(3, 4), 14);
}

TEST(Equilibria, RandomRoundTrips) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    MaterialSet ms = default_materials();
    ms.phase1.rho = 0.5 + 3.0 * U(rng);
    ms.phase2.rho = 0.5 + 3.0 * U(rng);
    if (std::abs(ms.phase1.rho - ms.phase2.rho) < 0.05) ms.phase2.rho += 0.3;
    const int n = U(rng) < 0.5 ? 2 : 3;
    const int m = 1 + static_cast<int>(3.0 * U(rng));
    const Domain dom{n, 3.0};
    const double R = 0.2 + 0.5 * U(rng);
    const double V1 = m * ball_volume(n, R);
    const double M0 = ms.phase1.rho * V1 + ms.phase2.rho * (dom.volume() - V1);
    const double Rb = radius_from_mass(dom, ms, M0, m);
    EXPECT_NEAR(Rb, R, 1e-12 * R);
    const SphereFamily s{ring_centers(m, 1.5), Rb};
    ASSERT_TRUE(validate_nondegenerate(s, dom).ok);
    EXPECT_NEAR(total_functionals(ms, dom, s, 1.0).M, M0, 1e-12 * M0);

    const double theta = 0.1 + 1.8 * U(rng);
    const double E0 = total_functionals(ms, dom, s, theta).E;
    const EquilibriumState eq = equilibrium_from_totals(ms, dom, s.centers, M0, E0);
    EXPECT_NEAR(eq.thetaStar, theta, 1e-10);
    const double sig = ms.surface.sigma()(eq.thetaStar);
    EXPECT_NEAR(eq.pi2 - eq.pi1, sig * eq.HStar, 1e-12 * std::max(1.0, sig * eq.HStar));
    const double J = ms.phase2.psi(eq.thetaStar) - ms.phase1.psi(eq.thetaStar);
    EXPECT_NEAR(J + eq.pi2 / ms.phase2.rho - eq.pi1 / ms.phase1.rho, 0.0, 1e-12 * (1.0 + std::abs(eq.pi1)));
  }
}

TEST(Equilibria, RadialFieldQuadratureMatchesClosedForm) {
  const MaterialSet ms = default_materials();
  const Domain dom{3, 2.0};
  RadialField f;
  f.R = 1.0;
  const int N = 10;
  for (int i = 0; i < N; ++i) {
    const double a = static_cast<double>(i) / N, b = static_cast<double>(i + 1) / N;
    f.vol1.push_back(ball_volume(3, b) - ball_volume(3, a));
    f.theta1.push_back(1.1);
    const double c = 1.0 + a, d = 1.0 + b;
    f.vol2.push_back(ball_volume(3, d) - ball_volume(3, c));
    f.theta2.push_back(1.1);
  }
  f.thetaGamma = 1.1;
  const ConservedTotals g = total_functionals(ms, dom, f);
  const ConservedTotals c = total_functionals(ms, dom, single(1.0), 1.1);
  EXPECT_NEAR(g.M, c.M, 1e-12 * c.M);
  EXPECT_NEAR(g.E, c.E, 1e-12 * c.E);
  EXPECT_NEAR(g.Phi, c.Phi, 1e-12 * std::abs(c.Phi));

  f.vol2.pop_back();
  EXPECT_THROW(total_functionals(ms, dom, f), Error);
}
