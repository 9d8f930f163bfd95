#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "twophase/thermo.hpp"

using namespace twophase;

namespace {

// Central differences, used only as an independent check of the analytic jets.
template <class F>
double fd1(F f, double t, double h = 1e-5) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}
template <class F>
double fd2(F f, double t, double h = 1e-4) {
  return (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Thermo, DerivedBulkWorkedExample) {
  const PhaseLaw p{1.0, FreeEnergy(0.0, 0.0, 2.0), Polynomial::constant(1.0), Polynomial::constant(1.0)};
  const BulkDerived b = derived_bulk(p, 1.0, 2.0);
  EXPECT_NEAR(b.eta, 0.0, 1e-15);
  EXPECT_NEAR(b.eps, 2.0, 1e-15);
  EXPECT_NEAR(b.kappa, 2.0, 1e-15);
}

TEST(Thermo, DerivedBulkOutsideRangeThrows) {
  const MaterialSet ms = default_materials();
  try {
    derived_bulk(ms, 1, ms.thetaC());
    FAIL() << "expected TemperatureOutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TemperatureOutOfRange);
  }
  EXPECT_THROW(derived_bulk(ms, 2, 0.0), Error);
}

TEST(Thermo, LatentHeatExamples) {
  MaterialSet ms = default_materials();
  ms.phase1.psi = FreeEnergy(0.0, 0.0, 1.0);
  ms.phase2.psi = FreeEnergy(0.0, 0.0, 1.0);
  EXPECT_EQ(latent_heat(ms, 1.3), 0.0);

  // psi1 = -theta(log theta - 1), psi2 = -2 theta(log theta - 1): l = -theta log theta
  ms.phase2.psi = FreeEnergy(0.0, 0.0, 2.0);
  ms.surface = SurfaceLaw::make(Polynomial::quadratic_surface_tension(1.0, 4.0), Polynomial::constant(1.0),
                                Polynomial::constant(0.1));
  EXPECT_NEAR(latent_heat(ms, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(latent_heat(ms, std::exp(1.0)), -std::exp(1.0), 1e-14);
}

TEST(Thermo, LatentHeatAntisymmetricUnderPhaseSwap) {
  MaterialSet ms = default_materials();
  MaterialSet sw = ms;
  std::swap(sw.phase1, sw.phase2);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.02, 1.98);
  for (int i = 0; i < 100; ++i) {
    const double t = U(rng);
    EXPECT_EQ(latent_heat(sw, t), -latent_heat(ms, t));
  }
}

TEST(Thermo, DerivedSurfaceWorkedExample) {
  const MaterialSet ms = default_materials();
  const SurfaceDerived s = derived_surface(ms.surface, 1.0);
  EXPECT_NEAR(s.etaG, 0.5, 1e-15);
  EXPECT_NEAR(s.epsG, 1.25, 1e-15);
  EXPECT_NEAR(s.kappaG, 0.5, 1e-15);
  EXPECT_NEAR(s.lG, -0.5, 1e-15);
}

TEST(Thermo, DerivedSurfaceSmallTemperatureLimit) {
  const MaterialSet ms = default_materials();
  const SurfaceDerived s = derived_surface(ms.surface, 1e-8);
  EXPECT_NEAR(s.etaG, 0.0, 1e-7);
  EXPECT_NEAR(s.epsG, 1.0, 1e-7);
}

TEST(Thermo, LinearSigmaFlaggedNonConcave) {
  MaterialSet ms = default_materials();
  ms.surface = SurfaceLaw::make(Polynomial::affine(1.0, -0.5), Polynomial::constant(1.0), Polynomial::constant(0.1),
                                std::pair{0.0, 10.0});
  EXPECT_NEAR(ms.thetaC(), 2.0, 1e-12);
  const ValidationReport rep = validate_assumptions(ms, temperature_grid(ms.thetaC(), 16));
  EXPECT_TRUE(rep.contains(Violation::NonConcaveSurfaceTension));
  EXPECT_TRUE(rep.contains(Violation::NonPositiveSurfaceHeatCapacity));
}

TEST(Thermo, CriticalTemperatureClosedForm) {
  EXPECT_NEAR(critical_temperature(Polynomial::quadratic_surface_tension(1.0, 2.0)), 2.0, 1e-12);
  EXPECT_NEAR(critical_temperature(Polynomial::quadratic_surface_tension(3.0, 0.7)), 0.7, 1e-12);
}

TEST(Thermo, CriticalTemperatureNoZero) {
  try {
    critical_temperature(Polynomial({1.0, 0.0, 1.0}), std::pair{0.0, 10.0});
    FAIL() << "expected NoZeroFound";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoZeroFound);
  }
}

TEST(Thermo, CriticalTemperatureMultipleZeros) {
  // (t - 1)(t - 3) changes sign twice on (0, 5)
  try {
    critical_temperature(Polynomial({3.0, -4.0, 1.0}), std::pair{0.0, 5.0});
    FAIL() << "expected MultipleZeros";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MultipleZeros);
  }
}

TEST(Thermo, CriticalTemperatureMatchesDenseScan) {
  // Concave decreasing sigma with a non-trivial zero; oracle is a brute-force sign scan.
  const Polynomial s({1.3, -0.2, -0.45});
  const double root = critical_temperature(s, std::pair{0.0, 4.0});
  const int M = 400000;
  double prev = s(0.0), loc = -1.0;
  const double hgrid = 4.0 / M;
  for (int k = 1; k <= M; ++k) {
    const double v = s(k * hgrid);
    if (prev > 0.0 && v <= 0.0) {
      loc = k * hgrid;
      break;
    }
    prev = v;
  }
  ASSERT_GT(loc, 0.0);
  EXPECT_LE(std::abs(root - loc), hgrid);
  EXPECT_LT(std::abs(s(root)), kRootTolerance);
}

TEST(Thermo, DefaultMaterialsValid) {
  const MaterialSet ms = default_materials();
  const ValidationReport rep = validate_assumptions(ms, temperature_grid(ms.thetaC(), 64));
  EXPECT_TRUE(rep.ok());
  EXPECT_NE(latent_heat(ms, 1.0), 0.0);
}

TEST(Thermo, ValidationFlagsEqualDensityAndNegativeGamma) {
  MaterialSet ms = default_materials();
  ms.phase2.rho = ms.phase1.rho;
  EXPECT_TRUE(validate_assumptions(ms, {1.0}).contains(Violation::EqualDensities));
  ms = default_materials();
  ms.surface = SurfaceLaw::make(ms.surface.sigma(), ms.surface.dGamma(), Polynomial::constant(-1.0));
  const ValidationReport rep = validate_assumptions(ms, {0.5, 1.0});
  EXPECT_TRUE(rep.contains(Violation::NegativeKineticCoefficient));
  EXPECT_EQ(rep.entries.size(), 2u);
}

TEST(Thermo, IdentitiesAndFiniteDifferences) {
  MaterialSet ms = default_materials();
  ms.phase1.psi = FreeEnergy(0.3, -0.7, 1.7);
  std::mt19937_64 rng(2024);
  const double tc = ms.thetaC();
  std::uniform_real_distribution<double> U(0.01 * tc, 0.99 * tc);
  for (int i = 0; i < 1000; ++i) {
    const double t = U(rng);
    for (int k = 1; k <= 2; ++k) {
      const PhaseLaw& p = ms.phase(k);
      const BulkDerived b = derived_bulk(p, t, tc);
      const Jet psi = p.psi.at(t);
      EXPECT_LT(std::abs(b.eps - psi.value - t * b.eta), 1e-12 * (1.0 + std::abs(b.eps)));
      EXPECT_LT(std::abs(b.kappa + t * psi.d2), 1e-10);
      auto f = [&](double x) { return p.psi(x); };
      EXPECT_TRUE(rel_close(psi.d1, fd1(f, t), 1e-6));
      EXPECT_TRUE(rel_close(psi.d2, fd2(f, t), 1e-5));
      auto g = [&](double x) { return p.psi.at(x).d2; };
      EXPECT_TRUE(rel_close(psi.d3, fd1(g, t), 1e-6));
    }
    const double l = latent_heat(ms, t);
    const double etaJump = derived_bulk(ms, 2, t).eta - derived_bulk(ms, 1, t).eta;
    EXPECT_LT(std::abs(l + t * etaJump), 1e-12 * (1.0 + std::abs(l)));

    const SurfaceDerived s = derived_surface(ms.surface, t);
    const Jet sig = ms.surface.sigma().at(t);
    EXPECT_LT(std::abs(s.epsG - sig.value - t * s.etaG), 1e-12);
    EXPECT_LT(std::abs(s.lG - t * sig.d1), 1e-12);
    EXPECT_LT(std::abs(s.kappaG + t * sig.d2), 1e-12);
    auto sf = [&](double x) { return ms.surface.sigma()(x); };
    EXPECT_TRUE(rel_close(sig.d1, fd1(sf, t), 1e-6));
  }
}

TEST(Thermo, PolynomialJetMatchesExpansion) {
  const Polynomial p({0.5, -1.0, 2.0, 0.25});
  const Jet j = p.at(1.5);
  EXPECT_NEAR(j.value, 0.5 - 1.5 + 2.0 * 2.25 + 0.25 * 3.375, 1e-14);
  EXPECT_NEAR(j.d1, -1.0 + 4.0 * 1.5 + 0.75 * 2.25, 1e-14);
  EXPECT_NEAR(j.d2, 4.0 + 1.5 * 1.5, 1e-14);
  EXPECT_NEAR(j.d3, 1.5, 1e-14);
}
