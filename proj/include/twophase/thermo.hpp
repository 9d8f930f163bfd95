#pragma once

// Bulk and surface constitutive laws and the thermodynamic quantities derived from them.
//
// Bulk:    eta = -psi',  eps = psi + theta eta,  kappa = eps' = -theta psi''
// Surface: etaG = -sigma', epsG = sigma + theta etaG, kappaG = -theta sigma'', lG = theta sigma'
// Jumps are taken as [[v]] = v_2 - v_1 (phase 1 is the dispersed phase inside the interface).

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twophase/constitutive.hpp"
#include "twophase/error.hpp"

namespace twophase {

struct PhaseLaw {
  double rho = 1.0;
  FreeEnergy psi;
  Polynomial mu = Polynomial::constant(1.0);
  Polynomial d = Polynomial::constant(1.0);
};

/// Surface law. thetaC is the upper end of the admissible temperature range: the unique
/// zero of sigma when one exists, otherwise an explicitly supplied cap.
class SurfaceLaw {
 public:
  SurfaceLaw() = default;

  /// Builds the law and locates thetaC as the unique zero of sigma.
  static SurfaceLaw make(Polynomial sigma, Polynomial dGamma, Polynomial gamma,
                         std::optional<std::pair<double, double>> bracket = std::nullopt);

  /// Builds the law on (0, thetaMax) without requiring sigma to vanish there
  /// (e.g. the constant-sigma family).
  static SurfaceLaw with_range(Polynomial sigma, Polynomial dGamma, Polynomial gamma,
                               double thetaMax) {
    if (!(thetaMax > 0.0)) throw Error(ErrorCode::InvalidArgument, "thetaMax must be positive");
    SurfaceLaw s;
    s.sigma_ = std::move(sigma);
    s.dGamma_ = std::move(dGamma);
    s.gamma_ = std::move(gamma);
    s.thetaC_ = thetaMax;
    return s;
  }

  const Polynomial& sigma() const { return sigma_; }
  const Polynomial& dGamma() const { return dGamma_; }
  const Polynomial& gamma() const { return gamma_; }
  double thetaC() const { return thetaC_; }

 private:
  Polynomial sigma_ = Polynomial::quadratic_surface_tension(1.0, 2.0);
  Polynomial dGamma_ = Polynomial::constant(1.0);
  Polynomial gamma_ = Polynomial::constant(0.1);
  double thetaC_ = 2.0;
};

struct MaterialSet {
  PhaseLaw phase1;
  PhaseLaw phase2;
  SurfaceLaw surface;

  double thetaC() const { return surface.thetaC(); }
  /// [[v]] = v_2 - v_1
  static double jump(double v1, double v2) { return v2 - v1; }
  double rho_jump() const { return phase2.rho - phase1.rho; }
  double inv_rho_jump() const { return 1.0 / phase2.rho - 1.0 / phase1.rho; }
  const PhaseLaw& phase(int i) const { return i == 1 ? phase1 : phase2; }
};

struct BulkDerived {
  double eta = 0.0;
  double eps = 0.0;
  double kappa = 0.0;
};

struct SurfaceDerived {
  double etaG = 0.0;
  double epsG = 0.0;
  double kappaG = 0.0;
  double lG = 0.0;
};

inline void check_temperature(double theta, double thetaC) {
  if (!(theta > 0.0 && theta < thetaC)) {
    throw Error(ErrorCode::TemperatureOutOfRange,
                "theta = " + std::to_string(theta) + " outside (0, " + std::to_string(thetaC) + ")");
  }
}

inline BulkDerived derived_bulk(const PhaseLaw& phase, double theta, double thetaC) {
  check_temperature(theta, thetaC);
  const Jet psi = phase.psi.at(theta);
  BulkDerived out;
  out.eta = -psi.d1;
  out.eps = psi.value - theta * psi.d1;
  out.kappa = -theta * psi.d2;
  return out;
}

inline BulkDerived derived_bulk(const MaterialSet& ms, int phase, double theta) {
  return derived_bulk(ms.phase(phase), theta, ms.thetaC());
}

/// l(theta) = theta [[psi'(theta)]] = -theta [[eta(theta)]]
inline double latent_heat(const MaterialSet& ms, double theta) {
  check_temperature(theta, ms.thetaC());
  return theta * (ms.phase2.psi.at(theta).d1 - ms.phase1.psi.at(theta).d1);
}

inline SurfaceDerived derived_surface(const SurfaceLaw& s, double theta) {
  check_temperature(theta, s.thetaC());
  const Jet sig = s.sigma().at(theta);
  SurfaceDerived out;
  out.etaG = -sig.d1;
  out.epsG = sig.value - theta * sig.d1;
  out.kappaG = -theta * sig.d2;
  out.lG = theta * sig.d1;
  return out;
}

inline constexpr double kRootTolerance = 1e-12;
inline constexpr int kScanPoints = 512;

/// Unique zero of sigma on (0, inf). The quadratic family sigma0 (1 - theta^2/thetaC^2) is
/// solved in closed form; anything else needs a bracket, which is scanned for sign changes
/// and refined by bisection.
inline double critical_temperature(const Polynomial& sigma,
                                   std::optional<std::pair<double, double>> bracket = std::nullopt) {
  const auto& c = sigma.coeffs();
  if (!bracket && c.size() == 3 && c[1] == 0.0 && c[0] > 0.0 && c[2] < 0.0) {
    return std::sqrt(-c[0] / c[2]);
  }
  const auto [lo, hi] = bracket.value_or(std::pair<double, double>{0.0, 100.0});
  if (!(hi > lo) || lo < 0.0) throw Error(ErrorCode::InvalidArgument, "bad bracket for critical temperature");

  // Sign-change scan. The left end is nudged off zero to stay inside (0, inf).
  const double a0 = lo > 0.0 ? lo : hi * 1e-12;
  std::vector<std::pair<double, double>> changes;
  double prevT = a0;
  double prevV = sigma(a0);
  for (int k = 1; k <= kScanPoints; ++k) {
    const double t = a0 + (hi - a0) * static_cast<double>(k) / kScanPoints;
    const double v = sigma(t);
    if (prevV == 0.0 && k > 1) changes.emplace_back(prevT, prevT);
    if ((prevV > 0.0 && v < 0.0) || (prevV < 0.0 && v > 0.0)) changes.emplace_back(prevT, t);
    prevT = t;
    prevV = v;
  }
  if (changes.empty()) {
    if (prevV == 0.0) return prevT;
    throw Error(ErrorCode::NoZeroFound, "sigma has no sign change on the bracket");
  }
  if (changes.size() > 1) throw Error(ErrorCode::MultipleZeros, "sigma changes sign more than once");

  auto [a, b] = changes.front();
  double fa = sigma(a);
  for (int it = 0; it < 200 && b - a > 0.0; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid == a || mid == b) break;
    const double fm = sigma(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  const double root = std::abs(sigma(a)) < std::abs(sigma(b)) ? a : b;
  if (std::abs(sigma(root)) > kRootTolerance) {
    throw Error(ErrorCode::NoZeroFound, "bisection did not reach the root tolerance");
  }
  return root;
}

inline double critical_temperature(const SurfaceLaw& s,
                                   std::optional<std::pair<double, double>> bracket = std::nullopt) {
  return critical_temperature(s.sigma(), bracket);
}

inline SurfaceLaw SurfaceLaw::make(Polynomial sigma, Polynomial dGamma, Polynomial gamma,
                                   std::optional<std::pair<double, double>> bracket) {
  SurfaceLaw s;
  s.thetaC_ = critical_temperature(sigma, bracket);
  s.sigma_ = std::move(sigma);
  s.dGamma_ = std::move(dGamma);
  s.gamma_ = std::move(gamma);
  return s;
}

enum class Violation {
  NonPositiveDensity,
  EqualDensities,
  NonPositiveViscosity,
  NonPositiveConductivity,
  NonPositiveHeatCapacity,
  NonPositiveSurfaceTension,
  NonDecreasingSurfaceTension,
  NonConcaveSurfaceTension,
  NonPositiveSurfaceHeatCapacity,
  NonPositiveSurfaceConductivity,
  NegativeKineticCoefficient,
  TemperatureOutsideRange,
};

inline std::string to_string(Violation v) {
  switch (v) {
    case Violation::NonPositiveDensity: return "NonPositiveDensity";
    case Violation::EqualDensities: return "EqualDensities";
    case Violation::NonPositiveViscosity: return "NonPositiveViscosity";
    case Violation::NonPositiveConductivity: return "NonPositiveConductivity";
    case Violation::NonPositiveHeatCapacity: return "NonPositiveHeatCapacity";
    case Violation::NonPositiveSurfaceTension: return "NonPositiveSurfaceTension";
    case Violation::NonDecreasingSurfaceTension: return "NonDecreasingSurfaceTension";
    case Violation::NonConcaveSurfaceTension: return "NonConcaveSurfaceTension";
    case Violation::NonPositiveSurfaceHeatCapacity: return "NonPositiveSurfaceHeatCapacity";
    case Violation::NonPositiveSurfaceConductivity: return "NonPositiveSurfaceConductivity";
    case Violation::NegativeKineticCoefficient: return "NegativeKineticCoefficient";
    case Violation::TemperatureOutsideRange: return "TemperatureOutsideRange";
  }
  return "Unknown";
}

struct ViolationEntry {
  Violation kind;
  int phase = 0;  // 1 or 2 for bulk laws, 0 for surface / global entries
  double theta = 0.0;
  double value = 0.0;
};

struct ValidationReport {
  std::vector<ViolationEntry> entries;

  bool ok() const { return entries.empty(); }
  bool contains(Violation v) const {
    for (const auto& e : entries)
      if (e.kind == v) return true;
    return false;
  }
};

/// Checks the standing sign assumptions on every grid temperature. Violations are
/// collected, never thrown.
inline ValidationReport validate_assumptions(const MaterialSet& ms, const std::vector<double>& grid) {
  ValidationReport rep;
  auto add = [&](Violation v, int phase, double t, double val) { rep.entries.push_back({v, phase, t, val}); };

  for (int i = 1; i <= 2; ++i)
    if (!(ms.phase(i).rho > 0.0)) add(Violation::NonPositiveDensity, i, 0.0, ms.phase(i).rho);
  if (ms.phase1.rho == ms.phase2.rho) add(Violation::EqualDensities, 0, 0.0, ms.phase1.rho);

  const double thetaC = ms.thetaC();
  for (double t : grid) {
    if (!(t > 0.0 && t < thetaC)) {
      add(Violation::TemperatureOutsideRange, 0, t, t);
      continue;
    }
    for (int i = 1; i <= 2; ++i) {
      const PhaseLaw& p = ms.phase(i);
      const double mu = p.mu(t);
      const double d = p.d(t);
      const double kappa = derived_bulk(p, t, thetaC).kappa;
      if (!(mu > 0.0)) add(Violation::NonPositiveViscosity, i, t, mu);
      if (!(d > 0.0)) add(Violation::NonPositiveConductivity, i, t, d);
      if (!(kappa > 0.0)) add(Violation::NonPositiveHeatCapacity, i, t, kappa);
    }
    const Jet sig = ms.surface.sigma().at(t);
    const double kappaG = -t * sig.d2;
    const double dG = ms.surface.dGamma()(t);
    const double gam = ms.surface.gamma()(t);
    if (!(sig.value > 0.0)) add(Violation::NonPositiveSurfaceTension, 0, t, sig.value);
    if (!(sig.d1 < 0.0)) add(Violation::NonDecreasingSurfaceTension, 0, t, sig.d1);
    if (!(sig.d2 < 0.0)) add(Violation::NonConcaveSurfaceTension, 0, t, sig.d2);
    if (!(kappaG > 0.0)) add(Violation::NonPositiveSurfaceHeatCapacity, 0, t, kappaG);
    if (!(dG > 0.0)) add(Violation::NonPositiveSurfaceConductivity, 0, t, dG);
    if (!(gam >= 0.0)) add(Violation::NegativeKineticCoefficient, 0, t, gam);
  }
  return rep;
}

/// Uniform grid of `count` interior temperatures in (0, thetaC).
inline std::vector<double> temperature_grid(double thetaC, int count, double lo_frac = 0.01, double hi_frac = 0.99) {
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double s = count == 1 ? 0.5 : static_cast<double>(k) / (count - 1);
    g.push_back(thetaC * (lo_frac + (hi_frac - lo_frac) * s));
  }
  return g;
}

/// Reference material set: rho = (2, 1), c = (2, 1), sigma0 = 1, thetaC = 2,
/// mu = d = 1 per phase, dGamma = 1, gamma = 0.1. b2 = 0.5 makes the latent heat
/// nonzero at the working temperature theta = 1 (l(1) = b2 - b1 = 0.5).
inline MaterialSet default_materials() {
  MaterialSet ms;
  ms.phase1 = PhaseLaw{2.0, FreeEnergy(0.0, 0.0, 2.0), Polynomial::constant(1.0), Polynomial::constant(1.0)};
  ms.phase2 = PhaseLaw{1.0, FreeEnergy(0.0, 0.5, 1.0), Polynomial::constant(1.0), Polynomial::constant(1.0)};
  ms.surface = SurfaceLaw::make(Polynomial::quadratic_surface_tension(1.0, 2.0), Polynomial::constant(1.0),
                                Polynomial::constant(0.1));
  return ms;
}

}  // namespace twophase
