#pragma once

// Equilibria: m disjoint spheres of common radius in a ball container, at uniform
// temperature, with piecewise constant pressures.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "twophase/error.hpp"
#include "twophase/geometry.hpp"
#include "twophase/thermo.hpp"

namespace twophase {

struct Domain {
  int n = 3;
  double R_Omega = 2.0;

  double volume() const { return ball_volume(n, R_Omega); }
  void validate() const {
    check_dimension(n);
    if (!(R_Omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "container radius must be positive");
  }
};

using Point = std::array<double, 3>;

struct SphereFamily {
  std::vector<Point> centers;
  double R = 1.0;

  int m() const { return static_cast<int>(centers.size()); }
  double volume(int n) const { return m() * ball_volume(n, R); }
  double area(int n) const { return m() * sphere_area(n, R); }
};

struct EquilibriumState {
  Domain domain;
  SphereFamily spheres;
  double thetaStar = 1.0;
  double pi1 = 0.0;
  double pi2 = 0.0;
  double HStar = 0.0;

  int n() const { return domain.n; }
  double R() const { return spheres.R; }
  double V1() const { return spheres.volume(domain.n); }
  double V2() const { return domain.volume() - V1(); }
  double area() const { return spheres.area(domain.n); }
};

/// Free parameters of the equilibrium manifold when mass is not prescribed:
/// m n centre coordinates, the radius and the temperature.
inline int equilibrium_manifold_dimension(int n, int m) { return m * n + 2; }

inline double radius_from_mass(const Domain& dom, const MaterialSet& ms, double M0, int m) {
  dom.validate();
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "sphere count must be positive");
  if (ms.phase1.rho == ms.phase2.rho) throw Error(ErrorCode::SingularSystem, "equal densities");
  const double vol = dom.volume();
  const double V1 = (M0 - ms.phase2.rho * vol) / (ms.phase1.rho - ms.phase2.rho);
  if (!(V1 > 0.0) || !(V1 < vol)) throw Error(ErrorCode::EmptyPhase, "phase-1 volume outside (0, |Omega|)");
  const double R = std::pow(V1 / (m * unit_ball_volume(dom.n)), 1.0 / dom.n);
  if (m * ball_volume(dom.n, R) >= vol) throw Error(ErrorCode::DegenerateConfiguration, "spheres do not fit");
  return R;
}

/// (pi1, pi2) from [[pi]] = sigma H_* and [[psi]] + [[pi/rho]] = 0.
inline std::pair<double, double> equilibrium_pressures(const MaterialSet& ms, double thetaStar, double RStar, int n) {
  check_temperature(thetaStar, ms.thetaC());
  if (!(RStar > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  const double r1 = ms.phase1.rho;
  const double r2 = ms.phase2.rho;
  if (r1 == r2) throw Error(ErrorCode::SingularSystem, "equal densities");
  const double s = ms.surface.sigma()(thetaStar) * curvature_constant(n, RStar);
  const double J = ms.phase2.psi(thetaStar) - ms.phase1.psi(thetaStar);
  // pi2 = pi1 + s;  (pi1 + s)/r2 - pi1/r1 = -J
  const double pi1 = (-J - s / r2) / (1.0 / r2 - 1.0 / r1);
  return {pi1, pi1 + s};
}

struct NondegeneracyReport {
  bool ok = true;
  std::vector<std::string> diagnostics;
};

inline double distance(const Point& a, const Point& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

inline NondegeneracyReport validate_nondegenerate(const SphereFamily& s, const Domain& dom) {
  NondegeneracyReport rep;
  const Point origin{0.0, 0.0, 0.0};
  for (int k = 0; k < s.m(); ++k) {
    if (!(distance(s.centers[k], origin) + s.R < dom.R_Omega)) {
      rep.ok = false;
      rep.diagnostics.push_back("ball " + std::to_string(k) + " touches or leaves the container");
    }
    for (int j = k + 1; j < s.m(); ++j) {
      if (!(distance(s.centers[k], s.centers[j]) > 2.0 * s.R)) {
        rep.ok = false;
        rep.diagnostics.push_back("balls " + std::to_string(k) + " and " + std::to_string(j) + " touch or overlap");
      }
    }
  }
  return rep;
}

struct ConservedTotals {
  double M = 0.0;
  double E = 0.0;
  double Phi = 0.0;
  double E_b = 0.0;
  double E_Gamma = 0.0;
  double Phi_b = 0.0;
  double Phi_Gamma = 0.0;
};

/// A region of one phase carrying constant velocity; adds (rho/2)|u|^2 vol to E.
struct KineticPatch {
  int phase = 1;
  double volume = 0.0;
  double speed = 0.0;
};

/// Totals for uniform temperature theta in both phases and on the interface.
inline ConservedTotals total_functionals(const MaterialSet& ms, const Domain& dom, const SphereFamily& s,
                                         double theta, const std::vector<KineticPatch>& kinetic = {}) {
  const double thetaC = ms.thetaC();
  const double V1 = s.volume(dom.n);
  const double V2 = dom.volume() - V1;
  const double A = s.area(dom.n);
  const BulkDerived b1 = derived_bulk(ms.phase1, theta, thetaC);
  const BulkDerived b2 = derived_bulk(ms.phase2, theta, thetaC);
  const SurfaceDerived sg = derived_surface(ms.surface, theta);
  ConservedTotals t;
  t.M = ms.phase1.rho * V1 + ms.phase2.rho * V2;
  t.E_b = ms.phase1.rho * b1.eps * V1 + ms.phase2.rho * b2.eps * V2;
  for (const auto& p : kinetic) t.E_b += 0.5 * ms.phase(p.phase).rho * p.speed * p.speed * p.volume;
  t.E_Gamma = sg.epsG * A;
  t.Phi_b = ms.phase1.rho * b1.eta * V1 + ms.phase2.rho * b2.eta * V2;
  t.Phi_Gamma = sg.etaG * A;
  t.E = t.E_b + t.E_Gamma;
  t.Phi = t.Phi_b + t.Phi_Gamma;
  return t;
}

/// Cell-based temperature field for one sphere of radius R concentric in the container.
/// Cell volumes must tile each phase; speeds are optional per-cell |u|.
struct RadialField {
  double R = 1.0;
  std::vector<double> vol1, theta1, vol2, theta2;
  double thetaGamma = 1.0;
  std::vector<double> speed1, speed2;
};

inline ConservedTotals total_functionals(const MaterialSet& ms, const Domain& dom, const RadialField& f) {
  const auto check = [](const std::vector<double>& v, const std::vector<double>& t, const std::vector<double>& sp,
                        double expected) {
    if (v.empty() || v.size() != t.size() || (!sp.empty() && sp.size() != v.size()))
      throw Error(ErrorCode::QuadratureFailure, "radial field arrays have mismatched sizes");
    double sum = 0.0;
    for (double x : v) {
      if (!(x > 0.0)) throw Error(ErrorCode::QuadratureFailure, "non-positive cell volume");
      sum += x;
    }
    if (std::abs(sum - expected) > 1e-10 * expected)
      throw Error(ErrorCode::QuadratureFailure, "cell volumes do not tile the phase");
  };
  const double V1 = ball_volume(dom.n, f.R);
  check(f.vol1, f.theta1, f.speed1, V1);
  check(f.vol2, f.theta2, f.speed2, dom.volume() - V1);

  const double thetaC = ms.thetaC();
  ConservedTotals t;
  const auto phase_sum = [&](const PhaseLaw& p, const std::vector<double>& v, const std::vector<double>& th,
                             const std::vector<double>& sp) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const BulkDerived b = derived_bulk(p, th[i], thetaC);
      const double u2 = sp.empty() ? 0.0 : sp[i] * sp[i];
      t.M += p.rho * v[i];
      t.E_b += p.rho * (b.eps + 0.5 * u2) * v[i];
      t.Phi_b += p.rho * b.eta * v[i];
    }
  };
  phase_sum(ms.phase1, f.vol1, f.theta1, f.speed1);
  phase_sum(ms.phase2, f.vol2, f.theta2, f.speed2);
  const SurfaceDerived sg = derived_surface(ms.surface, f.thetaGamma);
  const double A = sphere_area(dom.n, f.R);
  t.E_Gamma = sg.epsG * A;
  t.Phi_Gamma = sg.etaG * A;
  t.E = t.E_b + t.E_Gamma;
  t.Phi = t.Phi_b + t.Phi_Gamma;
  return t;
}

inline constexpr int kEnergyScanPoints = 512;

/// Bisection with secant acceleration on a sign-changing bracket.
inline double bracketed_root(const std::function<double(double)>& f, double a, double b, double fa, double fb,
                             double ftol, int maxit = 200) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  for (int it = 0; it < maxit; ++it) {
    double x = b - fb * (b - a) / (fb - fa);
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double mid = 0.5 * (a + b);
    // Fall back to the midpoint when the secant lands near the ends of the bracket.
    if (!(x > lo + 0.01 * (hi - lo) && x < hi - 0.01 * (hi - lo)) || it % 4 == 3) x = mid;
    const double fx = f(x);
    if (std::abs(fx) <= ftol || x == a || x == b) return x;
    if ((fx > 0.0) == (fa > 0.0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    if (std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) return x;
  }
  return std::abs(fa) < std::abs(fb) ? a : b;
}

struct TemperatureRoot {
  double theta = 0.0;
  std::vector<double> crossings;  // every bracketed crossing; size > 1 flags non-monotone E(theta)
  bool nonMonotone() const { return crossings.size() > 1; }
};

inline TemperatureRoot temperature_from_energy(const MaterialSet& ms, const Domain& dom, const SphereFamily& s,
                                               double E0) {
  const double thetaC = ms.thetaC();
  const auto f = [&](double t) { return total_functionals(ms, dom, s, t).E - E0; };
  const double lo = 1e-6 * thetaC;
  const double hi = (1.0 - 1e-9) * thetaC;
  const double tol = kRootTolerance * (1.0 + std::abs(E0));

  TemperatureRoot out;
  double tPrev = lo;
  double fPrev = f(lo);
  for (int k = 1; k <= kEnergyScanPoints; ++k) {
    const double t = lo + (hi - lo) * k / kEnergyScanPoints;
    const double ft = f(t);
    if (fPrev == 0.0) out.crossings.push_back(tPrev);
    else if ((fPrev < 0.0 && ft > 0.0) || (fPrev > 0.0 && ft < 0.0))
      out.crossings.push_back(bracketed_root(f, tPrev, t, fPrev, ft, tol));
    tPrev = t;
    fPrev = ft;
  }
  if (fPrev == 0.0) out.crossings.push_back(tPrev);
  if (out.crossings.empty()) throw Error(ErrorCode::NoRootInRange, "total energy does not reach E0 on (0, thetaC)");
  out.theta = out.crossings.front();
  return out;
}

inline EquilibriumState make_equilibrium(const MaterialSet& ms, const Domain& dom, const SphereFamily& s,
                                         double thetaStar) {
  dom.validate();
  EquilibriumState eq;
  eq.domain = dom;
  eq.spheres = s;
  eq.thetaStar = thetaStar;
  const auto [p1, p2] = equilibrium_pressures(ms, thetaStar, s.R, dom.n);
  eq.pi1 = p1;
  eq.pi2 = p2;
  eq.HStar = curvature_constant(dom.n, s.R);
  return eq;
}

/// Equilibrium selected by prescribed total mass and energy, with caller-supplied centres.
inline EquilibriumState equilibrium_from_totals(const MaterialSet& ms, const Domain& dom,
                                                const std::vector<Point>& centers, double M0, double E0) {
  SphereFamily s;
  s.centers = centers;
  s.R = radius_from_mass(dom, ms, M0, static_cast<int>(centers.size()));
  const NondegeneracyReport nd = validate_nondegenerate(s, dom);
  if (!nd.ok) throw Error(ErrorCode::DegenerateConfiguration, nd.diagnostics.front());
  return make_equilibrium(ms, dom, s, temperature_from_energy(ms, dom, s, E0).theta);
}

/// Centres for m spheres of radius R placed evenly on a circle (m >= 2) or at the origin.
inline std::vector<Point> ring_centers(int m, double ringRadius) {
  std::vector<Point> c;
  if (m == 1) return {Point{0.0, 0.0, 0.0}};
  for (int k = 0; k < m; ++k) {
    const double a = 2.0 * std::numbers::pi * k / m;
    c.push_back(Point{ringRadius * std::cos(a), ringRadius * std::sin(a), 0.0});
  }
  return c;
}

}  // namespace twophase
