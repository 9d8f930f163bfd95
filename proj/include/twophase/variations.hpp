#pragma once

// First variations of entropy, mass and energy, the constrained second variation at an
// equilibrium, and its definiteness on the constraint kernel.
//
// Interface variations h and surface temperature variations are stored per sphere as
// coefficients in the unit-sphere orthonormal harmonics (harmonics.hpp); on a sphere of
// radius R, (f|g)_Sigma = R^{n-1} sum_i f_i g_i. Bulk temperature variations and velocity
// variations are constant per phase.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twophase/equilibria.hpp"
#include "twophase/harmonics.hpp"
#include "twophase/thermo.hpp"

namespace twophase {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

/// A (not necessarily equilibrium) state with uniform temperature per phase, uniform surface
/// temperature and constant velocity per phase, on a family of equal spheres.
struct VariationState {
  Domain domain;
  SphereFamily spheres;
  double theta1 = 1.0;
  double theta2 = 1.0;
  double thetaGamma = 1.0;
  Vec3 u1{0.0, 0.0, 0.0};
  Vec3 u2{0.0, 0.0, 0.0};

  static VariationState at(const EquilibriumState& eq, std::optional<double> theta = std::nullopt) {
    VariationState s;
    s.domain = eq.domain;
    s.spheres = eq.spheres;
    s.theta1 = s.theta2 = s.thetaGamma = theta.value_or(eq.thetaStar);
    return s;
  }
};

struct Perturbation {
  int n = 3;
  int Lmax = 8;
  Vec3 v1{0.0, 0.0, 0.0};
  Vec3 v2{0.0, 0.0, 0.0};
  double thetaVar1 = 0.0;
  double thetaVar2 = 0.0;
  std::vector<std::vector<double>> thetaGammaVar;  // per sphere
  std::vector<std::vector<double>> h;              // per sphere

  static Perturbation zero(int n, int m, int Lmax = 8) {
    Perturbation p;
    p.n = n;
    p.Lmax = Lmax;
    const auto count = static_cast<std::size_t>(harmonic_count(n, Lmax));
    p.thetaGammaVar.assign(static_cast<std::size_t>(m), std::vector<double>(count, 0.0));
    p.h.assign(static_cast<std::size_t>(m), std::vector<double>(count, 0.0));
    return p;
  }

  int m() const { return static_cast<int>(h.size()); }
};

inline void check_grid(const Perturbation& p, const Domain& dom, const SphereFamily& s) {
  if (p.n != dom.n) throw Error(ErrorCode::GridMismatch, "perturbation dimension differs from the state");
  if (p.Lmax < 2) throw Error(ErrorCode::GridMismatch, "perturbation needs Lmax >= 2");
  if (p.m() != s.m() || static_cast<int>(p.thetaGammaVar.size()) != s.m())
    throw Error(ErrorCode::GridMismatch, "perturbation sphere count differs from the state");
  const auto count = static_cast<std::size_t>(harmonic_count(p.n, p.Lmax));
  for (int k = 0; k < s.m(); ++k)
    if (p.h[k].size() != count || p.thetaGammaVar[k].size() != count)
      throw Error(ErrorCode::GridMismatch, "harmonic coefficient arrays have the wrong length");
}

namespace detail {

inline double total_integral(const std::vector<std::vector<double>>& f, int n, double R) {
  double s = 0.0;
  for (const auto& c : f) s += harmonic_integral(n, c, R);
  return s;
}

inline double surface_norm2(const std::vector<std::vector<double>>& f, int n, double R) {
  double s = 0.0;
  for (const auto& c : f)
    for (double x : c) s += x * x;
  return s * std::pow(R, n - 1);
}

}  // namespace detail

/// <Phi'|z> = (rho eta'|theta~) + (etaG'|theta~G) - ([[rho eta]] + etaG H | h), H = -div nu.
inline double first_variation_entropy(const MaterialSet& ms, const VariationState& st, const Perturbation& p) {
  check_grid(p, st.domain, st.spheres);
  const int n = st.domain.n;
  const double R = st.spheres.R;
  const double thetaC = ms.thetaC();
  const double V1 = st.spheres.volume(n);
  const double V2 = st.domain.volume() - V1;
  const BulkDerived b1 = derived_bulk(ms.phase1, st.theta1, thetaC);
  const BulkDerived b2 = derived_bulk(ms.phase2, st.theta2, thetaC);
  const SurfaceDerived sg = derived_surface(ms.surface, st.thetaGamma);
  const double H = geometric_curvature(n, R);
  const double bulk = ms.phase1.rho * b1.kappa / st.theta1 * p.thetaVar1 * V1 +
                      ms.phase2.rho * b2.kappa / st.theta2 * p.thetaVar2 * V2;
  const double surf = sg.kappaG / st.thetaGamma * detail::total_integral(p.thetaGammaVar, n, R);
  const double jump = ms.phase2.rho * b2.eta - ms.phase1.rho * b1.eta;
  return bulk + surf - (jump + sg.etaG * H) * detail::total_integral(p.h, n, R);
}

/// <M'|h> = -([[rho]]|h)
inline double first_variation_mass(const MaterialSet& ms, const VariationState& st, const Perturbation& p) {
  check_grid(p, st.domain, st.spheres);
  return -ms.rho_jump() * detail::total_integral(p.h, st.domain.n, st.spheres.R);
}

/// <E'|z> = (rho u|v) + (rho eps'|theta~) + (epsG'|theta~G) - ([[rho|u|^2/2 + rho eps]] + epsG H | h)
inline double first_variation_energy(const MaterialSet& ms, const VariationState& st, const Perturbation& p) {
  check_grid(p, st.domain, st.spheres);
  const int n = st.domain.n;
  const double R = st.spheres.R;
  const double thetaC = ms.thetaC();
  const double V1 = st.spheres.volume(n);
  const double V2 = st.domain.volume() - V1;
  const double r1 = ms.phase1.rho, r2 = ms.phase2.rho;
  const BulkDerived b1 = derived_bulk(ms.phase1, st.theta1, thetaC);
  const BulkDerived b2 = derived_bulk(ms.phase2, st.theta2, thetaC);
  const SurfaceDerived sg = derived_surface(ms.surface, st.thetaGamma);
  const double H = geometric_curvature(n, R);
  const double kinetic = r1 * dot(st.u1, p.v1) * V1 + r2 * dot(st.u2, p.v2) * V2;
  const double bulk = r1 * b1.kappa * p.thetaVar1 * V1 + r2 * b2.kappa * p.thetaVar2 * V2;
  const double surf = sg.kappaG * detail::total_integral(p.thetaGammaVar, n, R);
  const double jump = (0.5 * r2 * dot(st.u2, st.u2) + r2 * b2.eps) - (0.5 * r1 * dot(st.u1, st.u1) + r1 * b1.eps);
  return kinetic + bulk + surf - (jump + sg.epsG * H) * detail::total_integral(p.h, n, R);
}

struct LagrangeReport {
  double lambda = 0.0;
  double mu = 0.0;
  double residual = 0.0;
  std::vector<std::pair<std::string, double>> probes;
};

/// Multipliers from the equilibrium (mu = -1/theta_*, lambda from the h-direction relation
/// [[rho psi]] + sigma H = lambda [[rho]] theta_*), then Phi' + lambda M' + mu E' evaluated on
/// unit probe directions at the state temperature (theta_* unless given).
inline LagrangeReport lagrange_residual(const MaterialSet& ms, const EquilibriumState& eq,
                                        std::optional<double> stateTheta = std::nullopt) {
  const int n = eq.n();
  const int m = eq.spheres.m();
  const double th = eq.thetaStar;
  LagrangeReport rep;
  rep.mu = -1.0 / th;
  const double rhoPsiJump = ms.phase2.rho * ms.phase2.psi(th) - ms.phase1.rho * ms.phase1.psi(th);
  rep.lambda = (rhoPsiJump + ms.surface.sigma()(th) * geometric_curvature(n, eq.R())) / (ms.rho_jump() * th);

  const VariationState st = VariationState::at(eq, stateTheta);
  const int Lmax = 2;
  const auto eval = [&](const std::string& name, const Perturbation& p) {
    const double r = first_variation_entropy(ms, st, p) + rep.lambda * first_variation_mass(ms, st, p) +
                     rep.mu * first_variation_energy(ms, st, p);
    rep.probes.emplace_back(name, r);
    rep.residual = std::max(rep.residual, std::abs(r));
  };
  Perturbation p = Perturbation::zero(n, m, Lmax);
  p.thetaVar1 = 1.0;
  eval("theta_phase1", p);
  p = Perturbation::zero(n, m, Lmax);
  p.thetaVar2 = 1.0;
  eval("theta_phase2", p);
  p = Perturbation::zero(n, m, Lmax);
  for (auto& c : p.thetaGammaVar) c = constant_harmonic(n, Lmax, 1.0);
  eval("theta_surface", p);
  p = Perturbation::zero(n, m, Lmax);
  for (auto& c : p.h) c = constant_harmonic(n, Lmax, 1.0);
  eval("h_constant", p);
  p = Perturbation::zero(n, m, Lmax);
  p.h[0][static_cast<std::size_t>(harmonic_offset(n, 1))] = 1.0;
  eval("h_degree1", p);
  p = Perturbation::zero(n, m, Lmax);
  p.h[0][static_cast<std::size_t>(harmonic_offset(n, 2))] = 1.0;
  eval("h_degree2", p);
  return rep;
}

/// <D_* z|z> = -(rho v|v) - (1/theta_*)[(rho kappa_* th|th) + (kappaG_* thG|thG) - sigma_* theta_* (H' h|h)]
/// with H' acting on degree l as ((n-1) - l(l+n-2))/R_*^2.
inline double second_variation_form(const MaterialSet& ms, const EquilibriumState& eq, const Perturbation& p) {
  check_grid(p, eq.domain, eq.spheres);
  const int n = eq.n();
  const double R = eq.R();
  const double th = eq.thetaStar;
  const double thetaC = ms.thetaC();
  const double V1 = eq.V1(), V2 = eq.V2();
  const double r1 = ms.phase1.rho, r2 = ms.phase2.rho;
  const double k1 = derived_bulk(ms.phase1, th, thetaC).kappa;
  const double k2 = derived_bulk(ms.phase2, th, thetaC).kappa;
  const double kG = derived_surface(ms.surface, th).kappaG;
  const double sigma = ms.surface.sigma()(th);

  const double kinetic = r1 * dot(p.v1, p.v1) * V1 + r2 * dot(p.v2, p.v2) * V2;
  const double bulk = r1 * k1 * p.thetaVar1 * p.thetaVar1 * V1 + r2 * k2 * p.thetaVar2 * p.thetaVar2 * V2;
  const double surf = kG * detail::surface_norm2(p.thetaGammaVar, n, R);

  const std::vector<int> deg = harmonic_degrees(n, p.Lmax);
  double hh = 0.0;
  for (const auto& c : p.h)
    for (std::size_t i = 0; i < c.size(); ++i) hh += ((n - 1) - lb_symbol(n, deg[i])) / (R * R) * c[i] * c[i];
  hh *= std::pow(R, n - 1);

  return -kinetic - (bulk + surf - sigma * th * hh) / th;
}

/// Values of the two constraint functionals: total (1|h) and (rho kappa|th) + (kappaG|thG).
inline std::pair<double, double> constraint_values(const MaterialSet& ms, const EquilibriumState& eq,
                                                   const Perturbation& p) {
  const int n = eq.n();
  const double th = eq.thetaStar;
  const double k1 = derived_bulk(ms.phase1, th, ms.thetaC()).kappa;
  const double k2 = derived_bulk(ms.phase2, th, ms.thetaC()).kappa;
  const double kG = derived_surface(ms.surface, th).kappaG;
  const double mass = detail::total_integral(p.h, n, eq.R());
  const double energy = ms.phase1.rho * k1 * eq.V1() * p.thetaVar1 + ms.phase2.rho * k2 * eq.V2() * p.thetaVar2 +
                        kG * detail::total_integral(p.thetaGammaVar, n, eq.R());
  return {mass, energy};
}

/// Removes the total mean of h and shifts (th, thG) by a common constant so both
/// constraint functionals vanish.
inline Perturbation constraint_projection(const MaterialSet& ms, const EquilibriumState& eq, Perturbation p) {
  check_grid(p, eq.domain, eq.spheres);
  const int n = eq.n();
  const double th = eq.thetaStar;
  const double rootArea = std::sqrt(unit_sphere_area(n));
  const double A = eq.area();

  const auto [mass, energy] = constraint_values(ms, eq, p);
  const double hMean = mass / A;
  for (auto& c : p.h) c[0] -= hMean * rootArea;

  const double k1 = derived_bulk(ms.phase1, th, ms.thetaC()).kappa;
  const double k2 = derived_bulk(ms.phase2, th, ms.thetaC()).kappa;
  const double kG = derived_surface(ms.surface, th).kappaG;
  const double capacity = ms.phase1.rho * k1 * eq.V1() + ms.phase2.rho * k2 * eq.V2() + kG * A;
  const double shift = energy / capacity;
  p.thetaVar1 -= shift;
  p.thetaVar2 -= shift;
  for (auto& c : p.thetaGammaVar) c[0] -= shift * rootArea;
  return p;
}

enum class Definiteness { NegSemiDefinite, Indefinite };

inline std::string to_string(Definiteness d) {
  return d == Definiteness::NegSemiDefinite ? "negSemiDefinite" : "indefinite";
}

struct QuadraticFormReport {
  double value = 0.0;  // witness value when indefinite, else the largest restricted eigenvalue
  Definiteness classification = Definiteness::NegSemiDefinite;
  std::optional<Perturbation> witness;
  int positiveDimension = 0;
  int zeroDimension = 0;
  int negativeDimension = 0;
  std::vector<double> eigenvalues;  // of the form restricted to the constraint kernel
};

inline constexpr double kDefinitenessTol = 1e-10;

namespace detail {

/// Coordinates of the probe basis: v (2n), th1, th2, then per sphere thG coefficients and h coefficients.
struct ProbeLayout {
  int n, m, count;
  int size() const { return 2 * n + 2 + 2 * m * count; }
  int thG(int k, int i) const { return 2 * n + 2 + 2 * k * count + i; }
  int h(int k, int i) const { return 2 * n + 2 + 2 * k * count + count + i; }
};

inline Perturbation probe(const ProbeLayout& L, int Lmax, const Eigen::VectorXd& x) {
  Perturbation p = Perturbation::zero(L.n, L.m, Lmax);
  for (int c = 0; c < L.n; ++c) {
    p.v1[c] = x[c];
    p.v2[c] = x[L.n + c];
  }
  p.thetaVar1 = x[2 * L.n];
  p.thetaVar2 = x[2 * L.n + 1];
  for (int k = 0; k < L.m; ++k)
    for (int i = 0; i < L.count; ++i) {
      p.thetaGammaVar[k][i] = x[L.thG(k, i)];
      p.h[k][i] = x[L.h(k, i)];
    }
  return p;
}

}  // namespace detail

/// Diagonal form over the probe basis, restricted to the kernel of the two constraints and
/// eigen-decomposed. For m >= 2 the constant (+1, -1, 0, ...) h witness is attached.
inline QuadraticFormReport classify_definiteness(const MaterialSet& ms, const EquilibriumState& eq, int Lmax = 8) {
  if (Lmax < 2) throw Error(ErrorCode::InvalidArgument, "Lmax must be at least 2");
  const int n = eq.n();
  const int m = eq.spheres.m();
  const detail::ProbeLayout L{n, m, harmonic_count(n, Lmax)};
  const int N = L.size();

  Eigen::VectorXd diag(N);
  Eigen::MatrixXd C(2, N);
  for (int i = 0; i < N; ++i) {
    const Perturbation p = detail::probe(L, Lmax, Eigen::VectorXd::Unit(N, i));
    diag[i] = second_variation_form(ms, eq, p);
    const auto [cm, ce] = constraint_values(ms, eq, p);
    C(0, i) = cm;
    C(1, i) = ce;
  }
  // Orthonormal basis of ker C from the full SVD.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
  const int rank = static_cast<int>((svd.singularValues().array() > 1e-12 * svd.singularValues()(0)).count());
  const Eigen::MatrixXd Z = svd.matrixV().rightCols(N - rank);
  const Eigen::MatrixXd F = Z.transpose() * diag.asDiagonal() * Z;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (F + F.transpose()));
  if (es.info() != Eigen::Success) throw Error(ErrorCode::EigensolveFailure, "restricted form eigensolve failed");

  QuadraticFormReport rep;
  const double tol = kDefinitenessTol * std::max(1.0, diag.cwiseAbs().maxCoeff());
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double e = es.eigenvalues()[i];
    rep.eigenvalues.push_back(e);
    if (e > tol) ++rep.positiveDimension;
    else if (e < -tol) ++rep.negativeDimension;
    else ++rep.zeroDimension;
  }
  rep.classification = rep.positiveDimension > 0 ? Definiteness::Indefinite : Definiteness::NegSemiDefinite;
  rep.value = es.eigenvalues().maxCoeff();
  if (m >= 2) {
    Perturbation w = Perturbation::zero(n, m, Lmax);
    w.h[0] = constant_harmonic(n, Lmax, 1.0);
    w.h[1] = constant_harmonic(n, Lmax, -1.0);
    rep.value = second_variation_form(ms, eq, w);
    rep.witness = w;
  }
  return rep;
}

}  // namespace twophase
