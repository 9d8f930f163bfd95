#pragma once

// Residuals of the interface conditions and of the initial-data compatibilities for
// axisymmetric fields about a sphere of radius R in the container of radius R_Omega.
// Fields are sampled on tensor grids (r_i, polar angle a_j) with midpoint angles
// a_j = (j + 1/2) pi / Na, so stencils never touch the poles; ghost values follow from
// the parity of each component (scalars and u_r even, u_a odd about a = 0 and a = pi).
// Derivatives are second-order finite differences.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twophase/equilibria.hpp"
#include "twophase/error.hpp"
#include "twophase/geometry.hpp"
#include "twophase/radial.hpp"
#include "twophase/thermo.hpp"

namespace twophase {

/// Samples of one phase; matrices are (radial nodes) x (angles).
struct PhaseField {
  std::vector<double> r;  // ascending
  Eigen::MatrixXd ur, ua, pi, theta;
};

struct FieldSnapshot {
  int n = 3;
  double R = 1.0;
  double R_Omega = 2.0;
  int angles = 8;
  PhaseField phase1;  // r from inside up to R
  PhaseField phase2;  // r from R up to R_Omega
  Eigen::VectorXd thetaGamma, dthetaGammaDt, j, V;

  double angle(int k) const { return (k + 0.5) * std::numbers::pi / angles; }
};

struct NamedValue {
  std::string name;
  double value = 0.0;
};

inline constexpr std::array<const char*, 8> kInterfaceResidualNames = {
    "tangential_velocity", "normal_velocity_jump", "temperature_continuity", "normal_stress",
    "tangential_stress",   "surface_energy",       "gibbs_thomson",          "kinematic"};

namespace detail {

inline void check_phase(const PhaseField& f, int angles, const char* which) {
  const auto rows = static_cast<Eigen::Index>(f.r.size());
  if (f.r.size() < 3) throw Error(ErrorCode::GridMismatch, std::string(which) + ": need at least 3 radial nodes");
  for (std::size_t i = 1; i < f.r.size(); ++i)
    if (!(f.r[i] > f.r[i - 1])) throw Error(ErrorCode::GridMismatch, std::string(which) + ": radii not ascending");
  for (const Eigen::MatrixXd* m : {&f.ur, &f.ua, &f.pi, &f.theta})
    if (m->rows() != rows || m->cols() != angles)
      throw Error(ErrorCode::GridMismatch, std::string(which) + ": field shape does not match the grid");
}

inline void check_snapshot(const FieldSnapshot& s) {
  check_dimension(s.n);
  if (s.angles < 2) throw Error(ErrorCode::GridMismatch, "need at least 2 angles");
  if (!(s.R > 0.0 && s.R_Omega > s.R)) throw Error(ErrorCode::GridMismatch, "need 0 < R < R_Omega");
  check_phase(s.phase1, s.angles, "phase 1");
  check_phase(s.phase2, s.angles, "phase 2");
  const double tol = 1e-14 * s.R_Omega;
  if (std::abs(s.phase1.r.back() - s.R) > tol || std::abs(s.phase2.r.front() - s.R) > tol ||
      std::abs(s.phase2.r.back() - s.R_Omega) > tol || s.phase1.r.front() < 0.0)
    throw Error(ErrorCode::GridMismatch, "radial grids must end at the interface and the container wall");
  for (const Eigen::VectorXd* v : {&s.thetaGamma, &s.dthetaGammaDt, &s.j, &s.V})
    if (v->size() != s.angles) throw Error(ErrorCode::GridMismatch, "interface field length differs from angles");
}

/// Weights of the three-point derivative at x[i0 + k] from nodes x[i0], x[i0+1], x[i0+2].
inline std::array<double, 3> fd3(const std::vector<double>& x, std::size_t i0, int k) {
  const double x0 = x[i0], x1 = x[i0 + 1], x2 = x[i0 + 2];
  const double at = x[i0 + k];
  return {((at - x1) + (at - x2)) / ((x0 - x1) * (x0 - x2)), ((at - x0) + (at - x2)) / ((x1 - x0) * (x1 - x2)),
          ((at - x0) + (at - x1)) / ((x2 - x0) * (x2 - x1))};
}

/// d/dr of column-wise data at node i.
inline Eigen::RowVectorXd d_dr(const std::vector<double>& r, const Eigen::MatrixXd& f, std::size_t i) {
  const std::size_t N = r.size();
  const std::size_t i0 = i == 0 ? 0 : (i + 1 >= N ? N - 3 : i - 1);
  const auto w = fd3(r, i0, static_cast<int>(i - i0));
  return w[0] * f.row(i0) + w[1] * f.row(i0 + 1) + w[2] * f.row(i0 + 2);
}

/// d/da on the midpoint angle grid; parity +1 for even, -1 for odd components.
inline Eigen::RowVectorXd d_da(const Eigen::RowVectorXd& f, int parity) {
  const Eigen::Index N = f.size();
  const double h = std::numbers::pi / N;
  Eigen::RowVectorXd out(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const double left = k == 0 ? parity * f[0] : f[k - 1];
    const double right = k + 1 == N ? parity * f[N - 1] : f[k + 1];
    out[k] = (right - left) / (2.0 * h);
  }
  return out;
}

/// Surface divergence of the tangential field f e_a on the sphere of radius Rs.
inline Eigen::RowVectorXd surface_div(int n, double Rs, const Eigen::RowVectorXd& f) {
  const Eigen::Index N = f.size();
  const Eigen::RowVectorXd df = d_da(f, -1);
  Eigen::RowVectorXd out(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const double a = (k + 0.5) * std::numbers::pi / N;
    out[k] = (df[k] + (n - 2) * std::cos(a) / std::sin(a) * f[k]) / Rs;
  }
  return out;
}

inline double sphere_of_directions(int n) { return n == 2 ? 2.0 : unit_sphere_area(n - 1); }

/// Surface L2 norm on the sphere of radius Rs for an axisymmetric density.
inline double surface_norm(int n, double Rs, const Eigen::RowVectorXd& f) {
  const Eigen::Index N = f.size();
  const double h = std::numbers::pi / N;
  double s = 0.0;
  for (Eigen::Index k = 0; k < N; ++k) s += std::pow(std::sin((k + 0.5) * h), n - 2) * f[k] * f[k];
  return std::sqrt(sphere_of_directions(n) * std::pow(Rs, n - 1) * h * s);
}

/// Interface traces of one phase needed by the residuals.
struct Trace {
  Eigen::RowVectorXd ur, ua, pi, theta, Drr, Dra, dtheta;
};

inline Trace trace_at(const PhaseField& f, std::size_t i) {
  const double r = f.r[i];
  Trace t;
  t.ur = f.ur.row(i);
  t.ua = f.ua.row(i);
  t.pi = f.pi.row(i);
  t.theta = f.theta.row(i);
  t.Drr = d_dr(f.r, f.ur, i);
  t.Dra = 0.5 * (d_dr(f.r, f.ua, i) - t.ua / r + d_da(t.ur, 1) / r);
  t.dtheta = d_dr(f.r, f.theta, i);
  return t;
}

}  // namespace detail

inline FieldSnapshot make_snapshot(int n, double R, double R_Omega, int angles, std::vector<double> r1,
                                   std::vector<double> r2) {
  FieldSnapshot s;
  s.n = n;
  s.R = R;
  s.R_Omega = R_Omega;
  s.angles = angles;
  for (auto* pf : {&s.phase1, &s.phase2}) {
    pf->r = pf == &s.phase1 ? std::move(r1) : std::move(r2);
    const auto rows = static_cast<Eigen::Index>(pf->r.size());
    pf->ur = pf->ua = pf->pi = pf->theta = Eigen::MatrixXd::Zero(rows, angles);
  }
  s.thetaGamma = s.dthetaGammaDt = s.j = s.V = Eigen::VectorXd::Zero(angles);
  return s;
}

/// Uniform radial nodes on [a, b].
inline std::vector<double> uniform_nodes(double a, double b, int intervals) {
  std::vector<double> r(intervals + 1);
  for (int i = 0; i <= intervals; ++i) r[i] = a + (b - a) * i / intervals;
  r.back() = b;
  return r;
}

/// Surface L2 norms of the interface conditions, in the order of kInterfaceResidualNames.
inline std::vector<NamedValue> interface_residuals(const MaterialSet& ms, const FieldSnapshot& s) {
  detail::check_snapshot(s);
  const int n = s.n;
  const double R = s.R;
  const double H = curvature_constant(n, R);
  const double r1 = ms.phase1.rho, r2 = ms.phase2.rho;
  const detail::Trace a = detail::trace_at(s.phase1, s.phase1.r.size() - 1);
  const detail::Trace b = detail::trace_at(s.phase2, 0);
  const Eigen::RowVectorXd tg = s.thetaGamma.transpose();
  const Eigen::RowVectorXd dtg = s.dthetaGammaDt.transpose();
  const Eigen::RowVectorXd j = s.j.transpose();
  const Eigen::RowVectorXd V = s.V.transpose();
  const Eigen::Index N = s.angles;
  Eigen::RowVectorXd res[8];
  for (auto& v : res) v.resize(N);
  const Eigen::RowVectorXd gradT = detail::d_da(tg, 1) / R;
  Eigen::RowVectorXd flux(N);
  for (Eigen::Index k = 0; k < N; ++k) flux[k] = ms.surface.dGamma()(tg[k]) * gradT[k];
  const Eigen::RowVectorXd divFlux = detail::surface_div(n, R, flux);
  const Eigen::RowVectorXd divU = detail::surface_div(n, R, 0.5 * (a.ua + b.ua)) + H * V;

  for (Eigen::Index k = 0; k < N; ++k) {
    const double th = tg[k];
    const double mu1 = ms.phase1.mu(a.theta[k]), mu2 = ms.phase2.mu(b.theta[k]);
    const double d1 = ms.phase1.d(a.theta[k]), d2 = ms.phase2.d(b.theta[k]);
    const Jet sig = ms.surface.sigma().at(th);
    const double gam = ms.surface.gamma()(th);
    const SurfaceDerived sd = derived_surface(ms.surface, th);
    const double jj = j[k];
    res[0][k] = b.ua[k] - a.ua[k];
    res[1][k] = (b.ur[k] - a.ur[k]) - ms.inv_rho_jump() * jj;
    res[2][k] = std::hypot(a.theta[k] - th, b.theta[k] - th);
    res[3][k] = ms.inv_rho_jump() * jj * jj - 2.0 * (mu2 * b.Drr[k] - mu1 * a.Drr[k]) + (b.pi[k] - a.pi[k]) -
                sig.value * H;
    res[4][k] = -2.0 * (mu2 * b.Dra[k] - mu1 * a.Dra[k]) - sig.d1 * gradT[k];
    res[5][k] = sd.kappaG * dtg[k] - divFlux[k] - (d2 * b.dtheta[k] - d1 * a.dtheta[k]) -
                latent_heat(ms, th) * jj - gam * jj * jj - sd.lG * divU[k];
    res[6][k] = ms.phase2.psi(b.theta[k]) - ms.phase1.psi(a.theta[k]) +
                0.5 * (1.0 / (r2 * r2) - 1.0 / (r1 * r1)) * jj * jj -
                2.0 * (mu2 * b.Drr[k] / r2 - mu1 * a.Drr[k] / r1) + (b.pi[k] / r2 - a.pi[k] / r1) + gam * jj;
    res[7][k] = V[k] - (r2 * b.ur[k] - r1 * a.ur[k]) / ms.rho_jump();
  }
  std::vector<NamedValue> out;
  for (int i = 0; i < 8; ++i) out.push_back({kInterfaceResidualNames[i], detail::surface_norm(n, R, res[i])});
  return out;
}

struct CompatibilityEntry {
  std::string name;
  double value = 0.0;
  double scale = 1.0;
  bool pass = false;
};

struct CompatibilityReport {
  std::vector<CompatibilityEntry> entries;
  bool ok() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
  const CompatibilityEntry& at(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return e;
    throw Error(ErrorCode::InvalidArgument, "no compatibility entry named " + name);
  }
};

inline constexpr double kCompatibilityTolerance = 1e-8;

namespace detail {

/// Volume L2 norm of div u over the nodes with r > 0 (trapezoid in r, midpoint in angle).
inline double divergence_norm(int n, const PhaseField& f) {
  const std::size_t Nr = f.r.size();
  const auto Na = f.ur.cols();
  const double h = std::numbers::pi / Na;
  double s = 0.0;
  for (std::size_t i = 0; i < Nr; ++i) {
    const double r = f.r[i];
    if (r <= 0.0) continue;
    // Expanded radial part; differencing r^(n-1) u_r amplifies the stencil error near r = 0.
    const Eigen::RowVectorXd div = d_dr(f.r, f.ur, i) + (n - 1) / r * f.ur.row(i) +
                                   surface_div(n, r, Eigen::RowVectorXd(f.ua.row(i)));
    const double dr = (i == 0 ? 0.0 : 0.5 * (f.r[i] - f.r[i - 1])) + (i + 1 == Nr ? 0.0 : 0.5 * (f.r[i + 1] - f.r[i]));
    for (Eigen::Index k = 0; k < Na; ++k)
      s += std::pow(std::sin((k + 0.5) * h), n - 2) * div[k] * div[k] * std::pow(r, n - 1) * dr * h;
  }
  return std::sqrt(sphere_of_directions(n) * s);
}

}  // namespace detail

/// Discrete norms of the compatibility conditions for initial data.
inline CompatibilityReport compatibility_check(const MaterialSet& ms, const FieldSnapshot& s) {
  detail::check_snapshot(s);
  const int n = s.n;
  const double R = s.R;
  const detail::Trace a = detail::trace_at(s.phase1, s.phase1.r.size() - 1);
  const detail::Trace b = detail::trace_at(s.phase2, 0);
  const detail::Trace w = detail::trace_at(s.phase2, s.phase2.r.size() - 1);
  const Eigen::RowVectorXd tg = s.thetaGamma.transpose();
  const Eigen::Index N = s.angles;

  const auto magnitude = [](std::initializer_list<const Eigen::MatrixXd*> ms_) {
    double m = 1.0;
    for (const auto* x : ms_) m = std::max(m, x->cwiseAbs().maxCoeff());
    return m;
  };
  const double uScale = magnitude({&s.phase1.ur, &s.phase1.ua, &s.phase2.ur, &s.phase2.ua});
  const double tScale = magnitude({&s.phase1.theta, &s.phase2.theta});

  Eigen::RowVectorXd marangoni(N), thetaJump(N), wallSpeed(N);
  const Eigen::RowVectorXd gradT = detail::d_da(tg, 1) / R;
  for (Eigen::Index k = 0; k < N; ++k) {
    const double mu1 = ms.phase1.mu(a.theta[k]), mu2 = ms.phase2.mu(b.theta[k]);
    marangoni[k] = 2.0 * (mu2 * b.Dra[k] - mu1 * a.Dra[k]) + ms.surface.sigma().at(tg[k]).d1 * gradT[k];
    thetaJump[k] = std::hypot(a.theta[k] - tg[k], b.theta[k] - tg[k]);
    wallSpeed[k] = std::hypot(w.ur[k], w.ua[k]);
  }
  const double divergence =
      std::hypot(detail::divergence_norm(n, s.phase1), detail::divergence_norm(n, s.phase2));

  CompatibilityReport rep;
  const auto add = [&](const char* name, double value, double scale) {
    rep.entries.push_back({name, value, scale, value <= kCompatibilityTolerance * scale});
  };
  add("divergence", divergence, uScale);
  add("marangoni", detail::surface_norm(n, R, marangoni), std::max(uScale, tScale));
  add("tangential_velocity", detail::surface_norm(n, R, b.ua - a.ua), uScale);
  add("temperature_continuity", detail::surface_norm(n, R, thetaJump), tScale);
  add("wall_velocity", detail::surface_norm(n, s.R_Omega, wallSpeed), uScale);
  add("wall_heat_flux", detail::surface_norm(n, s.R_Omega, w.dtheta), tScale);
  return rep;
}

/// Embeds a radial state as a snapshot with u = 0 and the quasi-static pressures for theta_Gamma.
inline FieldSnapshot snapshot_from_radial(const MaterialSet& ms, const RadialGrid& g, const RadialState& st,
                                          double dthetaGammaDt, int angles = 8) {
  validate_state(g, st);
  std::vector<double> ra, rb;
  for (int i = 0; i <= g.N1; ++i) ra.push_back(g.r(i));
  for (int i = g.N1; i < g.nodes(); ++i) rb.push_back(g.r(i));
  FieldSnapshot s = make_snapshot(g.n, g.R, g.R_Omega, angles, ra, rb);
  const auto [p1, p2] = equilibrium_pressures(ms, st.thetaGamma, g.R, g.n);
  for (int i = 0; i < g.N1; ++i) s.phase1.theta.row(i).setConstant(st.theta1[i]);
  s.phase1.theta.row(g.N1).setConstant(st.thetaGamma);
  s.phase2.theta.row(0).setConstant(st.thetaGamma);
  for (int i = 0; i < g.N2; ++i) s.phase2.theta.row(i + 1).setConstant(st.theta2[i]);
  s.phase1.pi.setConstant(p1);
  s.phase2.pi.setConstant(p2);
  s.thetaGamma.setConstant(st.thetaGamma);
  s.dthetaGammaDt.setConstant(dthetaGammaDt);
  return s;
}

/// Equilibrium snapshot: u = 0, theta = thetaStar, pressures from the equilibrium conditions.
inline FieldSnapshot equilibrium_snapshot(const MaterialSet& ms, int n, double R, double R_Omega,
                                          double thetaStar, int radialIntervals = 16, int angles = 8) {
  FieldSnapshot s = make_snapshot(n, R, R_Omega, angles, uniform_nodes(0.0, R, radialIntervals),
                                  uniform_nodes(R, R_Omega, radialIntervals));
  const auto [p1, p2] = equilibrium_pressures(ms, thetaStar, R, n);
  s.phase1.theta.setConstant(thetaStar);
  s.phase2.theta.setConstant(thetaStar);
  s.phase1.pi.setConstant(p1);
  s.phase2.pi.setConstant(p2);
  s.thetaGamma.setConstant(thetaStar);
  return s;
}

}  // namespace twophase
