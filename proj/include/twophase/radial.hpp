#pragma once

// Radially symmetric sector: one sphere of radius R concentric in the container.
// With [[rho]] != 0 and a rigid container the interface is fixed and u = 0, so the
// dynamics reduce to the two-phase heat equation coupled to the surface capacity of
// the interface. Vertex-centred finite volumes in r, backward Euler in time; the
// interface node carries theta_Gamma together with the adjacent half cells.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "twophase/equilibria.hpp"
#include "twophase/error.hpp"
#include "twophase/geometry.hpp"
#include "twophase/thermo.hpp"

namespace twophase {

struct RadialGrid {
  int n = 3;
  double R = 1.0;
  double R_Omega = 2.0;
  int N1 = 32;  // intervals in (0, R)
  int N2 = 32;  // intervals in (R, R_Omega)

  void validate() const {
    check_dimension(n);
    if (!(R > 0.0 && R_Omega > R)) throw Error(ErrorCode::InvalidArgument, "need 0 < R < R_Omega");
    if (N1 < 2 || N2 < 2) throw Error(ErrorCode::InvalidArgument, "radial grid needs at least 2 intervals per phase");
  }
  double dr1() const { return R / N1; }
  double dr2() const { return (R_Omega - R) / N2; }
  int nodes() const { return N1 + N2 + 1; }
  int interface_node() const { return N1; }
  /// Node radius; nodes 0..N1-1 are phase 1, N1 is the interface, N1+1..N1+N2 are phase 2.
  double r(int i) const { return i <= N1 ? i * dr1() : R + (i - N1) * dr2(); }
  Domain domain() const { return Domain{n, R_Omega}; }
  SphereFamily sphere() const { return SphereFamily{{Point{0.0, 0.0, 0.0}}, R}; }
};

struct RadialState {
  double t = 0.0;
  double R = 1.0;
  std::vector<double> theta1;  // nodes in [0, R)
  std::vector<double> theta2;  // nodes in (R, R_Omega]
  double thetaGamma = 1.0;
};

namespace detail {

struct NodeWeights {
  std::vector<double> vol1, vol2;  // phase-1 and phase-2 parts of each control volume
  std::vector<double> faceArea;    // area of the face between node i and i+1
  double area = 0.0;               // interface area
};

inline NodeWeights node_weights(const RadialGrid& g) {
  const int N = g.nodes();
  NodeWeights w;
  w.vol1.assign(N, 0.0);
  w.vol2.assign(N, 0.0);
  w.faceArea.assign(N - 1, 0.0);
  for (int i = 0; i + 1 < N; ++i) {
    const double a = g.r(i), b = g.r(i + 1);
    const double m = 0.5 * (a + b);
    w.faceArea[i] = sphere_area(g.n, m);
    const double left = ball_volume(g.n, m) - ball_volume(g.n, a);
    const double right = ball_volume(g.n, b) - ball_volume(g.n, m);
    auto& v = i < g.N1 ? w.vol1 : w.vol2;
    v[i] += left;
    v[i + 1] += right;
  }
  w.area = sphere_area(g.n, g.R);
  return w;
}

inline std::vector<double> pack(const RadialState& s) {
  std::vector<double> x(s.theta1);
  x.push_back(s.thetaGamma);
  x.insert(x.end(), s.theta2.begin(), s.theta2.end());
  return x;
}

inline RadialState unpack(const RadialGrid& g, double t, const std::vector<double>& x) {
  RadialState s;
  s.t = t;
  s.R = g.R;
  s.theta1.assign(x.begin(), x.begin() + g.N1);
  s.thetaGamma = x[g.N1];
  s.theta2.assign(x.begin() + g.N1 + 1, x.end());
  return s;
}

/// Solves a tridiagonal system in place (lower a, diagonal b, upper c, rhs d).
inline bool solve_tridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                              std::vector<double>& d) {
  const std::size_t N = b.size();
  for (std::size_t i = 1; i < N; ++i) {
    if (b[i - 1] == 0.0) return false;
    const double f = a[i] / b[i - 1];
    b[i] -= f * c[i - 1];
    d[i] -= f * d[i - 1];
  }
  if (b[N - 1] == 0.0) return false;
  d[N - 1] /= b[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
  return true;
}

inline bool in_range(double theta, double thetaC) { return theta > 0.0 && theta < thetaC; }

}  // namespace detail

inline void validate_state(const RadialGrid& g, const RadialState& s) {
  g.validate();
  if (static_cast<int>(s.theta1.size()) != g.N1 || static_cast<int>(s.theta2.size()) != g.N2 || s.R != g.R)
    throw Error(ErrorCode::GridMismatch, "radial state does not match the grid");
}

/// Node temperatures sampled from a profile theta(r); the interface node takes theta(R).
template <class F>
RadialState radial_state_from_profile(const RadialGrid& g, F&& theta) {
  g.validate();
  RadialState s;
  s.R = g.R;
  for (int i = 0; i < g.N1; ++i) s.theta1.push_back(theta(g.r(i)));
  s.thetaGamma = theta(g.R);
  for (int i = g.N1 + 1; i < g.nodes(); ++i) s.theta2.push_back(theta(g.r(i)));
  return s;
}

/// M, E, Phi of a radial state with the same node quadrature used by the scheme.
inline ConservedTotals radial_totals(const MaterialSet& ms, const RadialGrid& g, const RadialState& s) {
  validate_state(g, s);
  const detail::NodeWeights w = detail::node_weights(g);
  const std::vector<double> x = detail::pack(s);
  const double thetaC = ms.thetaC();
  ConservedTotals t;
  for (int i = 0; i < g.nodes(); ++i) {
    for (int p : {1, 2}) {
      const double v = p == 1 ? w.vol1[i] : w.vol2[i];
      if (v == 0.0) continue;
      const PhaseLaw& law = ms.phase(p);
      const BulkDerived b = derived_bulk(law, x[i], thetaC);
      t.M += law.rho * v;
      t.E_b += law.rho * b.eps * v;
      t.Phi_b += law.rho * b.eta * v;
    }
  }
  const SurfaceDerived sg = derived_surface(ms.surface, s.thetaGamma);
  t.E_Gamma = sg.epsG * w.area;
  t.Phi_Gamma = sg.etaG * w.area;
  t.E = t.E_b + t.E_Gamma;
  t.Phi = t.Phi_b + t.Phi_Gamma;
  return t;
}

/// Quadrature of int d(theta) |grad theta|^2 / theta^2 dx over segment midpoints.
/// Independent of the scheme's flux form; the surface term vanishes in radial symmetry.
inline double radial_entropy_production(const MaterialSet& ms, const RadialGrid& g, const RadialState& s) {
  validate_state(g, s);
  const std::vector<double> x = detail::pack(s);
  double P = 0.0;
  for (int i = 0; i + 1 < g.nodes(); ++i) {
    const double a = g.r(i), b = g.r(i + 1);
    const double tm = 0.5 * (x[i] + x[i + 1]);
    const double grad = (x[i + 1] - x[i]) / (b - a);
    const double d = ms.phase(i < g.N1 ? 1 : 2).d(tm);
    P += d * grad * grad / (tm * tm) * (ball_volume(g.n, b) - ball_volume(g.n, a));
  }
  return P;
}

struct RadialStepOptions {
  double tol = 1e-13;  // Newton update tolerance relative to theta_c
  int maxIterations = 30;
};

/// One backward Euler step of the radial heat problem with the lumped interface capacity.
inline RadialState radial_step(const MaterialSet& ms, const RadialGrid& g, const RadialState& s, double dt,
                               const RadialStepOptions& opt = {}) {
  validate_state(g, s);
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const double thetaC = ms.thetaC();
  const int N = g.nodes();
  const int iG = g.interface_node();
  const detail::NodeWeights w = detail::node_weights(g);
  const std::vector<double> x0 = detail::pack(s);
  for (double v : x0)
    if (!detail::in_range(v, thetaC))
      throw Error(ErrorCode::RangeExit, "temperature left (0, thetaC) at t = " + std::to_string(s.t));

  // Stored energy of node i and its derivative.
  const auto capacity = [&](int i, double th, double& dC) {
    double C = 0.0;
    dC = 0.0;
    for (int p : {1, 2}) {
      const double v = p == 1 ? w.vol1[i] : w.vol2[i];
      if (v == 0.0) continue;
      const PhaseLaw& law = ms.phase(p);
      const BulkDerived b = derived_bulk(law, th, thetaC);
      C += law.rho * b.eps * v;
      dC += law.rho * b.kappa * v;
    }
    if (i == iG) {
      const SurfaceDerived sg = derived_surface(ms.surface, th);
      C += sg.epsG * w.area;
      dC += sg.kappaG * w.area;
    }
    return C;
  };

  std::vector<double> C0(N);
  for (int i = 0; i < N; ++i) {
    double unused = 0.0;
    C0[i] = capacity(i, x0[i], unused);
  }

  std::vector<double> x = x0;
  for (int it = 0; it < opt.maxIterations; ++it) {
    std::vector<double> F(N), lo(N, 0.0), di(N, 0.0), up(N, 0.0);
    for (int i = 0; i < N; ++i) {
      double dC = 0.0;
      F[i] = capacity(i, x[i], dC) - C0[i];
      di[i] = dC;
    }
    for (int f = 0; f + 1 < N; ++f) {
      // Flux into node f from node f+1: q = k(theta) (x[f+1] - x[f]), k = dbar A / dr.
      const PhaseLaw& law = ms.phase(f < iG ? 1 : 2);
      const double h = g.r(f + 1) - g.r(f);
      const Jet da = law.d.at(x[f]), db = law.d.at(x[f + 1]);
      const double k = 0.5 * (da.value + db.value) * w.faceArea[f] / h;
      const double diff = x[f + 1] - x[f];
      const double q = k * diff;
      const double dq_da = 0.5 * da.d1 * w.faceArea[f] / h * diff - k;
      const double dq_db = 0.5 * db.d1 * w.faceArea[f] / h * diff + k;
      F[f] -= dt * q;
      F[f + 1] += dt * q;
      di[f] -= dt * dq_da;
      up[f] -= dt * dq_db;
      lo[f + 1] += dt * dq_da;
      di[f + 1] += dt * dq_db;
    }
    std::vector<double> delta(F);
    if (!detail::solve_tridiagonal(lo, di, up, delta))
      throw Error(ErrorCode::StepFailure, "singular Newton system at t = " + std::to_string(s.t));
    double change = 0.0;
    for (int i = 0; i < N; ++i) {
      x[i] -= delta[i];
      change = std::max(change, std::abs(delta[i]));
      if (!std::isfinite(x[i])) throw Error(ErrorCode::StepFailure, "Newton iteration diverged");
      if (!detail::in_range(x[i], thetaC))
        throw Error(ErrorCode::RangeExit, "temperature left (0, thetaC) at t = " + std::to_string(s.t + dt));
    }
    if (change <= opt.tol * thetaC) return detail::unpack(g, s.t + dt, x);
  }
  throw Error(ErrorCode::StepFailure, "Newton iteration did not converge at t = " + std::to_string(s.t));
}

struct RadialSample {
  double t = 0.0;
  double E = 0.0;
  double Phi = 0.0;
  double thetaGamma = 0.0;
  double thetaMin = 0.0;
  double thetaMax = 0.0;
  double production = 0.0;  // quadrature of the entropy production at t
};

struct RadialDiagnostics {
  double energyDrift = 0.0;       // max |E - E(0)| / |E(0)|
  double minEntropyStep = 0.0;    // min Phi(t+dt) - Phi(t)
  int monotonicityViolations = 0; // steps with Phi decreasing by more than kEntropyStepTolerance
  double thetaInfinity = 0.0;     // uniform temperature carrying the initial energy
  double terminalError = 0.0;     // max |theta - thetaInfinity| over nodes at the end
};

inline constexpr double kEntropyStepTolerance = 1e-10;

struct RadialTrajectory {
  std::vector<RadialSample> samples;
  RadialState final;
  RadialDiagnostics diagnostics;
};

inline RadialSample radial_sample(const MaterialSet& ms, const RadialGrid& g, const RadialState& s) {
  const ConservedTotals tot = radial_totals(ms, g, s);
  const std::vector<double> x = detail::pack(s);
  RadialSample out;
  out.t = s.t;
  out.E = tot.E;
  out.Phi = tot.Phi;
  out.thetaGamma = s.thetaGamma;
  out.thetaMin = *std::min_element(x.begin(), x.end());
  out.thetaMax = *std::max_element(x.begin(), x.end());
  out.production = radial_entropy_production(ms, g, s);
  return out;
}

/// Runs `steps` backward Euler steps of size dt, recording every `recordEvery` steps.
inline RadialTrajectory simulate_radial(const MaterialSet& ms, const RadialGrid& g, const RadialState& initial,
                                        double dt, int steps, int recordEvery = 1,
                                        const RadialStepOptions& opt = {}) {
  validate_state(g, initial);
  if (steps < 0 || recordEvery < 1) throw Error(ErrorCode::InvalidArgument, "invalid step counts");
  RadialTrajectory tr;
  RadialState s = initial;
  RadialSample cur = radial_sample(ms, g, s);
  const double E0 = cur.E;
  tr.samples.push_back(cur);
  tr.diagnostics.minEntropyStep = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= steps; ++k) {
    s = radial_step(ms, g, s, dt, opt);
    const ConservedTotals tot = radial_totals(ms, g, s);
    const double dPhi = tot.Phi - cur.Phi;
    tr.diagnostics.minEntropyStep = std::min(tr.diagnostics.minEntropyStep, dPhi);
    if (dPhi < -kEntropyStepTolerance) ++tr.diagnostics.monotonicityViolations;
    tr.diagnostics.energyDrift = std::max(tr.diagnostics.energyDrift, std::abs(tot.E - E0) / std::abs(E0));
    cur.E = tot.E;
    cur.Phi = tot.Phi;
    if (k % recordEvery == 0 || k == steps) tr.samples.push_back(radial_sample(ms, g, s));
  }
  if (steps == 0) tr.diagnostics.minEntropyStep = 0.0;
  tr.final = s;
  tr.diagnostics.thetaInfinity = temperature_from_energy(ms, g.domain(), g.sphere(), E0).theta;
  double err = 0.0;
  for (double v : detail::pack(s)) err = std::max(err, std::abs(v - tr.diagnostics.thetaInfinity));
  tr.diagnostics.terminalError = err;
  return tr;
}

/// Initial-data families used by the experiments.
enum class RadialProfile { TwoConstant, Cosine, CentralSpot };

inline RadialState radial_initial(const RadialGrid& g, RadialProfile kind, double thetaRef, double amplitude) {
  switch (kind) {
    case RadialProfile::TwoConstant: {
      RadialState s = radial_state_from_profile(g, [&](double r) {
        return r < g.R ? thetaRef + amplitude : thetaRef - amplitude;
      });
      s.thetaGamma = thetaRef;
      return s;
    }
    case RadialProfile::Cosine:
      return radial_state_from_profile(
          g, [&](double r) { return thetaRef + amplitude * std::cos(std::numbers::pi * r / g.R_Omega); });
    case RadialProfile::CentralSpot:
      return radial_state_from_profile(g, [&](double r) {
        const double s = r / g.R;
        return thetaRef + amplitude * std::exp(-4.0 * s * s);
      });
  }
  throw Error(ErrorCode::InvalidArgument, "unknown radial profile");
}

}  // namespace twophase
