#pragma once

// Quasi-static volume-exchange reduction for m spheres of radii R_k.
//
// Phase 1 (inside the spheres) is at rest, the temperature relaxes instantly to a common far-field
// undercooling, and the pressure inside sphere k exceeds the far-field pressure by sigma (n-1)/R_k.
// Linearized Gibbs-Thomson with kinetic undercooling then gives
//   gamma j_k = sigma (n-1) / (rho1 R_k) - l theta_bar,   dR_k/dt = -j_k / rho1,
// and theta_bar is the multiplier enforcing sum_k R_k^(n-1) dR_k/dt = 0 (fixed phase-1 volume):
//   dR_k/dt = k0 (S_{n-2} / S_{n-1} - 1 / R_k),  k0 = sigma (n-1) / (rho1^2 gamma),  S_p = sum_k R_k^p.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "twophase/equilibria.hpp"
#include "twophase/error.hpp"
#include "twophase/geometry.hpp"
#include "twophase/thermo.hpp"

namespace twophase {

struct RipeningParams {
  int n = 3;
  double sigma = 1.0;
  double gamma = 0.1;
  double rho1 = 1.0;
  double latent = 0.0;

  double rate() const { return sigma * (n - 1) / (rho1 * rho1 * gamma); }

  static RipeningParams at(const MaterialSet& ms, double thetaStar, int n) {
    check_dimension(n);
    RipeningParams p;
    p.n = n;
    p.sigma = ms.surface.sigma()(thetaStar);
    p.gamma = ms.surface.gamma()(thetaStar);
    p.rho1 = ms.phase1.rho;
    p.latent = latent_heat(ms, thetaStar);
    if (!(p.gamma > 0.0)) throw Error(ErrorCode::GammaZero, "ripening reduction needs gamma_* > 0");
    return p;
  }
};

struct RipeningRates {
  Eigen::VectorXd dR;
  double thetaBar = 0.0;  // far-field undercooling; NaN when the latent heat vanishes
};

inline RipeningRates ripening_rates(const RipeningParams& p, const Eigen::VectorXd& R, double Rmin = 0.0) {
  if (!(p.gamma > 0.0)) throw Error(ErrorCode::GammaZero, "ripening reduction needs gamma_* > 0");
  for (Eigen::Index k = 0; k < R.size(); ++k)
    if (!(R[k] > Rmin)) throw Error(ErrorCode::DropletCollapse, "droplet radius below R_min");
  double s1 = 0.0, s2 = 0.0;
  for (Eigen::Index k = 0; k < R.size(); ++k) {
    s1 += std::pow(R[k], p.n - 1);
    s2 += std::pow(R[k], p.n - 2);
  }
  RipeningRates out;
  out.dR.resize(R.size());
  const double ratio = s2 / s1;
  for (Eigen::Index k = 0; k < R.size(); ++k) out.dR[k] = p.rate() * (ratio - 1.0 / R[k]);
  const double mult = p.sigma * (p.n - 1) * ratio / p.rho1;
  out.thetaBar = p.latent != 0.0 ? mult / p.latent : std::numeric_limits<double>::quiet_NaN();
  return out;
}

inline Eigen::VectorXd ripening_rhs(const RipeningParams& p, const Eigen::VectorXd& R, double Rmin = 0.0) {
  return ripening_rates(p, R, Rmin).dR;
}

/// Jacobian of ripening_rhs with respect to the radii.
inline Eigen::MatrixXd ripening_jacobian(const RipeningParams& p, const Eigen::VectorXd& R) {
  const int m = static_cast<int>(R.size());
  const int n = p.n;
  double s1 = 0.0, s2 = 0.0;
  for (int k = 0; k < m; ++k) {
    s1 += std::pow(R[k], n - 1);
    s2 += std::pow(R[k], n - 2);
  }
  Eigen::MatrixXd J(m, m);
  for (int j = 0; j < m; ++j) {
    const double dratio = (n - 2) * std::pow(R[j], n - 3) / s1 - s2 * (n - 1) * std::pow(R[j], n - 2) / (s1 * s1);
    for (int k = 0; k < m; ++k) J(k, j) = p.rate() * (dratio + (k == j ? 1.0 / (R[k] * R[k]) : 0.0));
  }
  return J;
}

/// Eigenvalues (descending) of the ripening Jacobian at m equal radii R, restricted to the
/// volume-preserving subspace sum_k |Sigma_k| h_k = 0.
inline std::vector<double> volume_exchange_spectrum(const RipeningParams& p, int m, double R) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sphere");
  if (m == 1) return {};
  const Eigen::MatrixXd J = ripening_jacobian(p, Eigen::VectorXd::Constant(m, R));
  // Orthonormal basis of the complement of the area vector (all entries equal here).
  Eigen::MatrixXd w = Eigen::MatrixXd::Constant(m, 1, std::pow(R, p.n - 1));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
  const Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd Z = Q.rightCols(m - 1);
  const Eigen::MatrixXd Jr = Z.transpose() * J * Z;
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (Jr + Jr.transpose())).eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.rbegin(), out.rend());
  return out;
}

struct DropletState {
  double t = 0.0;
  Eigen::VectorXd R;
  double thetaBar = std::numeric_limits<double>::quiet_NaN();
  std::vector<Point> centers;  // optional; enables the pairwise-gap report
};

inline Eigen::VectorXd ripening_rhs(const RipeningParams& p, const DropletState& s, double Rmin = 0.0) {
  return ripening_rhs(p, s.R, Rmin);
}

struct RipeningEvent {
  double t = 0.0;
  int index = 0;  // label of the removed droplet in the initial state
  double radius = 0.0;
};

struct RipeningSample {
  double t = 0.0;
  Eigen::VectorXd R;  // indexed by initial label; removed droplets carry 0
  double volume = 0.0;  // sum_k R_k^n
  double area = 0.0;    // sum_k R_k^(n-1)
  double thetaBar = 0.0;
  double minGap = std::numeric_limits<double>::quiet_NaN();
};

struct RipeningOptions {
  double rtol = 1e-10;
  double atol = 1e-14;
  double Rmin = -1.0;  // negative selects 1e-3 max_k R_k(0)
  long maxSteps = 2000000;
};

struct RipeningDiagnostics {
  double volumeDrift = 0.0;        // max relative change of sum R^n over the run
  double volumeDriftBetweenEvents = 0.0;
  int areaIncreases = 0;           // samples where sum R^(n-1) grew beyond round-off
  double Rmin = 0.0;
};

struct RipeningTrajectory {
  std::vector<RipeningSample> samples;
  std::vector<RipeningEvent> events;
  DropletState final;
  RipeningDiagnostics diagnostics;
};

namespace detail {

/// d w_k / dt for w_k = R_k^n; negative w (stage overshoot) is clamped to a zero radius.
struct VolumeRhs {
  RipeningParams p;
  void operator()(const std::vector<double>& w, std::vector<double>& dw, double) const {
    const std::size_t m = w.size();
    std::vector<double> a(m), b(m);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double R = std::pow(std::max(w[k], 0.0), 1.0 / p.n);
      a[k] = std::pow(R, p.n - 1);
      b[k] = std::pow(R, p.n - 2);
      s1 += a[k];
      s2 += b[k];
    }
    dw.resize(m);
    const double c = p.n * p.rate();
    for (std::size_t k = 0; k < m; ++k) dw[k] = c * (a[k] * s2 / s1 - b[k]);
  }
};

inline double min_pairwise_gap(const std::vector<Point>& centers, const Eigen::VectorXd& R) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      if (R[i] > 0.0 && R[j] > 0.0) gap = std::min(gap, distance(centers[i], centers[j]) - R[i] - R[j]);
  return gap;
}

}  // namespace detail

/// Adaptive Dormand-Prince integration of the reduction in w = R^n with removal of droplets at Rmin.
/// The removed volume is redistributed over the survivors by a common factor on w.
inline RipeningTrajectory simulate_ripening(const RipeningParams& p, const DropletState& initial, double T,
                                            double dt0, const RipeningOptions& opt = {}) {
  namespace ode = boost::numeric::odeint;
  const int m0 = static_cast<int>(initial.R.size());
  if (m0 < 1) throw Error(ErrorCode::InvalidArgument, "need at least one droplet");
  if (!(T >= 0.0) || !(dt0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "need T >= 0 and dt0 > 0");
  if (!initial.centers.empty() && static_cast<int>(initial.centers.size()) != m0)
    throw Error(ErrorCode::GridMismatch, "centres and radii differ in length");
  const double Rmin = opt.Rmin > 0.0 ? opt.Rmin : 1e-3 * initial.R.maxCoeff();
  ripening_rates(p, initial.R, Rmin);  // validates radii and gamma

  RipeningTrajectory tr;
  tr.diagnostics.Rmin = Rmin;
  const double wmin = std::pow(Rmin, p.n);
  std::vector<int> label(m0);
  std::iota(label.begin(), label.end(), 0);
  std::vector<double> w(m0);
  for (int k = 0; k < m0; ++k) w[k] = std::pow(initial.R[k], p.n);
  const double W0 = std::accumulate(w.begin(), w.end(), 0.0);
  double Wsegment = W0;
  double t = initial.t;

  const auto record = [&](double time, const std::vector<double>& x) {
    RipeningSample s;
    s.t = time;
    s.R = Eigen::VectorXd::Zero(m0);
    Eigen::VectorXd alive(static_cast<Eigen::Index>(x.size()));
    for (std::size_t k = 0; k < x.size(); ++k) {
      alive[k] = std::pow(x[k], 1.0 / p.n);
      s.R[label[k]] = alive[k];
      s.volume += x[k];
      s.area += std::pow(alive[k], p.n - 1);
    }
    s.thetaBar = ripening_rates(p, alive).thetaBar;
    if (!initial.centers.empty()) s.minGap = detail::min_pairwise_gap(initial.centers, s.R);
    if (!tr.samples.empty() && s.area > tr.samples.back().area * (1.0 + 1e-12)) ++tr.diagnostics.areaIncreases;
    tr.diagnostics.volumeDrift = std::max(tr.diagnostics.volumeDrift, std::abs(s.volume - W0) / W0);
    tr.diagnostics.volumeDriftBetweenEvents =
        std::max(tr.diagnostics.volumeDriftBetweenEvents, std::abs(s.volume - Wsegment) / Wsegment);
    tr.samples.push_back(std::move(s));
  };
  record(t, w);

  const detail::VolumeRhs rhs{p};
  const auto fresh = [&] { return ode::make_dense_output(opt.atol, opt.rtol, ode::runge_kutta_dopri5<std::vector<double>>()); };
  auto stepper = fresh();
  double dt = dt0;
  stepper.initialize(w, t, dt);
  long steps = 0;
  const double tEnd = initial.t + T;
  while (w.size() > 1 && t < tEnd) {
    if (++steps > opt.maxSteps) throw Error(ErrorCode::StepFailure, "ripening step budget exhausted");
    const auto [t0, t1] = stepper.do_step(rhs);
    const double tb = std::min(t1, tEnd);
    std::vector<double> x(w.size());
    stepper.calc_state(tb, x);
    const auto below = [&](const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()) <= wmin; };
    if (!below(x)) {
      t = tb;
      w = x;
      record(t, w);
      continue;
    }
    // Locate the first crossing of min_k w_k = wmin on [t0, tb] by bisection on the dense output.
    double a = t0, b = tb;
    for (int it = 0; it < 200 && b - a > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(b));
         ++it) {
      const double c = 0.5 * (a + b);
      stepper.calc_state(c, x);
      (below(x) ? b : a) = c;
    }
    t = b;
    stepper.calc_state(t, x);
    const auto kmin = static_cast<std::size_t>(std::min_element(x.begin(), x.end()) - x.begin());
    const double Wbefore = std::accumulate(x.begin(), x.end(), 0.0);
    tr.events.push_back(RipeningEvent{t, label[kmin], std::pow(std::max(x[kmin], 0.0), 1.0 / p.n)});
    x.erase(x.begin() + static_cast<std::ptrdiff_t>(kmin));
    label.erase(label.begin() + static_cast<std::ptrdiff_t>(kmin));
    const double scale = Wbefore / std::accumulate(x.begin(), x.end(), 0.0);
    for (double& v : x) v *= scale;
    w = x;
    Wsegment = std::accumulate(w.begin(), w.end(), 0.0);
    record(t, w);
    dt = std::max(stepper.current_time_step(), 1e-12 * std::max(1.0, std::abs(t)));
    stepper = fresh();  // internal buffers are sized for the previous droplet count
    stepper.initialize(w, t, dt);
  }
  if (w.size() == 1 && t < tEnd) {
    t = tEnd;  // a single droplet is stationary
    record(t, w);
  }
  tr.final.t = t;
  tr.final.R = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(w.size()));
  for (std::size_t k = 0; k < w.size(); ++k) tr.final.R[k] = std::pow(w[k], 1.0 / p.n);
  tr.final.thetaBar = tr.samples.back().thetaBar;
  for (int l : label)
    if (!initial.centers.empty()) tr.final.centers.push_back(initial.centers[l]);
  return tr;
}

/// Distance of the radii from the equal-radius state with the same sum R^n.
inline double equal_radius_deviation(int n, const Eigen::VectorXd& R) {
  const double W = R.array().pow(n).sum();
  const double Req = std::pow(W / R.size(), 1.0 / n);
  return (R.array() - Req).matrix().norm();
}

/// Least-squares slope of log(deviation) against t over samples whose deviation lies in [lo, hi].
inline double escape_rate(int n, const RipeningTrajectory& tr, double lo, double hi) {
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  int count = 0;
  for (const auto& s : tr.samples) {
    if ((s.R.array() == 0.0).any()) break;
    const double d = equal_radius_deviation(n, s.R);
    if (d < lo || d > hi) continue;
    const double y = std::log(d);
    st += s.t;
    sy += y;
    stt += s.t * s.t;
    sty += s.t * y;
    ++count;
  }
  if (count < 3) throw Error(ErrorCode::InvalidArgument, "too few samples in the fitting window");
  return (count * sty - st * sy) / (count * stt - st * st);
}

}  // namespace twophase
