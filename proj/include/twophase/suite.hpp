#pragma once

// Acceptance suite: property checks grouped by criterion (1-9), each with measured value and
// tolerance. Config-dependent selection: geometry.m >= 2 skips the connected-interface checks;
// gamma = 0 skips every check that goes through the dispersion route or the ripening reduction.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "twophase/residuals.hpp"
#include "twophase/runner.hpp"

namespace twophase {

enum class CheckStatus { Pass, Fail, Skipped };

inline std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
  }
  return "unknown";
}

struct CheckResult {
  int criterion = 0;
  std::string name;
  CheckStatus status = CheckStatus::Fail;
  double measured = std::numeric_limits<double>::quiet_NaN();
  std::string relation;  // "<=", ">=", "=="
  double tolerance = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};

inline constexpr int kCriterionCount = 9;

inline const char* criterion_title(int c) {
  static const char* titles[] = {"",
                                 "thermodynamic identities",
                                 "equilibrium consistency",
                                 "second variation",
                                 "spectral, connected case",
                                 "operator properties",
                                 "disconnected case",
                                 "Lyapunov structure",
                                 "residual evaluator",
                                 "determinism"};
  return (c >= 1 && c <= kCriterionCount) ? titles[c] : "";
}

struct SuiteReport {
  std::vector<CheckResult> checks;

  /// Fail if any check fails; skipped if every check was skipped or none ran.
  CheckStatus criterion(int c) const {
    bool any = false;
    for (const auto& r : checks)
      if (r.criterion == c) {
        if (r.status == CheckStatus::Fail) return CheckStatus::Fail;
        if (r.status == CheckStatus::Pass) any = true;
      }
    return any ? CheckStatus::Pass : CheckStatus::Skipped;
  }

  bool ok() const {
    for (const auto& r : checks)
      if (r.status == CheckStatus::Fail) return false;
    return true;
  }

  CsvTable table() const {
    CsvTable t({"criterion", "check", "status", "measured", "relation", "tolerance", "detail"});
    for (const auto& r : checks)
      t.row() << r.criterion << r.name << to_string(r.status) << r.measured << r.relation << r.tolerance << r.detail;
    return t;
  }
};

namespace suite_detail {

constexpr double kPi = std::numbers::pi;
constexpr double kOrderSlack = 0.05;

class Recorder {
 public:
  Recorder(SuiteReport& rep, int criterion) : rep_(rep), c_(criterion) {}

  void le(const std::string& name, double measured, double tol, std::string detail = {}) {
    add(name, measured <= tol, measured, "<=", tol, std::move(detail));
  }
  void ge(const std::string& name, double measured, double tol, std::string detail = {}) {
    add(name, measured >= tol, measured, ">=", tol, std::move(detail));
  }
  void eq(const std::string& name, double measured, double expected, std::string detail = {}) {
    add(name, measured == expected, measured, "==", expected, std::move(detail));
  }
  void skip(const std::string& name, std::string why) {
    rep_.checks.push_back({c_, name, CheckStatus::Skipped, std::numeric_limits<double>::quiet_NaN(), "",
                           std::numeric_limits<double>::quiet_NaN(), std::move(why)});
  }
  void fail(const std::string& name, std::string why) {
    rep_.checks.push_back({c_, name, CheckStatus::Fail, std::numeric_limits<double>::quiet_NaN(), "",
                           std::numeric_limits<double>::quiet_NaN(), std::move(why)});
  }

  /// Runs a block of checks; a library error becomes a failed (or, for GammaZero, skipped) check.
  template <class F>
  void guarded(const std::string& name, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::GammaZero) {
        skip(name, "skipped: GammaZero");
      } else {
        fail(name, e.what());
      }
    }
  }

 private:
  void add(const std::string& name, bool pass, double measured, const char* rel, double tol, std::string detail) {
    rep_.checks.push_back(
        {c_, name, pass ? CheckStatus::Pass : CheckStatus::Fail, measured, rel, tol, std::move(detail)});
  }
  SuiteReport& rep_;
  int c_;
};

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Fourth-order central differences with a step proportional to the evaluation point.
template <class F>
double fd1(F f, double t) {
  const double h = 1e-3 * t;
  return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h);
}
template <class F>
double fd2(F f, double t) {
  const double h = 1e-3 * t;
  return (-f(t + 2 * h) + 16 * f(t + h) - 30 * f(t) + 16 * f(t - h) - f(t - 2 * h)) / (12 * h * h);
}

inline double observed_order(double a, double b, double c) { return std::log2(std::abs(a - b) / std::abs(b - c)); }

struct Context {
  const RunConfig& cfg;
  int threads = 1;
  bool connected = true;
  bool gammaPositive = true;
  double theta = 1.0;  // working temperature for fixtures
};

inline EquilibriumState single_sphere(const MaterialSet& ms, int n, double R, double Ro, double theta) {
  return make_equilibrium(ms, Domain{n, Ro}, SphereFamily{{Point{0.0, 0.0, 0.0}}, R}, theta);
}

// ------------------------------------------------------------------------------------------
// 1. thermodynamic identities

inline void criterion1(const Context& ctx, SuiteReport& rep) {
  Recorder rec(rep, 1);
  rec.guarded("identities", [&] {
    const MaterialSet& ms = ctx.cfg.materials;
    const double tc = ms.thetaC();
    std::mt19937_64 rng(static_cast<std::uint64_t>(ctx.cfg.suite.seed));
    std::uniform_real_distribution<double> U(0.01 * tc, 0.99 * tc);
    double idErr = 0.0, fdErr = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double t = U(rng);
      for (int k = 1; k <= 2; ++k) {
        const PhaseLaw& p = ms.phase(k);
        const BulkDerived b = derived_bulk(p, t, tc);
        const Jet psi = p.psi.at(t);
        idErr = std::max(idErr, rel_err(b.eps, psi.value + t * b.eta));
        idErr = std::max(idErr, rel_err(b.kappa, -t * psi.d2));
        auto f = [&](double x) { return p.psi(x); };
        auto g = [&](double x) { return p.psi.at(x).d2; };
        fdErr = std::max({fdErr, rel_err(psi.d1, fd1(f, t)), rel_err(psi.d2, fd2(f, t)), rel_err(psi.d3, fd1(g, t))});
      }
      const double etaJump = derived_bulk(ms, 2, t).eta - derived_bulk(ms, 1, t).eta;
      idErr = std::max(idErr, rel_err(latent_heat(ms, t), -t * etaJump));
      const SurfaceDerived s = derived_surface(ms.surface, t);
      const Jet sig = ms.surface.sigma().at(t);
      idErr = std::max({idErr, rel_err(s.epsG, sig.value + t * s.etaG), rel_err(s.kappaG, -t * sig.d2),
                        rel_err(s.lG, t * sig.d1)});
      auto sf = [&](double x) { return ms.surface.sigma()(x); };
      fdErr = std::max({fdErr, rel_err(sig.d1, fd1(sf, t)), rel_err(sig.d2, fd2(sf, t))});
    }
    rec.le("six identities, 1000 draws (relative)", idErr, 1e-12);
    rec.le("analytic vs finite-difference derivatives (relative)", fdErr, 1e-6);
  });
}

// ------------------------------------------------------------------------------------------
// 2. equilibrium consistency

inline void criterion2(const Context& ctx, SuiteReport& rep) {
  Recorder rec(rep, 2);
  rec.guarded("random equilibria", [&] {
    std::mt19937_64 rng(static_cast<std::uint64_t>(ctx.cfg.suite.seed) + 1);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double yl = 0.0, gt = 0.0, mass = 0.0, energy = 0.0, lag = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      MaterialSet ms = ctx.cfg.materials;
      ms.phase1.rho = 0.5 + 3.0 * U(rng);
      ms.phase2.rho = 0.5 + 3.0 * U(rng);
      if (std::abs(ms.phase1.rho - ms.phase2.rho) < 0.05) ms.phase2.rho += 0.3;
      const int n = U(rng) < 0.5 ? 2 : 3;
      const int m = 1 + static_cast<int>(3.0 * U(rng));
      const Domain dom{n, 3.0};
      const double R = 0.2 + 0.5 * U(rng);
      const double V1 = m * ball_volume(n, R);
      const double M0 = ms.phase1.rho * V1 + ms.phase2.rho * (dom.volume() - V1);
      const SphereFamily s{ring_centers(m, 1.5), R};
      const double theta = (0.05 + 0.9 * U(rng)) * ms.thetaC();
      const double E0 = total_functionals(ms, dom, s, theta).E;
      const EquilibriumState eq = equilibrium_from_totals(ms, dom, s.centers, M0, E0);
      mass = std::max(mass, std::abs(eq.R() - R) / R);
      mass = std::max(mass, std::abs(total_functionals(ms, dom, eq.spheres, eq.thetaStar).M - M0) / M0);
      energy = std::max(energy, std::abs(eq.thetaStar - theta) / theta);
      const double sig = ms.surface.sigma()(eq.thetaStar);
      yl = std::max(yl, std::abs(eq.pi2 - eq.pi1 - sig * eq.HStar) / std::max(1.0, std::abs(sig * eq.HStar)));
      const double J = ms.phase2.psi(eq.thetaStar) - ms.phase1.psi(eq.thetaStar);
      gt = std::max(gt, std::abs(J + eq.pi2 / ms.phase2.rho - eq.pi1 / ms.phase1.rho) / (1.0 + std::abs(eq.pi1)));
      lag = std::max(lag, lagrange_residual(ms, eq).residual);
    }
    rec.le("[[pi]] = sigma H (relative)", yl, 1e-12);
    rec.le("[[psi]] + [[pi/rho]] = 0 (relative)", gt, 1e-12);
    rec.le("mass round trip (relative)", mass, 1e-10);
    rec.le("energy round trip (relative)", energy, 1e-10);
    rec.le("Lagrange residual over probes", lag, 1e-8);
  });
}

// ------------------------------------------------------------------------------------------
// 3. second variation

inline void criterion3(const Context& ctx, SuiteReport& rep) {
  Recorder rec(rep, 3);
  const MaterialSet& cms = ctx.cfg.materials;
  rec.guarded("witness closed form", [&] {
    // sigma(1) = 1 at theta_* = 1 gives the normalized value 16 pi for n = 3, R_* = 1.
    MaterialSet ms = cms;
    ms.surface = SurfaceLaw::make(Polynomial::quadratic_surface_tension(4.0 / 3.0, 2.0), cms.surface.dGamma(),
                                  cms.surface.gamma());
    const EquilibriumState eq = make_equilibrium(ms, Domain{3, 5.0}, SphereFamily{ring_centers(2, 2.5), 1.0}, 1.0);
    Perturbation p = Perturbation::zero(3, 2, 8);
    p.h[0] = constant_harmonic(3, 8, 1.0);
    p.h[1] = constant_harmonic(3, 8, -1.0);
    const double v = second_variation_form(ms, eq, p);
    rec.le("witness value vs 16 pi (n = 3, relative)", std::abs(v - 16.0 * kPi) / (16.0 * kPi), 1e-8);

    double worst = 0.0;
    for (int n : {2, 3}) {
      const double R = 0.7, th = ctx.theta;
      const EquilibriumState e = make_equilibrium(cms, Domain{n, 5.0}, SphereFamily{ring_centers(2, 2.5), R}, th);
      Perturbation q = Perturbation::zero(n, 2, 8);
      q.h[0] = constant_harmonic(n, 8, 1.0);
      q.h[1] = constant_harmonic(n, 8, -1.0);
      const double closed = cms.surface.sigma()(th) * th * ((n - 1) / (R * R)) * sphere_area(n, R) * 2.0;
      worst = std::max(worst, std::abs(second_variation_form(cms, e, q) - closed) / std::abs(closed));
    }
    rec.le("witness value vs closed form, configured materials (relative)", worst, 1e-8);
  });
  if (ctx.connected) {
    rec.guarded("m = 1 classification", [&] {
      for (int n : {2, 3}) {
        const EquilibriumState eq =
            make_equilibrium(cms, Domain{n, 5.0}, SphereFamily{ring_centers(1, 0.0), 1.0}, ctx.theta);
        const QuadraticFormReport r = classify_definiteness(cms, eq, 8);
        const std::string tag = "n = " + std::to_string(n);
        rec.eq("m = 1 negSemiDefinite (" + tag + ")", r.classification == Definiteness::NegSemiDefinite, 1.0,
               to_string(r.classification));
        rec.eq("m = 1 zero directions = n (" + tag + ")", r.zeroDimension, n);
      }
    });
  } else {
    rec.skip("m = 1 classification", "skipped: disconnected configuration");
  }
  rec.guarded("m >= 2 classification", [&] {
    for (int n : {2, 3})
      for (int m : {2, 3}) {
        const EquilibriumState eq =
            make_equilibrium(cms, Domain{n, 5.0}, SphereFamily{ring_centers(m, 2.5), 1.0}, ctx.theta);
        const QuadraticFormReport r = classify_definiteness(cms, eq, 8);
        const std::string tag = "n = " + std::to_string(n) + ", m = " + std::to_string(m);
        rec.eq("indefinite (" + tag + ")", r.classification == Definiteness::Indefinite, 1.0,
               to_string(r.classification));
        rec.eq("positive dimension = m - 1 (" + tag + ")", r.positiveDimension, m - 1);
      }
  });
}

// ------------------------------------------------------------------------------------------
// 4. spectral, connected case

struct ModeVerdict {
  double maxUnstable = -std::numeric_limits<double>::infinity();  // largest Re outside the zero cluster
  int positiveRoots = 0;
  double agreement = 0.0;  // relative gap between routes on the leading real eigenvalue
  bool agreementAvailable = false;
};

inline ModeVerdict mode_verdict(const LinearizationCoefficients& c, int l, const RadialDiscretization& disc,
                                const std::vector<double>& grid, bool dispersion) {
  ModeVerdict v;
  const ModeSpectrum s = direct_mode_spectrum(c, l, disc);
  for (const auto& x : s.physical)
    if (std::abs(x) > 1e-6) v.maxUnstable = std::max(v.maxUnstable, x.real());
  if (!dispersion || l < 2) return v;
  for (double r : dispersion_roots(c, l, grid, disc))
    if (r > 0.0) ++v.positiveRoots;
  for (const auto& x : s.physical) {
    if (x.imag() != 0.0 || !(x.real() < -1e-6)) continue;
    const double lam = x.real();
    auto F = [&](double y) { return assemble_dispersion(c, l, y, disc).F; };
    // A pole of F can sit just beyond the root; shrink the bracket until it holds the root alone.
    v.agreement = std::numeric_limits<double>::infinity();
    for (double w = 1e-3; w >= 1e-7; w /= 10.0) {
      const double a = lam * (1.0 + w), b = lam * (1.0 - w);
      const double fa = F(a), fb = F(b);
      if (fa * fb > 0.0) continue;
      const double root = bracketed_root(F, a, b, fa, fb, 1e-13);
      v.agreement = std::abs(root - lam) / std::abs(lam);
      break;
    }
    v.agreementAvailable = true;
    break;
  }
  return v;
}

inline void criterion4(const Context& ctx, SuiteReport& rep) {
  Recorder rec(rep, 4);
  if (!ctx.connected) {
    rec.skip("connected-case spectrum", "skipped: disconnected configuration");
    return;
  }
  const MaterialSet& ms = ctx.cfg.materials;
  const int Lmax = 6;
  const int base = ctx.cfg.spectrum.nodes;
  std::map<int, std::vector<double>> verdicts;  // per resolution, in a fixed order
  for (int nodes : {base, 2 * base}) {
    const std::string res = std::to_string(nodes) + " nodes";
    const RadialDiscretization disc{nodes, nodes};
    rec.guarded("spectrum at " + res, [&] {
      double maxRe = -std::numeric_limits<double>::infinity();
      int roots = 0;
      double agree = 0.0;
      int compared = 0;
      int kernelMismatch = 0;
      double kernelRes = 0.0;
      int semisimpleFalse = 0;
      for (int n : {2, 3}) {
        const LinearizationCoefficients c = linearize(ms, single_sphere(ms, n, 1.0, 2.0, ctx.theta));
        const std::vector<ModeVerdict> mv = parallel_map<ModeVerdict>(Lmax + 1, ctx.threads, [&](int l) {
          return mode_verdict(c, l, disc, default_lambda_grid(), ctx.gammaPositive);
        });
        for (const auto& v : mv) {
          maxRe = std::max(maxRe, v.maxUnstable);
          roots += v.positiveRoots;
          if (v.agreementAvailable) {
            agree = std::max(agree, v.agreement);
            ++compared;
          }
        }
        const KernelReport k = kernel_check(c, disc, Lmax);
        if (k.dimension != n + 2) ++kernelMismatch;
        kernelRes = std::max({kernelRes, k.thetaResidual, k.hResidual, k.translationResidual});
        if (!semisimplicity_check(c, disc)) ++semisimpleFalse;
      }
      rec.le("max Re lambda outside zero cluster (" + res + ")", maxRe, 1e-6);
      rec.eq("kernel dimension mismatches vs n + 2 (" + res + ")", kernelMismatch, 0);
      rec.le("kernel element residual (" + res + ")", kernelRes, 1e-8);
      rec.eq("semi-simplicity failures (" + res + ")", semisimpleFalse, 0);
      double agreeVerdict = std::numeric_limits<double>::quiet_NaN();
      if (ctx.gammaPositive) {
        rec.eq("positive dispersion roots, l >= 2 (" + res + ")", roots, 0);
        rec.ge("modes compared between routes (" + res + ")", compared, 2 * (Lmax - 1));
        rec.le("route agreement on leading eigenvalue (" + res + ", relative)", agree, 1e-4);
        agreeVerdict = agree <= 1e-4;
      } else {
        rec.skip("dispersion route (" + res + ")", "skipped: GammaZero");
      }
      verdicts[nodes] = {maxRe <= 1e-6 ? 1.0 : 0.0, static_cast<double>(kernelMismatch), static_cast<double>(semisimpleFalse),
                         static_cast<double>(roots), agreeVerdict};
    });
  }
  if (verdicts.size() == 2) {
    const auto& a = verdicts.at(base);
    const auto& b = verdicts.at(2 * base);
    int changed = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(a[i] == b[i] || (std::isnan(a[i]) && std::isnan(b[i])))) ++changed;
    rec.eq("verdicts changed between resolutions", changed, 0);
  }
}

// ------------------------------------------------------------------------------------------
// 5. operator properties

// Harmonic oracle for the lambda = 0 heat problem: r^l inside, A r^l + B r^-(l+n-2) outside.
inline double dtn_closed_form(const LinearizationCoefficients& c, int l) {
  const double R = c.R, Ro = c.R_Omega;
  const double p = l + c.n - 2;
  const double flux1 = c.d1 * l / R;
  const double ratio = l * std::pow(Ro, l + p) / p;
  const double A = 1.0 / (std::pow(R, l) + ratio * std::pow(R, -p));
  const double B = ratio * A;
  const double flux2 = c.d2 * (l * A * std::pow(R, l - 1) - p * B * std::pow(R, -p - 1));
  return -(flux2 - flux1);
}

inline void criterion5(const Context& ctx, SuiteReport& rep) {
  Recorder rec(rep, 5);
  const MaterialSet& ms = ctx.cfg.materials;
  const RadialDiscretization disc{ctx.cfg.spectrum.nodes, ctx.cfg.spectrum.nodes};
  rec.guarded("Stokes operator", [&] {
    std::mt19937_64 rng(static_cast<std::uint64_t>(ctx.cfg.suite.seed) + 5);
    std::normal_distribution<double> N(0.0, 1.0);
    double sym = 0.0, psd = std::numeric_limits<double>::infinity(), energy = 0.0;
    for (int n : {2, 3}) {
      const LinearizationCoefficients c = linearize(ms, single_sphere(ms, n, 1.0, 2.0, ctx.theta));
      for (int l = 1; l <= 6; ++l)
        for (double lam : {0.0, 0.5, 2.0}) {
          const Eigen::MatrixXd S = stokes_mode_operator(c, l, lam, disc).S;
          sym = std::max(sym, (S - S.transpose()).norm() / S.norm());
          psd = std::min(psd, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S).eigenvalues().minCoeff() / S.norm());
          const Eigen::Vector3d g(N(rng), N(rng), N(rng));
          const double lhs = g.dot(S * g);
          energy = std::max(energy, std::abs(stokes_dissipation(c, stokes_solve(c, l, lam, g, disc), disc) - lhs) / std::abs(lhs));
        }
    }
    rec.le("Stokes operator asymmetry (relative)", sym, 1e-6);
    rec.ge("Stokes operator min eigenvalue (relative)", psd, -1e-8);
    rec.le("Stokes energy identity (relative)", energy, 1e-4);
  });
  rec.guarded("heat DtN at lambda = 0", [&] {
    double worst = 0.0;
    for (int n : {2, 3}) {
      const LinearizationCoefficients c = linearize(ms, single_sphere(ms, n, 1.0, 2.0, ctx.theta));
      worst = std::max(worst, std::abs(heat_dtn(c, 0, 0.0, disc)));
      for (int l = 1; l <= 6; ++l) {
        const double oracle = dtn_closed_form(c, l);
        worst = std::max(worst, std::abs(heat_dtn(c, l, 0.0, disc) - oracle) / std::abs(oracle));
      }
    }
    rec.le("DtN vs harmonic closed form (relative)", worst, 1e-8);
  });
  if (ctx.gammaPositive) {
    rec.guarded("contraction", [&] {
      double worst = 0.0;
      for (int n : {2, 3}) {
        const LinearizationCoefficients c = linearize(ms, single_sphere(ms, n, 1.0, 2.0, ctx.theta));
        for (int l = 0; l <= 6; ++l)
          for (double lam : {0.0, 0.01, 1.0, 100.0}) worst = std::max(worst, contraction_check(c, l, lam, disc));
      }
      rec.le("max contraction norm", worst, 1.0 + 1e-8);
    });
  } else {
    rec.skip("contraction", "skipped: GammaZero");
  }
  rec.guarded("matrix lemmas", [&] {
    std::mt19937_64 rng(static_cast<std::uint64_t>(ctx.cfg.suite.seed) + 7);
    std::normal_distribution<double> G(0.0, 1.0);
    std::uniform_int_distribution<int> dim(1, 6);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const int h = dim(rng), v = dim(rng);
      Eigen::MatrixXd A(v, h), C(h, h);
      for (int i = 0; i < v; ++i)
        for (int j = 0; j < h; ++j) A(i, j) = 3.0 * G(rng);
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < h; ++j) C(i, j) = G(rng);
      const Eigen::MatrixXd B = C * C.transpose() + 1e-3 * Eigen::MatrixXd::Identity(h, h);
      worst = std::max(worst, contraction_norm(A, B));
    }
    rec.le("positive-definite lemma, 1000 fixtures (max norm)", worst, 1.0 + 1e-10);
    std::uniform_int_distribution<int> dim5(1, 5);
    int failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const int a = dim5(rng), b = dim5(rng), r = a + b;
      Eigen::MatrixXd X(r, r);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) X(i, j) = G(rng);
      const Eigen::MatrixXd M = X * X.transpose() + 1e-6 * Eigen::MatrixXd::Identity(r, r);
      if (!schur_check(M.topLeftCorner(a, a), M.bottomLeftCorner(b, a), M.bottomRightCorner(b, b))) ++failures;
    }
    rec.eq("Schur lemma failures, 1000 fixtures", failures, 0);
  });
}

// ------------------------------------------------------------------------------------------
// 6. disconnected case

inline void criterion6(const Context& ctx, SuiteReport& rep) {
  Recorder rec(rep, 6);
  const MaterialSet& ms = ctx.cfg.materials;
  rec.guarded("volume exchange spectrum", [&] {
    int wrong = 0;
    for (int n : {2, 3}) {
      const RipeningParams p = RipeningParams::at(ms, ctx.theta, n);
      for (int m : {2, 3, 4}) {
        const std::vector<double> ev = volume_exchange_spectrum(p, m, 0.5);
        const auto pos = std::count_if(ev.begin(), ev.end(), [](double x) { return x > 1e-10; });
        if (static_cast<int>(ev.size()) != m - 1 || pos != m - 1) ++wrong;
      }
    }
    rec.eq("cases without exactly m - 1 positive eigenvalues", wrong, 0);
  });
  rec.guarded("escape rate (reduction-based)", [&] {
    double worst = 0.0;
    for (int n : {2, 3}) {
      const RipeningParams p = RipeningParams::at(ms, ctx.theta, n);
      const double R0 = 0.5;
      DropletState s;
      s.R = Eigen::Vector3d(R0 * (1.0 + 2e-8), R0 * (1.0 - 1e-8), R0 * (1.0 - 1e-8));
      const double lead = volume_exchange_spectrum(p, 3, R0).front();
      const RipeningTrajectory tr = simulate_ripening(p, s, 40.0 / lead, 1e-4 / lead);
      const double fit = escape_rate(n, tr, 1e-6 * R0, 1e-3 * R0);
      worst = std::max(worst, std::abs(fit - lead) / lead);
    }
    rec.le("escape rate vs leading eigenvalue (relative, reduction-based)", worst, 0.05);
  });
}

// ------------------------------------------------------------------------------------------
// 7. Lyapunov structure

inline double identity_gap(const MaterialSet& ms, int n, int N, double dt, double tstar, double theta) {
  RadialGrid g;
  g.n = n;
  g.N1 = g.N2 = N;
  RadialState s = radial_initial(g, RadialProfile::Cosine, theta, 0.3 * theta);
  RadialState prev = s;
  const int steps = static_cast<int>(std::lround(tstar / dt));
  for (int k = 0; k < steps; ++k) {
    prev = s;
    s = radial_step(ms, g, s, dt);
  }
  const double dPhi = radial_totals(ms, g, s).Phi - radial_totals(ms, g, prev).Phi;
  return dPhi / dt - radial_entropy_production(ms, g, s);
}

inline void criterion7(const Context& ctx, SuiteReport& rep) {
  Recorder rec(rep, 7);
  const MaterialSet& ms = ctx.cfg.materials;
  rec.guarded("radial runs", [&] {
    double drift = 0.0, minStep = std::numeric_limits<double>::infinity(), terminal = 0.0;
    struct Run {
      int n;
      RadialProfile kind;
    };
    std::vector<Run> runs;
    for (int n : {2, 3})
      for (RadialProfile kind : {RadialProfile::TwoConstant, RadialProfile::Cosine, RadialProfile::CentralSpot})
        runs.push_back({n, kind});
    const std::vector<RadialDiagnostics> diag =
        parallel_map<RadialDiagnostics>(static_cast<int>(runs.size()), ctx.threads, [&](int i) {
          RadialGrid g;
          g.n = runs[i].n;
          const RadialState s0 = radial_initial(g, runs[i].kind, ctx.theta, 0.3 * ctx.theta);
          return simulate_radial(ms, g, s0, 5e-3, 10000, 10000).diagnostics;
        });
    for (const auto& d : diag) {
      drift = std::max(drift, d.energyDrift);
      minStep = std::min(minStep, d.minEntropyStep);
      terminal = std::max(terminal, d.terminalError);
    }
    rec.le("energy drift |dE|/E, 6 runs x 1e4 steps", drift, 1e-6);
    rec.ge("min entropy step", minStep, -1e-10);
    rec.le("terminal temperature vs theta_inf", terminal, 1e-6);
  });
  rec.guarded("entropy identity orders", [&] {
    double dtOrder = std::numeric_limits<double>::infinity(), drOrder = dtOrder;
    for (int n : {2, 3}) {
      const double th = ctx.theta;
      dtOrder = std::min(dtOrder, observed_order(identity_gap(ms, n, 64, 2e-3, 0.2, th), identity_gap(ms, n, 64, 1e-3, 0.2, th),
                                                 identity_gap(ms, n, 64, 5e-4, 0.2, th)));
      drOrder = std::min(drOrder, observed_order(identity_gap(ms, n, 32, 1e-3, 0.2, th), identity_gap(ms, n, 64, 1e-3, 0.2, th),
                                                 identity_gap(ms, n, 128, 1e-3, 0.2, th)));
    }
    rec.ge("observed order in dt", dtOrder, 1.0 - kOrderSlack, "nominal 1");
    rec.ge("observed order in dr", drOrder, 2.0 - kOrderSlack, "nominal 2");
  });
  rec.guarded("ripening coarsening (reduction-based)", [&] {
    std::mt19937_64 rng(static_cast<std::uint64_t>(ctx.cfg.suite.seed) + 11);
    std::uniform_real_distribution<double> U(0.3, 0.6);
    double volume = 0.0, radius = 0.0;
    int wrongCount = 0;
    for (int n : {2, 3}) {
      const RipeningParams p = RipeningParams::at(ms, ctx.theta, n);
      DropletState s;
      s.R.resize(6);
      for (int k = 0; k < 6; ++k) s.R[k] = U(rng);
      const double W = s.R.array().pow(n).sum();
      const RipeningTrajectory tr = simulate_ripening(p, s, 1e4 / p.rate(), 1e-3 / p.rate());
      volume = std::max(volume, tr.diagnostics.volumeDrift);
      if (tr.final.R.size() != 1) {
        ++wrongCount;
        continue;
      }
      const double expected = std::pow(W, 1.0 / n);
      radius = std::max(radius, std::abs(tr.final.R[0] - expected) / expected);
    }
    rec.le("sum R^n drift across extinctions (relative)", volume, 1e-8);
    rec.eq("runs not ending in one droplet", wrongCount, 0);
    rec.le("survivor radius vs conservation (relative)", radius, 1e-8);
  });
}

// ------------------------------------------------------------------------------------------
// 8. residual evaluator

inline void criterion8(const Context& ctx, SuiteReport& rep) {
  Recorder rec(rep, 8);
  const MaterialSet& ms = ctx.cfg.materials;
  rec.guarded("equilibrium snapshots", [&] {
    double worst = 0.0;
    int compat = 0;
    for (int n : {2, 3})
      for (double f : {0.25, 0.5, 0.85}) {
        const FieldSnapshot s = equilibrium_snapshot(ms, n, 0.8, 2.0, f * ms.thetaC());
        for (const auto& e : interface_residuals(ms, s)) worst = std::max(worst, e.value);
        if (!compatibility_check(ms, s).ok()) ++compat;
      }
    rec.le("max of eight interface residuals", worst, 1e-10);
    rec.eq("compatibility failures", compat, 0);
  });
  rec.guarded("manufactured solutions", [&] {
    // u = c / r^(n-1) e_r in phase 2: normal-stress residual [[1/rho]] j^2 + 2 mu_2 (n-1) c / R^n.
    const double c = 0.1, th = ctx.theta;
    double order = std::numeric_limits<double>::infinity();
    for (int n : {2, 3}) {
      std::vector<double> err;
      for (int N : {64, 128, 256}) {
        FieldSnapshot s = equilibrium_snapshot(ms, n, 1.0, 2.0, th, N);
        for (std::size_t i = 0; i < s.phase2.r.size(); ++i)
          s.phase2.ur.row(i).setConstant(c / std::pow(s.phase2.r[i], n - 1));
        const double jump = 1.0 / ms.phase2.rho - 1.0 / ms.phase1.rho;
        const double j = c / jump;
        s.j.setConstant(j);
        s.V.setConstant(-j / ms.phase1.rho);
        const auto r = interface_residuals(ms, s);
        const double pointwise = jump * j * j + 2.0 * ms.phase2.mu(th) * (n - 1) * c;
        err.push_back(std::abs(r[3].value - detail::surface_norm(n, 1.0, Eigen::RowVectorXd::Constant(s.angles, pointwise))));
      }
      order = std::min({order, std::log2(err[0] / err[1]), std::log2(err[1] / err[2])});
    }
    rec.ge("normal-stress residual order vs symbolic value", order, 2.0 - kOrderSlack, "nominal 2");

    double shearErr = 0.0;
    const double a = 0.3;
    for (int n : {2, 3}) {
      FieldSnapshot s = equilibrium_snapshot(ms, n, 1.0, 2.0, th, 12, 16);
      Eigen::RowVectorXd shear(s.angles), slip(s.angles);
      for (int k = 0; k < s.angles; ++k) {
        for (std::size_t i = 0; i < s.phase2.r.size(); ++i)
          s.phase2.ua(i, k) = a * s.phase2.r[i] * s.phase2.r[i] * std::sin(s.angle(k));
        shear[k] = -ms.phase2.mu(th) * a * std::sin(s.angle(k));
        slip[k] = a * std::sin(s.angle(k));
      }
      const auto r = interface_residuals(ms, s);
      shearErr = std::max({shearErr, std::abs(r[4].value - detail::surface_norm(n, 1.0, shear)),
                           std::abs(r[0].value - detail::surface_norm(n, 1.0, slip))});
    }
    rec.le("quadratic shear flow, exact for the stencil", shearErr, 1e-12);
  });
}

}  // namespace suite_detail

struct SuiteOptions {
  int threads = 1;
  bool determinism = true;  // criterion 9: rerun the suite and compare artifacts byte for byte
};

/// Criteria 1-8 plus the subcommand artifacts, written to `out`.
inline SuiteReport run_checks(const RunConfig& cfg, int threads) {
  suite_detail::Context ctx{cfg, threads};
  ctx.connected = cfg.geometry.m() == 1;
  const EquilibriumState eq = configured_equilibrium(cfg);
  ctx.theta = eq.thetaStar;
  ctx.gammaPositive = cfg.materials.surface.gamma()(ctx.theta) > 0.0;
  SuiteReport rep;
  suite_detail::criterion1(ctx, rep);
  suite_detail::criterion2(ctx, rep);
  suite_detail::criterion3(ctx, rep);
  suite_detail::criterion4(ctx, rep);
  suite_detail::criterion5(ctx, rep);
  suite_detail::criterion6(ctx, rep);
  suite_detail::criterion7(ctx, rep);
  suite_detail::criterion8(ctx, rep);
  return rep;
}

/// Writes the subcommand artifacts and the check table of criteria 1-8 into `out`.
inline SuiteReport suite_pass(const RunConfig& cfg, ArtifactWriter& out, int threads) {
  run_equilibrium(cfg, out);
  run_variations(cfg, out);
  run_spectrum(cfg, out, threads);
  if (cfg.geometry.m() == 1) run_simulate_radial(cfg, out);
  if (cfg.materials.surface.gamma()(configured_equilibrium(cfg).thetaStar) > 0.0) run_simulate_ripening(cfg, out);
  SuiteReport rep = run_checks(cfg, threads);
  out.write("checks.csv", rep.table().str());
  return rep;
}

inline std::vector<std::string> compare_directories(const ArtifactWriter& a, const ArtifactWriter& b) {
  std::vector<std::string> diffs;
  for (const auto& r : a.records()) {
    const auto it = std::find_if(b.records().begin(), b.records().end(), [&](const ArtifactRecord& x) { return x.name == r.name; });
    if (it == b.records().end()) {
      diffs.push_back(r.name + " missing in rerun");
    } else if (read_file(a.directory() / r.name) != read_file(b.directory() / r.name)) {
      diffs.push_back(r.name);
    }
  }
  if (a.records().size() != b.records().size()) diffs.push_back("artifact count differs");
  if (read_file(a.directory() / "manifest.json") != read_file(b.directory() / "manifest.json"))
    diffs.push_back("manifest.json");
  return diffs;
}

/// Full suite: two passes into out/run1 and out/run2 (criterion 9 compares them), then the
/// aggregated table suite.csv and suite.json in out.
inline SuiteReport run_suite(const RunConfig& cfg, ArtifactWriter& out, const SuiteOptions& opt = {}) {
  ArtifactWriter first(out.directory() / "run1");
  SuiteReport rep = suite_pass(cfg, first, opt.threads);
  first.write_manifest("suite", cfg.effective);
  out.adopt(first, "run1");
  suite_detail::Recorder rec(rep, 9);
  if (opt.determinism) {
    ArtifactWriter second(out.directory() / "run2");
    suite_pass(cfg, second, opt.threads);
    second.write_manifest("suite", cfg.effective);
    const std::vector<std::string> diffs = compare_directories(first, second);
    out.adopt(second, "run2");
    std::string detail;
    for (const auto& d : diffs) detail += (detail.empty() ? "" : " ") + d;
    rec.eq("artifacts differing between two full runs", static_cast<double>(diffs.size()), 0.0,
           std::to_string(first.records().size() + 1) + " files compared" + (detail.empty() ? "" : "; " + detail));
  } else {
    rec.skip("determinism rerun", "skipped: disabled");
  }

  const CsvTable table = rep.table();
  if (cfg.output.csv) out.write("suite.csv", table.str());
  if (cfg.output.json) {
    Json j;
    j["suite"] = cfg.suite.name;
    Json crit = Json::array();
    for (int c = 1; c <= kCriterionCount; ++c)
      crit.push_back({{"criterion", c}, {"title", criterion_title(c)}, {"status", to_string(rep.criterion(c))}});
    j["criteria"] = crit;
    j["passed"] = rep.ok();
    out.write_json("suite.json", j);
  }
  return rep;
}

}  // namespace twophase
