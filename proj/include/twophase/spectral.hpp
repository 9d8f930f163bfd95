#pragma once

// Per-mode linear stability machinery for one sphere of radius R concentric in the ball B(0, R_Omega).
//
// A degree-l field is written u = U(r) Y e_r + V(r) grad_1 Y, pi = P(r) Y, theta = T(r) Y, where Y is
// normalized in L2(Sigma) and grad_1 is the gradient on the unit sphere. With L = l(l+n-2),
// incompressibility gives V = (r U' + (n-1) U) / L and the pressure is harmonic:
// P = P1 (r/R)^l inside and A (r/R)^l + B (R/r)^(l+n-2) outside.
// Tangential interface data are expanded in E = grad_1 Y / sqrt(L), which has unit L2(Sigma) norm.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twophase/chebyshev.hpp"
#include "twophase/equilibria.hpp"
#include "twophase/error.hpp"
#include "twophase/geometry.hpp"
#include "twophase/ripening.hpp"
#include "twophase/thermo.hpp"

namespace twophase {

/// Material and geometric constants of the linearization at an equilibrium sphere.
/// kappa1/kappa2 are the bulk heat capacities (multiplied by rho in the heat equation).
struct LinearizationCoefficients {
  int n = 3;
  double R = 1.0;
  double R_Omega = 2.0;
  double theta = 1.0;
  double rho1 = 2.0, rho2 = 1.0;
  double mu1 = 1.0, mu2 = 1.0;
  double d1 = 1.0, d2 = 1.0;
  double kappa1 = 1.0, kappa2 = 1.0;
  double sigma = 1.0;
  double dsigma = 0.0;
  double kappaG = 0.0;
  double dGamma = 1.0;
  double latent = 0.0;
  double gamma = 0.1;

  double HStar() const { return curvature_constant(n, R); }
  double rho_jump() const { return rho2 - rho1; }
  double inv_rho_jump() const { return 1.0 / rho2 - 1.0 / rho1; }
};

inline LinearizationCoefficients linearize(const MaterialSet& ms, const EquilibriumState& eq) {
  if (eq.spheres.m() != 1) throw Error(ErrorCode::InvalidArgument, "per-mode analysis needs a single sphere");
  const double t = eq.thetaStar;
  LinearizationCoefficients c;
  c.n = eq.n();
  c.R = eq.R();
  c.R_Omega = eq.domain.R_Omega;
  c.theta = t;
  c.rho1 = ms.phase1.rho;
  c.rho2 = ms.phase2.rho;
  c.mu1 = ms.phase1.mu(t);
  c.mu2 = ms.phase2.mu(t);
  c.d1 = ms.phase1.d(t);
  c.d2 = ms.phase2.d(t);
  c.kappa1 = derived_bulk(ms, 1, t).kappa;
  c.kappa2 = derived_bulk(ms, 2, t).kappa;
  const Jet s = ms.surface.sigma().at(t);
  c.sigma = s.value;
  c.dsigma = s.d1;
  c.kappaG = derived_surface(ms.surface, t).kappaG;
  c.dGamma = ms.surface.dGamma()(t);
  c.latent = latent_heat(ms, t);
  c.gamma = ms.surface.gamma()(t);
  return c;
}

/// Collocation nodes per radial subinterval.
struct RadialDiscretization {
  int inner = 48;
  int outer = 48;

  void validate() const {
    if (inner < 8 || outer < 8) throw Error(ErrorCode::InvalidArgument, "at least 8 nodes per interval");
  }
  RadialDiscretization doubled() const { return {2 * inner, 2 * outer}; }
};

namespace detail {

inline double parity_sign(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }

struct ModeGrid {
  FoldedGrid u_in;  // parity (-1)^(l-1): U ~ r^(l-1)
  FoldedGrid t_in;  // parity (-1)^l: T ~ r^l
  ChebGrid out;     // out.r[0] = R_Omega, out.r[N-1] = R
};

inline ModeGrid mode_grid(const LinearizationCoefficients& c, int l, const RadialDiscretization& d) {
  d.validate();
  if (!(c.R > 0.0 && c.R_Omega > c.R)) throw Error(ErrorCode::InvalidArgument, "need 0 < R < R_Omega");
  const int pu = static_cast<int>(parity_sign(l - 1));
  const int pt = static_cast<int>(parity_sign(l));
  return {cheb_folded(c.R, d.inner, pu), cheb_folded(c.R, d.inner, pt), cheb_interval(c.R, c.R_Omega, d.outer)};
}

/// -d (T'' + (n-1)/r T' - L/r^2 T)
inline Eigen::MatrixXd heat_operator(const Eigen::VectorXd& r, const Eigen::MatrixXd& D1, const Eigen::MatrixXd& D2,
                                     double d, int n, double L) {
  Eigen::MatrixXd A = D2;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    A.row(i) += ((n - 1) / r[i]) * D1.row(i);
    A(i, i) -= L / (r[i] * r[i]);
  }
  return -d * A;
}

/// -mu (U'' + (n+1)/r U' + (n-1-L)/r^2 U): radial component of -mu Delta u for divergence-free u.
inline Eigen::MatrixXd stokes_operator(const Eigen::VectorXd& r, const Eigen::MatrixXd& D1, const Eigen::MatrixXd& D2,
                                       double mu, int n, double L) {
  Eigen::MatrixXd A = D2;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    A.row(i) += ((n + 1) / r[i]) * D1.row(i);
    A(i, i) += (n - 1 - L) / (r[i] * r[i]);
  }
  return -mu * A;
}

inline Eigen::VectorXd solve_checked(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const char* what) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  if (!(lu.rcond() > 1e-15)) throw Error(ErrorCode::SolveFailure, std::string(what) + ": singular system");
  Eigen::VectorXd x = lu.solve(b);
  if (!x.allFinite()) throw Error(ErrorCode::SolveFailure, std::string(what) + ": non-finite solution");
  return x;
}

/// Column layout of the velocity/pressure block: [U1 (N1), U2 (N2), P1, A, B].
struct StokesLayout {
  int N1 = 0, N2 = 0;
  int u1() const { return 0; }
  int u2() const { return N1; }
  int p1() const { return N1 + N2; }
  int pa() const { return N1 + N2 + 1; }
  int pb() const { return N1 + N2 + 2; }
  int size() const { return N1 + N2 + 3; }
};

/// Interface traces at r = R as row functionals over the velocity/pressure columns.
struct StokesTraces {
  Eigen::RowVectorXd U1, U2, V1, V2, tau1, tau2, Tn1, Tn2;
  Eigen::RowVectorXd vhat;  // [[rho U]] / [[rho]]
  Eigen::RowVectorXd j;     // [[U]] / [[1/rho]]
};

inline StokesTraces stokes_traces(const LinearizationCoefficients& c, int l, const ModeGrid& g, int ncols) {
  const StokesLayout lay{g.u_in.size(), g.out.size()};
  const double L = lb_symbol(c.n, l), R = c.R;
  const int N1 = lay.N1, N2 = lay.N2;
  auto row = [ncols] { return Eigen::RowVectorXd::Zero(ncols).eval(); };
  Eigen::RowVectorXd U1 = row(), dU1 = row(), d2U1 = row(), U2 = row(), dU2 = row(), d2U2 = row();
  U1[lay.u1()] = 1.0;
  dU1.segment(lay.u1(), N1) = g.u_in.D1.row(0);
  d2U1.segment(lay.u1(), N1) = g.u_in.D2.row(0);
  U2[lay.u2() + N2 - 1] = 1.0;
  dU2.segment(lay.u2(), N2) = g.out.D1.row(N2 - 1);
  d2U2.segment(lay.u2(), N2) = g.out.D2.row(N2 - 1);
  Eigen::RowVectorXd P1 = row(), P2 = row();
  P1[lay.p1()] = 1.0;
  P2[lay.pa()] = 1.0;
  P2[lay.pb()] = 1.0;

  StokesTraces t;
  t.U1 = U1;
  t.U2 = U2;
  t.V1 = (R * dU1 + (c.n - 1) * U1) / L;
  t.V2 = (R * dU2 + (c.n - 1) * U2) / L;
  const Eigen::RowVectorXd Vp1 = (R * d2U1 + c.n * dU1) / L, Vp2 = (R * d2U2 + c.n * dU2) / L;
  t.tau1 = c.mu1 * (Vp1 - t.V1 / R + U1 / R);
  t.tau2 = c.mu2 * (Vp2 - t.V2 / R + U2 / R);
  t.Tn1 = 2.0 * c.mu1 * dU1 - P1;
  t.Tn2 = 2.0 * c.mu2 * dU2 - P2;
  t.vhat = (c.rho2 * U2 - c.rho1 * U1) / c.rho_jump();
  t.j = (U2 - U1) / c.inv_rho_jump();
  return t;
}

/// Writes the momentum collocation rows, the wall conditions and tangential-velocity continuity.
/// Returns the number of rows written (N1 + N2); the three remaining velocity rows are interface
/// stress conditions supplied by the caller. Bm receives the rho entries multiplying lambda.
inline int stokes_rows(const LinearizationCoefficients& c, int l, const ModeGrid& g, const StokesTraces& tr,
                       Eigen::MatrixXd& Am, Eigen::MatrixXd* Bm) {
  const StokesLayout lay{g.u_in.size(), g.out.size()};
  const double L = lb_symbol(c.n, l), R = c.R;
  const int p = l + c.n - 2;
  const Eigen::MatrixXd Sin = stokes_operator(g.u_in.r, g.u_in.D1, g.u_in.D2, c.mu1, c.n, L);
  const Eigen::MatrixXd Sout = stokes_operator(g.out.r, g.out.D1, g.out.D2, c.mu2, c.n, L);
  int row = 0;
  for (int i = 1; i < lay.N1; ++i, ++row) {
    const double r = g.u_in.r[i];
    Am.block(row, lay.u1(), 1, lay.N1) = Sin.row(i);
    Am(row, lay.p1()) = l * std::pow(r / R, l - 1) / R;
    if (Bm) (*Bm)(row, lay.u1() + i) = c.rho1;
  }
  for (int i = 1; i + 1 < lay.N2; ++i, ++row) {
    const double r = g.out.r[i];
    Am.block(row, lay.u2(), 1, lay.N2) = Sout.row(i);
    Am(row, lay.pa()) = l * std::pow(r / R, l - 1) / R;
    Am(row, lay.pb()) = -p * std::pow(R / r, p) / r;
    if (Bm) (*Bm)(row, lay.u2() + i) = c.rho2;
  }
  Am(row++, lay.u2()) = 1.0;
  Am.block(row++, lay.u2(), 1, lay.N2) = g.out.D1.row(0);
  Am.row(row) = tr.V2 - tr.V1;
  return ++row;
}

}  // namespace detail

/// Heat Dirichlet-to-Neumann symbol d_lambda^H(l) = -[[d dT/dr]](R) for T(R) = 1.
inline double heat_dtn(const LinearizationCoefficients& c, int l, double lambda, const RadialDiscretization& disc = {}) {
  if (!std::isfinite(lambda)) throw Error(ErrorCode::InvalidArgument, "lambda must be finite");
  const detail::ModeGrid g = detail::mode_grid(c, l, disc);
  const double L = lb_symbol(c.n, l);
  const int N1 = g.t_in.size(), N2 = g.out.size();

  Eigen::MatrixXd A1 = detail::heat_operator(g.t_in.r, g.t_in.D1, g.t_in.D2, c.d1, c.n, L);
  A1.diagonal().array() += lambda * c.rho1 * c.kappa1;
  A1.row(0).setZero();
  A1(0, 0) = 1.0;
  Eigen::VectorXd b1 = Eigen::VectorXd::Zero(N1);
  b1[0] = 1.0;
  const Eigen::VectorXd T1 = detail::solve_checked(A1, b1, "heat_dtn inner");

  Eigen::MatrixXd A2 = detail::heat_operator(g.out.r, g.out.D1, g.out.D2, c.d2, c.n, L);
  A2.diagonal().array() += lambda * c.rho2 * c.kappa2;
  A2.row(0) = g.out.D1.row(0);
  A2.row(N2 - 1).setZero();
  A2(N2 - 1, N2 - 1) = 1.0;
  Eigen::VectorXd b2 = Eigen::VectorXd::Zero(N2);
  b2[N2 - 1] = 1.0;
  const Eigen::VectorXd T2 = detail::solve_checked(A2, b2, "heat_dtn outer");

  const double flux1 = c.d1 * g.t_in.D1.row(0).dot(T1);
  const double flux2 = c.d2 * g.out.D1.row(N2 - 1).dot(T2);
  return -(flux2 - flux1);
}

/// Discrete velocity field of the per-mode Stokes problem.
struct StokesField {
  int l = 0;
  double lambda = 0.0;
  Eigen::VectorXd U1, U2;  // radial profiles on the inner (folded) and outer grids
  double P1 = 0.0, A = 0.0, B = 0.0;
  Eigen::Vector3d outputs = Eigen::Vector3d::Zero();  // (V_hat, j, sqrt(L) V(R))
};

struct StokesModeResult {
  Eigen::MatrixXd S;  // 3x3 for l >= 1, 2x2 zero for l = 0 (no divergence-free radial field)
  std::vector<StokesField> columns;
};

namespace detail {

inline StokesModeResult stokes_solve_columns(const LinearizationCoefficients& c, int l, double lambda,
                                             const RadialDiscretization& disc, const Eigen::MatrixXd& G) {
  StokesModeResult res;
  if (l == 0) {
    res.S = Eigen::MatrixXd::Zero(2, 2);
    return res;
  }
  const ModeGrid g = mode_grid(c, l, disc);
  const StokesLayout lay{g.u_in.size(), g.out.size()};
  const int nc = lay.size();
  const StokesTraces tr = stokes_traces(c, l, g, nc);
  Eigen::MatrixXd Am = Eigen::MatrixXd::Zero(nc, nc), Bm = Eigen::MatrixXd::Zero(nc, nc);
  int row = stokes_rows(c, l, g, tr, Am, &Bm);
  const double sL = std::sqrt(lb_symbol(c.n, l));
  const int rg1 = row++, rg2 = row++, rg3 = row++;
  Am.row(rg1) = -(tr.Tn2 - tr.Tn1);
  Am.row(rg2) = -(tr.Tn2 / c.rho2 - tr.Tn1 / c.rho1);
  Am.row(rg3) = -sL * (tr.tau2 - tr.tau1);
  Am += lambda * Bm;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(Am);
  if (!(lu.rcond() > 1e-15)) throw Error(ErrorCode::SolveFailure, "stokes_mode_operator: singular system");
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nc, G.cols());
  rhs.row(rg1) = G.row(0);
  rhs.row(rg2) = G.row(1);
  rhs.row(rg3) = G.row(2);
  const Eigen::MatrixXd Z = lu.solve(rhs);
  if (!Z.allFinite()) throw Error(ErrorCode::SolveFailure, "stokes_mode_operator: non-finite solution");

  res.S.resize(3, G.cols());
  for (Eigen::Index k = 0; k < G.cols(); ++k) {
    const Eigen::VectorXd z = Z.col(k);
    StokesField f;
    f.l = l;
    f.lambda = lambda;
    f.U1 = z.segment(lay.u1(), lay.N1);
    f.U2 = z.segment(lay.u2(), lay.N2);
    f.P1 = z[lay.p1()];
    f.A = z[lay.pa()];
    f.B = z[lay.pb()];
    f.outputs = {tr.vhat.dot(z), tr.j.dot(z), sL * tr.V1.dot(z)};
    res.S.col(k) = f.outputs;
    res.columns.push_back(std::move(f));
  }
  return res;
}

}  // namespace detail

/// Per-mode matrix S mapping interface data (g1, g2, g3) to ([[rho u.nu]]/[[rho]], [[u.nu]]/[[1/rho]],
/// tangential trace), with g1 = -[[T nu.nu]], g2 = -[[T nu.nu / rho]], g3 = -P[[T nu]].
inline StokesModeResult stokes_mode_operator(const LinearizationCoefficients& c, int l, double lambda,
                                             const RadialDiscretization& disc = {}) {
  return detail::stokes_solve_columns(c, l, lambda, disc, Eigen::Matrix3d::Identity());
}

/// Solution of the per-mode Stokes problem for data g.
inline StokesField stokes_solve(const LinearizationCoefficients& c, int l, double lambda, const Eigen::Vector3d& g,
                                const RadialDiscretization& disc = {}) {
  if (l == 0) throw Error(ErrorCode::InvalidArgument, "no velocity field in the l = 0 sector");
  return detail::stokes_solve_columns(c, l, lambda, disc, g).columns.front();
}

/// lambda int rho |u|^2 + 2 int mu |D(u)|^2 for a reconstructed per-mode field, by radial quadrature.
inline double stokes_dissipation(const LinearizationCoefficients& c, const StokesField& f,
                                 const RadialDiscretization& disc = {}) {
  const detail::ModeGrid g = detail::mode_grid(c, f.l, disc);
  const double L = lb_symbol(c.n, f.l);
  const int n = c.n;
  auto density = [&](const Eigen::VectorXd& r, const Eigen::MatrixXd& D1, const Eigen::MatrixXd& D2,
                     const Eigen::VectorXd& U, double rho, double mu) {
    const Eigen::VectorXd Up = D1 * U, Upp = D2 * U;
    Eigen::VectorXd out(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double x = r[i];
      const double V = (x * Up[i] + (n - 1) * U[i]) / L;
      const double Vp = (x * Upp[i] + n * Up[i]) / L;
      const double st = Vp - V / x + U[i] / x;
      const double kin = rho * (U[i] * U[i] + L * V * V);
      const double strain = Up[i] * Up[i] + 0.5 * L * st * st +
                            (L * (L - n + 2) * V * V - 2.0 * L * U[i] * V + (n - 1) * U[i] * U[i]) / (x * x);
      out[i] = (f.lambda * kin + 2.0 * mu * strain) * std::pow(x / c.R, n - 1);
    }
    return out;
  };
  const Eigen::VectorXd e1 = density(g.u_in.r, g.u_in.D1, g.u_in.D2, f.U1, c.rho1, c.mu1);
  const Eigen::VectorXd e2 = density(g.out.r, g.out.D1, g.out.D2, f.U2, c.rho2, c.mu2);
  return g.u_in.weights(static_cast<int>(detail::parity_sign(n - 1))).dot(e1) + g.out.w.dot(e2);
}

/// Per-mode Q vector (sigma' H_*, -l_*/theta_*, sigma' sqrt(L)/R); the tangential entry is absent for l = 0.
inline Eigen::VectorXd q_vector(const LinearizationCoefficients& c, int l) {
  Eigen::VectorXd q(l == 0 ? 2 : 3);
  q[0] = c.dsigma * c.HStar();
  q[1] = -c.latent / c.theta;
  if (l > 0) q[2] = c.dsigma * std::sqrt(lb_symbol(c.n, l)) / c.R;
  return q;
}

struct DispersionSample {
  double lambda = 0.0;
  int n = 3;
  int l = 0;
  double F = 0.0;
  double dtn = 0.0;
  Eigen::MatrixXd S;
  double s11 = 0.0, s22 = 0.0, s33 = 0.0, s12 = 0.0, s13 = 0.0, s23 = 0.0;
  double Llambda = 0.0;
  double r1 = 0.0, r2 = 0.0, r = 0.0;
  double tau = 0.0;
  double normK = 0.0;
};

/// Scalar dispersion function F_l(lambda) = lambda + tau(lambda) sigma_* a_l and its intermediates.
inline DispersionSample assemble_dispersion(const LinearizationCoefficients& c, int l, double lambda,
                                            const RadialDiscretization& disc = {}) {
  if (!(c.gamma > 0.0)) throw Error(ErrorCode::GammaZero, "dispersion route needs gamma_* > 0");
  // Constant temperature perturbations lie in the kernel: F_0 is defined for lambda > 0 only.
  if (l == 0 && !(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "mode l = 0 needs lambda > 0");
  DispersionSample d;
  d.lambda = lambda;
  d.n = c.n;
  d.l = l;
  d.S = stokes_mode_operator(c, l, lambda, disc).S;
  d.dtn = heat_dtn(c, l, lambda, disc);
  const Eigen::VectorXd q = q_vector(c, l);
  const Eigen::VectorXd Sq = d.S * q;
  const Eigen::RowVectorXd qS = q.transpose() * d.S;
  const double qSq = q.dot(Sq);
  const double lb = c.dGamma * lb_symbol(c.n, l) / (c.R * c.R);
  const double denom = c.kappaG * lambda + lb + d.dtn + c.theta * qSq;
  const double scale = std::abs(c.kappaG * lambda) + lb + std::abs(d.dtn) + std::abs(c.theta * qSq);
  if (!(std::abs(denom) > 1e-13 * scale)) throw Error(ErrorCode::SolveFailure, "surface heat operator not invertible");
  d.Llambda = 1.0 / denom;
  const Eigen::MatrixXd M = d.S - c.theta * d.Llambda * Sq * qS;
  d.r1 = M(0, 0);
  d.r2 = M(1, 1);
  d.r = M(1, 0);
  d.tau = M(0, 0) - M(0, 1) * M(1, 0) / (M(1, 1) + 1.0 / c.gamma);
  d.F = lambda + d.tau * c.sigma * surface_operator_eig(c.n, l, c.R);
  d.normK = c.theta * qSq * d.Llambda;
  d.s11 = d.S(0, 0);
  d.s22 = d.S(1, 1);
  d.s12 = d.S(0, 1);
  if (l > 0) {
    d.s33 = d.S(2, 2);
    d.s13 = d.S(0, 2);
    d.s23 = d.S(1, 2);
  }
  return d;
}

/// 0 followed by 64 logarithmically spaced points on [1e-4, 1e3].
inline std::vector<double> default_lambda_grid(int points = 64, double lo = 1e-4, double hi = 1e3) {
  std::vector<double> g{0.0};
  for (int i = 0; i < points; ++i)
    g.push_back(std::pow(10.0, std::log10(lo) + (std::log10(hi) - std::log10(lo)) * i / (points - 1)));
  return g;
}

inline constexpr double kRootResidual = 1e-10;

/// Sign-change scan of F over the grid followed by bisection; grid points with |F| < kRootResidual
/// are roots themselves. Brackets whose refined value does not vanish (poles) are dropped.
inline std::vector<double> dispersion_roots(const std::function<double(double)>& F, const std::vector<double>& grid) {
  std::vector<double> roots;
  if (grid.empty()) return roots;
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = F(grid[i]);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(vals[i]) < kRootResidual) roots.push_back(grid[i]);
    if (i + 1 == grid.size()) break;
    const double fa = vals[i], fb = vals[i + 1];
    if (std::abs(fa) < kRootResidual || std::abs(fb) < kRootResidual || (fa > 0.0) == (fb > 0.0)) continue;
    const double x = bracketed_root(F, grid[i], grid[i + 1], fa, fb, 1e-15);
    if (std::abs(F(x)) < kRootResidual) roots.push_back(x);
  }
  return roots;
}

inline std::vector<double> dispersion_roots(const LinearizationCoefficients& c, int l, const std::vector<double>& grid,
                                            const RadialDiscretization& disc = {}) {
  return dispersion_roots([&](double lam) { return assemble_dispersion(c, l, lam, disc).F; }, grid);
}

/// Symmetric square root of a PSD matrix; throws NotPSD below -1e-8 relative.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& S) {
  const Eigen::MatrixXd Ssym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ssym);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -1e-8 * scale) throw Error(ErrorCode::NotPSD, "operator is not positive semidefinite");
  return es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

/// Spectral norm of K = theta S^{1/2} q L_lambda q^T S^{1/2}.
inline double contraction_check(const LinearizationCoefficients& c, int l, double lambda,
                                 const RadialDiscretization& disc = {}) {
  // K vanishes with S^{1/2} q; the l = 0, lambda = 0 surface heat operator is singular there.
  const Eigen::MatrixXd S = stokes_mode_operator(c, l, lambda, disc).S;
  const Eigen::VectorXd v = psd_sqrt(S) * q_vector(c, l);
  if (v.squaredNorm() == 0.0) return 0.0;
  const DispersionSample d = assemble_dispersion(c, l, lambda, disc);
  const Eigen::MatrixXd K = c.theta * d.Llambda * v * v.transpose();
  return Eigen::JacobiSVD<Eigen::MatrixXd>(K).singularValues()[0];
}

/// ||A (A^T A + B)^{-1} A^T|| for B symmetric positive definite.
inline double contraction_norm(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::MatrixXd C = (A.transpose() * A + B).ldlt().solve(A.transpose());
  return Eigen::JacobiSVD<Eigen::MatrixXd>(A * C).singularValues()[0];
}

/// Smallest eigenvalue of S - R^T T^{-1} R for the block matrix [[S, R^T], [R, T]].
inline double schur_min_eigenvalue(const Eigen::MatrixXd& S, const Eigen::MatrixXd& R, const Eigen::MatrixXd& T) {
  const Eigen::MatrixXd Sc = S - R.transpose() * T.partialPivLu().solve(R);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (Sc + Sc.transpose())).eigenvalues()[0];
}

/// True when the Schur complement is PSD to -1e-10.
inline bool schur_check(const Eigen::MatrixXd& S, const Eigen::MatrixXd& R, const Eigen::MatrixXd& T) {
  return schur_min_eigenvalue(S, R, T) >= -1e-10;
}

/// Growth rates of volume exchange between the m equal spheres of an equilibrium (reduction-based).
inline std::vector<double> volume_exchange_spectrum(const MaterialSet& ms, const EquilibriumState& eq) {
  return volume_exchange_spectrum(RipeningParams::at(ms, eq.thetaStar, eq.n()), eq.spheres.m(), eq.R());
}

}  // namespace twophase
