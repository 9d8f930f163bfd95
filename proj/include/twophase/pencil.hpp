#pragma once

// Discretized per-mode eigenvalue problem (A + lambda B) z = 0 of the linearization at a single
// concentric sphere, with the direct spectrum, kernel and semi-simplicity checks at lambda = 0.
//
// Unknowns for l >= 1: [U1, U2, P1, A, B, T1, T2, h]; the surface temperature is T1 at r = R.
// For l = 0 the velocity vanishes and the unknowns are [P1, P2, T1, T2, h].

#include <algorithm>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "twophase/spectral.hpp"

namespace twophase {

struct PencilColumns {
  int u1 = -1, u2 = -1;  // radial velocity blocks (absent for l = 0)
  int p = 0;             // first pressure coefficient
  int t1 = 0, t2 = 0;    // temperature blocks
  int h = 0;             // interface displacement
  int size = 0;
};

struct ModeOperators {
  int n = 3;
  int l = 0;
  int N1 = 0, N2 = 0;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  PencilColumns cols;
};

namespace detail {

/// Heat collocation rows, Neumann wall row, temperature continuity and the surface energy row.
/// Returns the index of the surface energy row so that callers can add velocity couplings.
inline int heat_rows(const LinearizationCoefficients& c, int l, const ModeGrid& g, const PencilColumns& col,
                     Eigen::MatrixXd& A, Eigen::MatrixXd& B, int row) {
  const double L = lb_symbol(c.n, l);
  const int N1 = g.t_in.size(), N2 = g.out.size();
  const Eigen::MatrixXd Hin = heat_operator(g.t_in.r, g.t_in.D1, g.t_in.D2, c.d1, c.n, L);
  const Eigen::MatrixXd Hout = heat_operator(g.out.r, g.out.D1, g.out.D2, c.d2, c.n, L);
  for (int i = 1; i < N1; ++i, ++row) {
    A.block(row, col.t1, 1, N1) = Hin.row(i);
    B(row, col.t1 + i) = c.rho1 * c.kappa1;
  }
  for (int i = 1; i + 1 < N2; ++i, ++row) {
    A.block(row, col.t2, 1, N2) = Hout.row(i);
    B(row, col.t2 + i) = c.rho2 * c.kappa2;
  }
  A.block(row++, col.t2, 1, N2) = g.out.D1.row(0);
  A(row, col.t2 + N2 - 1) = 1.0;
  A(row++, col.t1) = -1.0;
  // lambda kG T - dG Delta_S T - [[d dT/dr]] (+ velocity terms added by the caller)
  A(row, col.t1) += c.dGamma * L / (c.R * c.R);
  A.block(row, col.t2, 1, N2) -= c.d2 * g.out.D1.row(N2 - 1);
  A.block(row, col.t1, 1, N1) += c.d1 * g.t_in.D1.row(0);
  B(row, col.t1) = c.kappaG;
  return row;
}

}  // namespace detail

inline ModeOperators assemble_pencil(const LinearizationCoefficients& c, int l, const RadialDiscretization& disc = {}) {
  const detail::ModeGrid g = detail::mode_grid(c, l, disc);
  ModeOperators m;
  m.n = c.n;
  m.l = l;
  m.N1 = g.u_in.size();
  m.N2 = g.out.size();
  const double a = surface_operator_eig(c.n, l, c.R);
  const double H = c.HStar();
  PencilColumns& col = m.cols;

  if (l == 0) {
    col.p = 0;
    col.t1 = 2;
    col.t2 = col.t1 + m.N1;
    col.h = col.t2 + m.N2;
    col.size = col.h + 1;
    m.A = Eigen::MatrixXd::Zero(col.size, col.size);
    m.B = Eigen::MatrixXd::Zero(col.size, col.size);
    int row = 0;
    // [[P]] + sigma a_0 h - theta sigma' H T_S = 0
    m.A(row, col.p + 1) = 1.0;
    m.A(row, col.p) = -1.0;
    m.A(row, col.h) = c.sigma * a;
    m.A(row++, col.t1) = -c.theta * c.dsigma * H;
    // [[P/rho]] + l_* T_S = 0
    m.A(row, col.p + 1) = 1.0 / c.rho2;
    m.A(row, col.p) = -1.0 / c.rho1;
    m.A(row++, col.t1) = c.latent;
    row = detail::heat_rows(c, l, g, col, m.A, m.B, row) + 1;
    m.B(row, col.h) = 1.0;
    return m;
  }

  const detail::StokesLayout lay{m.N1, m.N2};
  col.u1 = lay.u1();
  col.u2 = lay.u2();
  col.p = lay.p1();
  col.t1 = lay.size();
  col.t2 = col.t1 + m.N1;
  col.h = col.t2 + m.N2;
  col.size = col.h + 1;
  m.A = Eigen::MatrixXd::Zero(col.size, col.size);
  m.B = Eigen::MatrixXd::Zero(col.size, col.size);
  const detail::StokesTraces tr = detail::stokes_traces(c, l, g, col.size);
  int row = detail::stokes_rows(c, l, g, tr, m.A, &m.B);
  // tangential stress: -[[mu (V' - V/r + U/r)]] - theta sigma' T_S / R = 0
  m.A.row(row) = -(tr.tau2 - tr.tau1);
  m.A(row++, col.t1) += -c.theta * c.dsigma / c.R;
  // normal stress: -2[[mu U']] + [[P]] + sigma a_l h - theta sigma' H T_S = 0
  m.A.row(row) = -(tr.Tn2 - tr.Tn1);
  m.A(row, col.h) += c.sigma * a;
  m.A(row++, col.t1) += -c.theta * c.dsigma * H;
  // Gibbs-Thomson: -2[[mu U'/rho]] + [[P/rho]] + l_* T_S + gamma j = 0
  m.A.row(row) = -(tr.Tn2 / c.rho2 - tr.Tn1 / c.rho1) + c.gamma * tr.j;
  m.A(row++, col.t1) += c.latent;
  const int srow = detail::heat_rows(c, l, g, col, m.A, m.B, row);
  // -(l/theta) j - sigma' div_S u_S with div_S u_S = -L V(R)/R - H lambda h and lambda h = V_hat
  m.A.row(srow) += -(c.latent / c.theta) * tr.j + (c.dsigma * lb_symbol(c.n, l) / c.R) * tr.V1 +
                   (c.dsigma * H) * tr.vhat;
  row = srow + 1;
  m.A.row(row) = -tr.vhat;
  m.B(row, col.h) = 1.0;
  return m;
}

inline constexpr double kInfiniteEigenvalue = 1e10;
inline constexpr double kNullTolerance = 1e-11;

namespace detail {

/// Row scaling by max(|A_i|, |B_i|); leaves the pencil's eigenvalues unchanged.
inline void equilibrate_rows(Eigen::MatrixXd& A, Eigen::MatrixXd& B) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double s = std::max(A.row(i).cwiseAbs().maxCoeff(), B.row(i).cwiseAbs().maxCoeff());
    if (s > 0.0) {
      A.row(i) /= s;
      B.row(i) /= s;
    }
  }
}

}  // namespace detail

/// Finite generalized eigenvalues lambda of (A + lambda B) z = 0.
inline std::vector<std::complex<double>> pencil_eigenvalues(Eigen::MatrixXd A, Eigen::MatrixXd B) {
  detail::equilibrate_rows(A, B);
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges;
  ges.compute(-A, B, false);
  if (ges.info() != Eigen::Success) throw Error(ErrorCode::EigensolveFailure, "QZ iteration failed");
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double beta = ges.betas()[i];
    if (beta == 0.0) continue;
    const std::complex<double> lam = ges.alphas()[i] / beta;
    if (std::isfinite(lam.real()) && std::isfinite(lam.imag()) && std::abs(lam) < kInfiniteEigenvalue)
      out.push_back(lam);
  }
  return out;
}

struct ModeSpectrum {
  int n = 3;
  int l = 0;
  std::vector<std::complex<double>> physical;        // stable under node doubling, by Re descending
  std::vector<std::complex<double>> discretization;  // not resolved at this resolution
};

inline bool by_real_part_desc(const std::complex<double>& a, const std::complex<double>& b) {
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

/// Generalized eigenvalues of the mode pencil. An eigenvalue is reported as physical when the
/// doubled resolution has one within 1e-3 max(|lambda|, 1); count < 0 keeps all of them.
inline ModeSpectrum direct_mode_spectrum(const LinearizationCoefficients& c, int l,
                                         const RadialDiscretization& disc = {}, int count = -1) {
  const ModeOperators p1 = assemble_pencil(c, l, disc);
  const ModeOperators p2 = assemble_pencil(c, l, disc.doubled());
  std::vector<std::complex<double>> e1 = pencil_eigenvalues(p1.A, p1.B);
  const std::vector<std::complex<double>> e2 = pencil_eigenvalues(p2.A, p2.B);
  std::sort(e1.begin(), e1.end(), by_real_part_desc);
  ModeSpectrum s;
  s.n = c.n;
  s.l = l;
  for (const auto& lam : e1) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& mu : e2) best = std::min(best, std::abs(lam - mu));
    if (best <= 1e-3 * std::max(std::abs(lam), 1.0)) {
      if (count < 0 || static_cast<int>(s.physical.size()) < count) s.physical.push_back(lam);
    } else {
      s.discretization.push_back(lam);
    }
  }
  return s;
}

/// Dimension of the numerical null space of the row-equilibrated A.
inline int pencil_nullity(Eigen::MatrixXd A, double tol = kNullTolerance) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  detail::equilibrate_rows(A, B);
  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(A).singularValues();
  int k = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] <= tol * sv[0]) ++k;
  return k;
}

/// Zero is a semi-simple eigenvalue of (A + lambda B) z = 0 when no Jordan chain A z1 = B z0 exists:
/// B is injective on ker(A) and the algebraic multiplicity of 0 equals dim ker(A). The multiplicity
/// is the number of finite eigenvalues with |lambda| < clusterRadius; round-off splits a Jordan
/// block into eigenvalues of size sqrt(eps)-ish, which stay inside the cluster. A pencil without
/// zero eigenvalue passes.
inline bool pencil_semisimple_at_zero(Eigen::MatrixXd A, Eigen::MatrixXd B, double nullTol = kNullTolerance,
                                      double clusterRadius = 1e-3) {
  detail::equilibrate_rows(A, B);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  int k = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] <= nullTol * sv[0]) ++k;
  if (k == 0) return true;
  const Eigen::MatrixXd G = B * svd.matrixV().rightCols(k);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) return false;
  int cluster = 0;
  for (const auto& lam : pencil_eigenvalues(A, B))
    if (std::abs(lam) < clusterRadius) ++cluster;
  return cluster == k;
}

struct KernelReport {
  int dimension = 0;
  std::vector<int> nullity;  // per degree l = 0..Lmax (one harmonic of each degree)
  double thetaResidual = 0.0;
  double hResidual = 0.0;
  double translationResidual = 0.0;
};

namespace detail {

inline double relative_residual(const Eigen::MatrixXd& A, const Eigen::VectorXd& z) {
  const double nA = A.cwiseAbs().rowwise().sum().maxCoeff();
  return (A * z).cwiseAbs().maxCoeff() / (nA * z.cwiseAbs().maxCoeff());
}

}  // namespace detail

/// Candidate kernel elements: constant temperature and constant h (l = 0, with the compensating
/// pressures) and pure h in each degree-one direction; total dimension summed over l <= Lmax.
inline KernelReport kernel_check(const LinearizationCoefficients& c, const RadialDiscretization& disc = {},
                                 int Lmax = 6) {
  KernelReport rep;
  const ModeOperators m0 = assemble_pencil(c, 0, disc);
  const ModeOperators m1 = assemble_pencil(c, 1, disc);

  // [[P]] = a, [[P/rho]] = b with P1 = (b - a/rho2) / (1/rho2 - 1/rho1), P2 = P1 + a.
  auto pressures = [&](double a, double b) {
    const double p1 = (b - a / c.rho2) / c.inv_rho_jump();
    return std::pair{p1, p1 + a};
  };
  Eigen::VectorXd eT = Eigen::VectorXd::Zero(m0.cols.size);
  eT.segment(m0.cols.t1, m0.N1 + m0.N2).setOnes();
  const auto [pt1, pt2] = pressures(c.theta * c.dsigma * c.HStar(), -c.latent);
  eT[m0.cols.p] = pt1;
  eT[m0.cols.p + 1] = pt2;
  rep.thetaResidual = detail::relative_residual(m0.A, eT);

  Eigen::VectorXd eH = Eigen::VectorXd::Zero(m0.cols.size);
  eH[m0.cols.h] = 1.0;
  const auto [ph1, ph2] = pressures(-c.sigma * surface_operator_eig(c.n, 0, c.R), 0.0);
  eH[m0.cols.p] = ph1;
  eH[m0.cols.p + 1] = ph2;
  rep.hResidual = detail::relative_residual(m0.A, eH);

  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(m1.cols.size);
  e1[m1.cols.h] = 1.0;
  rep.translationResidual = detail::relative_residual(m1.A, e1);

  for (int l = 0; l <= Lmax; ++l) {
    const int k = pencil_nullity(l == 0 ? m0.A : l == 1 ? m1.A : assemble_pencil(c, l, disc).A);
    rep.nullity.push_back(k);
    rep.dimension += k * harmonic_multiplicity(c.n, l);
  }
  return rep;
}

/// Semi-simplicity of lambda = 0 in the sectors where it occurs (l = 0 and l = 1).
inline bool semisimplicity_check(const LinearizationCoefficients& c, const RadialDiscretization& disc = {}) {
  for (int l : {0, 1}) {
    const ModeOperators m = assemble_pencil(c, l, disc);
    if (!pencil_semisimple_at_zero(m.A, m.B)) return false;
  }
  return true;
}

}  // namespace twophase
