#pragma once

// Chebyshev Gauss-Lobatto collocation on an interval, plus the parity-folded variant on
// (0, R] used for regular solutions at the origin.

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "twophase/error.hpp"

namespace twophase {

namespace detail {

/// Gauss-Lobatto points cos(pi j / (M-1)) on [-1, 1], descending.
inline Eigen::VectorXd lobatto_points(int M) {
  Eigen::VectorXd x(M);
  for (int j = 0; j < M; ++j) x[j] = std::cos(std::numbers::pi * j / (M - 1));
  return x;
}

/// First-derivative matrix on the reference Lobatto grid; diagonal by negative row sums.
inline Eigen::MatrixXd lobatto_diff(int M) {
  const Eigen::VectorXd x = lobatto_points(M);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(M, M);
  auto c = [M](int j) { return (j == 0 || j == M - 1 ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0); };
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      if (i != j) D(i, j) = c(i) / c(j) / (x[i] - x[j]);
    }
    D(i, i) = -D.row(i).sum();
  }
  return D;
}

/// int_{x0}^{1} T_k(x) dx for k = 0..K.
inline Eigen::VectorXd chebyshev_moments(int K, double x0) {
  const double t0 = std::acos(x0);
  Eigen::VectorXd I(K + 1);
  for (int k = 0; k <= K; ++k) {
    if (k == 1) {
      I[k] = (1.0 - std::cos(2.0 * t0)) / 4.0;
    } else {
      I[k] = 0.5 * ((1.0 - std::cos((1.0 + k) * t0)) / (1.0 + k) + (1.0 - std::cos((1.0 - k) * t0)) / (1.0 - k));
    }
  }
  return I;
}

/// Weights w_j = int_{x0}^{1} l_j(x) dx for the Lagrange basis of the reference Lobatto grid.
inline Eigen::VectorXd lobatto_weights(int M, double x0) {
  const int K = M - 1;
  const Eigen::VectorXd x = lobatto_points(M);
  const Eigen::VectorXd I = chebyshev_moments(K, x0);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(M);
  for (int j = 0; j < M; ++j) {
    const double cj = (j == 0 || j == K) ? 2.0 : 1.0;
    double s = 0.0;
    for (int k = 0; k <= K; ++k) {
      const double ck = (k == 0 || k == K) ? 2.0 : 1.0;
      s += std::cos(k * std::acos(x[j])) * I[k] / ck;
    }
    w[j] = 2.0 * s / (K * cj);
  }
  return w;
}

}  // namespace detail

/// Collocation grid on [a, b]. nodes[0] = b, nodes[N-1] = a.
struct ChebGrid {
  Eigen::VectorXd r;
  Eigen::MatrixXd D1;
  Eigen::MatrixXd D2;
  Eigen::VectorXd w;  // quadrature weights for int_a^b

  int size() const { return static_cast<int>(r.size()); }
};

inline ChebGrid cheb_interval(double a, double b, int N) {
  if (N < 3 || !(b > a)) throw Error(ErrorCode::InvalidArgument, "cheb_interval needs N >= 3 and b > a");
  const double half = 0.5 * (b - a);
  const Eigen::VectorXd x = detail::lobatto_points(N);
  ChebGrid g;
  g.r = (0.5 * (a + b)) * Eigen::VectorXd::Ones(N) + half * x;
  g.D1 = detail::lobatto_diff(N) / half;
  g.D2 = g.D1 * g.D1;
  g.w = half * detail::lobatto_weights(N, -1.0);
  return g;
}

/// Folded grid on (0, R]: the positive half of a 2N-point Lobatto grid on [-R, R],
/// for functions of parity p (f(-r) = p f(r)). nodes[0] = R; r = 0 is never a node.
/// Weights integrate g over [0, R] for integrands of parity q (supplied per call).
struct FoldedGrid {
  Eigen::VectorXd r;
  Eigen::MatrixXd D1;
  Eigen::MatrixXd D2;
  int parity = 1;
  Eigen::VectorXd w_half;  // full-grid weights for int_0^R, length 2N

  int size() const { return static_cast<int>(r.size()); }

  /// Weights for int_0^R g(r) dr when g has parity q, acting on g at the N folded nodes.
  Eigen::VectorXd weights(int q) const {
    const int N = size();
    const int M = 2 * N;
    Eigen::VectorXd w(N);
    for (int i = 0; i < N; ++i) w[i] = w_half[i] + q * w_half[M - 1 - i];
    return w;
  }
};

inline FoldedGrid cheb_folded(double R, int N, int parity) {
  if (N < 3 || !(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "cheb_folded needs N >= 3 and R > 0");
  const int M = 2 * N;
  const Eigen::VectorXd x = detail::lobatto_points(M);
  const Eigen::MatrixXd D = detail::lobatto_diff(M) / R;
  const Eigen::MatrixXd DD = D * D;
  FoldedGrid g;
  g.parity = parity;
  g.r = R * x.head(N);
  g.D1.resize(N, N);
  g.D2.resize(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      g.D1(i, j) = D(i, j) + parity * D(i, M - 1 - j);
      g.D2(i, j) = DD(i, j) + parity * DD(i, M - 1 - j);
    }
  }
  g.w_half = R * detail::lobatto_weights(M, 0.0);
  return g;
}

}  // namespace twophase
