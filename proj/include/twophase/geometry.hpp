#pragma once

#include <cmath>
#include <numbers>

#include "twophase/error.hpp"

namespace twophase {

inline void check_dimension(int n) {
  if (n != 2 && n != 3) throw Error(ErrorCode::InvalidArgument, "dimension must be 2 or 3");
}

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
  check_dimension(n);
  return n == 2 ? std::numbers::pi : 4.0 * std::numbers::pi / 3.0;
}

/// Surface measure of the unit sphere in R^n (2 pi for the circle, 4 pi for S^2).
inline double unit_sphere_area(int n) {
  check_dimension(n);
  return n == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
}

inline double ball_volume(int n, double R) { return unit_ball_volume(n) * std::pow(R, n); }
inline double sphere_area(int n, double R) { return unit_sphere_area(n) * std::pow(R, n - 1); }

/// Number of independent harmonics of degree l on the unit sphere in R^n.
inline int harmonic_multiplicity(int n, int l) {
  check_dimension(n);
  if (l < 0) throw Error(ErrorCode::InvalidArgument, "negative harmonic degree");
  if (n == 2) return l == 0 ? 1 : 2;
  return 2 * l + 1;
}

/// l(l+n-2): minus the Laplace-Beltrami eigenvalue on the unit sphere.
inline double lb_symbol(int n, int l) { return static_cast<double>(l) * (l + n - 2); }

/// Laplace-Beltrami eigenvalue on the sphere of radius R: -l(l+n-2)/R^2.
inline double laplace_beltrami_eigenvalue(int n, int l, double R) { return -lb_symbol(n, l) / (R * R); }

/// Symbol a_l of A_Sigma = -(n-1)/R^2 - Delta_Sigma on degree-l harmonics.
inline double surface_operator_eig(int n, int l, double R) {
  check_dimension(n);
  if (!(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  return (lb_symbol(n, l) - (n - 1)) / (R * R);
}

/// Mean curvature constant of the equilibrium spheres, H_* = (n-1)/R_*.
/// The equilibrium pressure solve uses [[pi]] = sigma H_*; shape derivatives
/// use the geometric value H(Gamma) = -div nu = -H_*.
inline double curvature_constant(int n, double R) { return (n - 1) / R; }
inline double geometric_curvature(int n, double R) { return -curvature_constant(n, R); }

}  // namespace twophase
