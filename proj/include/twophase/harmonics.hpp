#pragma once

// Real surface harmonics, orthonormal on the unit sphere. A coefficient vector holds all
// degrees 0..Lmax, degree l occupying harmonic_multiplicity(n, l) consecutive slots.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "twophase/geometry.hpp"

namespace twophase {

inline int harmonic_count(int n, int Lmax) {
  int c = 0;
  for (int l = 0; l <= Lmax; ++l) c += harmonic_multiplicity(n, l);
  return c;
}

/// Index of the first coefficient of degree l.
inline int harmonic_offset(int n, int l) {
  int c = 0;
  for (int k = 0; k < l; ++k) c += harmonic_multiplicity(n, k);
  return c;
}

/// Degree of each slot in a coefficient vector.
inline std::vector<int> harmonic_degrees(int n, int Lmax) {
  std::vector<int> deg;
  for (int l = 0; l <= Lmax; ++l)
    for (int k = 0; k < harmonic_multiplicity(n, l); ++k) deg.push_back(l);
  return deg;
}

/// n = 2: slot k of degree l is 1/sqrt(2 pi) (l = 0), cos(l phi)/sqrt(pi) (k = 0),
/// sin(l phi)/sqrt(pi) (k = 1). Angle theta is ignored.
/// n = 3: slot k maps to order m = k - l; m > 0 uses cos(m phi), m < 0 uses sin(|m| phi).
inline double real_harmonic(int n, int l, int k, double theta, double phi) {
  if (n == 2) {
    if (l == 0) return 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const double s = 1.0 / std::sqrt(std::numbers::pi);
    return k == 0 ? s * std::cos(l * phi) : s * std::sin(l * phi);
  }
  const int m = k - l;
  const unsigned am = static_cast<unsigned>(m < 0 ? -m : m);
  const double p = std::sph_legendre(static_cast<unsigned>(l), am, theta);
  if (m == 0) return p;
  return std::sqrt(2.0) * p * (m > 0 ? std::cos(m * phi) : std::sin(-m * phi));
}

/// Evaluates sum_c c_i Y_i at a point of the unit sphere.
inline double harmonic_sum(int n, const std::vector<double>& coeffs, double theta, double phi) {
  double s = 0.0;
  std::size_t i = 0;
  for (int l = 0; i < coeffs.size(); ++l)
    for (int k = 0; k < harmonic_multiplicity(n, l) && i < coeffs.size(); ++k, ++i)
      s += coeffs[i] * real_harmonic(n, l, k, theta, phi);
  return s;
}

/// int over the sphere of radius R of the function with these coefficients.
inline double harmonic_integral(int n, const std::vector<double>& coeffs, double R) {
  if (coeffs.empty()) return 0.0;
  return coeffs[0] * std::sqrt(unit_sphere_area(n)) * std::pow(R, n - 1);
}

/// Coefficient vector of the constant function c on the sphere.
inline std::vector<double> constant_harmonic(int n, int Lmax, double c) {
  std::vector<double> v(static_cast<std::size_t>(harmonic_count(n, Lmax)), 0.0);
  v[0] = c * std::sqrt(unit_sphere_area(n));
  return v;
}

}  // namespace twophase
