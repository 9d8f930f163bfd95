#pragma once

// Closed-form constitutive function families. Every family exposes its value and
// the first three derivatives analytically; nothing here differentiates numerically.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "twophase/error.hpp"

namespace twophase {

/// Value and first three derivatives of a scalar function at one point.
struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

/// p(theta) = sum_k c_k theta^k. Covers the constant, affine and quadratic families.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

  static Polynomial constant(double c) { return Polynomial({c}); }
  static Polynomial affine(double c0, double c1) { return Polynomial({c0, c1}); }

  /// sigma(theta) = sigma0 (1 - theta^2 / thetaC^2)
  static Polynomial quadratic_surface_tension(double sigma0, double thetaC) {
    if (!(thetaC > 0.0)) throw Error(ErrorCode::InvalidArgument, "thetaC must be positive");
    return Polynomial({sigma0, 0.0, -sigma0 / (thetaC * thetaC)});
  }

  const std::vector<double>& coeffs() const { return coeffs_; }
  std::size_t degree() const { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }

  Jet at(double t) const {
    // Horner on value and (scaled) derivatives simultaneously.
    double p = 0.0, p1 = 0.0, p2 = 0.0, p3 = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      p3 = p3 * t + p2;
      p2 = p2 * t + p1;
      p1 = p1 * t + p;
      p = p * t + *it;
    }
    return Jet{p, p1, 2.0 * p2, 6.0 * p3};
  }

  double operator()(double t) const { return at(t).value; }

 private:
  std::vector<double> coeffs_;
};

/// psi(theta) = a - b theta - c theta (log theta - 1).
/// Gives eta = b + c log theta, eps = a + c theta, kappa = c.
class FreeEnergy {
 public:
  FreeEnergy() = default;
  FreeEnergy(double a, double b, double c) : a_(a), b_(b), c_(c) {}

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }

  Jet at(double t) const {
    if (!(t > 0.0)) throw Error(ErrorCode::TemperatureOutOfRange, "free energy needs theta > 0");
    const double lg = std::log(t);
    return Jet{a_ - b_ * t - c_ * t * (lg - 1.0), -b_ - c_ * lg, -c_ / t, c_ / (t * t)};
  }

  double operator()(double t) const { return at(t).value; }

 private:
  double a_ = 0.0;
  double b_ = 0.0;
  double c_ = 1.0;
};

}  // namespace twophase
