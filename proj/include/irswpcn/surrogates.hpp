// SPDX-License-Identifier: Apache-2.0
//
// Concave minorants used by the SCA solvers. Each is tight at its expansion
// point and never exceeds the function it approximates.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace irswpcn {

/// f(v, tau) = Re{linear^H v} - inverse_coef * tau^(-power) + constant.
struct SurrogateDescriptor {
  Eigen::VectorXcd linear;
  double inverse_coef = 0.0;
  double power = 1.0;
  double constant = 0.0;

  double operator()(const Eigen::VectorXcd& v, double tau) const {
    return linear.dot(v).real() - inverse_coef * std::pow(tau, -power) + constant;
  }
};

/// Lower bound of tau |q^H v|^4 at (w, t0):
///   4 t0 |q^H w|^2 Re{w^H Q v} - 2 (w^H Q w)^2 t0^{3/2} / sqrt(tau) - (w^H Q w)^2 t0,
/// with Q = q q^H.
inline SurrogateDescriptor surrogate_quartic(const Eigen::VectorXcd& q, const Eigen::VectorXcd& w, double t0) {
  if (!(t0 > 0.0)) throw std::invalid_argument("surrogate_quartic: t0 must be positive");
  const std::complex<double> a = q.dot(w);  // q^H w
  const double A = std::norm(a);
  SurrogateDescriptor f;
  // Re{w^H Q v} = Re{conj(a) q^H v} = Re{(a q)^H v}
  f.linear = (4.0 * t0 * A * a) * q;
  f.inverse_coef = 2.0 * A * A * t0 * std::sqrt(t0);
  f.power = 0.5;
  f.constant = -A * A * t0;
  return f;
}

/// Lower bound of tau |q^H v|^2 at (w, t0): 2 t0 Re{w^H Q v} - t0^2 (w^H Q w) / tau.
inline SurrogateDescriptor surrogate_dl_energy(const Eigen::VectorXcd& q, const Eigen::VectorXcd& w, double t0) {
  if (!(t0 > 0.0)) throw std::invalid_argument("surrogate_dl_energy: t0 must be positive");
  const std::complex<double> a = q.dot(w);
  SurrogateDescriptor f;
  f.linear = (2.0 * t0 * a) * q;
  f.inverse_coef = t0 * t0 * std::norm(a);
  f.power = 1.0;
  f.constant = 0.0;
  return f;
}

/// Tangent plane of exp(x + y) at (x_hat, y_hat).
struct ExpProductSurrogate {
  double x_hat = 0.0;
  double y_hat = 0.0;

  double scale() const { return std::exp(x_hat + y_hat); }
  double operator()(double x, double y) const { return scale() * (1.0 + x + y - x_hat - y_hat); }
};

inline ExpProductSurrogate surrogate_exp_product(double x_hat, double y_hat) { return {x_hat, y_hat}; }

}  // namespace irswpcn
