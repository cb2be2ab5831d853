#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace bellsim::detail {

// Exponent matrix of the (x_theta, x_phi) marginal of exp(-r^T P r) for a
// two-mode precision P, after integrating out both rotated momenta.
// Also returns det of the momentum block, needed for the prefactor.
struct QuadratureExponent {
  Eigen::Matrix2d gamma;
  double momentum_det;
};

inline QuadratureExponent quadrature_exponent(const Eigen::Matrix4d& precision, double theta, double phi) {
  Eigen::Matrix4d shift = Eigen::Matrix4d::Zero();
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(phi), sp = std::sin(phi);
  shift(0, 0) = ct;
  shift(0, 1) = st;
  shift(1, 0) = -st;
  shift(1, 1) = ct;
  shift(2, 2) = cp;
  shift(2, 3) = sp;
  shift(3, 2) = -sp;
  shift(3, 3) = cp;
  const Eigen::Matrix4d rotated = shift * precision * shift.transpose();

  // x-before-p reordering: x indices {0, 2}, p indices {1, 3}.
  Eigen::Matrix2d a, b, c;
  a << rotated(0, 0), rotated(0, 2), rotated(2, 0), rotated(2, 2);
  b << rotated(1, 1), rotated(1, 3), rotated(3, 1), rotated(3, 3);
  c << rotated(0, 1), rotated(0, 3), rotated(2, 1), rotated(2, 3);

  QuadratureExponent out;
  out.momentum_det = b.determinant();
  Eigen::Matrix2d g = a - c * b.inverse() * c.transpose();
  out.gamma = 0.5 * (g + g.transpose());
  return out;
}

}  // namespace bellsim::detail
