#pragma once

#include <span>
#include <vector>

namespace bellsim {

/// 1/Gamma(x), an entire function: exactly zero at x = 0, -1, -2, ...
double reciprocal_gamma(double x);

/// Harmonic-oscillator eigenfunction psi_n(x) in the vacuum-variance-1/2
/// convention, psi_0(x) = pi^(-1/4) exp(-x^2/2). Valid for n <= 200.
double quadrature_wavefunction(int n, double x);

/// psi_0(x) ... psi_nmax(x) by the normalized three-term recurrence.
std::vector<double> quadrature_wavefunctions(int nmax, double x);

/// Nodes and weights of the 200-point Gauss-Legendre rule mapped to [a, b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre_200(double a, double b);

}  // namespace bellsim
