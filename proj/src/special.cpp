#include "bellsim/special.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace bellsim {

double reciprocal_gamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  if (x > 0.5) {
    const double lg = std::lgamma(x);
    return std::exp(-lg);
  }
  // Reflection: 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi.
  const double frac = x - std::floor(x);
  double s;
  if (frac == 0.5) {
    // sin(pi x) = (-1)^floor(x) exactly at half-integers.
    s = (static_cast<long long>(std::floor(x)) % 2 == 0) ? 1.0 : -1.0;
  } else {
    s = std::sin(std::numbers::pi * x);
  }
  return s * std::exp(std::lgamma(1.0 - x)) / std::numbers::pi;
}

std::vector<double> quadrature_wavefunctions(int nmax, double x) {
  if (nmax < 0 || nmax > 200) throw std::invalid_argument("quadrature_wavefunction: n must lie in [0, 200]");
  std::vector<double> psi(nmax + 1);
  psi[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
  if (nmax >= 1) psi[1] = std::sqrt(2.0) * x * psi[0];
  for (int n = 1; n < nmax; ++n) {
    psi[n + 1] = std::sqrt(2.0 / (n + 1)) * x * psi[n] - std::sqrt(static_cast<double>(n) / (n + 1)) * psi[n - 1];
  }
  return psi;
}

double quadrature_wavefunction(int n, double x) { return quadrature_wavefunctions(n, x).back(); }

QuadratureRule gauss_legendre_200(double a, double b) {
  using rule = boost::math::quadrature::gauss<double, 200>;
  const auto& abscissa = rule::abscissa();
  const auto& weights = rule::weights();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  QuadratureRule out;
  // Boost stores the non-negative half of a symmetric rule.
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    const double t = abscissa[i];
    if (t == 0.0) {
      out.nodes.push_back(mid);
      out.weights.push_back(half * weights[i]);
      continue;
    }
    out.nodes.push_back(mid - half * t);
    out.weights.push_back(half * weights[i]);
    out.nodes.push_back(mid + half * t);
    out.weights.push_back(half * weights[i]);
  }
  return out;
}

}  // namespace bellsim
