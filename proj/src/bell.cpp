#include "bellsim/bell.hpp"

#include <cmath>
#include <stdexcept>

#include "bellsim/special.hpp"
#include "quadrature_kernel.hpp"

namespace bellsim {

namespace {

constexpr double kCoefficientNormTolerance = 1e-10;
constexpr double kTruncationTail = 1e-14;
constexpr int kMaxTruncation = 60;

double mixture_correlation(std::span<const MixtureTerm> pair_terms, double theta, double phi) {
  double quadrant = 0.0;
  for (const auto& t : pair_terms) {
    const Eigen::Matrix4d p = t.precision;
    const auto ex = detail::quadrature_exponent(p, theta, phi);
    if (!(ex.momentum_det > 0.0)) throw NumericalError("correlation: singular momentum block");
    quadrant += t.weight * std::sqrt(ex.gamma.determinant()) / std::numbers::pi * orthant_integral(ex.gamma);
  }
  return 4.0 * quadrant - 1.0;
}

SignedGaussianMixture pair_mixture(const SignedGaussianMixture& mixture, std::pair<int, int> modes) {
  if (mixture.n_modes() < 2) throw std::invalid_argument("correlation: needs two signal modes");
  if (modes.first == modes.second) throw std::invalid_argument("correlation: modes must differ");
  if (mixture.n_modes() == 2 && modes.first == 0 && modes.second == 1) return mixture;
  const int pair[2] = {modes.first, modes.second};
  return mixture.marginal(pair);
}

}  // namespace

double chsh_combination(const Eigen::Matrix2d& e) { return e(0, 0) + e(0, 1) + e(1, 0) - e(1, 1); }

double orthant_integral(const Eigen::Matrix2d& gamma) {
  const double a = gamma(0, 0);
  const double b = gamma(1, 1);
  const double c = 0.5 * (gamma(0, 1) + gamma(1, 0));
  const double det = a * b - c * c;
  if (!(a > 0.0 && b > 0.0 && det > 0.0)) {
    throw std::invalid_argument("orthant_integral: exponent matrix is not positive definite");
  }
  const double root = std::sqrt(det);
  // pi/2 - arctan(c/root) written as a continuous atan2.
  return std::atan2(root, c) / (2.0 * root);
}

double correlation(const BivariateSignedMixture& joint) {
  double quadrant = 0.0;
  for (const auto& t : joint.terms()) {
    quadrant += t.weight * std::sqrt(t.gamma.determinant()) / std::numbers::pi * orthant_integral(t.gamma);
  }
  return 4.0 * quadrant - 1.0;
}

double correlation(const SignedGaussianMixture& mixture, double theta, double phi, std::pair<int, int> modes) {
  const SignedGaussianMixture pair = pair_mixture(mixture, modes);
  return mixture_correlation(pair.terms(), theta, phi);
}

BellResult bell_factor(const SignedGaussianMixture& mixture, const MeasurementSetting& settings,
                       std::pair<int, int> modes) {
  const SignedGaussianMixture pair = pair_mixture(mixture, modes);
  BellResult r;
  r.settings = settings;
  r.success_prob = mixture.success_prob();
  const double thetas[2] = {settings.theta1, settings.theta2};
  const double phis[2] = {settings.phi1, settings.phi2};
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) r.correlations(j, k) = mixture_correlation(pair.terms(), thetas[j], phis[k]);
  }
  r.S = chsh_combination(r.correlations);
  return r;
}

double munro_correlation(std::span<const double> coeffs, double angle_sum) {
  double norm = 0.0;
  for (double c : coeffs) norm += c * c;
  if (coeffs.empty() || std::abs(norm - 1.0) > kCoefficientNormTolerance) {
    throw std::invalid_argument("munro_correlation: coefficients are not normalized");
  }
  auto f = [](int n, int m) { return reciprocal_gamma(0.5 * (1 - n)) * reciprocal_gamma(-0.5 * m); };
  const int size = static_cast<int>(coeffs.size());
  double e = 0.0;
  for (int n = 1; n < size; ++n) {
    for (int m = n - 1; m >= 0; m -= 2) {  // only n + m odd survives
      const double d = f(n, m) - f(m, n);
      const double log_scale = (n + m) * std::log(2.0) - std::lgamma(n + 1.0) - std::lgamma(m + 1.0);
      const double k = 8.0 * std::numbers::pi * std::exp(log_scale) / ((n - m) * (n - m)) * d * d;
      e += coeffs[n] * coeffs[m] * k * std::cos((n - m) * angle_sum);
    }
  }
  return e;
}

BellResult munro_bell_factor(std::span<const double> coeffs, const MeasurementSetting& settings) {
  BellResult r;
  r.settings = settings;
  const double thetas[2] = {settings.theta1, settings.theta2};
  const double phis[2] = {settings.phi1, settings.phi2};
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) r.correlations(j, k) = munro_correlation(coeffs, thetas[j] + phis[k]);
  }
  r.S = chsh_combination(r.correlations);
  return r;
}

int munro_truncation(int photons_per_arm, double x) {
  for (int n = 0; n <= kMaxTruncation; ++n) {
    double growth = (n + 1.0) * (n + 1.0);
    if (photons_per_arm == 2) growth *= (n + 2.0) * (n + 2.0);
    if (growth * std::pow(x, 2 * n) < kTruncationTail) return n;
  }
  return kMaxTruncation;
}

PureStateModel pure_state_model(int photons_per_arm, double transmittance, double lambda) {
  if (photons_per_arm != 1 && photons_per_arm != 2) {
    throw std::invalid_argument("pure_state_model: photons per arm must be 1 or 2");
  }
  if (!(transmittance > 0.0 && transmittance <= 1.0)) {
    throw std::invalid_argument("pure_state_model: transmittance must lie in (0, 1]");
  }
  const double x = photons_per_arm == 1 ? transmittance * lambda : transmittance * transmittance * lambda;
  if (!(x >= 0.0 && x < 1.0) || lambda >= 1.0) {
    throw std::domain_error("pure_state_model: effective squeezing must lie in [0, 1)");
  }
  PureStateModel model;
  if (lambda == 0.0) return model;

  const int n_max = munro_truncation(photons_per_arm, x);
  double norm = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    double c = (n + 1.0) * std::pow(x, n);
    if (photons_per_arm == 2) c *= n + 2.0;
    model.coefficients.push_back(c);
    norm += c * c;
  }
  for (double& c : model.coefficients) c /= std::sqrt(norm);

  const double r = 1.0 - transmittance;
  const double l2 = lambda * lambda;
  const double x2 = x * x;
  if (photons_per_arm == 1) {
    model.probability = r * r * l2 * (1.0 - l2) * (1.0 + x2) / std::pow(1.0 - x2, 3);
  } else {
    model.probability = 2.0 * transmittance * transmittance * std::pow(r, 4) * l2 * l2 * (1.0 - l2) *
                        (1.0 + 10.0 * x2 + x2 * x2) / std::pow(1.0 - x2, 5);
  }
  return model;
}

}  // namespace bellsim
