#pragma once

#include <functional>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bellsim/conditioning.hpp"

namespace bellsim {

/// Alice's phases theta1, theta2 and Bob's phi1, phi2 (radians).
struct MeasurementSetting {
  double theta1 = 0.0;
  double theta2 = std::numbers::pi / 2;
  double phi1 = -std::numbers::pi / 4;
  double phi2 = std::numbers::pi / 4;

  static MeasurementSetting canonical() { return {}; }
  bool operator==(const MeasurementSetting&) const = default;
};

struct BellResult {
  /// correlations(j, k) = E(theta_{j+1}, phi_{k+1}).
  Eigen::Matrix2d correlations = Eigen::Matrix2d::Zero();
  double S = 0.0;
  double success_prob = 1.0;
  MeasurementSetting settings;
};

/// Combines four correlations as E11 + E12 + E21 - E22.
double chsh_combination(const Eigen::Matrix2d& e);

/// Integral of exp(-a y1^2 - b y2^2 - 2 c y1 y2) over the positive quadrant,
/// for gamma = [[a, c], [c, b]] positive definite.
double orthant_integral(const Eigen::Matrix2d& gamma);

/// Sign-binned correlation <sign(x) sign(y)> of a bivariate signed mixture.
double correlation(const BivariateSignedMixture& joint);

/// Sign-binned correlation of x_theta on `modes.first` and x_phi on
/// `modes.second`.
double correlation(const SignedGaussianMixture& mixture, double theta, double phi,
                   std::pair<int, int> modes = {0, 1});

BellResult bell_factor(const SignedGaussianMixture& mixture, const MeasurementSetting& settings,
                       std::pair<int, int> modes = {0, 1});

/// Sign-binned correlation of sum_n c_n |n, n> as a function of the angle
/// sum theta + phi. Throws if the coefficients are not normalized.
double munro_correlation(std::span<const double> coeffs, double angle_sum);

/// Bell factor of a photon-number-correlated pure state.
BellResult munro_bell_factor(std::span<const double> coeffs, const MeasurementSetting& settings);

/// Ideal photon-number-resolving subtraction of `photons_per_arm` (1 or 2)
/// photons from each arm of a two-mode squeezed vacuum.
struct PureStateModel {
  std::vector<double> coefficients;
  double probability = 0.0;
};
PureStateModel pure_state_model(int photons_per_arm, double transmittance, double lambda);

/// Fock truncation for the pure-state model: smallest N whose neglected
/// coefficient mass is below 1e-14, capped at 60.
int munro_truncation(int photons_per_arm, double effective_lambda);

}  // namespace bellsim
