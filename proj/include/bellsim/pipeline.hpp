#pragma once

#include "bellsim/bell.hpp"
#include "bellsim/conditioning.hpp"
#include "bellsim/gaussian.hpp"

namespace bellsim {

/// The two-mode squeezed vacuum source with photon subtraction on both arms.
struct MainSchemeConfig {
  /// Taps per arm: 1 gives the four-term mixture, 2 the sixteen-term one.
  int photons_per_arm = 1;
  double transmittance = 0.99;
  double eta_pd = 1.0;
  DetectionModel detection;
  double v_noise = 0.0;
  ThermalNoiseUnits noise_units = ThermalNoiseUnits::QuadratureVariance;
};

/// Conditional state for squeezing lambda = tanh(s). Taps are ordered
/// A, B, A, B, ... so ancilla j taps mode j % 2.
SignedGaussianMixture main_scheme_state(const MainSchemeConfig& config, double lambda);

/// Squeezing expressed in dB, 10 log10 of the squeezed-quadrature variance
/// relative to the vacuum: lambda = 0.57 gives about 5.6 dB.
double squeezing_db(double lambda);

/// Noise variance (vacuum units) that sits `db` decibels below shot noise.
double db_below_shot_noise(double db);

}  // namespace bellsim
