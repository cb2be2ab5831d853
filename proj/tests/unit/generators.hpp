#pragma once

// Seeded random inputs for the property tests.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "bellsim/bell.hpp"
#include "bellsim/conditioning.hpp"
#include "bellsim/gaussian.hpp"

namespace gen {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>()(eng_); }
  double angle() { return uniform(-std::numbers::pi, std::numbers::pi); }
  bool coin() { return integer(0, 1) == 1; }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

/// Positive-definite 2x2 matrix with eigenvalues in [lo, hi].
inline Eigen::Matrix2d pd2(Rng& rng, double lo = 0.05, double hi = 5.0) {
  double t = rng.angle();
  Eigen::Matrix2d r;
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  Eigen::Vector2d ev(rng.uniform(lo, hi), rng.uniform(lo, hi));
  return r * ev.asDiagonal() * r.transpose();
}

/// Full symplectic matrix on n modes built from random beam splitters,
/// phase shifts and single-mode squeezers.
inline Eigen::MatrixXd symplectic(Rng& rng, int n, int layers = 4, double max_s = 0.8) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  auto embed = [&](const bellsim::SymplecticOp& op) {
    Eigen::MatrixXd full = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    const auto& modes = op.modes();
    for (std::size_t i = 0; i < modes.size(); ++i)
      for (std::size_t j = 0; j < modes.size(); ++j)
        full.block<2, 2>(2 * modes[i], 2 * modes[j]) = op.matrix().block<2, 2>(2 * i, 2 * j);
    s = full * s;
  };
  for (int l = 0; l < layers; ++l) {
    for (int m = 0; m < n; ++m) {
      embed(bellsim::phase_shift_op(rng.angle(), m));
      embed(bellsim::sm_squeezer_op(rng.uniform(-max_s, max_s), m));
    }
    if (n > 1) {
      int a = rng.integer(0, n - 1);
      int b = (a + rng.integer(1, n - 1)) % n;
      embed(bellsim::beam_splitter_op(rng.uniform(0.05, 0.95), a, b));
    }
  }
  return s;
}

/// Mixed Gaussian state: thermal occupations transformed by a random
/// symplectic matrix.
inline bellsim::GaussianState gaussian_state(Rng& rng, int n, double max_nu = 3.0) {
  Eigen::VectorXd nu(2 * n);
  for (int m = 0; m < n; ++m) nu(2 * m) = nu(2 * m + 1) = rng.uniform(1.0, max_nu);
  Eigen::MatrixXd s = symplectic(rng, n);
  Eigen::MatrixXd cov = s * nu.asDiagonal() * s.transpose();
  return bellsim::GaussianState(0.5 * (cov + cov.transpose()));
}

inline bellsim::MeasurementSetting setting(Rng& rng) {
  return {rng.angle(), rng.angle(), rng.angle(), rng.angle()};
}

/// Normalized real coefficients with a random sign pattern.
inline std::vector<double> unit_coefficients(Rng& rng, int size) {
  std::vector<double> c(size);
  double norm = 0.0;
  for (double& v : c) {
    v = rng.normal();
    norm += v * v;
  }
  for (double& v : c) v /= std::sqrt(norm);
  return c;
}

/// Rounding scale of a signed mixture: weights of size |w| cancel down to
/// one, so sums over terms carry errors of order eps * sum |w|.
inline double rounding(const bellsim::SignedGaussianMixture& mix) {
  double total = 0.0;
  for (const auto& t : mix.terms()) total += std::abs(t.weight);
  return 64.0 * 2.220446049250313e-16 * total;
}

}  // namespace gen
