#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bellsim/scheme_ir.hpp"

namespace bellsim {

using Complex = std::complex<double>;

/// Pure state on a dense truncated number basis over several modes.
/// Mode k holds 0..cutoffs[k] photons; the last mode varies fastest.
class FockState {
 public:
  /// Vacuum.
  explicit FockState(std::vector<int> cutoffs);
  FockState(std::vector<int> cutoffs, Eigen::VectorXcd amplitudes);

  int n_modes() const { return static_cast<int>(cutoffs_.size()); }
  const std::vector<int>& cutoffs() const { return cutoffs_; }
  const std::vector<std::size_t>& strides() const { return strides_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Eigen::VectorXcd& amplitudes() { return amplitudes_; }

  std::size_t index(std::span<const int> occupation) const;
  Complex amplitude(std::span<const int> occupation) const;
  double norm() const { return amplitudes_.norm(); }
  /// Throws std::domain_error for the zero vector.
  FockState normalized() const;

  /// Two-mode states only: amplitude matrix X(n_A, n_B).
  Eigen::MatrixXcd as_matrix() const;

 private:
  std::vector<int> cutoffs_;
  std::vector<std::size_t> strides_;
  Eigen::VectorXcd amplitudes_;
};

/// sqrt(1 - lambda^2) sum_n lambda^n |n, n>, normalized after truncation.
/// Rejects truncations whose neglected mass exceeds 1e-10.
FockState tms_fock(double lambda, int cutoff);

/// Applies the annihilation operator `times` times to `mode` and normalizes.
FockState annihilate(const FockState& state, int mode, int times = 1);

/// Two-mode density matrix; row index a * (cutoffs[1] + 1) + b for |a, b>.
struct FockDensity {
  std::array<int, 2> cutoffs{0, 0};
  Eigen::MatrixXcd rho;
  std::size_t dimension() const { return static_cast<std::size_t>(rho.rows()); }
};

FockDensity to_density(const FockState& two_mode);

/// Photon loss of transmission eta on each mode of a two-mode state.
FockDensity apply_loss(const FockDensity& state, double eta_a, double eta_b);

/// Probability density of measuring x_theta = x on mode A and x_phi = y on
/// mode B, with x_theta = x cos(theta) + p sin(theta).
double joint_density(const FockDensity& state, double theta, double phi, double x, double y);
double joint_density(const FockState& two_mode, double theta, double phi, double x, double y);

/// <sign(x_theta) sign(x_phi)>. The one-mode integrals of sign(x) psi_a psi_b
/// use 200-point Gauss-Legendre quadrature on each half-axis.
double fock_correlation(const FockDensity& state, double theta, double phi);
double fock_correlation(const FockState& two_mode, double theta, double phi);

BellResult fock_bell_factor(const FockDensity& state, const MeasurementSetting& settings);

struct FockSimulationOptions {
  int signal_cutoff = 12;
  int ancilla_cutoff = 12;
  /// Condition on exactly one photon per detector instead of a click.
  bool photon_number_resolving = false;
  /// Replaces the magnitude of every source squeezing by atanh(lambda).
  std::optional<double> lambda;
  double max_truncation_loss = 1e-6;
  std::size_t max_dimension = 4'000'000;
};

struct FockSchemeResult {
  FockDensity state;
  double probability = 0.0;
  /// Norm lost to the truncation while evolving the pure state.
  double truncation_loss = 0.0;
};

/// Brute-force simulation of a scheme in the number basis: sources prepare
/// exact squeezed states, beam splitters act as number-conserving unitaries,
/// detectors are diagonal POVMs, and homodyne loss is applied by Kraus sums.
/// Electronic noise and input thermal noise are not supported.
FockSchemeResult fock_simulate_scheme(const SchemeIR& ir, const FockSimulationOptions& options = {});

/// Beam splitter matrix element <p, q| U |n, m> (q = n + m - p), matching the
/// phase-space beam_splitter_op convention.
double beam_splitter_amplitude(double transmittance, int n, int m, int p);

}  // namespace bellsim
