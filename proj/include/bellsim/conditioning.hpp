#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bellsim/gaussian.hpp"

namespace bellsim {

/// One Gaussian of a signed mixture. `weight` multiplies the *normalized*
/// Gaussian sqrt(det P)/pi^n * exp(-r^T P r), so the weights of a valid
/// mixture sum to one.
struct MixtureTerm {
  double weight;
  Matrix precision;
};

/// Wigner function of a conditionally prepared non-Gaussian state, written
/// as a signed sum of zero-mean Gaussians.
class SignedGaussianMixture {
 public:
  SignedGaussianMixture(int n_modes, std::vector<MixtureTerm> terms, double success_prob);

  int n_modes() const { return n_modes_; }
  const std::vector<MixtureTerm>& terms() const { return terms_; }
  double success_prob() const { return success_prob_; }

  /// Prefactor of exp(-r^T P_j r) in the Wigner function.
  double amplitude(std::size_t j) const;
  /// Sum of amplitude_j * pi^n / sqrt(det P_j); one for a normalized state.
  double normalization() const;

  double wigner(const Vector& r) const;

  /// Reduced mixture on the listed modes, in the given order.
  SignedGaussianMixture marginal(std::span<const int> modes) const;

 private:
  int n_modes_;
  std::vector<MixtureTerm> terms_;
  double success_prob_;
};

struct TapSpec {
  int signal_mode;
  double transmittance;
  double eta_pd = 1.0;
};

/// Homodyne-side imperfections; electronic noise is in shot-noise units.
struct DetectionModel {
  double eta_bhd = 1.0;
  double electronic_noise = 0.0;
};

/// A Gaussian state over signal modes followed by ancilla modes, ready for
/// click detection on some of the ancillas.
struct ClickConditioning {
  GaussianState joint;
  int n_signal = 0;
  /// Photodetector efficiency per ancilla.
  std::vector<double> ancilla_eta;
  /// Passive ops applied after detector loss, mode indices count ancillas
  /// from zero.
  std::vector<SymplecticOp> ancilla_mixer;
  /// Ancillas whose detector must click; the others are traced out.
  std::vector<int> detected;
};

/// Conditions on clicks of all detected ancillas (POVM I - |0><0| each)
/// after homodyne and photodetector losses. Aborts with NumericalError on
/// singular matrices or a non-positive success probability.
SignedGaussianMixture condition_on_clicks(const ClickConditioning& setup, const DetectionModel& detection);

/// Photon subtraction by taps on `state`: one fresh vacuum ancilla per tap,
/// mixed on a beam splitter of the tap's transmittance, every ancilla
/// detected. The optional mixer acts on ancilla indices.
SignedGaussianMixture subtract_photons(const GaussianState& state, std::span<const TapSpec> taps,
                                       const DetectionModel& detection,
                                       const std::optional<SymplecticOp>& ancilla_mixer = std::nullopt);

double success_probability(const SignedGaussianMixture& mixture);

struct BivariateTerm {
  double weight;
  Eigen::Matrix2d gamma;
};

/// Joint density of two measured quadratures, a signed sum of normalized
/// bivariate Gaussians sqrt(det G)/pi * exp(-y^T G y).
class BivariateSignedMixture {
 public:
  explicit BivariateSignedMixture(std::vector<BivariateTerm> terms) : terms_(std::move(terms)) {}

  const std::vector<BivariateTerm>& terms() const { return terms_; }
  double density(double x, double y) const;
  double total_weight() const;

 private:
  std::vector<BivariateTerm> terms_;
};

/// Distribution of (x_theta on the first mode, x_phi on the second) obtained
/// by integrating out both momenta.
BivariateSignedMixture measured_marginal(const SignedGaussianMixture& mixture, double theta, double phi,
                                         std::pair<int, int> modes = {0, 1});

}  // namespace bellsim
