#include "bellsim/conditioning.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <numeric>

#include "quadrature_kernel.hpp"

namespace bellsim {

namespace {

constexpr double kNormalizationTolerance = 1e-9;
// Sum of |term| over the click probability. Four-click mixtures at weak
// squeezing cancel by ten orders of magnitude; beyond this the weights carry
// fewer than about five significant digits.
constexpr double kMaxCancellation = 1e11;

std::vector<int> quadrature_indices(std::span<const int> modes) {
  std::vector<int> idx;
  for (int m : modes) {
    idx.push_back(2 * m);
    idx.push_back(2 * m + 1);
  }
  return idx;
}

// Cholesky factor of a matrix that must be symmetric positive definite and
// reasonably conditioned; `what` names it in diagnostics.
Eigen::LLT<Matrix> checked_llt(const Matrix& m, const char* what) {
  if (condition_number(m) > kMaxConditionNumber) {
    throw NumericalError(std::string("condition_on_clicks: ill-conditioned ") + what);
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string("condition_on_clicks: ") + what + " is not positive definite");
  }
  return llt;
}

double log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

SignedGaussianMixture::SignedGaussianMixture(int n_modes, std::vector<MixtureTerm> terms, double success_prob)
    : n_modes_(n_modes), terms_(std::move(terms)), success_prob_(success_prob) {
  if (n_modes_ < 1) throw std::invalid_argument("SignedGaussianMixture: n_modes must be >= 1");
  if (terms_.empty()) throw std::invalid_argument("SignedGaussianMixture: no terms");
  if (!(success_prob_ > 0.0 && success_prob_ <= 1.0 + 1e-12)) {
    throw std::invalid_argument("SignedGaussianMixture: success probability outside (0, 1]");
  }
  for (const auto& t : terms_) {
    if (t.precision.rows() != 2 * n_modes_ || t.precision.cols() != 2 * n_modes_) {
      throw std::invalid_argument("SignedGaussianMixture: precision matrix has the wrong size");
    }
    if ((t.precision - t.precision.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
      throw std::invalid_argument("SignedGaussianMixture: precision matrix is not symmetric");
    }
  }
  double magnitude = 0.0;
  for (const auto& t : terms_) magnitude += std::abs(t.weight);
  const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * magnitude;
  if (std::abs(normalization() - 1.0) > kNormalizationTolerance + rounding) {
    throw std::invalid_argument("SignedGaussianMixture: weights do not sum to one");
  }
}

double SignedGaussianMixture::amplitude(std::size_t j) const {
  const auto& t = terms_.at(j);
  return t.weight * std::sqrt(t.precision.determinant()) / std::pow(std::numbers::pi, n_modes_);
}

double SignedGaussianMixture::normalization() const {
  return std::accumulate(terms_.begin(), terms_.end(), 0.0,
                         [](double acc, const MixtureTerm& t) { return acc + t.weight; });
}

double SignedGaussianMixture::wigner(const Vector& r) const {
  if (r.size() != 2 * n_modes_) throw std::invalid_argument("wigner: point has the wrong length");
  double w = 0.0;
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    w += amplitude(j) * std::exp(-r.dot(terms_[j].precision * r));
  }
  return w;
}

SignedGaussianMixture SignedGaussianMixture::marginal(std::span<const int> modes) const {
  std::vector<int> others;
  for (int m = 0; m < n_modes_; ++m) {
    if (std::find(modes.begin(), modes.end(), m) == modes.end()) others.push_back(m);
  }
  for (int m : modes) {
    if (m < 0 || m >= n_modes_) throw std::invalid_argument("marginal: mode out of range");
  }
  const auto keep = quadrature_indices(modes);
  const auto drop = quadrature_indices(others);
  std::vector<MixtureTerm> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) {
    Matrix p = t.precision(keep, keep);
    if (!drop.empty()) {
      const Matrix cross = t.precision(keep, drop);
      Eigen::LLT<Matrix> llt(t.precision(drop, drop));
      if (llt.info() != Eigen::Success) {
        throw NumericalError("marginal: traced block of a precision matrix is not positive definite");
      }
      p -= cross * llt.solve(cross.transpose());
      p = 0.5 * (p + p.transpose()).eval();
    }
    out.push_back({t.weight, std::move(p)});
  }
  return SignedGaussianMixture(static_cast<int>(modes.size()), std::move(out), success_prob_);
}

SignedGaussianMixture condition_on_clicks(const ClickConditioning& setup, const DetectionModel& detection) {
  const int n_total = setup.joint.n_modes();
  const int n_sig = setup.n_signal;
  const int n_anc = n_total - n_sig;
  if (n_sig < 1 || n_anc < 0) throw std::invalid_argument("condition_on_clicks: bad mode split");
  if (static_cast<int>(setup.ancilla_eta.size()) != n_anc) {
    throw std::invalid_argument("condition_on_clicks: one efficiency per ancilla required");
  }
  if (!(detection.eta_bhd > 0.0 && detection.eta_bhd <= 1.0)) {
    throw std::invalid_argument("condition_on_clicks: eta_bhd must lie in (0, 1]");
  }
  if (detection.electronic_noise < 0.0) {
    throw std::invalid_argument("condition_on_clicks: electronic noise must be >= 0");
  }
  for (double e : setup.ancilla_eta) {
    if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("condition_on_clicks: eta_pd must lie in (0, 1]");
  }

  std::vector<double> eta(n_total, detection.eta_bhd);
  std::vector<double> excess(n_total, detection.electronic_noise);
  for (int a = 0; a < n_anc; ++a) {
    eta[n_sig + a] = setup.ancilla_eta[a];
    excess[n_sig + a] = 0.0;
  }
  GaussianState out = apply_channel(setup.joint, local_noise_channel(eta, excess));
  for (const auto& op : setup.ancilla_mixer) {
    std::vector<int> shifted;
    for (int m : op.modes()) {
      if (m < 0 || m >= n_anc) throw std::invalid_argument("condition_on_clicks: mixer mode out of range");
      shifted.push_back(n_sig + m);
    }
    out = apply_symplectic(out, op.retarget(std::move(shifted)));
  }

  std::vector<int> kept(n_sig);
  std::iota(kept.begin(), kept.end(), 0);
  for (int a : setup.detected) {
    if (a < 0 || a >= n_anc) throw std::invalid_argument("condition_on_clicks: detected ancilla out of range");
    kept.push_back(n_sig + a);
  }
  const auto idx = quadrature_indices(kept);
  const Matrix gamma_out = out.cov()(idx, idx);

  const int k = static_cast<int>(setup.detected.size());
  if (k == 0) {
    auto llt = checked_llt(gamma_out, "output covariance");
    const auto d = gamma_out.rows();
    Matrix precision = llt.solve(Matrix::Identity(d, d));
    precision = 0.5 * (precision + precision.transpose()).eval();
    return SignedGaussianMixture(n_sig, {{1.0, std::move(precision)}}, 1.0);
  }

  const auto llt_out = checked_llt(gamma_out, "output covariance");
  const double log_det_gamma = log_det(llt_out);
  const auto d = gamma_out.rows();
  Matrix big_gamma = llt_out.solve(Matrix::Identity(d, d));
  big_gamma = 0.5 * (big_gamma + big_gamma.transpose()).eval();

  const int ds = 2 * n_sig;
  const int dc = 2 * k;
  const Matrix gamma_ab = big_gamma.topLeftCorner(ds, ds);
  const Matrix sigma = big_gamma.topRightCorner(ds, dc);
  const Matrix gamma_cd = big_gamma.bottomRightCorner(dc, dc);

  // Inclusion-exclusion over detector subsets: each click element is
  // I - |0><0|, and |0><0| has twice the Wigner weight of I/(2 pi).
  std::vector<double> contrib;
  std::vector<Matrix> precisions;
  contrib.reserve(std::size_t{1} << k);
  double p_g = 0.0;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    Matrix g_cd = gamma_cd;
    int bits = 0;
    for (int j = 0; j < k; ++j) {
      if (mask & (1u << j)) {
        g_cd(2 * j, 2 * j) += 1.0;
        g_cd(2 * j + 1, 2 * j + 1) += 1.0;
        ++bits;
      }
    }
    const auto llt_cd = checked_llt(g_cd, "ancilla precision block");
    Matrix g_ab = gamma_ab - sigma * llt_cd.solve(sigma.transpose());
    g_ab = 0.5 * (g_ab + g_ab.transpose()).eval();
    const auto llt_ab = checked_llt(g_ab, "conditional precision");
    const double q = std::pow(-2.0, bits);
    const double c = q * std::exp(-0.5 * (log_det_gamma + log_det(llt_cd) + log_det(llt_ab)));
    contrib.push_back(c);
    precisions.push_back(std::move(g_ab));
    p_g += c;
  }
  if (!(p_g > 0.0)) {
    throw NumericalError("condition_on_clicks: non-positive success probability " + std::to_string(p_g));
  }
  double magnitude = 0.0;
  for (double c : contrib) magnitude += std::abs(c);
  if (magnitude / p_g > kMaxCancellation) {
    throw NumericalError("condition_on_clicks: click probability lost to cancellation between terms");
  }

  std::vector<MixtureTerm> terms;
  terms.reserve(contrib.size());
  for (std::size_t j = 0; j < contrib.size(); ++j) {
    terms.push_back({contrib[j] / p_g, std::move(precisions[j])});
  }
  return SignedGaussianMixture(n_sig, std::move(terms), p_g);
}

SignedGaussianMixture subtract_photons(const GaussianState& state, std::span<const TapSpec> taps,
                                       const DetectionModel& detection,
                                       const std::optional<SymplecticOp>& ancilla_mixer) {
  const int n_sig = state.n_modes();
  const int k = static_cast<int>(taps.size());
  ClickConditioning setup{k > 0 ? direct_sum(state, vacuum(k)) : state, n_sig, {}, {}, {}};
  for (int j = 0; j < k; ++j) {
    const auto& tap = taps[j];
    if (tap.signal_mode < 0 || tap.signal_mode >= n_sig) {
      throw std::invalid_argument("subtract_photons: tap signal mode out of range");
    }
    setup.joint = apply_symplectic(setup.joint, beam_splitter_op(tap.transmittance, tap.signal_mode, n_sig + j));
    setup.ancilla_eta.push_back(tap.eta_pd);
    setup.detected.push_back(j);
  }
  if (ancilla_mixer) setup.ancilla_mixer.push_back(*ancilla_mixer);
  return condition_on_clicks(setup, detection);
}

double success_probability(const SignedGaussianMixture& mixture) { return mixture.success_prob(); }

double BivariateSignedMixture::density(double x, double y) const {
  double p = 0.0;
  for (const auto& t : terms_) {
    const double q = t.gamma(0, 0) * x * x + 2.0 * t.gamma(0, 1) * x * y + t.gamma(1, 1) * y * y;
    p += t.weight * std::sqrt(t.gamma.determinant()) / std::numbers::pi * std::exp(-q);
  }
  return p;
}

double BivariateSignedMixture::total_weight() const {
  return std::accumulate(terms_.begin(), terms_.end(), 0.0,
                         [](double acc, const BivariateTerm& t) { return acc + t.weight; });
}

BivariateSignedMixture measured_marginal(const SignedGaussianMixture& mixture, double theta, double phi,
                                         std::pair<int, int> modes) {
  if (mixture.n_modes() < 2) throw std::invalid_argument("measured_marginal: needs two signal modes");
  const int pair[2] = {modes.first, modes.second};
  if (pair[0] == pair[1]) throw std::invalid_argument("measured_marginal: modes must differ");
  const SignedGaussianMixture reduced = mixture.marginal(pair);
  std::vector<BivariateTerm> out;
  for (const auto& t : reduced.terms()) {
    const Eigen::Matrix4d p = t.precision;
    const auto ex = detail::quadrature_exponent(p, theta, phi);
    if (!(ex.momentum_det > 0.0)) throw NumericalError("measured_marginal: singular momentum block");
    out.push_back({t.weight, ex.gamma});
  }
  return BivariateSignedMixture(std::move(out));
}

}  // namespace bellsim
