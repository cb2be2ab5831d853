#include "bellsim/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace bellsim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

std::vector<int> quadrature_indices(std::span<const int> modes) {
  std::vector<int> idx;
  idx.reserve(2 * modes.size());
  for (int m : modes) {
    idx.push_back(2 * m);
    idx.push_back(2 * m + 1);
  }
  return idx;
}

bool is_symmetric(const Matrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

// Smallest eigenvalue of the Hermitian matrix m + i*omega.
double min_eigenvalue_with_form(const Matrix& m, const Matrix& omega) {
  Eigen::MatrixXcd h = m.cast<std::complex<double>>();
  h += std::complex<double>(0.0, 1.0) * omega.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

Matrix symplectic_form(int n_modes) {
  require(n_modes >= 1, "symplectic_form: n_modes must be >= 1");
  Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
  for (int k = 0; k < n_modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

Vector symplectic_eigenvalues(const Matrix& cov) {
  require(cov.rows() == cov.cols() && cov.rows() % 2 == 0 && cov.rows() > 0,
          "symplectic_eigenvalues: covariance must be 2n x 2n");
  const int n = static_cast<int>(cov.rows() / 2);
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("symplectic_eigenvalues: covariance is not positive definite");
  }
  const Matrix l = llt.matrixL();
  const Matrix a = l.transpose() * symplectic_form(n) * l;
  const Eigen::MatrixXcd h = std::complex<double>(0.0, 1.0) * a.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  // Eigenvalues come in +-nu pairs; keep the upper half.
  Vector nu = es.eigenvalues().tail(n);
  std::sort(nu.data(), nu.data() + n);
  return nu;
}

GaussianState::GaussianState(Matrix cov) : GaussianState(cov, Vector::Zero(cov.rows())) {}

GaussianState::GaussianState(Matrix cov, Vector disp) : cov_(std::move(cov)), disp_(std::move(disp)) {
  require(cov_.rows() > 0 && cov_.rows() % 2 == 0 && cov_.rows() == cov_.cols(),
          "GaussianState: covariance must be 2n x 2n");
  require(disp_.size() == cov_.rows(), "GaussianState: displacement length must be 2n");
  require(is_symmetric(cov_, kSymmetryTolerance), "GaussianState: covariance is not symmetric");
  if (min_eigenvalue_with_form(cov_, symplectic_form(n_modes())) < -kUncertaintyTolerance) {
    throw std::invalid_argument("GaussianState: covariance violates the uncertainty relation");
  }
}

GaussianState::GaussianState(Unchecked, Matrix cov, Vector disp)
    : cov_(std::move(cov)), disp_(std::move(disp)) {}

SymplecticOp::SymplecticOp(Matrix matrix, std::vector<int> modes)
    : matrix_(std::move(matrix)), modes_(std::move(modes)) {
  const auto k = static_cast<Eigen::Index>(modes_.size());
  require(k >= 1, "SymplecticOp: needs at least one target mode");
  require(matrix_.rows() == 2 * k && matrix_.cols() == 2 * k,
          "SymplecticOp: matrix size does not match the number of target modes");
  require(std::set<int>(modes_.begin(), modes_.end()).size() == modes_.size(),
          "SymplecticOp: target modes must be distinct");
  require(std::all_of(modes_.begin(), modes_.end(), [](int m) { return m >= 0; }),
          "SymplecticOp: negative mode index");
  const Matrix omega = symplectic_form(static_cast<int>(k));
  if ((matrix_ * omega * matrix_.transpose() - omega).cwiseAbs().maxCoeff() > kSymplecticTolerance) {
    throw std::invalid_argument("SymplecticOp: matrix is not symplectic");
  }
}

bool SymplecticOp::is_passive() const {
  const auto n = matrix_.rows();
  return (matrix_.transpose() * matrix_ - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <=
         kSymplecticTolerance;
}

SymplecticOp SymplecticOp::retarget(std::vector<int> modes) const {
  return SymplecticOp(matrix_, std::move(modes));
}

GaussianChannel::GaussianChannel(Matrix a, Matrix g) : a_(std::move(a)), g_(std::move(g)) {
  require(a_.rows() > 0 && a_.rows() % 2 == 0 && a_.rows() == a_.cols(),
          "GaussianChannel: A must be 2n x 2n");
  require(g_.rows() == a_.rows() && g_.cols() == a_.cols(), "GaussianChannel: A and G sizes differ");
  require(is_symmetric(g_, kSymmetryTolerance), "GaussianChannel: G is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(g_, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -kSymmetryTolerance, "GaussianChannel: G is not PSD");
  const Matrix omega = symplectic_form(n_modes());
  const Matrix antisym = omega - a_ * omega * a_.transpose();
  if (min_eigenvalue_with_form(g_, antisym) < -kUncertaintyTolerance) {
    throw std::invalid_argument("GaussianChannel: map is not completely positive");
  }
}

GaussianState vacuum(int n_modes) {
  require(n_modes >= 1, "vacuum: n_modes must be >= 1");
  return GaussianState(GaussianState::Unchecked{}, Matrix::Identity(2 * n_modes, 2 * n_modes),
                       Vector::Zero(2 * n_modes));
}

GaussianState single_mode_squeezed(double s) {
  Matrix cov = Matrix::Zero(2, 2);
  cov(0, 0) = std::exp(2.0 * s);
  cov(1, 1) = std::exp(-2.0 * s);
  return GaussianState(GaussianState::Unchecked{}, cov, Vector::Zero(2));
}

GaussianState two_mode_squeezed(double s) {
  const double c = std::cosh(2.0 * s);
  const double sh = std::sinh(2.0 * s);
  Matrix cov(4, 4);
  cov << c, 0, sh, 0,
         0, c, 0, -sh,
         sh, 0, c, 0,
         0, -sh, 0, c;
  return GaussianState(GaussianState::Unchecked{}, cov, Vector::Zero(4));
}

GaussianState direct_sum(const GaussianState& a, const GaussianState& b) {
  const auto na = a.cov().rows();
  const auto nb = b.cov().rows();
  Matrix cov = Matrix::Zero(na + nb, na + nb);
  cov.topLeftCorner(na, na) = a.cov();
  cov.bottomRightCorner(nb, nb) = b.cov();
  Vector disp(na + nb);
  disp << a.disp(), b.disp();
  return GaussianState(GaussianState::Unchecked{}, cov, disp);
}

SymplecticOp beam_splitter_op(double transmittance, int mode1, int mode2) {
  require(transmittance > 0.0 && transmittance <= 1.0,
          "beam_splitter_op: transmittance must lie in (0, 1]");
  const double t = std::sqrt(transmittance);
  const double r = std::sqrt(1.0 - transmittance);
  Matrix s(4, 4);
  s << t, 0, r, 0,
       0, t, 0, r,
       -r, 0, t, 0,
       0, -r, 0, t;
  return SymplecticOp(s, {mode1, mode2});
}

SymplecticOp phase_shift_op(double theta, int mode) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Matrix m(2, 2);
  m << c, s,
       -s, c;
  return SymplecticOp(m, {mode});
}

SymplecticOp sm_squeezer_op(double s, int mode) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = std::exp(s);
  m(1, 1) = std::exp(-s);
  return SymplecticOp(m, {mode});
}

SymplecticOp tms_squeezer_op(double s, int mode1, int mode2) {
  const double c = std::cosh(s);
  const double sh = std::sinh(s);
  Matrix m(4, 4);
  m << c, 0, sh, 0,
       0, c, 0, -sh,
       sh, 0, c, 0,
       0, -sh, 0, c;
  return SymplecticOp(m, {mode1, mode2});
}

GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& op) {
  const int n = state.n_modes();
  for (int m : op.modes()) {
    if (m >= n) throw std::invalid_argument("apply_symplectic: target mode out of range");
  }
  const std::vector<int> idx = quadrature_indices(op.modes());
  const Matrix& s = op.matrix();

  Matrix cov = state.cov();
  const Matrix rows = s * cov(idx, Eigen::all);
  cov(idx, Eigen::all) = rows;
  const Matrix cols = cov(Eigen::all, idx) * s.transpose();
  cov(Eigen::all, idx) = cols;
  cov = 0.5 * (cov + cov.transpose()).eval();

  Vector disp = state.disp();
  const Vector sub = s * disp(idx);
  disp(idx) = sub;
  return GaussianState(GaussianState::Unchecked{}, std::move(cov), std::move(disp));
}

GaussianState apply_channel(const GaussianState& state, const GaussianChannel& channel) {
  if (channel.a().rows() != state.cov().rows()) {
    throw std::invalid_argument("apply_channel: channel and state dimensions differ");
  }
  Matrix cov = channel.a() * state.cov() * channel.a().transpose() + channel.g();
  cov = 0.5 * (cov + cov.transpose()).eval();
  Vector disp = channel.a() * state.disp();
  return GaussianState(GaussianState::Unchecked{}, std::move(cov), std::move(disp));
}

GaussianChannel lossy_channel(int n_modes, double eta) {
  require(n_modes >= 1, "lossy_channel: n_modes must be >= 1");
  require(eta >= 0.0 && eta <= 1.0, "lossy_channel: eta must lie in [0, 1]");
  const auto d = 2 * n_modes;
  return GaussianChannel(std::sqrt(eta) * Matrix::Identity(d, d), (1.0 - eta) * Matrix::Identity(d, d));
}

GaussianChannel local_noise_channel(std::span<const double> eta, std::span<const double> excess) {
  require(!eta.empty() && eta.size() == excess.size(), "local_noise_channel: size mismatch");
  const auto d = static_cast<Eigen::Index>(2 * eta.size());
  Matrix a = Matrix::Zero(d, d);
  Matrix g = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < eta.size(); ++k) {
    require(eta[k] >= 0.0 && eta[k] <= 1.0, "local_noise_channel: eta must lie in [0, 1]");
    require(excess[k] >= 0.0, "local_noise_channel: excess noise must be non-negative");
    for (int q = 0; q < 2; ++q) {
      const auto i = static_cast<Eigen::Index>(2 * k + q);
      a(i, i) = std::sqrt(eta[k]);
      g(i, i) = 1.0 - eta[k] + excess[k];
    }
  }
  return GaussianChannel(std::move(a), std::move(g));
}

GaussianChannel detection_noise_channel(double eta_bhd, double electronic_noise, double eta_pd,
                                        std::span<const DetectorKind> partition) {
  require(eta_bhd > 0.0 && eta_bhd <= 1.0, "detection_noise_channel: eta_bhd must lie in (0, 1]");
  require(eta_pd > 0.0 && eta_pd <= 1.0, "detection_noise_channel: eta_pd must lie in (0, 1]");
  require(electronic_noise >= 0.0, "detection_noise_channel: electronic noise must be >= 0");
  std::vector<double> eta;
  std::vector<double> excess;
  for (DetectorKind kind : partition) {
    const bool homodyne = kind == DetectorKind::Homodyne;
    eta.push_back(homodyne ? eta_bhd : eta_pd);
    excess.push_back(homodyne ? electronic_noise : 0.0);
  }
  return local_noise_channel(eta, excess);
}

GaussianState add_input_thermal_noise(const GaussianState& state, double v_noise,
                                      std::span<const int> modes, ThermalNoiseUnits units) {
  require(v_noise >= 0.0, "add_input_thermal_noise: V_noise must be non-negative");
  const double added = units == ThermalNoiseUnits::QuadratureVariance ? 2.0 * v_noise : v_noise;
  Matrix cov = state.cov();
  auto bump = [&](int m) {
    if (m < 0 || m >= state.n_modes()) {
      throw std::invalid_argument("add_input_thermal_noise: mode out of range");
    }
    cov(2 * m, 2 * m) += added;
    cov(2 * m + 1, 2 * m + 1) += added;
  };
  if (modes.empty()) {
    for (int m = 0; m < state.n_modes(); ++m) bump(m);
  } else {
    for (int m : modes) bump(m);
  }
  return GaussianState(GaussianState::Unchecked{}, std::move(cov), state.disp());
}

double condition_number(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const Vector ev = es.eigenvalues().cwiseAbs();
  const double lo = ev.minCoeff();
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return ev.maxCoeff() / lo;
}

double wigner_eval(const GaussianState& state, const Vector& r) {
  if (r.size() != state.cov().rows()) {
    throw std::invalid_argument("wigner_eval: phase-space point has the wrong length");
  }
  if (condition_number(state.cov()) > kMaxConditionNumber) {
    throw NumericalError("wigner_eval: covariance matrix is ill-conditioned");
  }
  Eigen::LLT<Matrix> llt(state.cov());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("wigner_eval: covariance matrix is not positive definite");
  }
  const Vector dr = r - state.disp();
  const double quad = dr.dot(llt.solve(dr));
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double norm = std::pow(std::numbers::pi, state.n_modes()) * std::exp(0.5 * log_det);
  return std::exp(-quad) / norm;
}

}  // namespace bellsim
