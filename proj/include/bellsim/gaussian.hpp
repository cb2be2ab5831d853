#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bellsim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when a computation hits a singular or ill-conditioned matrix,
/// or produces a value outside its physical range.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kSymplecticTolerance = 1e-10;
inline constexpr double kUncertaintyTolerance = 1e-9;
inline constexpr double kMaxConditionNumber = 1e12;

/// Block-diagonal symplectic form with [[0,1],[-1,0]] per mode, for the
/// quadrature ordering (x1, p1, ..., xn, pn).
Matrix symplectic_form(int n_modes);

/// Symplectic eigenvalues of a covariance matrix, sorted ascending.
/// The vacuum has all eigenvalues equal to one.
Vector symplectic_eigenvalues(const Matrix& cov);

/// Zero-mean or displaced Gaussian state of n modes.
///
/// The covariance follows gamma_ij = <r_i r_j + r_j r_i> - 2 d_i d_j, so the
/// vacuum is the identity and <x^2> = 1/2 for [x, p] = i.
class GaussianState {
 public:
  /// Validates symmetry and the uncertainty relation cov + i*Omega >= 0.
  explicit GaussianState(Matrix cov);
  GaussianState(Matrix cov, Vector disp);

  struct Unchecked {};
  /// Skips validation; for results of maps that preserve physicality.
  GaussianState(Unchecked, Matrix cov, Vector disp);

  int n_modes() const { return static_cast<int>(cov_.rows() / 2); }
  const Matrix& cov() const { return cov_; }
  const Vector& disp() const { return disp_; }

 private:
  Matrix cov_;
  Vector disp_;
};

/// A symplectic matrix acting on a subset of modes.
class SymplecticOp {
 public:
  /// `matrix` is 2k x 2k and acts on `modes` (k distinct indices) in order.
  SymplecticOp(Matrix matrix, std::vector<int> modes);

  const Matrix& matrix() const { return matrix_; }
  const std::vector<int>& modes() const { return modes_; }
  /// Orthogonal as well as symplectic (photon-number preserving).
  bool is_passive() const;

  /// Same matrix acting on different mode indices.
  SymplecticOp retarget(std::vector<int> modes) const;

 private:
  Matrix matrix_;
  std::vector<int> modes_;
};

/// Trace-preserving Gaussian CP map, cov -> A cov A^T + G.
class GaussianChannel {
 public:
  /// Rejects G that is not symmetric PSD, or a pair violating complete
  /// positivity G + i*Omega - i*A*Omega*A^T >= 0.
  GaussianChannel(Matrix a, Matrix g);

  const Matrix& a() const { return a_; }
  const Matrix& g() const { return g_; }
  int n_modes() const { return static_cast<int>(a_.rows() / 2); }

 private:
  Matrix a_;
  Matrix g_;
};

GaussianState vacuum(int n_modes);
GaussianState single_mode_squeezed(double s);
GaussianState two_mode_squeezed(double s);
/// Block-diagonal combination, modes of `a` first.
GaussianState direct_sum(const GaussianState& a, const GaussianState& b);

SymplecticOp beam_splitter_op(double transmittance, int mode1 = 0, int mode2 = 1);
SymplecticOp phase_shift_op(double theta, int mode = 0);
SymplecticOp sm_squeezer_op(double s, int mode = 0);
SymplecticOp tms_squeezer_op(double s, int mode1 = 0, int mode2 = 1);

GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& op);
GaussianState apply_channel(const GaussianState& state, const GaussianChannel& channel);

GaussianChannel lossy_channel(int n_modes, double eta);

/// Independent loss and excess noise on every mode: A = diag(sqrt(eta_k)),
/// G = diag(1 - eta_k + excess_k), each repeated for x and p.
GaussianChannel local_noise_channel(std::span<const double> eta, std::span<const double> excess);

enum class DetectorKind { Homodyne, Photodetector };

/// Inefficient homodyne detectors (with electronic noise in shot-noise
/// units) on Homodyne modes and inefficient photodetectors on the rest.
GaussianChannel detection_noise_channel(double eta_bhd, double electronic_noise, double eta_pd,
                                        std::span<const DetectorKind> partition);

/// How V_noise maps onto the covariance matrix.
enum class ThermalNoiseUnits {
  QuadratureVariance,  ///< V_noise in <x^2> units: cov += 2 V_noise
  ShotNoise,           ///< V_noise in vacuum units: cov += V_noise
};

/// Adds phase-insensitive Gaussian noise to the listed modes (all if empty).
GaussianState add_input_thermal_noise(const GaussianState& state, double v_noise,
                                      std::span<const int> modes = {},
                                      ThermalNoiseUnits units = ThermalNoiseUnits::QuadratureVariance);

double wigner_eval(const GaussianState& state, const Vector& r);

/// Condition number of a symmetric matrix (ratio of extreme |eigenvalues|).
double condition_number(const Matrix& m);

/// Row-major plain text, one row per line, %.17g entries.
std::string dump_matrix(const Matrix& m);
Matrix parse_matrix(const std::string& text);

}  // namespace bellsim
