#include "bellsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>

#include "bellsim/special.hpp"

namespace bellsim {

namespace {

constexpr std::size_t kMaxAmplitudes = 4'000'000;
constexpr double kTmsTailTolerance = 1e-10;

std::size_t checked_size(const std::vector<int>& cutoffs, std::size_t limit) {
  if (cutoffs.empty()) throw std::invalid_argument("FockState: at least one mode required");
  std::size_t size = 1;
  for (int c : cutoffs) {
    if (c < 0) throw std::invalid_argument("FockState: cutoffs must be >= 0");
    size *= static_cast<std::size_t>(c) + 1;
    if (size > limit) {
      throw std::invalid_argument("FockState: basis exceeds " + std::to_string(limit) + " amplitudes");
    }
  }
  return size;
}

int occupation(std::size_t idx, std::size_t stride, int cutoff) {
  return static_cast<int>((idx / stride) % (static_cast<std::size_t>(cutoff) + 1));
}

long double log_factorial(int n) { return std::lgamma(static_cast<long double>(n) + 1.0L); }

// table[n][m] lists (p, <p, n+m-p| U |n, m>) for outputs inside the cutoffs.
using BsTable = std::vector<std::vector<std::vector<std::pair<int, double>>>>;

BsTable beam_splitter_table(double transmittance, int cut1, int cut2) {
  BsTable table(cut1 + 1, std::vector<std::vector<std::pair<int, double>>>(cut2 + 1));
  for (int n = 0; n <= cut1; ++n) {
    for (int m = 0; m <= cut2; ++m) {
      for (int p = std::max(0, n + m - cut2); p <= std::min(cut1, n + m); ++p) {
        const double c = beam_splitter_amplitude(transmittance, n, m, p);
        if (c != 0.0) table[n][m].emplace_back(p, c);
      }
    }
  }
  return table;
}

struct Evolution {
  FockState state;
  double loss = 0.0;
  std::vector<bool> pristine;
};

void apply_beam_splitter(Evolution& ev, int m1, int m2, double transmittance) {
  const auto& cut = ev.state.cutoffs();
  const auto& stride = ev.state.strides();
  const auto table = beam_splitter_table(transmittance, cut[m1], cut[m2]);
  const Eigen::VectorXcd& in = ev.state.amplitudes();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(in.size());
  const std::size_t s1 = stride[m1], s2 = stride[m2];
  for (std::size_t base = 0; base < static_cast<std::size_t>(in.size()); ++base) {
    if (occupation(base, s1, cut[m1]) != 0 || occupation(base, s2, cut[m2]) != 0) continue;
    for (int n = 0; n <= cut[m1]; ++n) {
      for (int m = 0; m <= cut[m2]; ++m) {
        const Complex a = in[base + n * s1 + m * s2];
        if (a == Complex(0.0)) continue;
        for (const auto& [p, c] : table[n][m]) out[base + p * s1 + (n + m - p) * s2] += c * a;
      }
    }
  }
  ev.loss += std::max(0.0, in.squaredNorm() - out.squaredNorm());
  ev.state.amplitudes() = std::move(out);
  ev.pristine[m1] = ev.pristine[m2] = false;
}

void apply_phase(Evolution& ev, int mode, double theta) {
  const auto& cut = ev.state.cutoffs();
  const std::size_t s = ev.state.strides()[mode];
  auto& amp = ev.state.amplitudes();
  for (std::size_t i = 0; i < static_cast<std::size_t>(amp.size()); ++i) {
    const int n = occupation(i, s, cut[mode]);
    amp[i] *= std::polar(1.0, -n * theta);
  }
  ev.pristine[mode] = false;
}

// Replaces vacuum on pristine modes by a source state with amplitudes u_n on
// the diagonal n * (sum of strides).
void prepare_source(Evolution& ev, std::span<const int> modes, const std::vector<double>& u) {
  for (int m : modes) {
    if (!ev.pristine[m]) throw std::invalid_argument("Fock simulation: squeezing is only supported as a source");
  }
  std::size_t step = 0;
  for (int m : modes) step += ev.state.strides()[m];
  const Eigen::VectorXcd in = ev.state.amplitudes();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(in.size());
  double kept = 0.0;
  for (double c : u) kept += c * c;
  for (std::size_t base = 0; base < static_cast<std::size_t>(in.size()); ++base) {
    if (in[base] == Complex(0.0)) continue;
    for (std::size_t n = 0; n < u.size(); ++n) out[base + n * step] += u[n] * in[base];
  }
  ev.loss += std::max(0.0, (1.0 - kept) * in.squaredNorm());
  ev.state.amplitudes() = std::move(out);
  for (int m : modes) ev.pristine[m] = false;
}

std::vector<double> squeezed_vacuum_amplitudes(double s, int cutoff) {
  const double t = std::tanh(s);
  std::vector<double> u(cutoff + 1, 0.0);
  for (int j = 0; 2 * j <= cutoff; ++j) {
    const long double log_mag = 0.5L * log_factorial(2 * j) - j * std::log(2.0L) - log_factorial(j);
    const double sign = (t < 0.0 && j % 2 == 1) ? -1.0 : 1.0;
    u[2 * j] = j == 0 ? 1.0 : sign * static_cast<double>(std::exp(log_mag + j * std::log(std::abs(t))));
  }
  const double scale = 1.0 / std::sqrt(std::cosh(s));
  for (double& c : u) c *= scale;
  return u;
}

double detector_response(int n, double eta, bool number_resolving) {
  if (n == 0) return 0.0;
  if (number_resolving) return n * eta * std::pow(1.0 - eta, n - 1);
  return 1.0 - std::pow(1.0 - eta, n);
}

// Kraus operators of a pure-loss channel on a mode truncated at `cutoff`.
std::vector<Eigen::MatrixXd> loss_kraus(double eta, int cutoff) {
  std::vector<Eigen::MatrixXd> ks;
  for (int l = 0; l <= cutoff; ++l) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(cutoff + 1, cutoff + 1);
    for (int n = l; n <= cutoff; ++n) {
      const long double log_c = log_factorial(n) - log_factorial(l) - log_factorial(n - l);
      long double w = std::exp(log_c);
      if (n - l > 0) w *= std::pow(static_cast<long double>(eta), n - l);
      if (l > 0) w *= std::pow(1.0L - eta, l);
      k(n - l, n) = static_cast<double>(std::sqrt(w));
    }
    ks.push_back(std::move(k));
  }
  return ks;
}

// Matrix of integrals of sign(x) psi_a(x) psi_b(x) over the real line.
Eigen::MatrixXd sign_overlap(int cutoff) {
  const double half = std::max(8.0, std::sqrt(2.0 * cutoff + 1.0) + 6.0);
  const QuadratureRule rule = gauss_legendre_200(0.0, half);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(cutoff + 1, cutoff + 1);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const auto psi = quadrature_wavefunctions(cutoff, rule.nodes[i]);
    for (int a = 0; a <= cutoff; ++a) {
      for (int b = a % 2 == 0 ? 1 : 0; b <= cutoff; b += 2) s(a, b) += 2.0 * rule.weights[i] * psi[a] * psi[b];
    }
  }
  return s;
}

Eigen::MatrixXcd rotated_overlap(const Eigen::MatrixXd& s, double angle) {
  Eigen::MatrixXcd o(s.rows(), s.cols());
  for (Eigen::Index a = 0; a < s.rows(); ++a) {
    for (Eigen::Index b = 0; b < s.cols(); ++b) o(a, b) = s(a, b) * std::polar(1.0, -(a - b) * angle);
  }
  return o;
}

Eigen::VectorXcd measured_vector(const std::array<int, 2>& cutoffs, double theta, double phi, double x, double y) {
  const auto pa = quadrature_wavefunctions(cutoffs[0], x);
  const auto pb = quadrature_wavefunctions(cutoffs[1], y);
  Eigen::VectorXcd w((cutoffs[0] + 1) * (cutoffs[1] + 1));
  for (int a = 0; a <= cutoffs[0]; ++a) {
    for (int b = 0; b <= cutoffs[1]; ++b) {
      w[a * (cutoffs[1] + 1) + b] = pa[a] * pb[b] * std::polar(1.0, a * theta + b * phi);
    }
  }
  return w;
}

}  // namespace

FockState::FockState(std::vector<int> cutoffs) : cutoffs_(std::move(cutoffs)) {
  const std::size_t size = checked_size(cutoffs_, kMaxAmplitudes);
  strides_.assign(cutoffs_.size(), 1);
  for (int k = n_modes() - 2; k >= 0; --k) strides_[k] = strides_[k + 1] * (cutoffs_[k + 1] + 1);
  amplitudes_ = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(size));
  amplitudes_[0] = 1.0;
}

FockState::FockState(std::vector<int> cutoffs, Eigen::VectorXcd amplitudes) : FockState(std::move(cutoffs)) {
  if (amplitudes.size() != amplitudes_.size()) throw std::invalid_argument("FockState: amplitude vector has the wrong size");
  amplitudes_ = std::move(amplitudes);
}

std::size_t FockState::index(std::span<const int> occ) const {
  if (static_cast<int>(occ.size()) != n_modes()) throw std::invalid_argument("FockState: wrong number of occupations");
  std::size_t idx = 0;
  for (int k = 0; k < n_modes(); ++k) {
    if (occ[k] < 0 || occ[k] > cutoffs_[k]) throw std::out_of_range("FockState: occupation beyond cutoff");
    idx += occ[k] * strides_[k];
  }
  return idx;
}

Complex FockState::amplitude(std::span<const int> occ) const { return amplitudes_[index(occ)]; }

FockState FockState::normalized() const {
  const double n = norm();
  if (!(n > 0.0)) throw std::domain_error("FockState: cannot normalize the zero vector");
  return FockState(cutoffs_, amplitudes_ / n);
}

Eigen::MatrixXcd FockState::as_matrix() const {
  if (n_modes() != 2) throw std::invalid_argument("FockState::as_matrix: two-mode states only");
  Eigen::MatrixXcd x(cutoffs_[0] + 1, cutoffs_[1] + 1);
  for (int a = 0; a <= cutoffs_[0]; ++a) {
    for (int b = 0; b <= cutoffs_[1]; ++b) x(a, b) = amplitudes_[a * strides_[0] + b];
  }
  return x;
}

FockState tms_fock(double lambda, int cutoff) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("tms_fock: lambda must lie in [0, 1)");
  if (cutoff < 0) throw std::invalid_argument("tms_fock: cutoff must be >= 0");
  if (std::pow(lambda, 2.0 * (cutoff + 1)) > kTmsTailTolerance) {
    throw std::invalid_argument("tms_fock: truncation discards more than 1e-10 of the norm");
  }
  FockState st({cutoff, cutoff});
  const double scale = std::sqrt(1.0 - lambda * lambda);
  for (int n = 0; n <= cutoff; ++n) st.amplitudes()[n * st.strides()[0] + n] = scale * std::pow(lambda, n);
  return st.normalized();
}

FockState annihilate(const FockState& state, int mode, int times) {
  if (mode < 0 || mode >= state.n_modes()) throw std::invalid_argument("annihilate: mode out of range");
  if (times < 0) throw std::invalid_argument("annihilate: times must be >= 0");
  const std::size_t s = state.strides()[mode];
  const int cut = state.cutoffs()[mode];
  const auto& in = state.amplitudes();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(in.size());
  for (std::size_t i = 0; i < static_cast<std::size_t>(in.size()); ++i) {
    const int n = occupation(i, s, cut);
    if (n < times) continue;
    const double f = std::sqrt(std::exp(static_cast<double>(log_factorial(n) - log_factorial(n - times))));
    out[i - times * s] += f * in[i];
  }
  return FockState(state.cutoffs(), std::move(out)).normalized();
}

double beam_splitter_amplitude(double transmittance, int n, int m, int p) {
  const int q = n + m - p;
  if (p < 0 || q < 0) return 0.0;
  const long double t = std::sqrt(static_cast<long double>(transmittance));
  const long double r = std::sqrt(1.0L - transmittance);
  // (t a+ - r c+)^n (r a+ + t c+)^m, picking a+^p c+^q.
  long double sum = 0.0L;
  for (int i = std::max(0, p - m); i <= std::min(n, p); ++i) {
    const int j = p - i;
    const long double log_binom = log_factorial(n) - log_factorial(i) - log_factorial(n - i) + log_factorial(m) -
                                  log_factorial(j) - log_factorial(m - j);
    long double term = std::exp(log_binom);
    term *= std::pow(t, i + (m - j)) * std::pow(r, (n - i) + j);
    if ((n - i) % 2 == 1) term = -term;
    sum += term;
  }
  const long double norm = 0.5L * (log_factorial(p) + log_factorial(q) - log_factorial(n) - log_factorial(m));
  return static_cast<double>(sum * std::exp(norm));
}

FockDensity to_density(const FockState& two_mode) {
  if (two_mode.n_modes() != 2) throw std::invalid_argument("to_density: two-mode states only");
  FockDensity d;
  d.cutoffs = {two_mode.cutoffs()[0], two_mode.cutoffs()[1]};
  const Eigen::VectorXcd v = two_mode.normalized().amplitudes();
  d.rho = v * v.adjoint();
  return d;
}

FockDensity apply_loss(const FockDensity& state, double eta_a, double eta_b) {
  if (!(eta_a > 0.0 && eta_a <= 1.0 && eta_b > 0.0 && eta_b <= 1.0)) {
    throw std::invalid_argument("apply_loss: transmission must lie in (0, 1]");
  }
  const int na = state.cutoffs[0] + 1;
  const int nb = state.cutoffs[1] + 1;
  FockDensity out = state;
  // Kraus operator l lowers the photon number by l: K_l(n - l, n) = k[l][n].
  auto coefficients = [](double eta, int cutoff) {
    std::vector<std::vector<double>> k(cutoff + 1, std::vector<double>(cutoff + 1, 0.0));
    const auto ops = loss_kraus(eta, cutoff);
    for (int l = 0; l <= cutoff; ++l) {
      for (int n = l; n <= cutoff; ++n) k[l][n] = ops[l](n - l, n);
    }
    return k;
  };
  if (eta_a < 1.0) {
    const auto k = coefficients(eta_a, state.cutoffs[0]);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(out.rho.rows(), out.rho.cols());
    for (int a = 0; a < na; ++a) {
      for (int a2 = 0; a2 < na; ++a2) {
        for (int l = 0; a + l < na && a2 + l < na; ++l) {
          const double c = k[l][a + l] * k[l][a2 + l];
          if (c == 0.0) continue;
          acc.block(a * nb, a2 * nb, nb, nb) += c * out.rho.block((a + l) * nb, (a2 + l) * nb, nb, nb);
        }
      }
    }
    out.rho = std::move(acc);
  }
  if (eta_b < 1.0) {
    const auto k = coefficients(eta_b, state.cutoffs[1]);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(out.rho.rows(), out.rho.cols());
    for (int a = 0; a < na; ++a) {
      for (int a2 = 0; a2 < na; ++a2) {
        for (int b = 0; b < nb; ++b) {
          for (int b2 = 0; b2 < nb; ++b2) {
            Complex sum = 0.0;
            for (int l = 0; b + l < nb && b2 + l < nb; ++l) {
              sum += k[l][b + l] * k[l][b2 + l] * out.rho(a * nb + b + l, a2 * nb + b2 + l);
            }
            acc(a * nb + b, a2 * nb + b2) = sum;
          }
        }
      }
    }
    out.rho = std::move(acc);
  }
  return out;
}

double joint_density(const FockDensity& state, double theta, double phi, double x, double y) {
  const Eigen::VectorXcd w = measured_vector(state.cutoffs, theta, phi, x, y);
  return (w.adjoint() * state.rho * w)(0, 0).real();
}

double joint_density(const FockState& two_mode, double theta, double phi, double x, double y) {
  if (two_mode.n_modes() != 2) throw std::invalid_argument("joint_density: two-mode states only");
  const std::array<int, 2> cutoffs{two_mode.cutoffs()[0], two_mode.cutoffs()[1]};
  const Eigen::VectorXcd w = measured_vector(cutoffs, theta, phi, x, y);
  return std::norm(w.dot(two_mode.amplitudes())) / two_mode.amplitudes().squaredNorm();
}

double fock_correlation(const FockDensity& state, double theta, double phi) {
  const int na = state.cutoffs[0] + 1;
  const int nb = state.cutoffs[1] + 1;
  const Eigen::MatrixXcd oa = rotated_overlap(sign_overlap(state.cutoffs[0]), theta);
  const Eigen::MatrixXcd ob = rotated_overlap(sign_overlap(state.cutoffs[1]), phi);
  Complex e = 0.0;
  for (int a = 0; a < na; ++a) {
    for (int a2 = 0; a2 < na; ++a2) {
      if (oa(a, a2) == Complex(0.0)) continue;
      for (int b = 0; b < nb; ++b) {
        for (int b2 = 0; b2 < nb; ++b2) e += state.rho(a * nb + b, a2 * nb + b2) * oa(a, a2) * ob(b, b2);
      }
    }
  }
  return e.real() / state.rho.trace().real();
}

double fock_correlation(const FockState& two_mode, double theta, double phi) {
  // rho = v v^dag, so the sum over both index pairs factorizes through X OB X^dag.
  const Eigen::MatrixXcd x = two_mode.as_matrix();
  const Eigen::MatrixXcd oa = rotated_overlap(sign_overlap(two_mode.cutoffs()[0]), theta);
  const Eigen::MatrixXcd ob = rotated_overlap(sign_overlap(two_mode.cutoffs()[1]), phi);
  const Eigen::MatrixXcd inner = x * ob * x.adjoint();
  return oa.cwiseProduct(inner).sum().real() / x.squaredNorm();
}

BellResult fock_bell_factor(const FockDensity& state, const MeasurementSetting& settings) {
  BellResult r;
  r.settings = settings;
  const double thetas[2] = {settings.theta1, settings.theta2};
  const double phis[2] = {settings.phi1, settings.phi2};
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) r.correlations(j, k) = fock_correlation(state, thetas[j], phis[k]);
  }
  r.S = chsh_combination(r.correlations);
  return r;
}

FockSchemeResult fock_simulate_scheme(const SchemeIR& input, const FockSimulationOptions& options) {
  const SchemeIR ir = options.lambda ? with_source_squeezing(input, *options.lambda) : input;
  if (ir.measure.electronic_noise != 0.0 || ir.measure.v_noise != 0.0) {
    throw std::invalid_argument("Fock simulation: electronic and thermal noise are not supported");
  }
  if (options.signal_cutoff < 1 || options.ancilla_cutoff < 1) {
    throw std::invalid_argument("Fock simulation: cutoffs must be >= 1");
  }
  const int n_sig = static_cast<int>(ir.modes.size());
  const int n_anc = static_cast<int>(ir.taps.size());
  const auto [mode_a, mode_b] = ir.measure.pair;
  if (mode_a < 0 || mode_b < 0 || mode_a >= n_sig || mode_b >= n_sig || mode_a == mode_b) {
    throw std::invalid_argument("Fock simulation: measured pair out of range");
  }

  std::vector<int> cutoffs(n_sig, options.signal_cutoff);
  cutoffs.resize(n_sig + n_anc, options.ancilla_cutoff);
  checked_size(cutoffs, std::min(options.max_dimension, kMaxAmplitudes));
  Evolution ev{FockState(cutoffs), 0.0, std::vector<bool>(n_sig + n_anc, true)};

  std::vector<double> tap_eta(n_anc, 1.0);
  std::vector<bool> detected(n_anc, false);
  std::vector<std::vector<int>> mixed_with(n_anc);
  for (const auto& located : ir.ops) {
    std::visit(
        [&](const auto& op) {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, SqueezeStmt>) {
            const int m = op.mode;
            prepare_source(ev, std::span<const int>(&m, 1), squeezed_vacuum_amplitudes(op.s, cutoffs[m]));
          } else if constexpr (std::is_same_v<T, TwoModeSqueezeStmt>) {
            const int ms[2] = {op.mode1, op.mode2};
            const double l = std::tanh(op.s);
            const int n = std::min(cutoffs[op.mode1], cutoffs[op.mode2]);
            std::vector<double> u(n + 1);
            for (int j = 0; j <= n; ++j) u[j] = std::sqrt(1.0 - l * l) * std::pow(l, j);
            prepare_source(ev, ms, u);
          } else if constexpr (std::is_same_v<T, BeamSplitterStmt>) {
            apply_beam_splitter(ev, op.mode1, op.mode2, op.transmittance);
          } else if constexpr (std::is_same_v<T, PhaseShiftStmt>) {
            apply_phase(ev, op.mode, op.theta);
          } else if constexpr (std::is_same_v<T, TapStmt>) {
            tap_eta[op.tap] = op.eta_pd;
            apply_beam_splitter(ev, op.mode, n_sig + op.tap, op.transmittance);
          } else if constexpr (std::is_same_v<T, MixTapsStmt>) {
            mixed_with[op.tap1].push_back(op.tap2);
            mixed_with[op.tap2].push_back(op.tap1);
            apply_beam_splitter(ev, n_sig + op.tap1, n_sig + op.tap2, op.transmittance);
          } else if constexpr (std::is_same_v<T, DetectStmt>) {
            if (op.all) std::fill(detected.begin(), detected.end(), true);
            for (int t : op.taps) detected[t] = true;
          } else if constexpr (std::is_same_v<T, DropStmt>) {
          }
        },
        located.stmt);
  }
  // Detector losses commute with the ancilla mixer only when they are equal.
  for (int t = 0; t < n_anc; ++t) {
    for (int u : mixed_with[t]) {
      if (tap_eta[t] != tap_eta[u]) {
        throw std::invalid_argument("Fock simulation: mixed taps need equal detector efficiencies");
      }
    }
  }
  if (ev.loss > options.max_truncation_loss) {
    throw NumericalError("Fock simulation: truncation loss " + std::to_string(ev.loss) + " exceeds the bound");
  }

  const FockState& st = ev.state;
  const auto& stride = st.strides();
  const double total = st.amplitudes().squaredNorm();
  const int na = cutoffs[mode_a] + 1;
  const int nb = cutoffs[mode_b] + 1;
  const Eigen::Index dim = static_cast<Eigen::Index>(na) * nb;
  const std::size_t sa = stride[mode_a], sb = stride[mode_b];

  std::vector<Eigen::VectorXcd> columns;
  for (std::size_t base = 0; base < static_cast<std::size_t>(st.amplitudes().size()); ++base) {
    if (occupation(base, sa, cutoffs[mode_a]) != 0 || occupation(base, sb, cutoffs[mode_b]) != 0) continue;
    double w = 1.0;
    for (int t = 0; t < n_anc && w != 0.0; ++t) {
      if (!detected[t]) continue;
      const int n = occupation(base, stride[n_sig + t], cutoffs[n_sig + t]);
      w *= detector_response(n, tap_eta[t], options.photon_number_resolving);
    }
    if (w == 0.0) continue;
    Eigen::VectorXcd v(dim);
    for (int a = 0; a < na; ++a) {
      for (int b = 0; b < nb; ++b) v[a * nb + b] = st.amplitudes()[base + a * sa + b * sb];
    }
    if (v.squaredNorm() == 0.0) continue;
    columns.push_back(std::sqrt(w) * v);
  }
  Eigen::MatrixXcd cols(dim, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) cols.col(static_cast<Eigen::Index>(j)) = columns[j];

  FockSchemeResult result;
  result.truncation_loss = ev.loss;
  result.state.cutoffs = {cutoffs[mode_a], cutoffs[mode_b]};
  result.state.rho = cols * cols.adjoint();
  const double p = result.state.rho.trace().real();
  if (!(p > 0.0)) throw NumericalError("Fock simulation: conditioning event has zero probability");
  result.probability = p / total;
  result.state.rho /= p;
  if (ir.measure.eta_bhd < 1.0) result.state = apply_loss(result.state, ir.measure.eta_bhd, ir.measure.eta_bhd);
  return result;
}

}  // namespace bellsim
