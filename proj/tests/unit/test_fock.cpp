#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "bellsim/bell.hpp"
#include "bellsim/fock.hpp"
#include "bellsim/pipeline.hpp"
#include "bellsim/scheme.hpp"
#include "bellsim/special.hpp"
#include "generators.hpp"

using namespace bellsim;

namespace {

// Density of (x_theta on mode 0, x_phi on mode 1) for a zero-mean Gaussian
// state with covariance cov (vacuum = identity, so <x^2> = cov / 2).
double gaussian_pair_density(const Matrix& cov, double theta, double phi, double x, double y) {
  Eigen::Matrix<double, 2, 4> proj = Eigen::Matrix<double, 2, 4>::Zero();
  proj(0, 0) = std::cos(theta);
  proj(0, 1) = std::sin(theta);
  proj(1, 2) = std::cos(phi);
  proj(1, 3) = std::sin(phi);
  Eigen::Matrix2d sigma = 0.5 * proj * cov.topLeftCorner(4, 4) * proj.transpose();
  Eigen::Vector2d v(x, y);
  return std::exp(-0.5 * v.dot(sigma.inverse() * v)) / (2.0 * std::numbers::pi * std::sqrt(sigma.determinant()));
}

FockState number_correlated(const std::vector<double>& c) {
  int n = static_cast<int>(c.size()) - 1;
  FockState st({n, n});
  for (int k = 0; k <= n; ++k) {
    int occ[2] = {k, k};
    st.amplitudes()[st.index(occ)] = c[k];
  }
  return st;
}

}  // namespace

TEST(FockState, TmsAmplitudes) {
  double lambda = 0.5;
  FockState st = tms_fock(lambda, 40);
  EXPECT_NEAR(st.norm(), 1.0, 1e-14);
  for (int n = 0; n < 6; ++n) {
    int occ[2] = {n, n};
    EXPECT_NEAR(st.amplitude(occ).real(), std::sqrt(1 - lambda * lambda) * std::pow(lambda, n), 1e-12);
  }
  int off[2] = {1, 2};
  EXPECT_EQ(st.amplitude(off), Complex(0.0, 0.0));
  EXPECT_THROW(tms_fock(0.9, 10), std::invalid_argument);
}

TEST(FockState, AnnihilationReproducesSubtractedCoefficients) {
  double lambda = 0.57;
  FockState st = annihilate(annihilate(tms_fock(lambda, 80), 0), 1);
  PureStateModel model = pure_state_model(1, 1.0, lambda);
  for (std::size_t n = 0; n < model.coefficients.size() && n < 40; ++n) {
    int occ[2] = {static_cast<int>(n), static_cast<int>(n)};
    EXPECT_NEAR(st.amplitude(occ).real(), model.coefficients[n], 1e-10);
  }
  FockState four = annihilate(annihilate(tms_fock(0.4, 80), 0, 2), 1, 2);
  PureStateModel model4 = pure_state_model(2, 1.0, 0.4);
  for (std::size_t n = 0; n < 20; ++n) {
    int occ[2] = {static_cast<int>(n), static_cast<int>(n)};
    EXPECT_NEAR(four.amplitude(occ).real(), model4.coefficients[n], 1e-10);
  }
  EXPECT_THROW(annihilate(FockState({3, 3}), 0), std::domain_error);
}

TEST(BeamSplitter, HongOuMandel) {
  EXPECT_NEAR(beam_splitter_amplitude(0.5, 1, 1, 1), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(beam_splitter_amplitude(0.5, 1, 1, 2)), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(std::abs(beam_splitter_amplitude(0.5, 1, 1, 0)), std::sqrt(0.5), 1e-15);
}

TEST(BeamSplitter, SinglePhotonAmplitudes) {
  double t = 0.7;
  // a^dag -> sqrt(T) a^dag - sqrt(R) c^dag
  EXPECT_NEAR(beam_splitter_amplitude(t, 1, 0, 1), std::sqrt(t), 1e-15);
  EXPECT_NEAR(beam_splitter_amplitude(t, 1, 0, 0), -std::sqrt(1 - t), 1e-15);
  EXPECT_NEAR(beam_splitter_amplitude(t, 0, 1, 1), std::sqrt(1 - t), 1e-15);
  EXPECT_NEAR(beam_splitter_amplitude(t, 0, 1, 0), std::sqrt(t), 1e-15);
}

TEST(BeamSplitter, UnitaryProperty) {
  gen::Rng rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    double t = rng.uniform(0.01, 0.99);
    for (int total = 0; total <= 10; ++total) {
      // Columns (n, total - n) are orthonormal.
      for (int n1 = 0; n1 <= total; ++n1)
        for (int n2 = 0; n2 <= total; ++n2) {
          double dot = 0.0;
          for (int p = 0; p <= total; ++p)
            dot += beam_splitter_amplitude(t, n1, total - n1, p) * beam_splitter_amplitude(t, n2, total - n2, p);
          EXPECT_NEAR(dot, n1 == n2 ? 1.0 : 0.0, 1e-12);
        }
    }
  }
}

TEST(FockDensity, VacuumDensity) {
  FockState vac({4, 4});
  for (double x : {-1.0, 0.0, 0.7})
    for (double y : {-0.3, 1.2})
      EXPECT_NEAR(joint_density(vac, 0.4, -1.1, x, y), std::exp(-x * x - y * y) / std::numbers::pi, 1e-14);
  EXPECT_NEAR(fock_correlation(vac, 0.3, 0.2), 0.0, 1e-14);
}

TEST(FockDensity, TmsMatchesGaussianDensity) {
  double lambda = 0.5;
  FockState st = tms_fock(lambda, 60);
  Matrix cov = two_mode_squeezed(std::atanh(lambda)).cov();
  for (double th : {0.0, 0.8})
    for (double ph : {-0.4, 1.3})
      for (double x : {-1.5, 0.2, 1.0})
        for (double y : {-0.7, 0.4})
          EXPECT_NEAR(joint_density(st, th, ph, x, y), gaussian_pair_density(cov, th, ph, x, y), 1e-10);
}

TEST(FockDensity, LossMatchesGaussianChannel) {
  double lambda = 0.4, ea = 0.8, eb = 0.6;
  FockDensity rho = apply_loss(to_density(tms_fock(lambda, 40)), ea, eb);
  EXPECT_NEAR(rho.rho.trace().real(), 1.0, 1e-12);
  std::vector<double> eta{ea, eb}, excess{0.0, 0.0};
  Matrix cov = apply_channel(two_mode_squeezed(std::atanh(lambda)), local_noise_channel(eta, excess)).cov();
  for (double x : {-1.2, 0.0, 0.9})
    for (double y : {-0.5, 0.6})
      EXPECT_NEAR(joint_density(rho, 0.3, 0.9, x, y), gaussian_pair_density(cov, 0.3, 0.9, x, y), 1e-10);
  double g_corr = 2.0 / std::numbers::pi *
                  std::asin(cov(0, 2) / std::sqrt(cov(0, 0) * cov(2, 2)));
  EXPECT_NEAR(fock_correlation(rho, 0.0, 0.0), g_corr, 1e-10);
}

TEST(FockDensity, GaussianOperationsMatchPhaseSpace) {
  SchemeIR ir = parse_scheme(
      "mode A B\n"
      "SQZ A lambda=0.4\n"
      "SQZ B lambda=-0.2\n"
      "PS A theta=0.7\n"
      "BS A B T=0.3\n"
      "PS B theta=-0.4\n");
  FockSimulationOptions opt;
  opt.signal_cutoff = 40;
  FockSchemeResult fock = fock_simulate_scheme(ir, opt);
  EXPECT_NEAR(fock.probability, 1.0, 1e-9);
  Matrix cov = compile_scheme(ir).joint.cov();
  for (double th : {0.0, 1.1})
    for (double x : {-1.0, 0.3})
      for (double y : {-0.8, 0.5})
        EXPECT_NEAR(joint_density(fock.state, th, -0.6, x, y), gaussian_pair_density(cov, th, -0.6, x, y), 1e-9);
}

TEST(FockScheme, NumberResolvingProbabilityMatchesClosedForm) {
  double t = 0.9, lambda = 0.5;
  SchemeIR ir = parse_scheme("mode A B\nTMS A B lambda=0.5\nTAP A T=0.9\nTAP B T=0.9\nDETECT *\n");
  FockSimulationOptions opt;
  opt.signal_cutoff = 40;
  opt.ancilla_cutoff = 6;
  opt.photon_number_resolving = true;
  FockSchemeResult r = fock_simulate_scheme(ir, opt);
  EXPECT_NEAR(r.probability, pure_state_model(1, t, lambda).probability, 1e-10);
  FockState oracle = annihilate(annihilate(tms_fock(t * lambda, 60), 0), 1);
  EXPECT_NEAR(fock_correlation(r.state, 0.0, -std::numbers::pi / 4), fock_correlation(oracle, 0.0, -std::numbers::pi / 4),
              1e-9);
}

TEST(FockScheme, WithoutTapsReturnsTheSource) {
  SchemeIR ir = parse_scheme("mode A B\nTMS A B lambda=0.5\n");
  FockSimulationOptions opt;
  opt.signal_cutoff = 40;
  FockSchemeResult r = fock_simulate_scheme(ir, opt);
  FockDensity direct = to_density(tms_fock(0.5, 40));
  EXPECT_NEAR(r.probability, 1.0, 1e-10);
  EXPECT_LT((r.state.rho - direct.rho).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FockScheme, ClickRatesMatchPhaseSpace) {
  SchemeIR ir = parse_scheme(
      "mode A B\nTMS A B lambda=0.5\nTAP A T=0.95 eta=0.4\nTAP B T=0.95 eta=0.4\nDETECT *\n"
      "measure eta_bhd=0.8\n");
  FockSimulationOptions opt;
  opt.signal_cutoff = 20;
  opt.ancilla_cutoff = 6;
  FockSchemeResult fock = fock_simulate_scheme(ir, opt);
  SignedGaussianMixture mix = scheme_state(ir);
  EXPECT_NEAR(fock.probability, mix.success_prob(), 1e-7 * mix.success_prob());
  MeasurementSetting s;
  EXPECT_NEAR(fock_bell_factor(fock.state, s).S, bell_factor(mix, s).S, 1e-6);
}

TEST(FockScheme, RejectsUnsupportedInputs) {
  SchemeIR noisy = parse_scheme("mode A B\nTMS A B lambda=0.5\nmeasure nel=0.1\n");
  EXPECT_THROW(fock_simulate_scheme(noisy), std::invalid_argument);
  SchemeIR big = parse_scheme("mode A B\nTMS A B lambda=0.9\n");
  FockSimulationOptions opt;
  opt.signal_cutoff = 10;
  EXPECT_THROW(fock_simulate_scheme(big, opt), NumericalError);
}

// Properties over random inputs.

TEST(FockProperty, NumberCorrelatedStatesMatchMunroFormula) {
  gen::Rng rng(52);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> c = gen::unit_coefficients(rng, rng.integer(2, 12));
    FockState st = number_correlated(c);
    double th = rng.angle(), ph = rng.angle();
    EXPECT_NEAR(fock_correlation(st, th, ph), munro_correlation(c, th + ph), 1e-10);
  }
}

TEST(FockProperty, DensityIsNormalizedAndEven) {
  gen::Rng rng(53);
  QuadratureRule q = gauss_legendre_200(-9.0, 9.0);
  for (int trial = 0; trial < 4; ++trial) {
    FockState st = number_correlated(gen::unit_coefficients(rng, 8));
    double th = rng.angle(), ph = rng.angle();
    double total = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); i += 1)
      for (std::size_t j = 0; j < q.nodes.size(); ++j) {
        double d = joint_density(st, th, ph, q.nodes[i], q.nodes[j]);
        ASSERT_GE(d, -1e-14);
        total += q.weights[i] * q.weights[j] * d;
      }
    EXPECT_NEAR(total, 1.0, 1e-10);
    for (int k = 0; k < 10; ++k) {
      double x = rng.uniform(-2, 2), y = rng.uniform(-2, 2);
      EXPECT_NEAR(joint_density(st, th, ph, x, y), joint_density(st, th, ph, -x, -y), 1e-13);
    }
  }
}
