#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "bellsim/bell.hpp"
#include "bellsim/pipeline.hpp"
#include "bellsim/special.hpp"
#include "generators.hpp"

using namespace bellsim;

namespace {

using boost::math::quadrature::gauss_kronrod;

double orthant_by_quadrature(const Eigen::Matrix2d& g) {
  double a = g(0, 0), b = g(1, 1), c = g(0, 1);
  auto inner = [&](double y1) {
    auto f = [&](double y2) { return std::exp(-a * y1 * y1 - b * y2 * y2 - 2 * c * y1 * y2); };
    return gauss_kronrod<double, 61>::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-14);
  };
  return gauss_kronrod<double, 61>::integrate(inner, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13);
}

// Correlation coefficient of x_theta on mode 0 and x_phi on mode 1.
double rho(const Matrix& cov, double theta, double phi) {
  Eigen::Vector4d u(std::cos(theta), std::sin(theta), 0, 0), v(0, 0, std::cos(phi), std::sin(phi));
  Eigen::Matrix4d c = cov;
  return u.dot(c * v) / std::sqrt(u.dot(c * u) * v.dot(c * v));
}

SignedGaussianMixture gaussian_mixture(const GaussianState& st) {
  return SignedGaussianMixture(2, {{1.0, st.cov().inverse()}}, 1.0);
}

}  // namespace

TEST(Orthant, DiagonalClosedForm) {
  Eigen::Matrix2d g;
  g << 2.0, 0.0, 0.0, 0.5;
  EXPECT_NEAR(orthant_integral(g), std::numbers::pi / 4.0, 1e-15);
}

TEST(Orthant, AgreesWithAdaptiveQuadrature) {
  gen::Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::Matrix2d g = gen::pd2(rng, 0.1, 4.0);
    double exact = orthant_by_quadrature(g);
    EXPECT_NEAR(orthant_integral(g), exact, 1e-9 * std::max(1.0, exact));
  }
}

TEST(Orthant, NearlySingularWithNegativeCoupling) {
  // Strong anticorrelation piles the mass along y1 = y2 inside the quadrant.
  Eigen::Matrix2d g;
  g << 1.0, -0.97, -0.97, 1.0;
  double exact = orthant_by_quadrature(g);
  EXPECT_NEAR(orthant_integral(g), exact, 1e-9 * exact);
}

TEST(Orthant, RejectsIndefinite) {
  Eigen::Matrix2d g;
  g << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(orthant_integral(g), std::invalid_argument);
}

TEST(Correlation, ChshCombination) {
  Eigen::Matrix2d e;
  e << 0.1, 0.2, 0.3, 0.4;
  EXPECT_DOUBLE_EQ(chsh_combination(e), 0.2);
}

TEST(Correlation, GaussianArcsinLaw) {
  gen::Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    GaussianState st = gen::gaussian_state(rng, 2);
    double th = rng.angle(), ph = rng.angle();
    double expected = 2.0 / std::numbers::pi * std::asin(rho(st.cov(), th, ph));
    EXPECT_NEAR(correlation(gaussian_mixture(st), th, ph), expected, 1e-10);
  }
}

TEST(Correlation, VacuumIsUncorrelated) {
  SignedGaussianMixture vac(2, {{1.0, Matrix::Identity(4, 4)}}, 1.0);
  EXPECT_NEAR(correlation(vac, 0.3, 1.2), 0.0, 1e-15);
  std::vector<double> c{1.0};
  EXPECT_DOUBLE_EQ(munro_correlation(c, 0.7), 0.0);
}

TEST(Correlation, MarginalPairSelection) {
  GaussianState three = direct_sum(two_mode_squeezed(0.6), vacuum(1));
  SignedGaussianMixture mix(3, {{1.0, three.cov().inverse()}}, 1.0);
  EXPECT_NEAR(correlation(mix, 0.0, 0.0, {0, 2}), 0.0, 1e-14);
  double direct = correlation(gaussian_mixture(two_mode_squeezed(0.6)), 0.0, 0.0);
  EXPECT_NEAR(correlation(mix, 0.0, 0.0, {0, 1}), direct, 1e-14);
  EXPECT_THROW(correlation(mix, 0.0, 0.0, {1, 1}), std::invalid_argument);
}

TEST(Munro, RejectsUnnormalizedCoefficients) {
  std::vector<double> c{0.5, 0.5};
  EXPECT_THROW(munro_correlation(c, 0.0), std::invalid_argument);
}

TEST(Munro, CoefficientsOfSubtractedStates) {
  double t = 0.97, lambda = 0.5;
  PureStateModel one = pure_state_model(1, t, lambda);
  double x = t * lambda;
  double scale = one.coefficients[0];
  for (std::size_t n = 0; n < 10; ++n)
    EXPECT_NEAR(one.coefficients[n], scale * (n + 1.0) * std::pow(x, n), 1e-14);
  PureStateModel two = pure_state_model(2, t, lambda);
  x = t * t * lambda;
  scale = two.coefficients[0] / 2.0;
  for (std::size_t n = 0; n < 10; ++n)
    EXPECT_NEAR(two.coefficients[n], scale * (n + 1.0) * (n + 2.0) * std::pow(x, n), 1e-14);
  EXPECT_THROW(pure_state_model(3, t, lambda), std::invalid_argument);
  EXPECT_THROW(pure_state_model(1, 0.0, lambda), std::invalid_argument);
}

TEST(Munro, TruncationGrowsWithSqueezing) {
  int prev = 0;
  for (double x : {0.1, 0.3, 0.5, 0.7}) {
    int n = munro_truncation(1, x);
    EXPECT_GT(n, prev);
    prev = n;
  }
  EXPECT_EQ(munro_truncation(1, 0.99), 60);
}

TEST(Munro, AngleDependenceIsThroughTheSum) {
  PureStateModel m = pure_state_model(1, 1.0, 0.57);
  MeasurementSetting a{0.1, 0.9, -0.3, 0.5};
  MeasurementSetting b{0.3, 1.1, -0.5, 0.3};
  EXPECT_NEAR(munro_bell_factor(m.coefficients, a).S, munro_bell_factor(m.coefficients, b).S, 1e-14);
}

TEST(Special, ReciprocalGamma) {
  for (int n = 0; n <= 6; ++n) EXPECT_EQ(reciprocal_gamma(-n), 0.0);
  EXPECT_NEAR(reciprocal_gamma(0.5), 1.0 / std::sqrt(std::numbers::pi), 1e-15);
  EXPECT_NEAR(reciprocal_gamma(-0.5), -0.5 / std::sqrt(std::numbers::pi), 1e-15);
  gen::Rng rng(33);
  for (int i = 0; i < 50; ++i) {
    double x = rng.uniform(0.1, 12.0);
    EXPECT_NEAR(reciprocal_gamma(x), 1.0 / std::tgamma(x), 1e-13 / std::tgamma(x));
  }
}

TEST(Special, WavefunctionsMatchHermiteForm) {
  for (int n = 0; n <= 20; ++n)
    for (double x : {-3.1, -0.4, 0.0, 0.9, 2.5}) {
      double norm = std::sqrt(std::pow(2.0, n) * std::tgamma(n + 1.0) * std::sqrt(std::numbers::pi));
      double expected = std::hermite(n, x) * std::exp(-x * x / 2.0) / norm;
      EXPECT_NEAR(quadrature_wavefunction(n, x), expected, 1e-12);
    }
}

TEST(Special, WavefunctionsAreOrthonormal) {
  QuadratureRule q = gauss_legendre_200(-16.0, 16.0);
  int nmax = 40;
  Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(nmax + 1, nmax + 1);
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    std::vector<double> psi = quadrature_wavefunctions(nmax, q.nodes[i]);
    for (int a = 0; a <= nmax; ++a)
      for (int b = 0; b <= nmax; ++b) overlap(a, b) += q.weights[i] * psi[a] * psi[b];
  }
  EXPECT_LT((overlap - Eigen::MatrixXd::Identity(nmax + 1, nmax + 1)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(quadrature_wavefunctions(201, 0.0), std::invalid_argument);
}

// Properties over random inputs.

TEST(BellProperty, GaussianStatesNeverViolate) {
  gen::Rng rng(34);
  for (int trial = 0; trial < 300; ++trial) {
    GaussianState st = gen::gaussian_state(rng, 2);
    EXPECT_LE(bell_factor(gaussian_mixture(st), gen::setting(rng)).S, 2.0 + 1e-12);
  }
}

TEST(BellProperty, ConditionedStatesRespectTsirelson) {
  gen::Rng rng(35);
  for (int trial = 0; trial < 40; ++trial) {
    MainSchemeConfig cfg;
    cfg.photons_per_arm = rng.integer(1, 2);
    cfg.transmittance = rng.uniform(0.8, 0.99);
    SignedGaussianMixture mix = main_scheme_state(cfg, rng.uniform(0.2, 0.8));
    BellResult r = bell_factor(mix, gen::setting(rng));
    EXPECT_LE(std::abs(r.S), 2.0 * std::numbers::sqrt2);
    EXPECT_LE(r.correlations.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(BellProperty, MarginalRouteAgrees) {
  gen::Rng rng(36);
  MainSchemeConfig cfg;
  SignedGaussianMixture mix = main_scheme_state(cfg, 0.6);
  for (int trial = 0; trial < 20; ++trial) {
    double th = rng.angle(), ph = rng.angle();
    EXPECT_NEAR(correlation(measured_marginal(mix, th, ph)), correlation(mix, th, ph), 1e-13);
  }
}
