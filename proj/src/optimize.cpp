#include "bellsim/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

namespace bellsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

MeasurementSetting setting_from(const double* x) { return {x[0], x[1], x[2], x[3]}; }

BellResult evaluate_setting(const CorrelationFunction& e, const MeasurementSetting& s) {
  BellResult r;
  r.settings = s;
  r.correlations(0, 0) = e(s.theta1, s.phi1);
  r.correlations(0, 1) = e(s.theta1, s.phi2);
  r.correlations(1, 0) = e(s.theta2, s.phi1);
  r.correlations(1, 1) = e(s.theta2, s.phi2);
  r.S = chsh_combination(r.correlations);
  return r;
}

struct NelderMeadContext {
  const CorrelationFunction* correlation;
};

double negative_s(const gsl_vector* v, void* params) {
  const auto* ctx = static_cast<NelderMeadContext*>(params);
  const double x[4] = {gsl_vector_get(v, 0), gsl_vector_get(v, 1), gsl_vector_get(v, 2), gsl_vector_get(v, 3)};
  return -evaluate_setting(*ctx->correlation, setting_from(x)).S;
}

// Runs the simplex from `start`; returns the best vertex found.
MeasurementSetting refine(const CorrelationFunction& e, const MeasurementSetting& start, double step,
                          const AngleSearchOptions& options) {
  NelderMeadContext ctx{&e};
  gsl_multimin_function fn{&negative_s, 4, &ctx};
  gsl_vector* x = gsl_vector_alloc(4);
  gsl_vector* steps = gsl_vector_alloc(4);
  const double init[4] = {start.theta1, start.theta2, start.phi1, start.phi2};
  for (int i = 0; i < 4; ++i) {
    gsl_vector_set(x, i, init[i]);
    gsl_vector_set(steps, i, step);
  }
  gsl_multimin_fminimizer* nm = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 4);
  gsl_multimin_fminimizer_set(nm, &fn, x, steps);
  for (int it = 0; it < options.max_iterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(nm) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(nm), options.simplex_tolerance) == GSL_SUCCESS) break;
  }
  const gsl_vector* best = gsl_multimin_fminimizer_x(nm);
  const double out[4] = {gsl_vector_get(best, 0), gsl_vector_get(best, 1), gsl_vector_get(best, 2),
                         gsl_vector_get(best, 3)};
  gsl_multimin_fminimizer_free(nm);
  gsl_vector_free(steps);
  gsl_vector_free(x);
  return setting_from(out);
}

}  // namespace

BellResult optimize_angles(const CorrelationFunction& e, const AngleSearchOptions& options) {
  const int g = options.grid_points;
  if (g < 2) throw std::invalid_argument("optimize_angles: need at least two grid points");
  std::vector<double> grid(g);
  for (int i = 0; i < g; ++i) grid[i] = kTwoPi * i / g;

  std::vector<double> table(static_cast<std::size_t>(g) * g);
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) table[i * g + j] = e(grid[i], grid[j]);
  }
  auto at = [&](int i, int j) { return table[i * g + j]; };

  // Every (theta1, theta2, phi1, phi2) grid combination in lexicographic order.
  const std::size_t n_combos = static_cast<std::size_t>(g) * g * g * g;
  std::vector<double> s_values(n_combos);
  std::size_t c = 0;
  for (int t1 = 0; t1 < g; ++t1)
    for (int t2 = 0; t2 < g; ++t2)
      for (int p1 = 0; p1 < g; ++p1)
        for (int p2 = 0; p2 < g; ++p2) s_values[c++] = at(t1, p1) + at(t1, p2) + at(t2, p1) - at(t2, p2);

  std::vector<std::size_t> order(n_combos);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto starts = std::min<std::size_t>(std::max(options.refine_starts, 1), n_combos);
  std::partial_sort(order.begin(), order.begin() + starts, order.end(), [&](std::size_t a, std::size_t b) {
    if (s_values[a] != s_values[b]) return s_values[a] > s_values[b];
    return a < b;
  });

  BellResult best;
  bool have_best = false;
  for (std::size_t k = 0; k < starts; ++k) {
    std::size_t idx = order[k];
    const int p2 = static_cast<int>(idx % g);
    idx /= g;
    const int p1 = static_cast<int>(idx % g);
    idx /= g;
    const int t2 = static_cast<int>(idx % g);
    const int t1 = static_cast<int>(idx / g);
    const MeasurementSetting start{grid[t1], grid[t2], grid[p1], grid[p2]};
    BellResult grid_result = evaluate_setting(e, start);
    BellResult refined = evaluate_setting(e, refine(e, start, std::numbers::pi / g, options));
    const BellResult& candidate = refined.S >= grid_result.S ? refined : grid_result;
    if (!have_best || candidate.S > best.S) {
      best = candidate;
      have_best = true;
    }
  }
  best.settings = {wrap_angle(best.settings.theta1), wrap_angle(best.settings.theta2),
                   wrap_angle(best.settings.phi1), wrap_angle(best.settings.phi2)};
  return best;
}

BellResult optimize_angles(const SignedGaussianMixture& mixture, const AngleSearchOptions& options,
                           std::pair<int, int> modes) {
  SignedGaussianMixture pair = mixture;
  if (!(mixture.n_modes() == 2 && modes.first == 0 && modes.second == 1)) {
    const int keep[2] = {modes.first, modes.second};
    pair = mixture.marginal(keep);
  }
  BellResult r = optimize_angles([&](double t, double p) { return correlation(pair, t, p); }, options);
  r.success_prob = mixture.success_prob();
  return r;
}

SqueezingOptimum optimize_squeezing(const std::function<BellResult(double)>& evaluate,
                                    const SqueezingSearchOptions& options) {
  const double lo = options.lambda_min;
  const double hi = options.lambda_max;
  const int n = options.grid_points;
  if (!(lo > 0.0 && hi < 1.0 && lo < hi) || n < 3) {
    throw std::invalid_argument("optimize_squeezing: need 0 < lambda_min < lambda_max < 1 and >= 3 grid points");
  }
  // Squeezing values where the conditioning is numerically unusable (click
  // probabilities lost to cancellation at weak squeezing) are skipped.
  std::vector<double> lambdas(n);
  std::vector<std::optional<BellResult>> results(n);
  std::optional<std::size_t> best;
  std::optional<NumericalError> last_error;
  for (int i = 0; i < n; ++i) {
    lambdas[i] = lo + (hi - lo) * i / (n - 1);
    try {
      results[i] = evaluate(lambdas[i]);
    } catch (const NumericalError& e) {
      last_error = e;
      continue;
    }
    if (!best || results[i]->S > results[*best]->S) best = i;
  }
  if (!best) throw *last_error;
  SqueezingOptimum out{lambdas[*best], *results[*best]};

  const double a = lambdas[*best > 0 ? *best - 1 : 0];
  const double b = lambdas[std::min<std::size_t>(*best + 1, n - 1)];
  const int bits = std::max(8, static_cast<int>(-std::log2(options.tolerance)));
  std::uintmax_t max_iter = 200;
  const auto [lambda_ref, neg_s] = boost::math::tools::brent_find_minima(
      [&](double l) {
        try {
          return -evaluate(l).S;
        } catch (const NumericalError&) {
          return std::numeric_limits<double>::infinity();
        }
      },
      a, b, bits, max_iter);
  (void)neg_s;
  try {
    BellResult refined = evaluate(lambda_ref);
    if (refined.S > out.result.S) out = {lambda_ref, refined};
  } catch (const NumericalError&) {
  }
  return out;
}

}  // namespace bellsim
