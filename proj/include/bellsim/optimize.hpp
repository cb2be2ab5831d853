#pragma once

#include <functional>
#include <utility>

#include "bellsim/bell.hpp"

namespace bellsim {

struct AngleSearchOptions {
  /// Points per angle on [0, 2 pi) for the coarse search.
  int grid_points = 16;
  /// Simplex size (radians) at which Nelder-Mead refinement stops.
  double simplex_tolerance = 1e-7;
  /// Number of best grid points refined locally.
  int refine_starts = 4;
  int max_iterations = 4000;
};

/// Correlation E(theta, phi) of some fixed state.
using CorrelationFunction = std::function<double(double, double)>;

/// Heuristic maximization of S over the four phases: exhaustive grid search
/// followed by Nelder-Mead refinement. Deterministic; not a certified
/// global optimum. Returned angles are wrapped to (-pi, pi].
BellResult optimize_angles(const CorrelationFunction& correlation_fn, const AngleSearchOptions& options = {});

BellResult optimize_angles(const SignedGaussianMixture& mixture, const AngleSearchOptions& options = {},
                           std::pair<int, int> modes = {0, 1});

struct SqueezingSearchOptions {
  double lambda_min = 0.02;
  double lambda_max = 0.95;
  int grid_points = 24;
  /// Absolute tolerance on lambda for the Brent refinement.
  double tolerance = 1e-6;
};

struct SqueezingOptimum {
  double lambda = 0.0;
  BellResult result;
};

/// Maximizes evaluate(lambda).S: uniform grid, then Brent refinement around
/// the best grid point.
SqueezingOptimum optimize_squeezing(const std::function<BellResult(double)>& evaluate,
                                    const SqueezingSearchOptions& options = {});

}  // namespace bellsim
