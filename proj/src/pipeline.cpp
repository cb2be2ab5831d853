#include "bellsim/pipeline.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace bellsim {

SignedGaussianMixture main_scheme_state(const MainSchemeConfig& config, double lambda) {
  if (!(lambda > -1.0 && lambda < 1.0)) throw std::invalid_argument("main_scheme_state: |lambda| must be < 1");
  if (config.photons_per_arm < 0) throw std::invalid_argument("main_scheme_state: negative tap count");
  GaussianState source = two_mode_squeezed(std::atanh(lambda));
  if (config.v_noise > 0.0) source = add_input_thermal_noise(source, config.v_noise, {}, config.noise_units);
  std::vector<TapSpec> taps;
  for (int j = 0; j < 2 * config.photons_per_arm; ++j) {
    taps.push_back({j % 2, config.transmittance, config.eta_pd});
  }
  return subtract_photons(source, taps, config.detection);
}

double squeezing_db(double lambda) {
  // Squeezed quadrature variance of either arm's EPR combination: e^{-2s}.
  return -10.0 * std::log10(std::exp(-2.0 * std::atanh(lambda)));
}

double db_below_shot_noise(double db) { return std::pow(10.0, -db / 10.0); }

}  // namespace bellsim
