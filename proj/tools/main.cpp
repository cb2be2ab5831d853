#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bellsim/gaussian.hpp"
#include "commands.hpp"

#ifndef BELLSIM_SCHEME_DIR
#define BELLSIM_SCHEME_DIR "schemes"
#endif

namespace {

int default_threads() {
  if (const char* env = std::getenv("BELLSIM_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
    }
  }
  return 1;
}

// Writes to --out when given, otherwise stdout.
template <class F>
void with_output(const std::string& path, F f) {
  if (path.empty() || path == "-") return f(std::cout);
  std::ofstream out(path);
  if (!out) throw bellsim::cli::UsageError("--out: cannot write " + path);
  f(out);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace bellsim::cli;
  CLI::App app{"Homodyne Bell-CHSH tests with photon-subtracted squeezed light"};
  app.require_subcommand(1);
  int threads = default_threads();
  app.add_option("--threads", threads, "Worker threads (default from BELLSIM_THREADS, else 1)")
      ->check(CLI::PositiveNumber);

  auto* reproduce = app.add_subcommand("reproduce", "Write the CSV data behind a figure");
  std::string target;
  std::string out_dir = ".";
  std::string scheme_dir = BELLSIM_SCHEME_DIR;
  reproduce->add_option("target", target, "fig2|fig3|fig5|fig6|fig7|fig8|schemes")->required();
  reproduce->add_option("--out", out_dir, "Output directory");
  reproduce->add_option("--schemes", scheme_dir, "Scheme corpus directory");

  auto* sweep = app.add_subcommand("sweep", "Bell factor over a parameter grid of the main scheme");
  SweepOptions so;
  std::string sweep_out;
  std::string units = "variance";
  sweep->add_option("--lambda", so.lambda, "Squeezing: v, v1,v2,... or start:stop:count");
  sweep->add_option("--T", so.transmittance, "Tap transmittance grid");
  sweep->add_option("--eta-pd", so.eta_pd, "Photodetector efficiency grid");
  sweep->add_option("--eta-bhd", so.eta_bhd, "Homodyne efficiency grid");
  sweep->add_option("--nel", so.nel, "Electronic noise grid (shot-noise units)");
  sweep->add_option("--vnoise", so.vnoise, "Input thermal noise grid");
  sweep->add_option("--vnoise-units", units, "variance (adds 2 V) or snu (adds V)");
  sweep->add_option("--k", so.k, "Total photon subtractions: 0, 2 or 4");
  auto* angles_opt = sweep->add_option("--angles", "Fixed phases theta1,theta2,phi1,phi2");
  sweep->add_flag("--optimize-angles", so.optimize_angles, "Maximize S over the phases at each point");
  sweep->add_option("--out", sweep_out, "Output file (default stdout)");

  auto* scheme = app.add_subcommand("scheme", "Compile and run a .scheme file");
  std::string scheme_file;
  scheme->add_option("file", scheme_file, "Scheme file")->required();

  auto* wigner = app.add_subcommand("wigner-cut", "One-dimensional cut of the conditional Wigner function");
  WignerCutOptions wo;
  std::string wigner_out;
  wigner->add_option("--lambda", wo.lambda, "Squeezing");
  wigner->add_option("--T", wo.transmittance, "Tap transmittance");
  wigner->add_option("--axis", wo.axis, "diagonal|antidiagonal|xA|xB");
  wigner->add_option("--eta-pd", wo.eta_pd, "Photodetector efficiency");
  wigner->add_option("--extent", wo.extent, "Half-width of the cut");
  wigner->add_option("--points", wo.points, "Number of points");
  wigner->add_option("--out", wigner_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*reproduce) {
      try {
        for (const auto& f : cmd_reproduce(target, out_dir, scheme_dir, threads)) std::cout << f << '\n';
      } catch (const std::out_of_range& e) {
        std::cerr << "bellsim: " << e.what() << '\n';
        return 2;
      }
    } else if (*sweep) {
      if (units == "snu") {
        so.noise_units = bellsim::ThermalNoiseUnits::ShotNoise;
      } else if (units != "variance") {
        throw UsageError("--vnoise-units: expected variance or snu");
      }
      if (*angles_opt) so.angles = angles_opt->as<std::string>();
      so.threads = threads;
      with_output(sweep_out, [&](std::ostream& out) { cmd_sweep(so, out); });
    } else if (*scheme) {
      return cmd_scheme(scheme_file, threads, std::cout, std::cerr);
    } else if (*wigner) {
      with_output(wigner_out, [&](std::ostream& out) { cmd_wigner_cut(wo, out); });
    }
  } catch (const UsageError& e) {
    std::cerr << "bellsim: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "bellsim: error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
