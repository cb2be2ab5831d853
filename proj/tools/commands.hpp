#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bellsim/bell.hpp"
#include "bellsim/gaussian.hpp"

namespace bellsim::cli {

/// Invalid flag values or combinations; the tool exits with status 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// "v", "v1,v2,..." or "start:stop:count" (inclusive, evenly spaced).
std::vector<double> parse_grid(const std::string& spec, const char* flag);

/// "%.12g".
std::string fmt(double v);

/// Runs row(i) for i in [0, n) on `threads` workers and returns the rows in
/// index order.
std::vector<std::string> run_ordered(std::size_t n, int threads, const std::function<std::string(std::size_t)>& row);

/// Writes `#` metadata lines, the column header and the rows.
void write_csv(std::ostream& out, const std::vector<std::string>& meta, const std::string& columns,
               const std::vector<std::string>& rows);

struct SweepOptions {
  std::string lambda = "0.57";
  std::string transmittance = "0.99";
  std::string eta_pd = "1";
  std::string eta_bhd = "1";
  std::string nel = "0";
  std::string vnoise = "0";
  ThermalNoiseUnits noise_units = ThermalNoiseUnits::QuadratureVariance;
  int k = 2;
  std::optional<std::string> angles;
  bool optimize_angles = false;
  int threads = 1;
};

void cmd_sweep(const SweepOptions& options, std::ostream& out);

struct WignerCutOptions {
  double lambda = 0.6;
  double transmittance = 0.95;
  /// diagonal (x_B = x_A), antidiagonal (x_B = -x_A), xA or xB.
  std::string axis = "antidiagonal";
  double eta_pd = 1.0;
  double extent = 3.0;
  int points = 121;
};

void cmd_wigner_cut(const WignerCutOptions& options, std::ostream& out);

/// Returns the process exit status: 0, or 1 on parse errors.
int cmd_scheme(const std::string& path, int threads, std::ostream& out, std::ostream& err);

/// Writes <out_dir>/<target>*.csv. Throws std::out_of_range for an unknown
/// target. Returns the files written.
std::vector<std::string> cmd_reproduce(const std::string& target, const std::string& out_dir,
                                       const std::string& scheme_dir, int threads);

/// Known reproduce targets.
const std::vector<std::string>& reproduce_targets();

}  // namespace bellsim::cli
