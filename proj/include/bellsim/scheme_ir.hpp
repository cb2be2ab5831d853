#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bellsim/bell.hpp"
#include "bellsim/gaussian.hpp"

namespace bellsim {

struct SourceLocation {
  int line = 0;
  int column = 0;
};

// Statements. Mode fields index SchemeIR::modes, tap fields index
// SchemeIR::taps. Squeezing values are the parameter s (lambda = tanh s).
struct SqueezeStmt {
  int mode;
  double s;
  bool operator==(const SqueezeStmt&) const = default;
};
struct TwoModeSqueezeStmt {
  int mode1, mode2;
  double s;
  bool operator==(const TwoModeSqueezeStmt&) const = default;
};
struct BeamSplitterStmt {
  int mode1, mode2;
  double transmittance;
  bool operator==(const BeamSplitterStmt&) const = default;
};
struct PhaseShiftStmt {
  int mode;
  double theta;
  bool operator==(const PhaseShiftStmt&) const = default;
};
/// Reflects part of `mode` onto a fresh vacuum ancilla headed for a
/// single-photon-sensitive detector of efficiency eta_pd.
struct TapStmt {
  int mode;
  double transmittance;
  double eta_pd;
  int tap;
  bool operator==(const TapStmt&) const = default;
};
/// Beam splitter between two tap ancillas before their detectors.
struct MixTapsStmt {
  int tap1, tap2;
  double transmittance;
  bool operator==(const MixTapsStmt&) const = default;
};
/// Condition on a click of each listed tap's detector.
struct DetectStmt {
  std::vector<int> taps;
  bool all = false;
  bool operator==(const DetectStmt&) const = default;
};
/// Trace the listed tap ancillas out without detecting them.
struct DropStmt {
  std::vector<int> taps;
  bool operator==(const DropStmt&) const = default;
};

using Statement = std::variant<SqueezeStmt, TwoModeSqueezeStmt, BeamSplitterStmt, PhaseShiftStmt, TapStmt,
                               MixTapsStmt, DetectStmt, DropStmt>;

struct LocatedStatement {
  Statement stmt;
  SourceLocation loc;
  bool operator==(const LocatedStatement& o) const { return stmt == o.stmt; }
};

enum class AngleMode { Canonical, Fixed, Optimize };

struct MeasurementBlock {
  AngleMode angles = AngleMode::Canonical;
  MeasurementSetting settings;
  bool optimize_squeezing = false;
  double lambda_min = 0.02;
  double lambda_max = 0.95;
  double eta_bhd = 1.0;
  double electronic_noise = 0.0;
  double v_noise = 0.0;
  ThermalNoiseUnits noise_units = ThermalNoiseUnits::QuadratureVariance;
  /// Alice's and Bob's modes.
  std::pair<int, int> pair{0, 1};
  bool operator==(const MeasurementBlock&) const = default;
};

/// Verdict the scheme is expected to reach; used by the bundled corpus.
struct Expectation {
  enum class Verdict { Violates, NoViolation } verdict = Verdict::NoViolation;
  std::optional<double> value;
  double tolerance = 0.0;
  bool operator==(const Expectation&) const = default;
};

struct SchemeIR {
  std::vector<std::string> modes;
  /// Tap names, in declaration order; ancilla j belongs to taps[j].
  std::vector<std::string> taps;
  std::vector<LocatedStatement> ops;
  MeasurementBlock measure;
  std::optional<Expectation> expect;
  bool operator==(const SchemeIR&) const = default;
};

/// Copy of `ir` whose SQZ and TMS sources all use squeezing atanh(lambda),
/// keeping each source's sign.
SchemeIR with_source_squeezing(const SchemeIR& ir, double lambda);

}  // namespace bellsim
