#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bellsim/conditioning.hpp"
#include "bellsim/optimize.hpp"
#include "bellsim/scheme_ir.hpp"

namespace bellsim {

enum class SchemeErrorCode { Syntax, UnknownOp, ModeRange, ParamRange };

/// "E_SYNTAX", "E_UNKNOWN_OP", "E_MODE_RANGE" or "E_PARAM_RANGE".
const char* error_code_name(SchemeErrorCode code);

class SchemeError : public std::runtime_error {
 public:
  SchemeError(SchemeErrorCode code, SourceLocation loc, const std::string& message);
  SchemeErrorCode code() const { return code_; }
  SourceLocation location() const { return loc_; }

 private:
  SchemeErrorCode code_;
  SourceLocation loc_;
};

/// Parses and validates a scheme document. Throws SchemeError at the first
/// problem. The format is described in docs/scheme-format.md.
SchemeIR parse_scheme(std::string_view text);
SchemeIR parse_scheme_file(const std::filesystem::path& path);

/// Canonical text form; parse_scheme(print_scheme(ir)) == ir.
std::string print_scheme(const SchemeIR& ir);

/// Conditioning problem for the scheme as written (no squeezing override).
ClickConditioning compile_scheme(const SchemeIR& ir);

/// Conditional signal state of the scheme.
SignedGaussianMixture scheme_state(const SchemeIR& ir);

struct SchemeRunOptions {
  AngleSearchOptions angles;
  int squeezing_grid_points = 24;
  double squeezing_tolerance = 1e-6;
};

struct SchemeReport {
  BellResult result;
  /// Set when the squeezing was optimized.
  std::optional<double> lambda;
  bool violates() const { return result.S > 2.0; }
};

/// Runs the measurement block: fixed or optimized settings, and optionally a
/// search over the common source squeezing.
SchemeReport compile_and_run(const SchemeIR& ir, const SchemeRunOptions& options = {});

/// Whether `report` satisfies the scheme's expect line (true without one).
/// A violation means S > 2 + margin.
bool meets_expectation(const SchemeIR& ir, const SchemeReport& report, double margin = 0.0);

}  // namespace bellsim
