#include "bellsim/scheme.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <type_traits>

namespace bellsim {

namespace {

constexpr double kMaxSqueezing = 10.0;

struct Token {
  std::string text;
  SourceLocation loc;
};

struct Param {
  Token key;
  Token value;
};

struct RawStatement {
  Token head;
  std::vector<Token> args;
  std::map<std::string, Param> params;
};

[[noreturn]] void fail(SchemeErrorCode code, SourceLocation loc, const std::string& msg) {
  throw SchemeError(code, loc, msg);
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::vector<RawStatement> tokenize(std::string_view text) {
  std::vector<RawStatement> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    RawStatement cur;
    bool open = false;
    auto flush = [&] {
      if (open) out.push_back(std::move(cur));
      cur = RawStatement{};
      open = false;
    };
    std::size_t i = 0;
    while (i < line.size()) {
      const char c = line[i];
      if (c == ';') {
        flush();
        ++i;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < line.size() && line[j] != ';' && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      Token tok{std::string(line.substr(i, j - i)), {line_no, static_cast<int>(i) + 1}};
      if (!open) {
        cur.head = std::move(tok);
        open = true;
      } else if (const auto eq = tok.text.find('='); eq != std::string::npos) {
        Param p{{tok.text.substr(0, eq), tok.loc},
                {tok.text.substr(eq + 1), {tok.loc.line, tok.loc.column + static_cast<int>(eq) + 1}}};
        if (p.key.text.empty() || p.value.text.empty()) fail(SchemeErrorCode::Syntax, tok.loc, "malformed parameter '" + tok.text + "'");
        if (cur.params.count(p.key.text)) fail(SchemeErrorCode::Syntax, tok.loc, "duplicate parameter '" + p.key.text + "'");
        cur.params.emplace(p.key.text, std::move(p));
      } else {
        cur.args.push_back(std::move(tok));
      }
      i = j;
    }
    flush();
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

double to_number(const Token& tok) {
  double v = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    fail(SchemeErrorCode::Syntax, tok.loc, "expected a number, got '" + tok.text + "'");
  }
  return v;
}

std::vector<Token> split_list(const Token& tok, char sep) {
  std::vector<Token> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = tok.text.find(sep, start);
    const std::size_t stop = at == std::string::npos ? tok.text.size() : at;
    out.push_back({tok.text.substr(start, stop - start), {tok.loc.line, tok.loc.column + static_cast<int>(start)}});
    if (out.back().text.empty()) fail(SchemeErrorCode::Syntax, tok.loc, "empty list element in '" + tok.text + "'");
    if (at == std::string::npos) break;
    start = at + 1;
  }
  return out;
}

class Parser {
 public:
  SchemeIR run(std::string_view text) {
    for (auto& st : tokenize(text)) statement(st);
    finish();
    return std::move(ir_);
  }

 private:
  SchemeIR ir_;
  bool have_modes_ = false;
  bool have_measure_ = false;
  std::vector<SourceLocation> tap_loc_;
  // Number of DETECT/DROP references per tap, and where the last one was.
  std::vector<int> tap_refs_;
  std::vector<bool> tap_closed_;
  bool detect_all_ = false;
  SourceLocation detect_all_loc_;

  void check_params(const RawStatement& st, std::initializer_list<const char*> allowed) {
    for (const auto& [key, p] : st.params) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        fail(SchemeErrorCode::Syntax, p.key.loc, "unknown parameter '" + key + "' for " + st.head.text);
      }
    }
  }

  void check_arity(const RawStatement& st, std::size_t n) {
    if (st.args.size() != n) {
      fail(SchemeErrorCode::Syntax, st.head.loc,
           st.head.text + " expects " + std::to_string(n) + " operand(s), got " + std::to_string(st.args.size()));
    }
  }

  const Param* find(const RawStatement& st, const char* key) {
    const auto it = st.params.find(key);
    return it == st.params.end() ? nullptr : &it->second;
  }

  const Param& require(const RawStatement& st, const char* key) {
    const Param* p = find(st, key);
    if (!p) fail(SchemeErrorCode::Syntax, st.head.loc, st.head.text + " requires " + key + "=");
    return *p;
  }

  template <class Pred>
  double number(const Param& p, Pred ok, const char* range) {
    const double v = to_number(p.value);
    if (!ok(v)) fail(SchemeErrorCode::ParamRange, p.value.loc, p.key.text + "=" + p.value.text + " outside " + range);
    return v;
  }

  static bool unit_open(double v) { return v > 0.0 && v < 1.0; }
  static bool unit_half_open(double v) { return v > 0.0 && v <= 1.0; }

  int mode_index(const Token& tok) {
    const auto it = std::find(ir_.modes.begin(), ir_.modes.end(), tok.text);
    if (it == ir_.modes.end()) fail(SchemeErrorCode::ModeRange, tok.loc, "unknown mode '" + tok.text + "'");
    return static_cast<int>(it - ir_.modes.begin());
  }

  int tap_index(const Token& tok) {
    const auto it = std::find(ir_.taps.begin(), ir_.taps.end(), tok.text);
    if (it == ir_.taps.end()) fail(SchemeErrorCode::ModeRange, tok.loc, "unknown tap '" + tok.text + "'");
    return static_cast<int>(it - ir_.taps.begin());
  }

  void distinct(int a, int b, const Token& tok) {
    if (a == b) fail(SchemeErrorCode::ModeRange, tok.loc, "operands must be distinct");
  }

  // Squeezing given as s= or lambda=.
  double squeezing(const RawStatement& st) {
    const Param* s = find(st, "s");
    const Param* l = find(st, "lambda");
    if ((s == nullptr) == (l == nullptr)) fail(SchemeErrorCode::Syntax, st.head.loc, st.head.text + " needs exactly one of s= or lambda=");
    if (s) return number(*s, [](double v) { return std::abs(v) <= kMaxSqueezing; }, "[-10, 10]");
    return std::atanh(number(*l, [](double v) { return std::abs(v) < 1.0; }, "(-1, 1)"));
  }

  void push(Statement s, const Token& head) { ir_.ops.push_back({std::move(s), head.loc}); }

  void statement(RawStatement& st) {
    const std::string& op = st.head.text;
    if (op == "mode") return modes(st);
    if (op == "measure") return measure(st);
    if (op == "expect") return expect(st);
    static const char* kOps[] = {"SQZ", "TMS", "BS", "PS", "TAP", "MIXTAPS", "DETECT", "DROP"};
    if (std::find(std::begin(kOps), std::end(kOps), op) == std::end(kOps)) {
      fail(SchemeErrorCode::UnknownOp, st.head.loc, "unknown statement '" + op + "'");
    }
    if (!have_modes_) fail(SchemeErrorCode::Syntax, st.head.loc, "mode declaration must come first");

    if (op == "SQZ") {
      check_params(st, {"s", "lambda"});
      check_arity(st, 1);
      const double s = squeezing(st);
      push(SqueezeStmt{mode_index(st.args[0]), s}, st.head);
    } else if (op == "TMS") {
      check_params(st, {"s", "lambda"});
      check_arity(st, 2);
      const double s = squeezing(st);
      const int a = mode_index(st.args[0]), b = mode_index(st.args[1]);
      distinct(a, b, st.args[1]);
      push(TwoModeSqueezeStmt{a, b, s}, st.head);
    } else if (op == "BS") {
      check_params(st, {"T"});
      check_arity(st, 2);
      const double t = number(require(st, "T"), unit_half_open, "(0, 1]");
      const int a = mode_index(st.args[0]), b = mode_index(st.args[1]);
      distinct(a, b, st.args[1]);
      push(BeamSplitterStmt{a, b, t}, st.head);
    } else if (op == "PS") {
      check_params(st, {"theta"});
      check_arity(st, 1);
      const double theta = to_number(require(st, "theta").value);
      push(PhaseShiftStmt{mode_index(st.args[0]), theta}, st.head);
    } else if (op == "TAP") {
      tap(st);
    } else if (op == "MIXTAPS") {
      check_params(st, {"T"});
      check_arity(st, 2);
      const Param* tp = find(st, "T");
      const double t = tp ? number(*tp, unit_half_open, "(0, 1]") : 0.5;
      const int a = tap_index(st.args[0]), b = tap_index(st.args[1]);
      distinct(a, b, st.args[1]);
      for (int k : {a, b}) {
        if (tap_closed_[k]) fail(SchemeErrorCode::Syntax, st.head.loc, "tap '" + ir_.taps[k] + "' is already detected or dropped");
      }
      push(MixTapsStmt{a, b, t}, st.head);
    } else {
      check_params(st, {});
      if (st.args.empty()) fail(SchemeErrorCode::Syntax, st.head.loc, op + " needs at least one tap");
      const bool detect = op == "DETECT";
      if (detect && st.args.size() == 1 && st.args[0].text == "*") {
        if (detect_all_) fail(SchemeErrorCode::Syntax, st.head.loc, "DETECT * given twice");
        detect_all_ = true;
        detect_all_loc_ = st.head.loc;
        push(DetectStmt{{}, true}, st.head);
        return;
      }
      std::vector<int> taps;
      for (const auto& t : st.args) {
        const int k = tap_index(t);
        ++tap_refs_[k];
        tap_closed_[k] = true;
        if (tap_refs_[k] > 1) fail(SchemeErrorCode::Syntax, t.loc, "tap '" + t.text + "' referenced more than once");
        taps.push_back(k);
      }
      if (detect) {
        push(DetectStmt{std::move(taps), false}, st.head);
      } else {
        push(DropStmt{std::move(taps)}, st.head);
      }
    }
  }

  void modes(const RawStatement& st) {
    if (have_modes_) fail(SchemeErrorCode::Syntax, st.head.loc, "modes declared twice");
    if (!st.params.empty()) fail(SchemeErrorCode::Syntax, st.head.loc, "mode takes no parameters");
    if (st.args.size() < 2) fail(SchemeErrorCode::Syntax, st.head.loc, "at least two modes required");
    for (const auto& t : st.args) {
      if (!is_identifier(t.text)) fail(SchemeErrorCode::Syntax, t.loc, "invalid mode name '" + t.text + "'");
      if (std::find(ir_.modes.begin(), ir_.modes.end(), t.text) != ir_.modes.end()) {
        fail(SchemeErrorCode::Syntax, t.loc, "duplicate mode '" + t.text + "'");
      }
      ir_.modes.push_back(t.text);
    }
    have_modes_ = true;
  }

  void tap(const RawStatement& st) {
    check_params(st, {"T", "eta", "name"});
    check_arity(st, 1);
    const double t = number(require(st, "T"), unit_open, "(0, 1)");
    const Param* ep = find(st, "eta");
    const double eta = ep ? number(*ep, unit_half_open, "(0, 1]") : 1.0;
    const int mode = mode_index(st.args[0]);
    std::string name = "t" + std::to_string(ir_.taps.size() + 1);
    if (const Param* np = find(st, "name")) {
      if (!is_identifier(np->value.text)) fail(SchemeErrorCode::Syntax, np->value.loc, "invalid tap name");
      name = np->value.text;
    }
    if (std::find(ir_.taps.begin(), ir_.taps.end(), name) != ir_.taps.end() ||
        std::find(ir_.modes.begin(), ir_.modes.end(), name) != ir_.modes.end()) {
      fail(SchemeErrorCode::Syntax, st.head.loc, "name '" + name + "' already in use");
    }
    if (detect_all_) fail(SchemeErrorCode::Syntax, st.head.loc, "TAP after DETECT *");
    ir_.taps.push_back(name);
    tap_loc_.push_back(st.head.loc);
    tap_refs_.push_back(0);
    tap_closed_.push_back(false);
    push(TapStmt{mode, t, eta, static_cast<int>(ir_.taps.size()) - 1}, st.head);
  }

  void measure(const RawStatement& st) {
    if (!have_modes_) fail(SchemeErrorCode::Syntax, st.head.loc, "mode declaration must come first");
    if (have_measure_) fail(SchemeErrorCode::Syntax, st.head.loc, "measure given twice");
    check_params(st, {"settings", "squeezing", "lambda", "eta_bhd", "nel", "vnoise", "vnoise_units", "pair"});
    check_arity(st, 0);
    have_measure_ = true;
    MeasurementBlock& m = ir_.measure;
    if (const Param* p = find(st, "settings")) {
      if (p->value.text == "canonical") {
        m.angles = AngleMode::Canonical;
      } else if (p->value.text == "optimize") {
        m.angles = AngleMode::Optimize;
      } else {
        const auto parts = split_list(p->value, ',');
        if (parts.size() != 4) fail(SchemeErrorCode::Syntax, p->value.loc, "settings needs four angles");
        m.angles = AngleMode::Fixed;
        m.settings = {to_number(parts[0]), to_number(parts[1]), to_number(parts[2]), to_number(parts[3])};
      }
    }
    if (const Param* p = find(st, "squeezing")) {
      if (p->value.text != "fixed" && p->value.text != "optimize") {
        fail(SchemeErrorCode::Syntax, p->value.loc, "squeezing must be fixed or optimize");
      }
      m.optimize_squeezing = p->value.text == "optimize";
    }
    if (const Param* p = find(st, "lambda")) {
      const auto parts = split_list(p->value, ':');
      if (parts.size() != 2) fail(SchemeErrorCode::Syntax, p->value.loc, "lambda range is min:max");
      m.lambda_min = to_number(parts[0]);
      m.lambda_max = to_number(parts[1]);
      if (!(m.lambda_min > 0.0 && m.lambda_min < m.lambda_max && m.lambda_max < 1.0)) {
        fail(SchemeErrorCode::ParamRange, p->value.loc, "lambda range must satisfy 0 < min < max < 1");
      }
    }
    if (const Param* p = find(st, "eta_bhd")) m.eta_bhd = number(*p, unit_half_open, "(0, 1]");
    if (const Param* p = find(st, "nel")) m.electronic_noise = number(*p, [](double v) { return v >= 0.0; }, "[0, inf)");
    if (const Param* p = find(st, "vnoise")) m.v_noise = number(*p, [](double v) { return v >= 0.0; }, "[0, inf)");
    if (const Param* p = find(st, "vnoise_units")) {
      if (p->value.text == "variance") {
        m.noise_units = ThermalNoiseUnits::QuadratureVariance;
      } else if (p->value.text == "snu") {
        m.noise_units = ThermalNoiseUnits::ShotNoise;
      } else {
        fail(SchemeErrorCode::Syntax, p->value.loc, "vnoise_units must be variance or snu");
      }
    }
    if (const Param* p = find(st, "pair")) {
      const auto parts = split_list(p->value, ',');
      if (parts.size() != 2) fail(SchemeErrorCode::Syntax, p->value.loc, "pair needs two modes");
      m.pair = {mode_index(parts[0]), mode_index(parts[1])};
      distinct(m.pair.first, m.pair.second, parts[1]);
    }
  }

  void expect(const RawStatement& st) {
    if (ir_.expect) fail(SchemeErrorCode::Syntax, st.head.loc, "expect given twice");
    check_params(st, {"verdict", "S", "tol"});
    check_arity(st, 0);
    Expectation e;
    const Param& v = require(st, "verdict");
    if (v.value.text == "violates") {
      e.verdict = Expectation::Verdict::Violates;
    } else if (v.value.text == "none") {
      e.verdict = Expectation::Verdict::NoViolation;
    } else {
      fail(SchemeErrorCode::Syntax, v.value.loc, "verdict must be violates or none");
    }
    if (const Param* p = find(st, "S")) e.value = number(*p, [](double x) { return x >= 0.0 && x <= 4.0; }, "[0, 4]");
    if (const Param* p = find(st, "tol")) {
      if (!e.value) fail(SchemeErrorCode::Syntax, p->key.loc, "tol= needs S=");
      e.tolerance = number(*p, [](double x) { return x >= 0.0; }, "[0, inf)");
    }
    ir_.expect = e;
  }

  void finish() {
    if (!have_modes_) fail(SchemeErrorCode::Syntax, {1, 1}, "missing mode declaration");
    if (detect_all_) {
      for (std::size_t k = 0; k < ir_.taps.size(); ++k) {
        if (tap_refs_[k] > 0) fail(SchemeErrorCode::Syntax, detect_all_loc_, "DETECT * overlaps tap '" + ir_.taps[k] + "'");
      }
      return;
    }
    for (std::size_t k = 0; k < ir_.taps.size(); ++k) {
      if (tap_refs_[k] == 0) fail(SchemeErrorCode::Syntax, tap_loc_[k], "tap '" + ir_.taps[k] + "' is neither detected nor dropped");
    }
  }
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string with_location(const std::string& what, SourceLocation loc) {
  return what + " (scheme line " + std::to_string(loc.line) + ", column " + std::to_string(loc.column) + ")";
}

bool pristine_all(const std::vector<bool>& pristine, std::initializer_list<int> modes) {
  return std::all_of(modes.begin(), modes.end(), [&](int m) { return pristine[m]; });
}

}  // namespace

const char* error_code_name(SchemeErrorCode code) {
  switch (code) {
    case SchemeErrorCode::Syntax: return "E_SYNTAX";
    case SchemeErrorCode::UnknownOp: return "E_UNKNOWN_OP";
    case SchemeErrorCode::ModeRange: return "E_MODE_RANGE";
    case SchemeErrorCode::ParamRange: return "E_PARAM_RANGE";
  }
  return "E_UNKNOWN";
}

SchemeError::SchemeError(SchemeErrorCode code, SourceLocation loc, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + " at " + std::to_string(loc.line) + ":" +
                         std::to_string(loc.column) + ": " + message),
      code_(code),
      loc_(loc) {}

SchemeIR parse_scheme(std::string_view text) { return Parser().run(text); }

SchemeIR parse_scheme_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scheme file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scheme(buf.str());
}

std::string print_scheme(const SchemeIR& ir) {
  std::ostringstream out;
  out << "mode";
  for (const auto& m : ir.modes) out << ' ' << m;
  out << '\n';
  auto taps_list = [&](const std::vector<int>& taps) {
    std::string s;
    for (int t : taps) s += ' ' + ir.taps.at(t);
    return s;
  };
  for (const auto& located : ir.ops) {
    std::visit(
        [&](const auto& op) {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, SqueezeStmt>) {
            out << "SQZ " << ir.modes[op.mode] << " s=" << num(op.s);
          } else if constexpr (std::is_same_v<T, TwoModeSqueezeStmt>) {
            out << "TMS " << ir.modes[op.mode1] << ' ' << ir.modes[op.mode2] << " s=" << num(op.s);
          } else if constexpr (std::is_same_v<T, BeamSplitterStmt>) {
            out << "BS " << ir.modes[op.mode1] << ' ' << ir.modes[op.mode2] << " T=" << num(op.transmittance);
          } else if constexpr (std::is_same_v<T, PhaseShiftStmt>) {
            out << "PS " << ir.modes[op.mode] << " theta=" << num(op.theta);
          } else if constexpr (std::is_same_v<T, TapStmt>) {
            out << "TAP " << ir.modes[op.mode] << " T=" << num(op.transmittance) << " eta=" << num(op.eta_pd)
                << " name=" << ir.taps.at(op.tap);
          } else if constexpr (std::is_same_v<T, MixTapsStmt>) {
            out << "MIXTAPS " << ir.taps.at(op.tap1) << ' ' << ir.taps.at(op.tap2) << " T=" << num(op.transmittance);
          } else if constexpr (std::is_same_v<T, DetectStmt>) {
            out << "DETECT" << (op.all ? std::string(" *") : taps_list(op.taps));
          } else {
            out << "DROP" << taps_list(op.taps);
          }
        },
        located.stmt);
    out << '\n';
  }
  const MeasurementBlock& m = ir.measure;
  out << "measure settings=";
  switch (m.angles) {
    case AngleMode::Canonical: out << "canonical"; break;
    case AngleMode::Optimize: out << "optimize"; break;
    case AngleMode::Fixed:
      out << num(m.settings.theta1) << ',' << num(m.settings.theta2) << ',' << num(m.settings.phi1) << ','
          << num(m.settings.phi2);
      break;
  }
  out << " squeezing=" << (m.optimize_squeezing ? "optimize" : "fixed") << " lambda=" << num(m.lambda_min) << ':'
      << num(m.lambda_max) << " eta_bhd=" << num(m.eta_bhd) << " nel=" << num(m.electronic_noise)
      << " vnoise=" << num(m.v_noise)
      << " vnoise_units=" << (m.noise_units == ThermalNoiseUnits::ShotNoise ? "snu" : "variance")
      << " pair=" << ir.modes.at(m.pair.first) << ',' << ir.modes.at(m.pair.second) << '\n';
  if (ir.expect) {
    out << "expect verdict=" << (ir.expect->verdict == Expectation::Verdict::Violates ? "violates" : "none");
    if (ir.expect->value) out << " S=" << num(*ir.expect->value) << " tol=" << num(ir.expect->tolerance);
    out << '\n';
  }
  return out.str();
}

SchemeIR with_source_squeezing(const SchemeIR& ir, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("with_source_squeezing: lambda must lie in (0, 1)");
  SchemeIR out = ir;
  const double s = std::atanh(lambda);
  for (auto& located : out.ops) {
    if (auto* sq = std::get_if<SqueezeStmt>(&located.stmt)) sq->s = std::copysign(s, sq->s);
    if (auto* tm = std::get_if<TwoModeSqueezeStmt>(&located.stmt)) tm->s = std::copysign(s, tm->s);
  }
  return out;
}

ClickConditioning compile_scheme(const SchemeIR& ir) {
  const int n = static_cast<int>(ir.modes.size());
  const int k = static_cast<int>(ir.taps.size());
  const MeasurementBlock& m = ir.measure;
  Matrix cov = Matrix::Identity(2 * (n + k), 2 * (n + k));
  GaussianState joint(GaussianState::Unchecked{}, cov, Vector::Zero(2 * (n + k)));
  std::vector<bool> pristine(n, true);
  ClickConditioning setup{joint, n, std::vector<double>(k, 1.0), {}, {}};
  std::vector<bool> detected(k, false);

  auto set_block = [&](const GaussianState& source, std::initializer_list<int> modes) {
    Matrix c = setup.joint.cov();
    const std::vector<int> ms(modes);
    for (std::size_t a = 0; a < ms.size(); ++a) {
      for (std::size_t b = 0; b < ms.size(); ++b) {
        c.block<2, 2>(2 * ms[a], 2 * ms[b]) = source.cov().block<2, 2>(2 * a, 2 * b);
      }
    }
    setup.joint = GaussianState(GaussianState::Unchecked{}, std::move(c), setup.joint.disp());
    if (m.v_noise > 0.0) setup.joint = add_input_thermal_noise(setup.joint, m.v_noise, ms, m.noise_units);
    for (int mode : ms) pristine[mode] = false;
  };

  for (const auto& located : ir.ops) {
    try {
      std::visit(
          [&](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, SqueezeStmt>) {
              if (pristine[op.mode]) {
                set_block(single_mode_squeezed(op.s), {op.mode});
              } else {
                setup.joint = apply_symplectic(setup.joint, sm_squeezer_op(op.s, op.mode));
              }
            } else if constexpr (std::is_same_v<T, TwoModeSqueezeStmt>) {
              if (pristine_all(pristine, {op.mode1, op.mode2})) {
                set_block(two_mode_squeezed(op.s), {op.mode1, op.mode2});
              } else {
                setup.joint = apply_symplectic(setup.joint, tms_squeezer_op(op.s, op.mode1, op.mode2));
                pristine[op.mode1] = pristine[op.mode2] = false;
              }
            } else if constexpr (std::is_same_v<T, BeamSplitterStmt>) {
              setup.joint = apply_symplectic(setup.joint, beam_splitter_op(op.transmittance, op.mode1, op.mode2));
              pristine[op.mode1] = pristine[op.mode2] = false;
            } else if constexpr (std::is_same_v<T, PhaseShiftStmt>) {
              setup.joint = apply_symplectic(setup.joint, phase_shift_op(op.theta, op.mode));
              pristine[op.mode] = false;
            } else if constexpr (std::is_same_v<T, TapStmt>) {
              setup.joint = apply_symplectic(setup.joint, beam_splitter_op(op.transmittance, op.mode, n + op.tap));
              setup.ancilla_eta[op.tap] = op.eta_pd;
              pristine[op.mode] = false;
            } else if constexpr (std::is_same_v<T, MixTapsStmt>) {
              setup.ancilla_mixer.push_back(beam_splitter_op(op.transmittance, op.tap1, op.tap2));
            } else if constexpr (std::is_same_v<T, DetectStmt>) {
              if (op.all) std::fill(detected.begin(), detected.end(), true);
              for (int t : op.taps) detected[t] = true;
            }
          },
          located.stmt);
    } catch (const NumericalError& e) {
      throw NumericalError(with_location(e.what(), located.loc));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(with_location(e.what(), located.loc));
    }
  }
  for (int t = 0; t < k; ++t) {
    if (detected[t]) setup.detected.push_back(t);
  }
  return setup;
}

SignedGaussianMixture scheme_state(const SchemeIR& ir) {
  const ClickConditioning setup = compile_scheme(ir);
  try {
    return condition_on_clicks(setup, DetectionModel{ir.measure.eta_bhd, ir.measure.electronic_noise});
  } catch (const NumericalError& e) {
    SourceLocation loc;
    for (const auto& located : ir.ops) {
      if (std::holds_alternative<DetectStmt>(located.stmt)) loc = located.loc;
    }
    throw NumericalError(with_location(e.what(), loc));
  }
}

SchemeReport compile_and_run(const SchemeIR& ir, const SchemeRunOptions& options) {
  const MeasurementBlock& m = ir.measure;
  auto evaluate = [&](const SchemeIR& variant) {
    const SignedGaussianMixture state = scheme_state(variant);
    switch (m.angles) {
      case AngleMode::Canonical: return bell_factor(state, MeasurementSetting::canonical(), m.pair);
      case AngleMode::Fixed: return bell_factor(state, m.settings, m.pair);
      case AngleMode::Optimize: break;
    }
    return optimize_angles(state, options.angles, m.pair);
  };
  SchemeReport report;
  if (!m.optimize_squeezing) {
    report.result = evaluate(ir);
    return report;
  }
  SqueezingSearchOptions search{m.lambda_min, m.lambda_max, options.squeezing_grid_points, options.squeezing_tolerance};
  const SqueezingOptimum best =
      optimize_squeezing([&](double lambda) { return evaluate(with_source_squeezing(ir, lambda)); }, search);
  report.result = best.result;
  report.lambda = best.lambda;
  return report;
}

bool meets_expectation(const SchemeIR& ir, const SchemeReport& report, double margin) {
  if (!ir.expect) return true;
  const Expectation& e = *ir.expect;
  const bool violates = report.result.S > 2.0 + margin;
  const bool verdict_ok = (e.verdict == Expectation::Verdict::Violates) == violates;
  if (!e.value) return verdict_ok;
  return verdict_ok && std::abs(report.result.S - *e.value) <= e.tolerance;
}

}  // namespace bellsim
