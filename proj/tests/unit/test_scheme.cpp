#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "bellsim/pipeline.hpp"
#include "bellsim/scheme.hpp"
#include "generators.hpp"

using namespace bellsim;

namespace {

struct ErrorCase {
  const char* text;
  SchemeErrorCode code;
  int line, column;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// A random valid scheme document.
std::string random_document(gen::Rng& rng) {
  static const char* kNames[] = {"A", "B", "C", "D"};
  int n = rng.integer(2, 4);
  std::ostringstream doc;
  doc << "mode";
  for (int m = 0; m < n; ++m) doc << ' ' << kNames[m];
  doc << '\n';
  auto mode = [&] { return kNames[rng.integer(0, n - 1)]; };
  auto pair = [&] {
    int a = rng.integer(0, n - 1);
    int b = (a + rng.integer(1, n - 1)) % n;
    return std::string(kNames[a]) + ' ' + kNames[b];
  };
  std::vector<std::string> open;
  int taps = 0;
  int steps = rng.integer(1, 8);
  for (int i = 0; i < steps; ++i) {
    switch (rng.integer(0, 5)) {
      case 0:
        doc << "SQZ " << mode() << " s=" << num(rng.uniform(-2, 2)) << '\n';
        break;
      case 1:
        doc << "TMS " << pair() << " lambda=" << num(rng.uniform(-0.9, 0.9)) << '\n';
        break;
      case 2:
        doc << "BS " << pair() << " T=" << num(rng.uniform(0.01, 1.0)) << '\n';
        break;
      case 3:
        doc << "PS " << mode() << " theta=" << num(rng.angle()) << '\n';
        break;
      default: {
        std::string name = rng.coin() ? "t" + std::to_string(++taps) : "tap" + std::to_string(++taps);
        doc << "TAP " << mode() << " T=" << num(rng.uniform(0.5, 0.999)) << " name=" << name;
        if (rng.coin()) doc << " eta=" << num(rng.uniform(0.05, 1.0));
        doc << '\n';
        open.push_back(name);
      }
    }
  }
  if (open.size() >= 2 && rng.coin()) doc << "MIXTAPS " << open[0] << ' ' << open[1] << '\n';
  if (!open.empty()) {
    if (rng.coin()) {
      doc << "DETECT *\n";
    } else {
      std::vector<std::string> det, drop;
      for (const auto& t : open) (rng.coin() || det.empty() ? det : drop).push_back(t);
      doc << "DETECT";
      for (const auto& t : det) doc << ' ' << t;
      doc << '\n';
      if (!drop.empty()) {
        doc << "DROP";
        for (const auto& t : drop) doc << ' ' << t;
        doc << '\n';
      }
    }
  }
  if (rng.coin()) {
    doc << "measure";
    switch (rng.integer(0, 2)) {
      case 0: doc << " settings=canonical"; break;
      case 1: doc << " settings=optimize"; break;
      default:
        doc << " settings=" << num(rng.angle()) << ',' << num(rng.angle()) << ',' << num(rng.angle()) << ','
            << num(rng.angle());
    }
    if (rng.coin()) doc << " squeezing=optimize lambda=" << num(rng.uniform(0.01, 0.3)) << ':' << num(rng.uniform(0.5, 0.99));
    if (rng.coin()) doc << " eta_bhd=" << num(rng.uniform(0.1, 1.0));
    if (rng.coin()) doc << " nel=" << num(rng.uniform(0, 0.5));
    if (rng.coin()) doc << " vnoise=" << num(rng.uniform(0, 0.5)) << " vnoise_units=" << (rng.coin() ? "snu" : "variance");
    if (rng.coin()) doc << " pair=" << kNames[n - 1] << ',' << kNames[0];
    doc << '\n';
  }
  if (rng.coin()) {
    doc << "expect verdict=" << (rng.coin() ? "violates" : "none");
    if (rng.coin()) doc << " S=" << num(rng.uniform(1.5, 2.5)) << " tol=" << num(rng.uniform(0, 0.01));
    doc << '\n';
  }
  return doc.str();
}

std::vector<std::filesystem::path> corpus() {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(BELLSIM_SCHEME_DIR))
    if (e.path().extension() == ".scheme") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

const char* kMainScheme =
    "mode A B\n"
    "TMS A B lambda=0.6\n"
    "TAP A T=0.99\n"
    "TAP B T=0.99\n"
    "DETECT *\n";

}  // namespace

TEST(SchemeParse, MainScheme) {
  SchemeIR ir = parse_scheme(kMainScheme);
  ASSERT_EQ(ir.modes, (std::vector<std::string>{"A", "B"}));
  ASSERT_EQ(ir.taps, (std::vector<std::string>{"t1", "t2"}));
  ASSERT_EQ(ir.ops.size(), 4u);
  const auto& tms = std::get<TwoModeSqueezeStmt>(ir.ops[0].stmt);
  EXPECT_DOUBLE_EQ(std::tanh(tms.s), 0.6);
  const auto& tap = std::get<TapStmt>(ir.ops[2].stmt);
  EXPECT_EQ(tap.mode, 1);
  EXPECT_EQ(tap.tap, 1);
  EXPECT_EQ(tap.eta_pd, 1.0);
  EXPECT_EQ(ir.ops[2].loc.line, 4);
  EXPECT_TRUE(std::get<DetectStmt>(ir.ops[3].stmt).all);
  EXPECT_EQ(ir.measure, MeasurementBlock{});
  EXPECT_FALSE(ir.expect);
}

TEST(SchemeParse, CommentsAndSemicolons) {
  SchemeIR a = parse_scheme(kMainScheme);
  SchemeIR b = parse_scheme("# comment\nmode A B; TMS A B lambda=0.6 # trailing\nTAP A T=0.99; TAP B T=0.99\nDETECT *");
  EXPECT_EQ(a, b);
}

TEST(SchemeParse, ErrorCodesAndLocations) {
  const ErrorCase cases[] = {
      {"mode A B\nBS A C T=1.5\n", SchemeErrorCode::ParamRange, 2, 10},
      {"mode A B\nBS A C T=0.5\n", SchemeErrorCode::ModeRange, 2, 6},
      {"mode A B\nFOO A\n", SchemeErrorCode::UnknownOp, 2, 1},
      {"mode A B\nBS A B\n", SchemeErrorCode::Syntax, 2, 1},
      {"mode A B\nBS A B T=abc\n", SchemeErrorCode::Syntax, 2, 10},
      {"mode A B\nTAP A T=1\nDETECT *\n", SchemeErrorCode::ParamRange, 2, 9},
      {"mode A B\nTAP A T=0.9\n", SchemeErrorCode::Syntax, 2, 1},
      {"mode A B\nTAP A T=0.9\nDETECT t1\nDROP t1\n", SchemeErrorCode::Syntax, 4, 6},
      {"mode A B\nTMS A A lambda=0.5\n", SchemeErrorCode::ModeRange, 2, 7},
      {"mode A B\nSQZ A lambda=1.2\n", SchemeErrorCode::ParamRange, 2, 14},
      {"mode A B\nmeasure lambda=0.9:0.1\n", SchemeErrorCode::ParamRange, 2, 16},
      {"BS A B T=0.5\n", SchemeErrorCode::Syntax, 1, 1},
      {"mode A B\nTAP A T=0.9\nDETECT t1\nMIXTAPS t1 t2\n", SchemeErrorCode::ModeRange, 4, 12},
  };
  for (const auto& c : cases) {
    try {
      parse_scheme(c.text);
      ADD_FAILURE() << "accepted: " << c.text;
    } catch (const SchemeError& e) {
      EXPECT_EQ(e.code(), c.code) << c.text << " -> " << e.what();
      EXPECT_EQ(e.location().line, c.line) << c.text << " -> " << e.what();
      EXPECT_EQ(e.location().column, c.column) << c.text << " -> " << e.what();
    }
  }
}

TEST(SchemeParse, ErrorMessageFormat) {
  try {
    parse_scheme("mode A B\nBS A C T=1.5\n");
    FAIL();
  } catch (const SchemeError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("E_PARAM_RANGE at 2:10:", 0), 0u) << e.what();
  }
  EXPECT_STREQ(error_code_name(SchemeErrorCode::UnknownOp), "E_UNKNOWN_OP");
  EXPECT_STREQ(error_code_name(SchemeErrorCode::ModeRange), "E_MODE_RANGE");
  EXPECT_STREQ(error_code_name(SchemeErrorCode::Syntax), "E_SYNTAX");
}

TEST(SchemeParse, SourceSqueezingOverride) {
  SchemeIR ir = parse_scheme("mode A B\nSQZ A lambda=0.5\nSQZ B lambda=-0.5\n");
  SchemeIR moved = with_source_squeezing(ir, 0.3);
  EXPECT_DOUBLE_EQ(std::get<SqueezeStmt>(moved.ops[0].stmt).s, std::atanh(0.3));
  EXPECT_DOUBLE_EQ(std::get<SqueezeStmt>(moved.ops[1].stmt).s, -std::atanh(0.3));
}

TEST(SchemeCompile, MainSchemeBitIdentical) {
  MainSchemeConfig cfg;
  BellResult hand = bell_factor(main_scheme_state(cfg, 0.6), MeasurementSetting::canonical());
  BellResult dsl = bell_factor(scheme_state(parse_scheme(kMainScheme)), MeasurementSetting::canonical());
  EXPECT_EQ(hand.S, dsl.S);
  EXPECT_EQ(hand.success_prob, dsl.success_prob);
  EXPECT_EQ(hand.correlations, dsl.correlations);
}

TEST(SchemeCompile, LossyMainSchemeBitIdentical) {
  MainSchemeConfig cfg;
  cfg.transmittance = 0.95;
  cfg.eta_pd = 0.3;
  cfg.detection = {0.9, 0.05};
  cfg.v_noise = 0.01;
  BellResult hand = bell_factor(main_scheme_state(cfg, 0.5), MeasurementSetting::canonical());
  SchemeIR ir = parse_scheme(
      "mode A B\nTMS A B lambda=0.5\nTAP A T=0.95 eta=0.3\nTAP B T=0.95 eta=0.3\nDETECT *\n"
      "measure eta_bhd=0.9 nel=0.05 vnoise=0.01\n");
  BellResult dsl = bell_factor(scheme_state(ir), MeasurementSetting::canonical());
  EXPECT_EQ(hand.S, dsl.S);
  EXPECT_EQ(hand.success_prob, dsl.success_prob);
}

TEST(SchemeCompile, NumericalErrorsCarryTheLocation) {
  SchemeIR ir = parse_scheme("mode A B\nTMS A B lambda=0\nTAP A T=0.99\nDETECT *\n");
  try {
    scheme_state(ir);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("scheme line"), std::string::npos) << e.what();
  }
}

TEST(SchemeCompile, FixedSettingsAndNoSqueezingSearch) {
  SchemeIR ir = parse_scheme(std::string(kMainScheme) + "measure settings=0,1.5707963267948966,-0.7853981633974483,0.7853981633974483\n");
  SchemeReport rep = compile_and_run(ir);
  EXPECT_FALSE(rep.lambda);
  MainSchemeConfig cfg;
  EXPECT_NEAR(rep.result.S, bell_factor(main_scheme_state(cfg, 0.6), MeasurementSetting::canonical()).S, 1e-15);
  EXPECT_TRUE(rep.violates());
}

TEST(SchemeCorpus, RoundTripsAndVerdicts) {
  auto files = corpus();
  ASSERT_GE(files.size(), 16u);
  for (const auto& f : files) {
    SCOPED_TRACE(f.filename().string());
    SchemeIR ir = parse_scheme_file(f);
    std::string printed = print_scheme(ir);
    SchemeIR again = parse_scheme(printed);
    EXPECT_EQ(again, ir);
    EXPECT_EQ(print_scheme(again), printed);
    ASSERT_TRUE(ir.expect);
    SchemeReport rep = compile_and_run(ir);
    EXPECT_TRUE(meets_expectation(ir, rep, 5e-4)) << "S = " << rep.result.S;
  }
}

// Properties over random inputs.

TEST(SchemeProperty, PrintParseRoundTrip) {
  gen::Rng rng(61);
  for (int trial = 0; trial < 300; ++trial) {
    std::string doc = random_document(rng);
    SCOPED_TRACE(doc);
    SchemeIR ir = parse_scheme(doc);
    std::string printed = print_scheme(ir);
    SchemeIR again = parse_scheme(printed);
    EXPECT_EQ(again, ir);
    EXPECT_EQ(print_scheme(again), printed);
  }
}

TEST(SchemeProperty, TruncatedDocumentsFailCleanly) {
  gen::Rng rng(62);
  for (int trial = 0; trial < 200; ++trial) {
    std::string doc = random_document(rng);
    std::string cut = doc.substr(0, rng.integer(0, static_cast<int>(doc.size())));
    try {
      parse_scheme(cut);
    } catch (const SchemeError& e) {
      EXPECT_GE(e.location().line, 1);
      EXPECT_GE(e.location().column, 1);
    }
  }
}
