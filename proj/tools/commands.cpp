#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "bellsim/optimize.hpp"
#include "bellsim/pipeline.hpp"
#include "bellsim/scheme.hpp"

#ifndef BELLSIM_VERSION
#define BELLSIM_VERSION "unknown"
#endif

namespace bellsim::cli {

namespace {

double to_double(std::string_view s, const char* flag) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = first + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw UsageError(std::string(flag) + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(sep, start);
    out.push_back(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) return out;
    start = at + 1;
  }
}

template <class Pred>
void check_all(const std::vector<double>& values, Pred ok, const char* flag, const char* range) {
  for (double v : values) {
    if (!ok(v)) throw UsageError(std::string(flag) + ": value " + fmt(v) + " outside " + range);
  }
}

MeasurementSetting parse_angles(const std::string& spec) {
  const auto parts = split(spec, ',');
  if (parts.size() != 4) throw UsageError("--angles: expected theta1,theta2,phi1,phi2");
  return {to_double(parts[0], "--angles"), to_double(parts[1], "--angles"), to_double(parts[2], "--angles"),
          to_double(parts[3], "--angles")};
}

std::string meta_line(const std::string& key, const std::string& value) { return key + ": " + value; }

std::string optimum_row(const std::function<BellResult(double)>& evaluate) {
  try {
    const SqueezingOptimum best = optimize_squeezing(evaluate);
    return fmt(best.lambda) + "," + fmt(best.result.S) + "," + fmt(best.result.success_prob);
  } catch (const NumericalError&) {
    return "nan,nan,nan";
  }
}

std::string bell_row(const std::function<BellResult()>& evaluate) {
  try {
    const BellResult r = evaluate();
    return fmt(r.S) + "," + fmt(r.success_prob);
  } catch (const NumericalError&) {
    return "nan,nan";
  }
}

const std::vector<double> kTransmittances = {0.9, 0.95, 0.99};

// Rows over (T, x) for each T in kTransmittances and x in `xs`.
std::vector<std::string> per_transmittance(const std::vector<double>& xs, int threads,
                                           const std::function<std::string(double, double)>& row) {
  return run_ordered(kTransmittances.size() * xs.size(), threads, [&](std::size_t i) {
    const double t = kTransmittances[i / xs.size()];
    const double x = xs[i % xs.size()];
    return fmt(t) + "," + row(t, x);
  });
}

BellResult canonical(const MainSchemeConfig& config, double lambda) {
  return bell_factor(main_scheme_state(config, lambda), MeasurementSetting::canonical());
}

void write_file(const std::filesystem::path& path, const std::vector<std::string>& meta, const std::string& columns,
                const std::vector<std::string>& rows, std::vector<std::string>& written) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, meta, columns, rows);
  written.push_back(path.string());
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec, const char* flag) {
  if (spec.find(':') != std::string::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw UsageError(std::string(flag) + ": range is start:stop:count");
    const double a = to_double(parts[0], flag);
    const double b = to_double(parts[1], flag);
    const double n = to_double(parts[2], flag);
    if (!(n >= 1 && n == std::floor(n) && n <= 1e6)) throw UsageError(std::string(flag) + ": bad point count");
    const int count = static_cast<int>(n);
    if (count == 1) return {a};
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = a + (b - a) * i / (count - 1);
    return out;
  }
  std::vector<double> out;
  for (auto part : split(spec, ',')) out.push_back(to_double(part, flag));
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> run_ordered(std::size_t n, int threads, const std::function<std::string(std::size_t)>& row) {
  std::vector<std::string> rows(n);
  const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, 256));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        rows[i] = row(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(workers, n); ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void write_csv(std::ostream& out, const std::vector<std::string>& meta, const std::string& columns,
               const std::vector<std::string>& rows) {
  out << "# bellsim " << BELLSIM_VERSION << '\n';
  for (const auto& m : meta) out << "# " << m << '\n';
  out << columns << '\n';
  for (const auto& r : rows) out << r << '\n';
}

void cmd_sweep(const SweepOptions& o, std::ostream& out) {
  const auto lambdas = parse_grid(o.lambda, "--lambda");
  const auto ts = parse_grid(o.transmittance, "--T");
  const auto eta_pds = parse_grid(o.eta_pd, "--eta-pd");
  const auto eta_bhds = parse_grid(o.eta_bhd, "--eta-bhd");
  const auto nels = parse_grid(o.nel, "--nel");
  const auto vnoises = parse_grid(o.vnoise, "--vnoise");
  auto unit_open = [](double v) { return v > 0.0 && v < 1.0; };
  auto unit_half_open = [](double v) { return v > 0.0 && v <= 1.0; };
  auto nonneg = [](double v) { return v >= 0.0; };
  check_all(lambdas, [](double v) { return v >= 0.0 && v < 1.0; }, "--lambda", "[0, 1)");
  check_all(ts, unit_open, "--T", "(0, 1)");
  check_all(eta_pds, unit_half_open, "--eta-pd", "(0, 1]");
  check_all(eta_bhds, unit_half_open, "--eta-bhd", "(0, 1]");
  check_all(nels, nonneg, "--nel", "[0, inf)");
  check_all(vnoises, nonneg, "--vnoise", "[0, inf)");
  if (o.k != 0 && o.k != 2 && o.k != 4) throw UsageError("--k: must be 0, 2 or 4");
  if (o.angles && o.optimize_angles) throw UsageError("--angles and --optimize-angles are mutually exclusive");
  const MeasurementSetting fixed = o.angles ? parse_angles(*o.angles) : MeasurementSetting::canonical();

  struct Point {
    double t, eta_pd, eta_bhd, nel, vnoise, lambda;
  };
  std::vector<Point> grid;
  for (double t : ts)
    for (double ep : eta_pds)
      for (double eb : eta_bhds)
        for (double ne : nels)
          for (double vn : vnoises)
            for (double l : lambdas) grid.push_back({t, ep, eb, ne, vn, l});

  const auto rows = run_ordered(grid.size(), o.threads, [&](std::size_t i) {
    const Point& p = grid[i];
    MainSchemeConfig config;
    config.photons_per_arm = o.k / 2;
    config.transmittance = p.t;
    config.eta_pd = p.eta_pd;
    config.detection = {p.eta_bhd, p.nel};
    config.v_noise = p.vnoise;
    config.noise_units = o.noise_units;
    std::string row = fmt(p.lambda) + "," + fmt(p.t) + "," + fmt(p.eta_pd) + "," + fmt(p.eta_bhd) + "," +
                      fmt(p.nel) + "," + fmt(p.vnoise) + "," + std::to_string(o.k) + ",";
    try {
      const SignedGaussianMixture state = main_scheme_state(config, p.lambda);
      const BellResult r = o.optimize_angles ? optimize_angles(state) : bell_factor(state, fixed);
      const auto& s = r.settings;
      return row + fmt(s.theta1) + "," + fmt(s.theta2) + "," + fmt(s.phi1) + "," + fmt(s.phi2) + "," + fmt(r.S) +
             "," + fmt(state.success_prob());
    } catch (const NumericalError&) {
      return row + "nan,nan,nan,nan,nan,nan";
    }
  });
  const std::string angle_mode = o.optimize_angles ? "optimize" : (o.angles ? *o.angles : "canonical");
  write_csv(out,
            {meta_line("command", "sweep"), meta_line("angles", angle_mode),
             meta_line("vnoise_units", o.noise_units == ThermalNoiseUnits::ShotNoise ? "snu" : "variance")},
            "lambda,T,eta_pd,eta_bhd,nel,vnoise,k,theta1,theta2,phi1,phi2,S,P_G", rows);
}

void cmd_wigner_cut(const WignerCutOptions& o, std::ostream& out) {
  if (!(o.lambda > 0.0 && o.lambda < 1.0)) throw UsageError("--lambda: must lie in (0, 1)");
  if (!(o.transmittance > 0.0 && o.transmittance < 1.0)) throw UsageError("--T: must lie in (0, 1)");
  if (!(o.eta_pd > 0.0 && o.eta_pd <= 1.0)) throw UsageError("--eta-pd: must lie in (0, 1]");
  if (!(o.extent > 0.0) || o.points < 2) throw UsageError("--extent must be > 0 and --points >= 2");
  double ca = 0.0, cb = 0.0;
  if (o.axis == "diagonal") {
    ca = cb = 1.0;
  } else if (o.axis == "antidiagonal") {
    ca = 1.0;
    cb = -1.0;
  } else if (o.axis == "xA") {
    ca = 1.0;
  } else if (o.axis == "xB") {
    cb = 1.0;
  } else {
    throw UsageError("--axis: expected diagonal, antidiagonal, xA or xB");
  }
  MainSchemeConfig config;
  config.transmittance = o.transmittance;
  config.eta_pd = o.eta_pd;
  const SignedGaussianMixture state = main_scheme_state(config, o.lambda);
  std::vector<std::string> rows;
  for (int i = 0; i < o.points; ++i) {
    const double t = -o.extent + 2.0 * o.extent * i / (o.points - 1);
    Vector r = Vector::Zero(4);
    r(0) = ca * t;
    r(2) = cb * t;
    rows.push_back(fmt(t) + "," + fmt(r(0)) + "," + fmt(r(2)) + "," + fmt(state.wigner(r)));
  }
  write_csv(out,
            {meta_line("command", "wigner-cut"), meta_line("lambda", fmt(o.lambda)),
             meta_line("T", fmt(o.transmittance)), meta_line("eta_pd", fmt(o.eta_pd)), meta_line("axis", o.axis),
             meta_line("momenta", "p_A = p_B = 0")},
            "t,x_A,x_B,W", rows);
}

int cmd_scheme(const std::string& path, int /*threads*/, std::ostream& out, std::ostream& err) {
  SchemeIR ir;
  try {
    ir = parse_scheme_file(path);
  } catch (const SchemeError& e) {
    err << path << ": " << e.what() << '\n';
    return 1;
  } catch (const std::runtime_error& e) {
    err << e.what() << '\n';
    return 1;
  }
  const SchemeReport report = compile_and_run(ir);
  const BellResult& r = report.result;
  std::string expected = "-";
  std::string meets = "-";
  if (ir.expect) {
    expected = ir.expect->verdict == Expectation::Verdict::Violates ? "violates" : "none";
    meets = meets_expectation(ir, report) ? "yes" : "no";
  }
  const auto& s = r.settings;
  write_csv(out, {meta_line("command", "scheme"), meta_line("file", std::filesystem::path(path).filename().string())},
            "S,lambda,P_G,theta1,theta2,phi1,phi2,E11,E12,E21,E22,expected,meets",
            {fmt(r.S) + "," + (report.lambda ? fmt(*report.lambda) : "-") + "," + fmt(r.success_prob) + "," +
             fmt(s.theta1) + "," + fmt(s.theta2) + "," + fmt(s.phi1) + "," + fmt(s.phi2) + "," +
             fmt(r.correlations(0, 0)) + "," + fmt(r.correlations(0, 1)) + "," + fmt(r.correlations(1, 0)) + "," +
             fmt(r.correlations(1, 1)) + "," + expected + "," + meets});
  return 0;
}

const std::vector<std::string>& reproduce_targets() {
  static const std::vector<std::string> targets = {"fig2", "fig3", "fig5", "fig6", "fig7", "fig8", "schemes"};
  return targets;
}

std::vector<std::string> cmd_reproduce(const std::string& target, const std::string& out_dir,
                                       const std::string& scheme_dir, int threads) {
  const auto& known = reproduce_targets();
  if (std::find(known.begin(), known.end(), target) == known.end()) {
    throw std::out_of_range("unknown reproduce target '" + target + "'");
  }
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  const std::string angles = meta_line("angles", "theta = 0, pi/2; phi = -pi/4, pi/4");

  if (target == "fig2") {
    // Pure-state model: S against T*lambda, and the success probability at
    // T = 0.95.
    const auto xs = parse_grid("0.01:0.8:80", "fig2");
    const auto rows = run_ordered(xs.size(), threads, [&](std::size_t i) {
      const double x = xs[i];
      const auto model = pure_state_model(1, 1.0, x);
      const double s = munro_bell_factor(model.coefficients, MeasurementSetting::canonical()).S;
      const double p = pure_state_model(1, 0.95, x / 0.95).probability;
      return fmt(x) + "," + fmt(s) + "," + fmt(p);
    });
    write_file(dir / "fig2.csv", {meta_line("target", "fig2"), angles, meta_line("P", "T = 0.95")}, "T_lambda,S,P",
               rows, written);
  } else if (target == "fig3") {
    std::ofstream out(dir / "fig3.csv");
    cmd_wigner_cut({}, out);
    written.push_back((dir / "fig3.csv").string());
  } else if (target == "fig5") {
    const auto rows = per_transmittance(parse_grid("0.01:1:100", "fig5"), threads, [](double t, double eta) {
      MainSchemeConfig c;
      c.transmittance = t;
      c.eta_pd = eta;
      return fmt(eta) + "," + bell_row([&] { return canonical(c, 0.57 / t); });
    });
    write_file(dir / "fig5.csv", {meta_line("target", "fig5"), angles, meta_line("T_lambda", "0.57"),
                                  meta_line("eta_bhd", "1")},
               "T,eta_pd,S,P_G", rows, written);
  } else if (target == "fig6") {
    auto config = [](double t, double eta_bhd) {
      MainSchemeConfig c;
      c.transmittance = t;
      c.eta_pd = 0.3;
      c.detection.eta_bhd = eta_bhd;
      return c;
    };
    const auto a = per_transmittance(parse_grid("0.8:1:41", "fig6"), threads, [&](double t, double e) {
      return fmt(e) + "," + bell_row([&] { return canonical(config(t, e), 0.57 / t); });
    });
    write_file(dir / "fig6a.csv", {meta_line("target", "fig6"), angles, meta_line("T_lambda", "0.57"),
                                   meta_line("eta_pd", "0.3")},
               "T,eta_bhd,S,P_G", a, written);
    const auto bc = per_transmittance(parse_grid("0.8:1:21", "fig6"), threads, [&](double t, double e) {
      return fmt(e) + "," + optimum_row([&](double l) { return canonical(config(t, e), l); });
    });
    write_file(dir / "fig6bc.csv", {meta_line("target", "fig6"), angles, meta_line("eta_pd", "0.3"),
                                    meta_line("lambda_search", "0.02..0.95")},
               "T,eta_bhd,lambda_opt,S_opt,P_G", bc, written);
  } else if (target == "fig7") {
    const auto dbs = parse_grid("5:30:26", "fig7");
    auto base = [](double t) {
      MainSchemeConfig c;
      c.transmittance = t;
      c.eta_pd = 0.3;
      c.detection.eta_bhd = 0.95;
      return c;
    };
    const auto ab = per_transmittance(dbs, threads, [&](double t, double db) {
      MainSchemeConfig c = base(t);
      c.detection.electronic_noise = db_below_shot_noise(db);
      return fmt(db) + "," + fmt(c.detection.electronic_noise) + "," +
             optimum_row([&](double l) { return canonical(c, l); });
    });
    const std::vector<std::string> meta = {meta_line("target", "fig7"), angles, meta_line("eta_pd", "0.3"),
                                           meta_line("eta_bhd", "0.95"), meta_line("lambda_search", "0.02..0.95")};
    write_file(dir / "fig7ab.csv", meta, "T,nel_db_below_shot_noise,nel,lambda_opt,S_opt,P_G", ab, written);
    const auto cd = per_transmittance(dbs, threads, [&](double t, double db) {
      MainSchemeConfig c = base(t);
      c.v_noise = db_below_shot_noise(db);
      return fmt(db) + "," + fmt(c.v_noise) + "," + optimum_row([&](double l) { return canonical(c, l); });
    });
    auto meta_cd = meta;
    meta_cd.push_back(meta_line("vnoise_units", "variance"));
    write_file(dir / "fig7cd.csv", meta_cd, "T,vnoise_db_below_shot_noise,vnoise,lambda_opt,S_opt,P_G", cd, written);
  } else if (target == "fig8") {
    auto config = [](double t, double eta_bhd) {
      MainSchemeConfig c;
      c.photons_per_arm = 2;
      c.transmittance = t;
      c.detection.eta_bhd = eta_bhd;
      return c;
    };
    const auto a = per_transmittance(parse_grid("0.02:0.95:94", "fig8"), threads, [&](double t, double l) {
      return fmt(l) + "," + bell_row([&] { return canonical(config(t, 1.0), l); });
    });
    write_file(dir / "fig8a.csv", {meta_line("target", "fig8"), angles, meta_line("photons_per_arm", "2")},
               "T,lambda,S,P_G", a, written);
    const auto b = per_transmittance(parse_grid("0.8:1:41", "fig8"), threads, [&](double t, double e) {
      return fmt(e) + "," + bell_row([&] { return canonical(config(t, e), 0.40 / (t * t)); });
    });
    write_file(dir / "fig8b.csv", {meta_line("target", "fig8"), angles, meta_line("photons_per_arm", "2"),
                                   meta_line("T2_lambda", "0.40")},
               "T,eta_bhd,S,P_G", b, written);
  } else {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(scheme_dir)) {
      if (e.path().extension() == ".scheme") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    const auto rows = run_ordered(files.size(), threads, [&](std::size_t i) {
      const SchemeIR ir = parse_scheme_file(files[i]);
      const SchemeReport r = compile_and_run(ir);
      std::string expected = "-";
      if (ir.expect) expected = ir.expect->verdict == Expectation::Verdict::Violates ? "violates" : "none";
      return files[i].stem().string() + "," + fmt(r.result.S) + "," + (r.lambda ? fmt(*r.lambda) : "-") + "," +
             fmt(r.result.success_prob) + "," + expected + "," + (r.violates() ? "violates" : "none");
    });
    write_file(dir / "schemes.csv", {meta_line("target", "schemes"), meta_line("angles", "optimized")},
               "scheme,S,lambda_opt,P_G,expected,observed", rows, written);
  }
  return written;
}

}  // namespace bellsim::cli
