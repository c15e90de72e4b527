#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "apnorm/error.hpp"
#include "apnorm/lab.hpp"
#include "doctest.h"

using namespace apnorm;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<NormRow> synthetic(double (*f)(double), double lo, double hi, int count, double p = 1.0) {
  std::vector<NormRow> rows;
  for (int i = 0; i < count; ++i) {
    const double lam = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
    rows.push_back({lam, p, f(lam), f(lam), 1, 0.0, "exact"});
  }
  return rows;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("config defaults and parsing") {
  const auto cfg = parse_config(
      "# a comment\n"
      "phase.kind = pl\n"
      "phase.breakpoints = 0, 1.5pi, 2*pi   # trailing comment\n"
      "phase.values = 0, 1, 0\n"
      "lambda.min = 64\n"
      "lambda.max = 1024\n"
      "lambda.count = 5\n"
      "p = 1, 1.5, 2\n"
      "\n"
      "engine = exact\n"
      "seed = 7\n");
  CHECK(cfg.phase_kind == "pl");
  REQUIRE(cfg.breakpoints.size() == 3);
  CHECK(cfg.breakpoints[1] == doctest::Approx(1.5 * kPi));
  CHECK(cfg.breakpoints[2] == doctest::Approx(2 * kPi));
  CHECK(cfg.ps == std::vector<double>{1.0, 1.5, 2.0});
  CHECK(cfg.seed == 7);
  const auto g = cfg.lambda_grid();
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 64.0);
  CHECK(g.back() == 1024.0);
  CHECK(g[2] == doctest::Approx(256.0));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}

TEST_CASE("config errors carry line numbers") {
  auto line_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("phase.kind = cos\nbogus = 1\n") == 2);
  CHECK(line_of("\n\nphase.kind = spiral\n") == 3);
  CHECK(line_of("p = 1, 3\n") == 1);
  CHECK(line_of("lambda.min = 1\n") == 1);
  CHECK(line_of("lambda.min = 100\nlambda.max = 10\n") == 2);
  CHECK(line_of("phase.kind = cos\nphase.kind = cos\n") == 2);
  CHECK(line_of("no equals sign\n") == 1);
  CHECK(line_of("lambda.count = x\n") == 1);
  CHECK(line_of("phase.kind = pl\nphase.breakpoints = 0, 2pi\nphase.values = 0, 1, 0\n") == 3);
  CHECK(line_of("modulus.alpha = 1.5\n") == 1);
  try {
    parse_config("x = 1\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("line 1: ", 0) == 0);
  }
}

TEST_CASE("linear phase rows are exactly one") {
  auto cfg = parse_config("phase.kind = linear\nphase.slope = 2\nlambda.min = 2\nlambda.max = 64\nlambda.count = 6\np = 1, 1.5, 2\n");
  const auto rows = run_norms(cfg);
  REQUIRE(rows.size() == 18);
  for (const auto& r : rows) {
    CHECK(r.lo == 1.0);
    CHECK(r.hi == 1.0);
    CHECK(r.engine == "exact");
  }
}

TEST_CASE("p = 2 rows bracket 1") {
  for (const char* kind : {"cos", "cantor", "nested"}) {
    auto cfg = parse_config(std::string("phase.kind = ") + kind + "\nlambda.min = 16\nlambda.max = 256\nlambda.count = 3\np = 2\n");
    for (const auto& r : run_norms(cfg)) {
      CAPTURE(kind);
      CHECK(r.lo <= 1.0);
      CHECK(r.hi >= 1.0);
    }
  }
}

TEST_CASE("CSV round trip and byte-identical reruns") {
  auto cfg = parse_config("phase.kind = cantor\nlambda.min = 32\nlambda.max = 512\nlambda.count = 5\np = 1, 1.2\n");
  const auto a = norms_csv(run_norms(cfg));
  cfg.threads = 1;
  const auto b = norms_csv(run_norms(cfg));
  CHECK(a == b);
  CHECK(a.rfind(std::string(kNormsHeader) + "\n", 0) == 0);
  const auto rows = parse_norms_csv(a);
  REQUIRE(rows.size() == 10);
  CHECK(norms_csv(rows) == a);
  CHECK_THROWS_AS(parse_norms_csv("lambda,p\n1,2\n"), ConfigError);
  CHECK_THROWS_AS(parse_norms_csv(std::string(kNormsHeader) + "\n1,1,2,1,5,0,exact\n"), ConfigError);
  CHECK_THROWS_AS(read_norms_csv("/nonexistent/x.csv"), IoError);
}

TEST_CASE("fit recovers exact powers") {
  const auto rows = synthetic([](double x) { return std::sqrt(x); }, 2.0, 4096.0, 12);
  const auto fit = fit_exponent(rows, 1.0);
  CHECK(std::abs(fit.exponent - 0.5) <= 1e-12);
  CHECK(fit.stderr_ >= 0.0);
  CHECK(fit.stderr_ <= 1e-12);
  CHECK(fit.window.lo >= 2.0);
  CHECK(fit.window.hi == 4096.0);
  CHECK(fit.points == 6);
  const auto full = fit_exponent(rows, 1.0, FitWindow{2.0, 4096.0});
  CHECK(full.points == 12);
  CHECK(std::abs(full.exponent - 0.5) <= 1e-12);
}

TEST_CASE("fit of log data drifts toward zero") {
  const auto rows = synthetic([](double x) { return std::log(x); }, 8.0, 1e12, 40);
  double prev = 1e9;
  for (double top : {1e4, 1e6, 1e9, 1e12}) {
    const auto fit = fit_exponent(rows, 1.0, FitWindow{8.0, top});
    CHECK(fit.exponent > 0.0);
    CHECK(fit.exponent < prev);
    CHECK(fit.stderr_ > 0.0);
    prev = fit.exponent;
  }
  CHECK(prev < 0.1);
}

TEST_CASE("fit weights follow interval widths") {
  std::vector<NormRow> rows;
  for (int i = 0; i < 6; ++i) {
    const double lam = std::ldexp(1.0, 4 + i);
    const double y = lam;
    rows.push_back({lam, 1.0, y * (1 - 0.01 * (i + 1)), y * (1 + 0.01 * (i + 1)), 1, 0.0, "exact"});
  }
  const auto fit = fit_exponent(rows, 1.0, FitWindow{1.0, 1e9});
  CHECK(fit.weights.front() > fit.weights.back());
  CHECK(fit.exponent == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("fit needs four points") {
  const auto rows = synthetic([](double x) { return x; }, 2.0, 16.0, 4);
  CHECK_NOTHROW(fit_exponent(rows, 1.0, FitWindow{2.0, 16.0}));
  CHECK_THROWS_AS(fit_exponent(rows, 1.0), DomainError);
  CHECK_THROWS_AS(fit_exponent(rows, 2.0), DomainError);
  CHECK_THROWS_AS(fit_exponent(rows, 1.0, FitWindow{16.0, 2.0}), DomainError);
}

TEST_CASE("envelope compared with its own samples has ratio one") {
  const auto m = Modulus::power(0.5);
  std::vector<NormRow> rows;
  for (int e = 6; e <= 12; ++e) {
    const double lam = std::ldexp(1.0, e);
    const double v = lower_env(m, 1.0, lam);
    rows.push_back({lam, 1.0, v, v, 1, 0.0, "exact"});
  }
  const auto cmp = compare_envelopes(rows, 1.0, EnvelopeKind::Lower, m);
  CHECK(cmp.min_ratio == doctest::Approx(1.0));
  CHECK(cmp.max_ratio == doctest::Approx(1.0));
  CHECK(cmp.constant == doctest::Approx(1.0));
  CHECK(cmp.spread() == doctest::Approx(1.0));
  // Its fitted exponent is the asymptotic one, 1/3.
  CHECK(fit_exponent(rows, 1.0, FitWindow{64, 4096}).exponent == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(parse_envelope_kind("thetaAp") == EnvelopeKind::ThetaAp);
  CHECK_THROWS_AS(parse_envelope_kind("nope"), DomainError);
}

TEST_CASE("witness suite on cos passes everywhere") {
  auto cfg = parse_config("phase.kind = cos\nmodulus.alpha = 1\nlambda.min = 64\nlambda.max = 256\nlambda.count = 3\np = 1, 1.2\nwitness.count = 8\n");
  const auto s = witness_suite(cfg);
  CHECK(s.failed == 0);
  CHECK(s.passed == 24);
  CHECK(s.min_margin >= 1.0 - 1e-3);
  CHECK(s.final_checks.size() == 6);
  for (const auto& f : s.final_checks) CHECK(f.holds);
  const auto csv = witness_csv(s);
  CHECK(csv.rfind(std::string(kWitnessHeader) + "\n", 0) == 0);
}

TEST_CASE("witness suite on a constant phase runs zero tests") {
  auto cfg = parse_config("phase.kind = linear\nphase.slope = 0\nlambda.min = 64\nlambda.max = 256\nlambda.count = 3\n");
  const auto s = witness_suite(cfg);
  CHECK(s.reports.empty());
  CHECK(s.failed == 0);
  REQUIRE_FALSE(s.warnings.empty());
  CHECK(s.warnings[0].find("no admissible k") != std::string::npos);
}

TEST_CASE("plots") {
  const auto dir = std::filesystem::temp_directory_path() / "apnorm_lab_test";
  std::filesystem::create_directories(dir);
  const auto out = dir / "p.svg";
  std::filesystem::remove(out);
  CHECK_THROWS_AS(emit_plot({}, {}, out.string()), IoError);
  CHECK_FALSE(std::filesystem::exists(out));

  auto cfg = parse_config("phase.kind = cantor\nlambda.min = 32\nlambda.max = 512\nlambda.count = 5\np = 1, 1.2\n");
  const auto rows = run_norms(cfg);
  emit_plot(rows, {{EnvelopeKind::Lower, Modulus::power(0.5)}, {EnvelopeKind::ThetaAp, Modulus::power(0.5)}}, out.string());
  const auto svg = read_file(out);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find(kNormsHeader) != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("lower x ") != std::string::npos);
  CHECK(render_plot(rows, {}) == render_plot(rows, {}));
  std::filesystem::remove_all(dir);
}
