// Command-line front end; talks to the library only through apnorm.h.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "apnorm/apnorm.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kViolation = 2, kNumeric = 3 };

struct Failure {
  int code;
};

int exit_for(apn_status s) {
  switch (s) {
    case APN_OK: return kOk;
    case APN_ERR_NUMERIC:
    case APN_ERR_INTERNAL: return kNumeric;
    default: return kUsage;
  }
}

void check(apn_status s, const std::string& what) {
  if (s == APN_OK) return;
  std::cerr << "apnorm: " << what << ": " << apn_status_name(s) << ": " << apn_last_error() << "\n";
  throw Failure{exit_for(s)};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<apn_config, Deleter<apn_config, apn_config_free>>;
using Table = std::unique_ptr<apn_table, Deleter<apn_table, apn_table_free>>;
using Suite = std::unique_ptr<apn_suite, Deleter<apn_suite, apn_suite_free>>;
using ModulusPtr = std::unique_ptr<apn_modulus, Deleter<apn_modulus, apn_modulus_free>>;
using CString = std::unique_ptr<char, Deleter<char, apn_string_free>>;

Config load_config(const std::string& path) {
  apn_config* c = nullptr;
  check(apn_config_load(path.c_str(), &c), path);
  return Config(c);
}

Table load_table(const std::string& path) {
  apn_table* t = nullptr;
  check(apn_table_read_csv(path.c_str(), &t), path);
  return Table(t);
}

ModulusPtr make_modulus(double alpha, double beta) {
  apn_modulus* m = nullptr;
  check(beta == 0.0 ? apn_modulus_power(alpha, &m) : apn_modulus_power_log(alpha, beta, &m), "modulus");
  return ModulusPtr(m);
}

// Writes to path, or stdout when path is empty or "-".
void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out.flush()) {
    std::cerr << "apnorm: cannot write " << path << "\n";
    throw Failure{kUsage};
  }
}

std::optional<apn_window> parse_window(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    apn_window w{std::stod(s.substr(0, colon), &used), 0.0};
    if (used != colon) throw std::invalid_argument(s);
    const auto rest = s.substr(colon + 1);
    w.hi = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(s);
    return w;
  } catch (const std::logic_error&) {
    std::cerr << "apnorm: --window expects lo:hi, got '" << s << "'\n";
    throw Failure{kUsage};
  }
}

apn_window full_window(const apn_table* t, double p) {
  apn_window w{std::numeric_limits<double>::infinity(), 0.0};
  for (size_t i = 0; i < apn_table_rows(t); ++i) {
    apn_norm_row r;
    check(apn_table_row(t, i, &r), "table");
    if (r.p != p) continue;
    w.lo = std::min(w.lo, r.lambda);
    w.hi = std::max(w.hi, r.lambda);
  }
  return w;
}

void print_fit(const char* label, const apn_fit& f) {
  std::printf("%s: exponent %.6f +- %.6f over lambda in [%g, %g] (%d points, max residual %.3g)\n", label,
              f.exponent, f.stderr_, f.window.lo, f.window.hi, f.points, f.residual_max);
}

int cmd_norms(const std::string& config, const std::string& out) {
  auto cfg = load_config(config);
  apn_table* raw = nullptr;
  check(apn_run_norms(cfg.get(), &raw), "norms");
  Table t(raw);
  char* csv = nullptr;
  check(apn_table_csv(t.get(), &csv), "csv");
  CString owned(csv);
  emit(csv, out.empty() ? apn_config_output_csv(cfg.get()) : out);
  return kOk;
}

int cmd_fit(const std::string& csv, double p, const std::string& window) {
  auto t = load_table(csv);
  const auto w = parse_window(window);
  apn_fit f;
  check(apn_fit_exponent(t.get(), p, w ? &*w : nullptr, &f), "fit");
  print_fit(w ? "window" : "upper half", f);
  const auto full = full_window(t.get(), p);
  apn_fit g;
  if (apn_fit_exponent(t.get(), p, &full, &g) == APN_OK) print_fit("full range", g);
  return kOk;
}

int cmd_witness(const std::string& config, const std::string& out) {
  auto cfg = load_config(config);
  apn_suite* raw = nullptr;
  check(apn_witness_suite(cfg.get(), &raw), "witness");
  Suite s(raw);
  apn_suite_summary sum;
  check(apn_suite_summary_get(s.get(), &sum), "witness");
  char* csv = nullptr;
  check(apn_suite_csv(s.get(), &csv), "csv");
  CString owned(csv);
  emit(csv, out);
  for (size_t i = 0; i < sum.warnings; ++i) std::cerr << "warning: " << apn_suite_warning(s.get(), i) << "\n";
  std::cerr << "witness: " << sum.passed << " passed, " << sum.failed << " failed, Lip constant " << sum.lip_constant
            << ", min measured/threshold " << sum.min_margin << "\n";
  for (size_t i = 0; i < sum.final_checks; ++i) {
    apn_final_check fc;
    check(apn_suite_final(s.get(), i, &fc), "witness");
    if (!fc.holds)
      std::cerr << "final inequality fails at p=" << fc.p << " lambda=" << fc.lambda << ": " << fc.lhs << " > "
                << fc.hi << "\n";
  }
  std::cerr << "final inequality: " << sum.final_checks - sum.final_failed << "/" << sum.final_checks << " hold\n";
  return sum.failed > 0 || sum.final_failed > 0 ? kViolation : kOk;
}

apn_envelope parse_kind(const std::string& name) {
  apn_envelope k;
  check(apn_envelope_parse(name.c_str(), &k), "envelope");
  return k;
}

int cmd_envelopes(const std::string& csv, const std::string& kind, double p, double alpha, double beta,
                  const std::string& window) {
  auto t = load_table(csv);
  const auto k = parse_kind(kind);
  auto m = make_modulus(alpha, beta);
  const auto w = parse_window(window);
  apn_envelope_summary sum;
  check(apn_compare_envelopes(t.get(), p, k, m.get(), w ? &*w : nullptr, &sum, nullptr, 0), "envelopes");
  std::vector<apn_envelope_row> rows(sum.rows);
  check(apn_compare_envelopes(t.get(), p, k, m.get(), w ? &*w : nullptr, &sum, rows.data(), rows.size()),
        "envelopes");
  std::printf("lambda,envelope,ratio_mid,ratio_hi\n");
  for (const auto& r : rows) std::printf("%.17g,%.17g,%.17g,%.17g\n", r.lambda, r.envelope, r.ratio_mid, r.ratio_hi);
  std::fprintf(stderr, "%s p=%g: constant %.6g, mid/env in [%.6g, %.6g] (spread %.4g), hi/env in [%.6g, %.6g] (spread %.4g)\n",
               kind.c_str(), p, sum.constant, sum.min_ratio, sum.max_ratio, sum.max_ratio / sum.min_ratio,
               sum.min_ratio_hi, sum.max_ratio_hi, sum.max_ratio_hi / sum.min_ratio_hi);
  return kOk;
}

int cmd_plot(const std::string& csv, const std::string& out, const std::vector<std::string>& overlays, double alpha,
             double beta) {
  auto t = load_table(csv);
  std::vector<apn_envelope> kinds;
  for (const auto& o : overlays) kinds.push_back(parse_kind(o));
  auto m = make_modulus(alpha, beta);
  check(apn_plot(t.get(), kinds.data(), kinds.size(), m.get(), out.c_str()), "plot");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"A_p norms of exp(i lambda phi): tables, fits, witnesses and plots"};
  app.set_version_flag("--version", apn_version());
  app.require_subcommand(1);

  std::string config, csv, out, window, kind;
  double p = 1.0, alpha = 0.5, beta = 0.0;
  std::vector<std::string> overlays;

  auto* norms = app.add_subcommand("norms", "Compute a norm table from a config file");
  norms->add_option("config", config, "Experiment config")->required()->check(CLI::ExistingFile);
  norms->add_option("-o,--out", out, "CSV destination (default: output.csv from the config, else stdout)");

  auto* fit = app.add_subcommand("fit", "Fit the growth exponent of a norm table");
  fit->add_option("csv", csv, "Norm table")->required();
  fit->add_option("--p", p, "Exponent p")->required();
  fit->add_option("--window", window, "lambda window lo:hi (default: upper half in log scale)");

  auto* wit = app.add_subcommand("witness", "Run the coefficient witness suite of a config");
  wit->add_option("config", config, "Experiment config")->required()->check(CLI::ExistingFile);
  wit->add_option("-o,--out", out, "CSV destination (default: stdout)");

  auto* env = app.add_subcommand("envelopes", "Compare a norm table with an envelope");
  env->add_option("csv", csv, "Norm table")->required();
  env->add_option("--kind", kind, "lower | thetaA | thetaAp | c2 | log")->required();
  env->add_option("--p", p, "Exponent p")->required();
  env->add_option("--alpha", alpha, "Modulus exponent");
  env->add_option("--beta", beta, "Modulus log exponent");
  env->add_option("--window", window, "lambda window lo:hi (default: all rows)");

  auto* plot = app.add_subcommand("plot", "Render a norm table as a log-log SVG");
  plot->add_option("csv", csv, "Norm table")->required();
  plot->add_option("-o,--out", out, "SVG destination")->required();
  plot->add_option("--overlay", overlays, "Envelope overlays")->delimiter(',');
  plot->add_option("--alpha", alpha, "Modulus exponent");
  plot->add_option("--beta", beta, "Modulus log exponent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*norms) return cmd_norms(config, out);
    if (*fit) return cmd_fit(csv, p, window);
    if (*wit) return cmd_witness(config, out);
    if (*env) return cmd_envelopes(csv, kind, p, alpha, beta, window);
    if (*plot) return cmd_plot(csv, out, overlays, alpha, beta);
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "apnorm: " << e.what() << "\n";
    return kNumeric;
  }
  return kUsage;
}
