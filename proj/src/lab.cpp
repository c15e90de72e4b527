#include "apnorm/lab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "apnorm/detail/numeric.hpp"
#include "apnorm/detail/parallel.hpp"
#include "apnorm/error.hpp"

namespace apnorm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) return std::nullopt;
  return v;
}

// A number, optionally followed by `pi` (with or without `*`): 2pi, 0.5*pi, pi.
double parse_number(const std::string& raw, int line, const std::string& key) {
  std::string s = trim(raw);
  double factor = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    factor = kPi;
    s = trim(s.substr(0, s.size() - 2));
    if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
    if (s.empty()) s = "1";
  }
  const auto v = to_double(s);
  if (!v || !std::isfinite(*v)) throw ConfigError("'" + key + "' expects a number, got '" + raw + "'", line);
  return *v * factor;
}

long parse_integer(const std::string& raw, int line, const std::string& key) {
  const std::string s = trim(raw);
  long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ConfigError("'" + key + "' expects an integer, got '" + raw + "'", line);
  return v;
}

std::vector<double> parse_list(const std::string& raw, int line, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split(raw, ',')) {
    if (item.empty()) throw ConfigError("'" + key + "' has an empty list entry", line);
    out.push_back(parse_number(item, line, key));
  }
  if (out.empty()) throw ConfigError("'" + key + "' needs at least one value", line);
  return out;
}

const std::set<std::string> kPhaseKinds{"linear", "cos", "pl", "cantor", "nested"};
const std::set<std::string> kEngines{"auto", "exact", "dft"};

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    const std::string key = trim(body.substr(0, eq));
    const std::string val = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", line);
    if (val.empty()) throw ConfigError("'" + key + "' has no value", line);
    if (const auto it = seen.find(key); it != seen.end())
      throw ConfigError("duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")", line);
    seen[key] = line;

    auto num = [&] { return parse_number(val, line, key); };
    auto integer = [&] { return parse_integer(val, line, key); };
    if (key == "phase.kind") {
      if (!kPhaseKinds.count(val)) throw ConfigError("unknown phase kind '" + val + "'", line);
      cfg.phase_kind = val;
    } else if (key == "phase.slope") {
      cfg.slope = static_cast<int>(integer());
    } else if (key == "phase.offset") {
      cfg.offset = num();
    } else if (key == "phase.breakpoints") {
      cfg.breakpoints = parse_list(val, line, key);
    } else if (key == "phase.values") {
      cfg.values = parse_list(val, line, key);
    } else if (key == "phase.depth") {
      cfg.depth = static_cast<int>(integer());
      if (cfg.depth < 1 || cfg.depth > CantorLevels::kMaxMaterialized)
        throw ConfigError("phase.depth must be in [1, " + std::to_string(CantorLevels::kMaxMaterialized) + "]", line);
    } else if (key == "phase.levels") {
      cfg.levels = static_cast<int>(integer());
      if (cfg.levels < 1) throw ConfigError("phase.levels must be >= 1", line);
    } else if (key == "phase.modulate") {
      cfg.modulate = static_cast<int>(integer());
    } else if (key == "modulus.kind") {
      if (val != "power" && val != "power_log") throw ConfigError("unknown modulus kind '" + val + "'", line);
      cfg.modulus_kind = val;
    } else if (key == "modulus.alpha") {
      cfg.alpha = num();
    } else if (key == "modulus.beta") {
      cfg.beta = num();
    } else if (key == "lambda.min") {
      cfg.lambda_min = num();
      if (cfg.lambda_min < 2.0) throw ConfigError("lambda.min must be >= 2", line);
    } else if (key == "lambda.max") {
      cfg.lambda_max = num();
    } else if (key == "lambda.count") {
      cfg.lambda_count = static_cast<int>(integer());
      if (cfg.lambda_count < 1) throw ConfigError("lambda.count must be >= 1", line);
    } else if (key == "p") {
      cfg.ps = parse_list(val, line, key);
      for (double p : cfg.ps)
        if (!(p >= 1.0 && p <= 2.0)) throw ConfigError("p values must lie in [1, 2]", line);
    } else if (key == "band.exponent") {
      cfg.band_exponent = num();
      if (!(cfg.band_exponent >= 1.0)) throw ConfigError("band.exponent must be >= 1", line);
    } else if (key == "band.K") {
      cfg.band_K = integer();
      if (cfg.band_K < 1) throw ConfigError("band.K must be >= 1", line);
    } else if (key == "engine") {
      if (!kEngines.count(val)) throw ConfigError("unknown engine '" + val + "'", line);
      cfg.engine = val;
    } else if (key == "dft.oversample") {
      cfg.oversample = static_cast<int>(integer());
      if (cfg.oversample < 4) throw ConfigError("dft.oversample must be >= 4", line);
    } else if (key == "witness.count") {
      cfg.witness_count = static_cast<int>(integer());
      if (cfg.witness_count < 1) throw ConfigError("witness.count must be >= 1", line);
    } else if (key == "witness.c") {
      cfg.witness_c = num();
      if (!(*cfg.witness_c > 0.0)) throw ConfigError("witness.c must be > 0", line);
    } else if (key == "output.csv") {
      cfg.output_csv = val;
    } else if (key == "threads") {
      const long t = integer();
      if (t < 0) throw ConfigError("threads must be >= 0", line);
      cfg.threads = static_cast<unsigned>(t);
    } else if (key == "seed") {
      const long s = integer();
      if (s < 0) throw ConfigError("seed must be >= 0", line);
      cfg.seed = static_cast<std::uint64_t>(s);
    } else {
      throw ConfigError("unknown key '" + key + "'", line);
    }
  }

  auto at = [&](const char* key) {
    const auto it = seen.find(key);
    return it == seen.end() ? 0 : it->second;
  };
  if (!(cfg.lambda_max >= cfg.lambda_min))
    throw ConfigError("lambda.max must be >= lambda.min", at("lambda.max"));
  if (cfg.lambda_count > 1 && !(cfg.lambda_max > cfg.lambda_min))
    throw ConfigError("lambda grid must be strictly increasing", at("lambda.count"));
  if (cfg.lambda_count == 1 && cfg.lambda_max != cfg.lambda_min)
    throw ConfigError("a one-point lambda grid needs lambda.min == lambda.max", at("lambda.count"));
  if (cfg.phase_kind == "pl") {
    if (cfg.breakpoints.empty() || cfg.values.empty())
      throw ConfigError("phase.kind = pl needs phase.breakpoints and phase.values", at("phase.kind"));
    if (cfg.breakpoints.size() != cfg.values.size())
      throw ConfigError("phase.breakpoints and phase.values differ in length", at("phase.values"));
  }
  if (cfg.phase_kind == "nested" && cfg.depth < cfg.levels)
    throw ConfigError("phase.depth must be >= phase.levels", at("phase.depth"));
  // Build the objects once so construction errors surface as config errors.
  try {
    (void)cfg.modulus();
  } catch (const Error& e) {
    throw ConfigError(e.what(), at("modulus.alpha"));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<double> ExperimentConfig::lambda_grid() const {
  std::vector<double> g(static_cast<std::size_t>(lambda_count));
  if (lambda_count == 1) {
    g[0] = lambda_min;
    return g;
  }
  const double a = std::log(lambda_min), b = std::log(lambda_max);
  for (int i = 0; i < lambda_count; ++i) {
    g[i] = std::exp(a + (b - a) * i / (lambda_count - 1));
    // Integer frequencies are what make integer-slope spectra exact spikes.
    const double r = std::round(g[i]);
    if (std::abs(g[i] - r) <= 1e-12 * r) g[i] = r;
  }
  g.front() = lambda_min;
  g.back() = lambda_max;
  return g;
}

Modulus ExperimentConfig::modulus() const {
  return modulus_kind == "power" ? Modulus::power(alpha) : Modulus::power_log(alpha, beta);
}

PhaseFn ExperimentConfig::phase() const {
  auto build = [&]() -> PhaseFn {
    if (phase_kind == "linear") return linear_phase(slope, offset);
    if (phase_kind == "cos") return cos_phase();
    if (phase_kind == "pl") return pl_phase(breakpoints, values);
    if (phase_kind == "cantor") return cantor_primitive(modulus(), depth);
    return nested_phase(modulus(), levels, depth).phase;
  };
  PhaseFn f = build();
  return modulate == 0 ? f : apnorm::modulate(f, modulate);
}

namespace {

Engine pick_engine(const ExperimentConfig& cfg, const PhaseFn& phi) {
  if (cfg.engine == "exact") return Engine::Exact;
  if (cfg.engine == "dft") return Engine::Dft;
  return phi.is_affine() ? Engine::Exact : Engine::Dft;
}

long band_of(const ExperimentConfig& cfg, double lambda) {
  return cfg.band_K > 0 ? cfg.band_K : band_for(lambda, cfg.band_exponent);
}

// One task per lambda; each task writes its own slot.
template <class T>
std::vector<T> map_lambdas(const ExperimentConfig& cfg, const std::function<T(double)>& task) {
  const auto grid = cfg.lambda_grid();
  std::vector<T> out(grid.size());
  detail::parallel_for(grid.size(), detail::worker_count(cfg.threads), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = task(grid[i]);
  });
  return out;
}

}  // namespace

std::vector<NormRow> run_norms(const ExperimentConfig& cfg) {
  const PhaseFn phi = cfg.phase();
  const Engine engine = pick_engine(cfg, phi);
  const auto per_lambda = map_lambdas<std::vector<NormRow>>(cfg, [&](double lambda) {
    const auto s = compute_spectrum(phi, lambda, band_of(cfg, lambda), engine, cfg.oversample, 1);
    std::vector<NormRow> rows;
    for (double p : cfg.ps) {
      const auto n = ap_norm(s, p);
      rows.push_back({lambda, p, n.lo, n.hi, n.K, n.tail, engine_name(engine)});
    }
    return rows;
  });
  std::vector<NormRow> rows;
  for (const auto& r : per_lambda) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

std::string norms_csv(const std::vector<NormRow>& rows) {
  std::string out = std::string(kNormsHeader) + "\n";
  for (const auto& r : rows) {
    out += format_double(r.lambda) + "," + format_double(r.p) + "," + format_double(r.lo) + "," +
           format_double(r.hi) + "," + std::to_string(r.K) + "," + format_double(r.tail) + "," + r.engine + "\n";
  }
  return out;
}

std::vector<NormRow> parse_norms_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  std::vector<NormRow> rows;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n == 1) {
      if (line != kNormsHeader) throw ConfigError(std::string("expected header '") + kNormsHeader + "'", n);
      continue;
    }
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw ConfigError("expected 7 fields, got " + std::to_string(f.size()), n);
    NormRow r;
    r.lambda = parse_number(f[0], n, "lambda");
    r.p = parse_number(f[1], n, "p");
    r.lo = parse_number(f[2], n, "norm_lo");
    r.hi = parse_number(f[3], n, "norm_hi");
    r.K = parse_integer(f[4], n, "band_K");
    r.tail = parse_number(f[5], n, "tail");
    r.engine = f[6];
    if (!(r.lo <= r.hi)) throw ConfigError("norm_lo exceeds norm_hi", n);
    rows.push_back(r);
  }
  if (n == 0) throw ConfigError("empty CSV (no header)", 0);
  return rows;
}

std::vector<NormRow> read_norms_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open CSV '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_norms_csv(ss.str());
}

std::vector<NormRow> rows_for(const std::vector<NormRow>& rows, double p) {
  std::vector<NormRow> out;
  for (const auto& r : rows)
    if (r.p == p) out.push_back(r);
  std::stable_sort(out.begin(), out.end(), [](const NormRow& a, const NormRow& b) { return a.lambda < b.lambda; });
  return out;
}

namespace {

FitWindow default_window(const std::vector<NormRow>& rows) {
  const double a = std::log(rows.front().lambda), b = std::log(rows.back().lambda);
  return {std::exp(0.5 * (a + b)) * (1 - 1e-12), rows.back().lambda};
}

std::vector<NormRow> in_window(const std::vector<NormRow>& rows, const FitWindow& w) {
  std::vector<NormRow> out;
  for (const auto& r : rows)
    if (r.lambda >= w.lo && r.lambda <= w.hi) out.push_back(r);
  return out;
}

}  // namespace

GrowthFit fit_exponent(const std::vector<NormRow>& all, double p, std::optional<FitWindow> window) {
  const auto rows = rows_for(all, p);
  if (rows.empty()) throw DomainError("no rows with p = " + format_double(p));
  GrowthFit fit;
  fit.window = window ? *window : default_window(rows);
  if (!(fit.window.lo <= fit.window.hi)) throw DomainError("fit window is empty");
  const auto sel = in_window(rows, fit.window);
  std::set<double> distinct;
  for (const auto& r : sel) distinct.insert(r.lambda);
  if (distinct.size() < 4) throw DomainError("fit window holds fewer than 4 distinct lambda values");

  std::vector<double> x, y, w;
  for (const auto& r : sel) {
    if (!(r.lo > 0.0)) throw DomainError("fit needs positive norm intervals");
    x.push_back(std::log(r.lambda));
    y.push_back(std::log(r.mid()));
    const double half = 0.5 * std::log(r.hi / r.lo);
    w.push_back(1.0 / std::max(half, 1e-12));
  }
  detail::Accumulator sw, swx, swy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw.add(w[i]);
    swx.add(w[i] * x[i]);
    swy.add(w[i] * y[i]);
  }
  const double xm = swx.value() / sw.value(), ym = swy.value() / sw.value();
  detail::Accumulator sxx, sxy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx.add(w[i] * (x[i] - xm) * (x[i] - xm));
    sxy.add(w[i] * (x[i] - xm) * (y[i] - ym));
  }
  fit.exponent = sxy.value() / sxx.value();
  fit.intercept = ym - fit.exponent * xm;
  detail::Accumulator rss;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.exponent * x[i]);
    rss.add(w[i] * r * r);
    fit.residual_max = std::max(fit.residual_max, std::abs(r));
  }
  const double n = static_cast<double>(x.size());
  fit.stderr_ = std::sqrt(std::max(0.0, rss.value()) / (n - 2.0) / sxx.value());
  fit.points = static_cast<int>(x.size());
  fit.weights = w;
  return fit;
}

EnvelopeKind parse_envelope_kind(const std::string& name) {
  if (name == "lower") return EnvelopeKind::Lower;
  if (name == "thetaA") return EnvelopeKind::ThetaA;
  if (name == "thetaAp") return EnvelopeKind::ThetaAp;
  if (name == "c2") return EnvelopeKind::C2;
  if (name == "log") return EnvelopeKind::Log;
  throw DomainError("unknown envelope kind '" + name + "' (lower, thetaA, thetaAp, c2, log)");
}

const char* envelope_name(EnvelopeKind kind) {
  switch (kind) {
    case EnvelopeKind::Lower: return "lower";
    case EnvelopeKind::ThetaA: return "thetaA";
    case EnvelopeKind::ThetaAp: return "thetaAp";
    case EnvelopeKind::C2: return "c2";
    case EnvelopeKind::Log: return "log";
  }
  return "?";
}

double envelope_value(EnvelopeKind kind, const Modulus& m, double p, double lambda) {
  switch (kind) {
    case EnvelopeKind::Lower: return lower_env(m, p, lambda);
    case EnvelopeKind::ThetaA: return upper_env_A(m, lambda);
    case EnvelopeKind::ThetaAp: return upper_env_Ap(m, p, lambda);
    case EnvelopeKind::C2: return c2_env(p, lambda);
    case EnvelopeKind::Log:
      if (!(lambda > 1.0)) throw DomainError("log envelope needs lambda > 1");
      return std::log(lambda);
  }
  throw DomainError("unknown envelope kind");
}

EnvelopeComparison compare_envelopes(const std::vector<NormRow>& all, double p, EnvelopeKind kind, const Modulus& m,
                                     std::optional<FitWindow> window) {
  auto rows = rows_for(all, p);
  if (window) rows = in_window(rows, *window);
  if (rows.empty()) throw DomainError("no rows with p = " + format_double(p) + " in the window");
  EnvelopeComparison out;
  out.kind = kind;
  out.p = p;
  out.min_ratio = out.min_ratio_hi = std::numeric_limits<double>::infinity();
  detail::Accumulator logs;
  for (const auto& r : rows) {
    EnvelopeRow e;
    e.lambda = r.lambda;
    e.envelope = envelope_value(kind, m, p, r.lambda);
    if (!(e.envelope > 0.0)) throw DomainError("envelope is not positive at lambda = " + format_double(r.lambda));
    e.ratio_mid = r.mid() / e.envelope;
    e.ratio_hi = r.hi / e.envelope;
    out.min_ratio = std::min(out.min_ratio, e.ratio_mid);
    out.max_ratio = std::max(out.max_ratio, e.ratio_mid);
    out.min_ratio_hi = std::min(out.min_ratio_hi, e.ratio_hi);
    out.max_ratio_hi = std::max(out.max_ratio_hi, e.ratio_hi);
    logs.add(std::log(e.ratio_mid));
    out.rows.push_back(e);
  }
  out.constant = std::exp(logs.value() / static_cast<double>(out.rows.size()));
  return out;
}

WitnessSuite witness_suite(const ExperimentConfig& cfg) {
  WitnessSuite suite;
  const PhaseFn phi = cfg.phase();
  const Modulus m = cfg.modulus();
  double c = 0.0;
  if (cfg.witness_c) {
    c = *cfg.witness_c;
  } else if (phi.lip_cert() && phi.lip_cert()->modulus.describe() == m.describe()) {
    c = phi.lip_cert()->constant;
  } else {
    c = lip_estimate(phi, m);
  }
  suite.lip_constant = c;
  const auto range = derivative_range(phi);
  if (!(range.max > range.min)) {
    suite.warnings.push_back("no admissible k: phi' is constant, witness suite skipped");
    return suite;
  }
  if (!(c > 0.0)) {
    suite.warnings.push_back("Lip constant is 0: witness machinery disabled");
    return suite;
  }
  const Engine engine = pick_engine(cfg, phi);

  struct PerLambda {
    std::vector<WitnessReport> reports;
    std::vector<FinalCheck> checks;
    std::string warning;
  };
  const auto results = map_lambdas<PerLambda>(cfg, [&](double lambda) {
    PerLambda out;
    try {
      for (long k : admissible_ks(phi, lambda, cfg.witness_count)) out.reports.push_back(witness(phi, m, c, lambda, k));
      if (out.reports.empty()) {
        out.warning = "lambda = " + format_double(lambda) + ": no admissible k";
        return out;
      }
      const double d = delta_lambda(m, c, lambda);
      const auto s = compute_spectrum(phi, lambda, band_of(cfg, lambda), engine, cfg.oversample, 1);
      for (double p : cfg.ps) {
        FinalCheck f{lambda, p, final_inequality_lhs(range.max - range.min, lambda, d, p), ap_norm(s, p).hi, false};
        f.holds = f.lhs <= f.hi;
        out.checks.push_back(f);
      }
    } catch (const PreconditionError& e) {
      out.reports.clear();
      out.checks.clear();
      out.warning = "lambda = " + format_double(lambda) + " skipped: " + e.what();
    }
    return out;
  });
  suite.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    if (!r.warning.empty()) suite.warnings.push_back(r.warning);
    for (const auto& w : r.reports) {
      (w.pass ? suite.passed : suite.failed) += 1;
      suite.min_margin = std::min(suite.min_margin, w.measured / w.threshold);
      suite.reports.push_back(w);
    }
    suite.final_checks.insert(suite.final_checks.end(), r.checks.begin(), r.checks.end());
  }
  if (suite.reports.empty()) {
    suite.min_margin = 0.0;
    suite.warnings.push_back("no admissible k on the lambda grid: zero witness tests");
  }
  return suite;
}

std::string witness_csv(const WitnessSuite& suite) {
  std::string out = std::string(kWitnessHeader) + "\n";
  for (const auto& w : suite.reports) {
    out += format_double(w.lambda) + "," + std::to_string(w.k) + "," + format_double(w.t) + "," +
           format_double(w.measured) + "," + format_double(w.threshold) + "," + (w.pass ? "1" : "0") + "\n";
  }
  return out;
}

namespace {

constexpr double kW = 760, kH = 500, kLeft = 70, kRight = 150, kTop = 30, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string render_plot(const std::vector<NormRow>& rows, const std::vector<PlotOverlay>& overlays) {
  if (rows.empty()) throw IoError("nothing to plot: the CSV has no data rows");
  std::vector<double> ps;
  for (const auto& r : rows)
    if (std::find(ps.begin(), ps.end(), r.p) == ps.end()) ps.push_back(r.p);

  struct Curve {
    std::string label;
    std::string color;
    bool dashed;
    std::vector<std::pair<double, double>> pts;
  };
  std::vector<Curve> curves;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  auto extend = [&](double lx, double ly) {
    x0 = std::min(x0, lx);
    x1 = std::max(x1, lx);
    y0 = std::min(y0, ly);
    y1 = std::max(y1, ly);
  };
  for (const auto& r : rows) {
    if (!(r.lo > 0.0 && r.lambda > 0.0)) throw DomainError("plot needs positive lambda and norms");
    extend(std::log2(r.lambda), std::log2(r.lo));
    extend(std::log2(r.lambda), std::log2(r.hi));
  }
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto rp = rows_for(rows, ps[i]);
    Curve c{"A_p, p = " + format_double(ps[i]), kColors[i % 6], false, {}};
    for (const auto& r : rp) c.pts.push_back({std::log2(r.lambda), std::log2(r.mid())});
    curves.push_back(c);
    for (const auto& ov : overlays) {
      try {
        const auto cmp = compare_envelopes(rows, ps[i], ov.kind, ov.modulus);
        Curve e{std::string(envelope_name(ov.kind)) + " x " + num(cmp.constant), kColors[i % 6], true, {}};
        for (const auto& er : cmp.rows) {
          e.pts.push_back({std::log2(er.lambda), std::log2(cmp.constant * er.envelope)});
          extend(e.pts.back().first, e.pts.back().second);
        }
        curves.push_back(e);
      } catch (const DomainError&) {
        // envelope undefined for this p (e.g. thetaAp at p = 1): skip it
      }
    }
  }
  if (x1 == x0) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto X = [&](double lx) { return kLeft + (lx - x0) / (x1 - x0) * pw; };
  auto Y = [&](double ly) { return kTop + (y1 - ly) / (y1 - y0) * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kW) + "\" height=\"" + num(kH) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<!-- data\n" + norms_csv(rows) + "-->\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  const double ystep = std::max(1.0, std::ceil((y1 - y0) / 8.0));
  for (double e = std::ceil(x0); e <= x1 + 1e-9; e += 1.0) {
    s += "<line x1=\"" + num(X(e)) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(X(e)) + "\" y2=\"" +
         num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(X(e)) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">2^" +
         std::to_string(static_cast<int>(e)) + "</text>\n";
  }
  for (double e = std::ceil(y0); e <= y1 + 1e-9; e += ystep) {
    s += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(Y(e)) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(Y(e)) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(Y(e) + 4) + "\" text-anchor=\"end\">2^" +
         std::to_string(static_cast<int>(e)) + "</text>\n";
  }
  s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kH - 10) + "\" text-anchor=\"middle\">lambda</text>\n";
  s += "<text x=\"15\" y=\"" + num(kTop + ph / 2) + "\" transform=\"rotate(-90 15 " + num(kTop + ph / 2) +
       ")\" text-anchor=\"middle\">norm</text>\n";

  for (const auto& r : rows) {
    const std::size_t i = static_cast<std::size_t>(std::find(ps.begin(), ps.end(), r.p) - ps.begin());
    const double x = X(std::log2(r.lambda));
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(Y(std::log2(r.lo))) + "\" x2=\"" + num(x) + "\" y2=\"" +
         num(Y(std::log2(r.hi))) + "\" stroke=\"" + kColors[i % 6] + "\"/>\n";
    s += "<circle cx=\"" + num(x) + "\" cy=\"" + num(Y(std::log2(r.mid()))) + "\" r=\"2.5\" fill=\"" + kColors[i % 6] +
         "\"/>\n";
  }
  double legend_y = kTop + 10;
  for (const auto& c : curves) {
    std::string pts;
    for (const auto& [lx, ly] : c.pts) pts += num(X(lx)) + "," + num(Y(ly)) + " ";
    s += "<polyline fill=\"none\" stroke=\"" + c.color + "\"" + (c.dashed ? " stroke-dasharray=\"5,4\"" : "") +
         " points=\"" + pts + "\"/>\n";
    s += "<line x1=\"" + num(kW - kRight + 10) + "\" y1=\"" + num(legend_y) + "\" x2=\"" + num(kW - kRight + 30) +
         "\" y2=\"" + num(legend_y) + "\" stroke=\"" + c.color + "\"" +
         (c.dashed ? " stroke-dasharray=\"5,4\"" : "") + "/>\n";
    s += "<text x=\"" + num(kW - kRight + 35) + "\" y=\"" + num(legend_y + 4) + "\">" + xml_escape(c.label) +
         "</text>\n";
    legend_y += 18;
  }
  s += "</svg>\n";
  return s;
}

void emit_plot(const std::vector<NormRow>& rows, const std::vector<PlotOverlay>& overlays, const std::string& path) {
  const std::string svg = render_plot(rows, overlays);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << svg;
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace apnorm
