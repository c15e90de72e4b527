#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apnorm/bounds.hpp"
#include "apnorm/modulus.hpp"
#include "apnorm/phase.hpp"
#include "apnorm/spectrum.hpp"

namespace apnorm {

/// One experiment, read from a line-oriented `key = value` file.
///
///   phase.kind         linear | cos | pl | cantor | nested
///   phase.slope        integer slope (linear)
///   phase.offset       constant offset (linear)
///   phase.breakpoints  comma list on [0, 2pi] (pl); `pi` suffixes allowed
///   phase.values       comma list (pl)
///   phase.depth        Cantor depth (cantor, nested)
///   phase.levels       nested levels (nested)
///   phase.modulate     integer m, replaces phi by phi + m t
///   modulus.kind       power | power_log
///   modulus.alpha, modulus.beta
///   lambda.min, lambda.max, lambda.count   log-spaced grid
///   p                  comma list in [1, 2]
///   band.exponent      K = ceil(lambda^exponent)
///   band.K             fixed K (overrides the exponent)
///   engine             auto | exact | dft
///   dft.oversample     >= 4
///   witness.count      admissible k per lambda
///   witness.c          Lip constant override
///   output.csv         default CSV destination for the CLI
///   threads            worker cap (0 = hardware / APNORM_THREADS)
///   seed               recorded; every probe grid is deterministic
struct ExperimentConfig {
  std::string phase_kind = "cos";
  int slope = 1;
  double offset = 0.0;
  std::vector<double> breakpoints, values;
  int depth = 6;
  int levels = 4;
  int modulate = 0;

  std::string modulus_kind = "power";
  double alpha = 0.5;
  double beta = 0.0;

  double lambda_min = 64.0;
  double lambda_max = 4096.0;
  int lambda_count = 7;
  std::vector<double> ps{1.0, 2.0};

  double band_exponent = 1.5;
  long band_K = 0;
  std::string engine = "auto";
  int oversample = 4;

  int witness_count = 16;
  std::optional<double> witness_c;

  std::string output_csv;
  unsigned threads = 0;
  std::uint64_t seed = 1;

  std::vector<double> lambda_grid() const;
  Modulus modulus() const;
  PhaseFn phase() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct NormRow {
  double lambda = 0.0;
  double p = 1.0;
  double lo = 0.0;
  double hi = 0.0;
  long K = 0;
  double tail = 0.0;
  std::string engine;
  double mid() const { return 0.5 * (lo + hi); }
};

inline constexpr const char* kNormsHeader = "lambda,p,norm_lo,norm_hi,band_K,tail,engine";
inline constexpr const char* kWitnessHeader = "lambda,k,t,measured,threshold,pass";

std::vector<NormRow> run_norms(const ExperimentConfig& cfg);
std::string norms_csv(const std::vector<NormRow>& rows);
std::vector<NormRow> parse_norms_csv(const std::string& text);
std::vector<NormRow> read_norms_csv(const std::string& path);

struct FitWindow {
  double lo = 0.0;
  double hi = 0.0;
};

struct GrowthFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double stderr_ = 0.0;
  FitWindow window;
  double residual_max = 0.0;
  int points = 0;
  std::vector<double> weights;
};

// Weighted least squares of log(mid) on log(lambda) over the rows with the
// given p inside the window; the default window is the upper half of the
// lambda range in log scale. Needs at least 4 distinct lambda values.
GrowthFit fit_exponent(const std::vector<NormRow>& rows, double p, std::optional<FitWindow> window = {});
// Rows for p sorted by lambda.
std::vector<NormRow> rows_for(const std::vector<NormRow>& rows, double p);

enum class EnvelopeKind { Lower, ThetaA, ThetaAp, C2, Log };
EnvelopeKind parse_envelope_kind(const std::string& name);
const char* envelope_name(EnvelopeKind kind);
double envelope_value(EnvelopeKind kind, const Modulus& m, double p, double lambda);

struct EnvelopeRow {
  double lambda = 0.0;
  double envelope = 0.0;
  double ratio_mid = 0.0;
  double ratio_hi = 0.0;
};

struct EnvelopeComparison {
  EnvelopeKind kind = EnvelopeKind::Lower;
  double p = 1.0;
  std::vector<EnvelopeRow> rows;
  double min_ratio = 0.0, max_ratio = 0.0;        // of mid / envelope
  double min_ratio_hi = 0.0, max_ratio_hi = 0.0;  // of hi / envelope
  double constant = 0.0;  // geometric mean of mid / envelope
  double spread() const { return max_ratio / min_ratio; }
  double spread_hi() const { return max_ratio_hi / min_ratio_hi; }
};

EnvelopeComparison compare_envelopes(const std::vector<NormRow>& rows, double p, EnvelopeKind kind,
                                     const Modulus& m, std::optional<FitWindow> window = {});

struct FinalCheck {
  double lambda = 0.0;
  double p = 1.0;
  double lhs = 0.0;
  double hi = 0.0;
  bool holds = false;
};

struct WitnessSuite {
  std::vector<WitnessReport> reports;
  std::vector<FinalCheck> final_checks;
  int passed = 0;
  int failed = 0;
  double min_margin = 0.0;  // min measured / threshold
  double lip_constant = 0.0;
  std::vector<std::string> warnings;
};

// Witness checks on the config's lambda grid and its p list (the p values
// are used for the final-inequality check only).
WitnessSuite witness_suite(const ExperimentConfig& cfg);
std::string witness_csv(const WitnessSuite& suite);

struct PlotOverlay {
  EnvelopeKind kind;
  Modulus modulus;
};

// Log-log SVG of the norm midpoints per p (error bars lo..hi) with
// envelopes scaled by their fitted constants. Throws on empty input.
std::string render_plot(const std::vector<NormRow>& rows, const std::vector<PlotOverlay>& overlays);
// Renders first and writes only on success.
void emit_plot(const std::vector<NormRow>& rows, const std::vector<PlotOverlay>& overlays, const std::string& path);

// Fixed-format float used by every CSV column.
std::string format_double(double x);

}  // namespace apnorm
