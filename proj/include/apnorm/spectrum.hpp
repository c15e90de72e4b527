#pragma once

#include <complex>
#include <string>
#include <vector>

#include "apnorm/phase.hpp"

namespace apnorm {

enum class Engine { Exact, Dft };
const char* engine_name(Engine e);

/// Fourier coefficients of e^{i lambda phi} on a band |k - center| <= K.
///
/// center = round(lambda * w); when lambda * w is an integer the band is
/// computed from the periodic part alone, so integer modulations shift the
/// coefficients without changing a single bit. `magnitude` holds |c_k| and is
/// what the norm code consumes (exactly 1 for a single-spike spectrum).
struct Spectrum {
  double lambda = 0.0;
  long K = 0;
  long center = 0;
  std::vector<std::complex<double>> coeffs;  // index j <-> k = center - K + j
  std::vector<double> magnitude;
  Engine engine = Engine::Exact;
  double band_error = 0.0;         // uniform per-coefficient error
  bool band_error_rigorous = true;  // false for the DFT engine (empirical)
  double perturbation_error = 0.0;  // |lambda| * sup|phi - ideal phi|

  // Data for tail bounds of G(t) = e^{i(lambda phi(t) - center t)}.
  bool affine = true;
  double lam_s1 = 0.0;   // sup |(lambda phi - center t)'|
  double lam_s2 = 0.0;   // sup |lambda phi''| (smooth phases)
  double lam_tv = 0.0;   // total slope variation times |lambda|, wrap jump included
  double jump = 0.0;     // |G(2 pi) - G(0)|
  int monotone_pieces = 1;
  double tail_pointwise = 0.0;  // C with |c_k| <= C / |k - center| beyond 2 lam_s1
  double tail_l2 = 0.0;         // bound on the l2 mass outside the band

  std::complex<double> coefficient(long k) const;
  long k_min() const { return center - K; }
  long k_max() const { return center + K; }
};

// K = ceil(|lambda|^exponent), at least 1.
long band_for(double lambda, double exponent = 1.5);

// Closed-form coefficients of a piecewise-affine phase.
Spectrum coeffs_affine_exact(const PhaseFn& phi, double lambda, long K, unsigned threads = 0);
// FFT coefficients from s * 2K samples, checked against 2s * 2K samples.
Spectrum coeffs_dft(const PhaseFn& phi, double lambda, long K, int oversample = 4);
// All N DFT coefficients of e^{i lambda phi} (k = 0..N-1, unshifted).
std::vector<std::complex<double>> dft_full(const PhaseFn& phi, double lambda, long N);
// Picks the exact engine for affine phases, the DFT engine otherwise.
Spectrum compute_spectrum(const PhaseFn& phi, double lambda, long K, Engine engine, int oversample = 4,
                          unsigned threads = 0);

// (1/2pi) int_{t0}^{t0 + len} e^{i((lambda a - k) s)} ds times
// e^{i(lambda v - k t0)}: one affine piece phi(t0 + s) = v + a s.
std::complex<double> affine_piece_coeff(double lambda, double v, double a, double t0, double len, double k);

// Fourier coefficients of the triangle of half-width eps centred at 0.
double triangle_coeffs(double eps, long k);

struct NormEstimate {
  double p = 1.0;
  double lo = 0.0;
  double hi = 0.0;
  long K = 0;
  double tail = 0.0;
  std::string tail_kind;
  // Interval for the infinite-depth phase: widens every coefficient by the
  // perturbation error as well.
  double ideal_lo = 0.0;
  double ideal_hi = 0.0;
};

NormEstimate ap_norm(const Spectrum& s, double p);

}  // namespace apnorm
