#include "apnorm/spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>

#include "apnorm/detail/numeric.hpp"
#include "apnorm/detail/parallel.hpp"
#include "apnorm/error.hpp"

namespace apnorm {

namespace {

using cplx = std::complex<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long kReseed = 32;
// Per-piece roundoff allowance of the closed-form engine.
constexpr double kPieceRoundoff = 1e-13;

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Fills the tail-bound inputs for G(t) = e^{i(lambda phi(t) - center t)}.
void fill_tail_data(Spectrum& s, const PhaseFn& phi) {
  const double lam = std::abs(s.lambda);
  const double theta = s.lambda * phi.winding() - static_cast<double>(s.center);
  s.affine = phi.is_affine();
  s.monotone_pieces = phi.monotone_pieces();
  s.tail_pointwise = 2.0 * phi.monotone_pieces();
  s.jump = 2.0 * std::abs(detail::sin2pi(0.5 * theta));
  if (phi.is_affine()) {
    const auto& a = phi.base_slopes();
    double s1 = 0.0, tv = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      s1 = std::max(s1, std::abs(std::fma(s.lambda, a[i], theta)));
      tv += std::abs(a[(i + 1) % a.size()] - a[i]);
    }
    s.lam_s1 = s1;
    s.lam_tv = lam * tv;
  } else {
    const auto& q = phi.smooth();
    s.lam_s1 = lam * q.sup_dq + std::abs(theta);
    s.lam_s2 = lam * q.sup_d2q;
  }
  s.perturbation_error = lam * phi.perturbation();

  const double Kp1 = static_cast<double>(s.K) + 1.0;
  double l2 = kInf;
  if (s.jump == 0.0) {
    l2 = s.lam_s1 / Kp1;
    if (!s.affine) l2 = std::min(l2, (s.lam_s2 + s.lam_s1 * s.lam_s1) / (Kp1 * Kp1));
  }
  if (static_cast<double>(s.K) >= 2.0 * s.lam_s1)
    l2 = std::min(l2, s.tail_pointwise * std::sqrt(2.0 / static_cast<double>(s.K)));
  s.tail_l2 = l2;
}

void fill_magnitudes(Spectrum& s) {
  s.magnitude.resize(s.coeffs.size());
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) s.magnitude[i] = std::abs(s.coeffs[i]);
}

// e^{i(hi + lo)} for |lo| tiny.
cplx expi2(double hi, double lo) { return cplx(std::cos(hi), std::sin(hi)) * cplx(1.0, lo); }

// e^{i(P - j t)} with P = p_hi + p_lo and j t formed exactly.
cplx expi_shift(double p_hi, double p_lo, double j, double t) {
  const double jt = j * t;
  const double jt_err = std::fma(j, t, -jt);
  const double s = p_hi - jt;
  const double bb = s - p_hi;
  const double err = (p_hi - (s - bb)) + (-jt - bb);
  return expi2(s, p_lo - jt_err + err);
}

long next_smooth(long n) {
  for (long m = std::max(1L, n);; ++m) {
    long r = m;
    for (long f : {2L, 3L, 5L})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

// Samples of G on N points and their forward DFT divided by N. The buffer
// comes from fftw_malloc so the plan (and its roundoff) does not depend on
// where the allocator happened to put it.
std::vector<cplx> sampled_transform(const PhaseFn& phi, double lambda, double theta, long N) {
  struct Buffer {
    fftw_complex* p;
    ~Buffer() { fftw_free(p); }
  } buf{fftw_alloc_complex(static_cast<std::size_t>(N))};
  if (!buf.p) throw NumericError("out of memory for a DFT of size " + std::to_string(N));
  for (long n = 0; n < N; ++n) {
    const double t = kTwoPi * static_cast<double>(n) / static_cast<double>(N);
    const double arg = lambda * phi.base_value(t) + theta * t;
    buf.p[n][0] = std::cos(arg);
    buf.p[n][1] = std::sin(arg);
  }
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(N), buf.p, buf.p, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  if (!plan) throw NumericError("FFTW could not create a plan");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  const double inv = 1.0 / static_cast<double>(N);
  std::vector<cplx> out(static_cast<std::size_t>(N));
  for (long n = 0; n < N; ++n) out[n] = cplx(buf.p[n][0] * inv, buf.p[n][1] * inv);
  return out;
}

double holder_tail(double B, int r, double K, double p) {
  if (p == 2.0) return B / std::pow(K + 1.0, r);
  const double q = 2.0 * r * p / (2.0 - p);
  const double S = 2.0 * std::pow(K, 1.0 - q) / (q - 1.0);
  return B * std::pow(S, (2.0 - p) / (2.0 * p));
}

// sum_{|j| > K} (|j| - a)^{-q} <= 2 (K - a)^{1-q} / (q - 1), q > 1.
double shifted_zeta_tail(double K, double a, double q) { return 2.0 * std::pow(K - a, 1.0 - q) / (q - 1.0); }

struct Tail {
  double value = kInf;
  std::string kind = "none";
  void offer(double v, const char* k) {
    if (v < value) {
      value = v;
      kind = k;
    }
  }
};

Tail tail_bound(const Spectrum& s, double p, double lo_band) {
  Tail t;
  const double K = static_cast<double>(s.K);
  if (s.jump == 0.0) {
    t.offer(holder_tail(s.lam_s1, 1, K, p), "l2-derivative");
    if (!s.affine) t.offer(holder_tail(s.lam_s2 + s.lam_s1 * s.lam_s1, 2, K, p), "l2-second-derivative");
  }
  if (K >= 2.0 * s.lam_s1 && K >= 1.0) {
    const double C = s.tail_pointwise;
    if (p > 1.0) {
      t.offer(C * std::pow(2.0 * std::pow(K, 1.0 - p) / (p - 1.0), 1.0 / p), "van-der-corput");
    } else if (s.jump == 0.0) {
      const double lam = std::abs(s.lambda);
      const double K2 = std::max(K, lam * lam);
      t.offer(2.0 * C * std::log(K2 / K) + s.lam_s1 * std::sqrt(2.0 / K2), "van-der-corput+l2");
    }
  }
  if (s.affine && K > s.lam_s1) {
    double v = 0.0;
    if (s.jump > 0.0) v += p == 1.0 ? kInf : s.jump * std::pow(shifted_zeta_tail(K, s.lam_s1, p), 1.0 / p);
    if (s.lam_tv > 0.0) v += s.lam_tv * std::pow(shifted_zeta_tail(K, s.lam_s1, 2.0 * p), 1.0 / p);
    t.offer(v / kTwoPi, "kink");
  }
  if (p == 2.0) t.offer(std::sqrt(std::max(0.0, 1.0 - lo_band * lo_band)), "parseval");
  return t;
}

struct BandSums {
  double lo = 0.0, hi = 0.0;
};

BandSums band_sums(const std::vector<double>& mag, double e, double p) {
  detail::Accumulator lo, hi;
  std::size_t nnz = 0;
  for (double m : mag) {
    if (m > 0.0) ++nnz;
    if (m > e) lo.add(std::pow(m - e, p));
    if (m + e > 0.0) hi.add(std::pow(m + e, p));
  }
  BandSums out{std::pow(lo.value(), 1.0 / p), std::pow(hi.value(), 1.0 / p)};
  if (nnz > 1 || e > 0.0) {
    const double slack = 16.0 * detail::kUnitRoundoff * static_cast<double>(std::max<std::size_t>(nnz, 1));
    out.lo *= 1.0 - slack;
    out.hi *= 1.0 + slack;
  }
  return out;
}

}  // namespace

const char* engine_name(Engine e) { return e == Engine::Exact ? "exact" : "dft"; }

std::complex<double> Spectrum::coefficient(long k) const {
  if (k < center - K || k > center + K) throw DomainError("coefficient outside the computed band");
  return coeffs[static_cast<std::size_t>(k - center + K)];
}

long band_for(double lambda, double exponent) {
  return std::max(1L, static_cast<long>(std::ceil(std::pow(std::abs(lambda), exponent))));
}

std::complex<double> affine_piece_coeff(double lambda, double v, double a, double t0, double len, double k) {
  const double beta = std::fma(lambda, a, -k);
  const cplx e = detail::exp_i_diff(lambda, v, k, t0);
  const double x = beta * len;
  if (std::abs(x) < 0.5) {
    return e * cplx(std::cos(0.5 * x), std::sin(0.5 * x)) * (len * detail::sinc(0.5 * x) / kTwoPi);
  }
  const cplx r = detail::exp_i_diff(lambda * a, len, k, len);
  return e * (r - 1.0) * cplx(0.0, -1.0 / (beta * kTwoPi));
}

Spectrum coeffs_affine_exact(const PhaseFn& phi, double lambda, long K, unsigned threads) {
  if (!phi.is_affine())
    throw DispatchError("phase '" + phi.name() + "' is smooth; use the DFT engine (coeffs_dft)");
  if (K < 1) throw DomainError("band K must be >= 1");
  Spectrum s;
  s.lambda = lambda;
  s.K = K;
  s.engine = Engine::Exact;
  s.center = std::lround(lambda * phi.winding());
  const double theta = lambda * phi.winding() - static_cast<double>(s.center);
  fill_tail_data(s, phi);

  const auto& t = phi.knots();
  const auto& b = phi.base_values();
  const auto& a = phi.base_slopes();
  const std::size_t n = a.size();
  const std::size_t width = static_cast<std::size_t>(2 * K + 1);
  s.coeffs.assign(width, cplx(0.0, 0.0));

  // Single full-circle piece with integer frequency: one exact spike.
  if (n == 1) {
    const double sigma = std::fma(lambda, a[0], theta);
    if (sigma == std::round(sigma)) {
      const long j = static_cast<long>(std::round(sigma));
      s.band_error = 0.0;
      s.magnitude.assign(width, 0.0);
      if (j >= -K && j <= K) {
        const double arg = lambda * b[0];
        s.coeffs[static_cast<std::size_t>(j + K)] = expi2(arg, std::fma(lambda, b[0], -arg));
        s.magnitude[static_cast<std::size_t>(j + K)] = 1.0;
      }
      return s;
    }
  }

  struct Piece {
    double t, len, p_hi, p_lo, sigma;
    cplx stepE, stepR;
  };
  std::vector<Piece> pieces(n);
  for (std::size_t p = 0; p < n; ++p) {
    Piece& q = pieces[p];
    q.t = t[p];
    q.len = t[p + 1] - t[p];
    if (theta == 0.0) {
      q.p_hi = lambda * b[p];
      q.p_lo = std::fma(lambda, b[p], -q.p_hi);
    } else {
      q.p_hi = std::fma(theta, q.t, lambda * b[p]);
      q.p_lo = 0.0;
    }
    q.sigma = std::fma(lambda, a[p], theta);
    q.stepE = cplx(std::cos(q.t), -std::sin(q.t));
    q.stepR = cplx(std::cos(q.len), -std::sin(q.len));
  }

  const std::size_t blocks = (width + kReseed - 1) / kReseed;
  detail::parallel_for(blocks, detail::worker_count(threads), [&](std::size_t b0, std::size_t b1) {
    const std::size_t lo = b0 * kReseed;
    const std::size_t hi = std::min(width, b1 * kReseed);
    for (const Piece& q : pieces) {
      cplx E, R;
      for (std::size_t idx = lo; idx < hi; ++idx) {
        const double j = static_cast<double>(static_cast<long>(idx) - K);
        if ((idx - lo) % kReseed == 0) {
          E = expi_shift(q.p_hi, q.p_lo, j, q.t);
          R = detail::exp_i_diff(q.sigma, q.len, j, q.len);
        } else {
          E *= q.stepE;
          R *= q.stepR;
        }
        const double beta = q.sigma - j;
        const double x = beta * q.len;
        cplx term;
        if (std::abs(x) < 0.5) {
          term = E * cplx(std::cos(0.5 * x), std::sin(0.5 * x)) * (q.len * detail::sinc(0.5 * x));
        } else {
          term = E * (R - 1.0) * cplx(0.0, -1.0 / beta);
        }
        s.coeffs[idx] += term;
      }
    }
    for (std::size_t idx = lo; idx < hi; ++idx) s.coeffs[idx] /= kTwoPi;
  });
  s.band_error = kPieceRoundoff * static_cast<double>(n);
  fill_magnitudes(s);
  return s;
}

Spectrum coeffs_dft(const PhaseFn& phi, double lambda, long K, int oversample) {
  if (K < 1) throw DomainError("band K must be >= 1");
  if (oversample < 4) throw DomainError("DFT oversampling must be >= 4");
  Spectrum s;
  s.lambda = lambda;
  s.K = K;
  s.engine = Engine::Dft;
  s.band_error_rigorous = false;
  s.center = std::lround(lambda * phi.winding());
  const double theta = lambda * phi.winding() - static_cast<double>(s.center);
  fill_tail_data(s, phi);

  const long N = next_smooth(std::max(64L, static_cast<long>(oversample) * 2 * K));
  const auto coarse = sampled_transform(phi, lambda, theta, N);
  const auto fine = sampled_transform(phi, lambda, theta, 2 * N);
  const std::size_t width = static_cast<std::size_t>(2 * K + 1);
  s.coeffs.resize(width);
  double diff = 0.0;
  for (long j = -K; j <= K; ++j) {
    const cplx cf = fine[static_cast<std::size_t>(j >= 0 ? j : 2 * N + j)];
    const cplx cc = coarse[static_cast<std::size_t>(j >= 0 ? j : N + j)];
    s.coeffs[static_cast<std::size_t>(j + K)] = cf;
    diff = std::max(diff, std::abs(cf - cc));
  }
  s.band_error = 4.0 * diff + 8.0 * detail::kUnitRoundoff * std::log2(2.0 * static_cast<double>(N));
  fill_magnitudes(s);
  return s;
}

std::vector<std::complex<double>> dft_full(const PhaseFn& phi, double lambda, long N) {
  if (N < 1) throw DomainError("dft_full needs N >= 1");
  // Sample e^{i lambda phi} itself: phi = w t + b.
  const double theta = lambda * phi.winding();
  return sampled_transform(phi, lambda, theta, N);
}

Spectrum compute_spectrum(const PhaseFn& phi, double lambda, long K, Engine engine, int oversample,
                          unsigned threads) {
  if (engine == Engine::Exact) return coeffs_affine_exact(phi, lambda, K, threads);
  return coeffs_dft(phi, lambda, K, oversample);
}

double triangle_coeffs(double eps, long k) {
  if (!(eps > 0.0 && eps <= kPi)) throw DomainError("triangle_coeffs needs eps in (0, pi]");
  if (k == 0) return eps / kTwoPi;
  const double kd = static_cast<double>(k);
  const double s = std::sin(0.5 * eps * kd);
  return 2.0 / kPi * s * s / (eps * kd * kd);
}

NormEstimate ap_norm(const Spectrum& s, double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError("ap_norm needs p in [1, 2]");
  NormEstimate out;
  out.p = p;
  out.K = s.K;
  const auto band = band_sums(s.magnitude, s.band_error, p);
  const Tail tail = tail_bound(s, p, band.lo);
  out.lo = band.lo;
  out.tail = tail.value;
  out.tail_kind = tail.kind;
  out.hi = band.hi + tail.value;

  // The ideal phase is C^1 with the same derivative bound, so only the
  // first-order l2 tail transfers to it.
  const auto ideal = band_sums(s.magnitude, s.band_error + s.perturbation_error, p);
  double ideal_tail = s.jump == 0.0 ? holder_tail(s.lam_s1, 1, static_cast<double>(s.K), p) : kInf;
  if (p == 2.0) ideal_tail = std::min(ideal_tail, std::sqrt(std::max(0.0, 1.0 - ideal.lo * ideal.lo)));
  out.ideal_lo = ideal.lo;
  out.ideal_hi = ideal.hi + ideal_tail;
  return out;
}

}  // namespace apnorm
