#include "apnorm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <deque>

#include "apnorm/detail/numeric.hpp"
#include "apnorm/detail/quadrature.hpp"
#include "apnorm/error.hpp"
#include "apnorm/phase.hpp"

namespace apnorm {

namespace {

constexpr int kSmoothGrid = 1 << 14;
constexpr double kLipSafety = 1.25;
constexpr double kQuadSlack = 1e-3;

// max over windows [i, r(i)] of (max - min) of vals, where r is supplied by
// `reach` and is nondecreasing in i.
template <class Reach>
double sliding_osc(const std::vector<double>& vals, std::size_t starts, Reach reach) {
  std::deque<std::size_t> hi, lo;
  std::size_t next = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < starts; ++i) {
    const std::size_t r = std::max(reach(i), i);
    while (next <= r) {
      while (!hi.empty() && vals[hi.back()] <= vals[next]) hi.pop_back();
      hi.push_back(next);
      while (!lo.empty() && vals[lo.back()] >= vals[next]) lo.pop_back();
      lo.push_back(next);
      ++next;
    }
    while (hi.front() < i) hi.pop_front();
    while (lo.front() < i) lo.pop_front();
    best = std::max(best, vals[hi.front()] - vals[lo.front()]);
  }
  return best;
}

double osc_affine(const PhaseFn& phi, double delta) {
  const auto& t = phi.knots();
  const std::size_t n = phi.piece_count();
  std::vector<double> start(2 * n), vals(2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i) {
    start[i] = t[i % n] + (i >= n ? kTwoPi : 0.0);
    vals[i] = phi.base_slopes()[i % n];
  }
  std::size_t r = 0;
  return sliding_osc(vals, n, [&](std::size_t i) {
    const double end_i = t[i + 1];
    r = std::max(r, i);
    while (r + 1 < i + n && start[r + 1] - end_i <= delta) ++r;
    return r;
  });
}

double osc_smooth(const std::vector<double>& samples, double delta) {
  const std::size_t n = samples.size();
  const auto w = static_cast<std::size_t>(std::floor(delta / (kTwoPi / static_cast<double>(n))));
  if (w == 0) return 0.0;
  const std::size_t span = std::min(w, n - 1);
  std::vector<double> vals(n + span);
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = samples[i % n];
  return sliding_osc(vals, n, [&](std::size_t i) { return i + span; });
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[192];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

double lip_estimate(const PhaseFn& phi, const Modulus& m, int levels) {
  if (levels <= 0) levels = 16;
  std::vector<double> samples;
  if (phi.is_smooth()) {
    samples.resize(kSmoothGrid);
    for (int i = 0; i < kSmoothGrid; ++i) samples[i] = phi.derivative(kTwoPi * i / kSmoothGrid);
  }
  double worst = 0.0;
  for (int j = 1; j <= levels; ++j) {
    const double d = m.rho(j);
    const double osc = phi.is_affine() ? osc_affine(phi, d) : osc_smooth(samples, d);
    worst = std::max(worst, osc / m.omega(d));
  }
  return kLipSafety * worst;
}

double delta_lambda(const Modulus& m, double c, double lambda) {
  if (!(c > 0.0)) throw PreconditionError("delta_lambda needs c > 0");
  const double u = 1.0 / (2.0 * c * lambda);
  if (!(u > 0.0) || u > m.chi(kTwoPi))
    throw PreconditionError(fmt("lambda = %g too small: 1/(2 c lambda) exceeds chi(2 pi)", lambda));
  return 0.5 * m.chi_inv(u);
}

DeltaLambdaCheck delta_lambda_check(const Modulus& m, double c, double lambda) {
  DeltaLambdaCheck out;
  out.delta = delta_lambda(m, c, lambda);
  if (1.0 / lambda > m.chi(kTwoPi)) throw PreconditionError(fmt("lambda = %g too small for chi^{-1}(1/lambda)", lambda));
  out.bound = m.chi_inv(1.0 / lambda) / (4.0 * (c + 1.0));
  out.holds = out.delta >= out.bound;
  return out;
}

DerivativeRange derivative_range(const PhaseFn& phi) {
  DerivativeRange r;
  if (phi.is_affine()) {
    const auto& a = phi.base_slopes();
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    r.min = phi.winding() + *lo;
    r.max = phi.winding() + *hi;
    return r;
  }
  r.exact = false;
  r.grid_points = kSmoothGrid;
  r.min = r.max = phi.derivative(0.0);
  for (int i = 1; i < kSmoothGrid; ++i) {
    const double d = phi.derivative(kTwoPi * i / kSmoothGrid);
    r.min = std::min(r.min, d);
    r.max = std::max(r.max, d);
  }
  return r;
}

std::vector<long> admissible_ks(const PhaseFn& phi, double lambda, int count) {
  const auto r = derivative_range(phi);
  std::vector<long> out;
  if (!(r.max > r.min) || count <= 0) return out;
  const long lo = static_cast<long>(std::floor(r.min * lambda)) + 1;
  const long hi = static_cast<long>(std::ceil(r.max * lambda)) - 1;
  if (hi < lo) return out;
  const long n = hi - lo + 1;
  if (n <= count) {
    for (long k = lo; k <= hi; ++k) out.push_back(k);
    return out;
  }
  for (int i = 0; i < count; ++i) {
    const long k = lo + std::lround(static_cast<double>(i) * static_cast<double>(hi - lo) / (count - 1));
    if (out.empty() || k != out.back()) out.push_back(k);
  }
  return out;
}

namespace {

// Candidate points where phi' meets y: zeros/crossings of phi' - y.
std::vector<double> crossings(const PhaseFn& phi, double y) {
  std::vector<double> out;
  if (phi.is_affine()) {
    const auto& t = phi.knots();
    const std::size_t n = phi.piece_count();
    for (std::size_t i = 0; i < n; ++i) {
      const double a = phi.slope(i);
      if (a == y) out.push_back(0.5 * (t[i] + t[i + 1]));
      if (i + 1 < n && (a - y) * (phi.slope(i + 1) - y) < 0.0) out.push_back(t[i + 1]);
    }
    return out;
  }
  auto g = [&](double t) { return phi.derivative(t) - y; };
  double t0 = 0.0, g0 = g(0.0);
  for (int i = 1; i <= kSmoothGrid; ++i) {
    const double t1 = kTwoPi * i / kSmoothGrid;
    const double g1 = g(t1);
    if (g0 == 0.0) {
      out.push_back(t0);
    } else if (g0 * g1 < 0.0) {
      double lo = t0, hi = t1, glo = g0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if ((gm < 0.0) == (glo < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      out.push_back(0.5 * (lo + hi));
    }
    t0 = t1;
    g0 = g1;
  }
  return out;
}

}  // namespace

WitnessReport witness(const PhaseFn& phi, const Modulus& m, double c, double lambda, long k) {
  if (!(c > 0.0)) throw PreconditionError("witness disabled: Lip constant c = 0 (phi' constant)");
  if (1.0 / (2.0 * c * lambda) > m.chi(kTwoPi))
    throw PreconditionError(fmt("lambda = %g too small: 1/(2 c lambda) > chi(2 pi)", lambda));
  const double delta = delta_lambda(m, c, lambda);
  if (!(2.0 * delta < kTwoPi)) throw PreconditionError(fmt("lambda = %g too small: 2 delta_lambda >= 2 pi", lambda));
  const auto range = derivative_range(phi);
  const double spread = range.max - range.min;
  if (!(spread > 0.0)) throw PreconditionError("no admissible k: phi' is constant");
  if (!(lambda > 2.0 / spread)) throw PreconditionError(fmt("lambda = %g too small: need lambda > 2/(M - m) = %g", lambda, 2.0 / spread));
  const double kd = static_cast<double>(k);
  if (!(range.min * lambda < kd && kd < range.max * lambda))
    throw PreconditionError(fmt("k = %g outside (m lambda, M lambda) for lambda = %g", kd, lambda));

  const double y = kd / lambda;
  const auto cand = crossings(phi, y);
  if (cand.empty()) throw NumericError(fmt("no root of phi' = %g found", y));
  double t0 = cand.front();
  for (double t : cand) {
    if (t - delta >= 0.0 && t + delta <= kTwoPi) {
      t0 = t;
      break;
    }
  }
  Interval I{t0 - delta, t0 + delta};
  if (I.lo < 0.0) I = {0.0, 2.0 * delta};
  if (I.hi > kTwoPi) I = {kTwoPi - 2.0 * delta, kTwoPi};

  // Phase measured from t0 keeps the exponent small.
  const double ref = phi.value(t0);
  const double center = 0.5 * (I.lo + I.hi);
  auto integrand = [&](double t) {
    const double tri = std::max(0.0, 1.0 - std::abs(t - center) / delta);
    const double arg = lambda * (phi.value(t) - ref) - kd * (t - t0);
    return std::complex<double>(tri * std::cos(arg), tri * std::sin(arg));
  };
  std::vector<double> cuts{I.lo, center, I.hi};
  if (phi.is_affine()) {
    const auto& kn = phi.knots();
    for (auto it = std::upper_bound(kn.begin(), kn.end(), I.lo); it != kn.end() && *it < I.hi; ++it)
      cuts.push_back(*it);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::complex<double> total = 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double e = 0.0;
    total += detail::integrate(integrand, cuts[i], cuts[i + 1], 1e-12, &e, 15);
    err += e;
  }

  WitnessReport w;
  w.lambda = lambda;
  w.k = k;
  w.t = t0;
  w.window = I;
  w.delta = delta;
  w.measured = std::abs(total) / kTwoPi;
  w.quad_error = err / kTwoPi;
  w.threshold = delta / (4.0 * kPi);
  w.pass = w.measured >= w.threshold * (1.0 - kQuadSlack) && w.quad_error <= kQuadSlack * w.threshold;
  return w;
}

double lower_env(const Modulus& m, double p, double lambda) {
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError("lower_env needs p in [1, 2]");
  if (!(lambda >= 1.0)) throw DomainError("lower_env needs lambda >= 1");
  return std::pow(lambda, 1.0 / p) * m.chi_inv(1.0 / lambda);
}

double upper_env_A(const Modulus& m, double lambda) {
  if (!(lambda >= 2.0)) throw DomainError("upper_env_A needs lambda >= 2");
  return m.theta(lambda);
}

double upper_env_Ap(const Modulus& m, double p, double lambda) {
  if (!(lambda >= 2.0)) throw DomainError("upper_env_Ap needs lambda >= 2");
  return m.theta_p(p, lambda);
}

double c2_env(double p, double lambda) {
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError("c2_env needs p in [1, 2]");
  if (!(lambda > 0.0)) throw DomainError("c2_env needs lambda > 0");
  return std::pow(lambda, 1.0 / p - 0.5);
}

double final_inequality_lhs(double deriv_spread, double lambda, double delta, double p) {
  return std::pow(deriv_spread * lambda / 2.0, 1.0 / p) * delta / (4.0 * kPi);
}

}  // namespace apnorm
