#include "apnorm/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "apnorm/detail/numeric.hpp"
#include "apnorm/detail/quadrature.hpp"
#include "apnorm/error.hpp"

namespace apnorm {

namespace {

constexpr int kDoublingProbes = 80;
constexpr int kBisectionCap = 200;
// Lower end of the log-space bracket; exp(-740) is still a positive double.
constexpr double kLogFloor = -740.0;

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

}  // namespace

Modulus Modulus::power(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError(fmt("power modulus needs alpha in (0, 1], got %g", alpha));
  Modulus m;
  m.kind_ = Kind::Power;
  m.alpha_ = alpha;
  m.finish_construction();
  return m;
}

Modulus Modulus::power_log(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError(fmt("power-log modulus needs alpha in (0, 1], got %g", alpha));
  if (!std::isfinite(beta)) throw DomainError("power-log modulus needs a finite beta");
  Modulus m;
  m.kind_ = Kind::PowerLog;
  m.alpha_ = alpha;
  m.beta_ = beta;
  // log(C/delta) > beta/alpha on (0, 2pi] keeps omega increasing; for beta < 0
  // a large enough anchor keeps omega(2d)/omega(d) = 2^alpha (1 + log 2/L)^-beta
  // below 2.
  double L = 1.0;
  if (beta > 0.0) L = std::max(L, 2.0 * beta / alpha);
  if (beta < 0.0 && alpha < 1.0)
    L = std::max(L, 2.0 * std::log(2.0) / (std::pow(2.0, (1.0 - alpha) / -beta) - 1.0));
  m.log_anchor_ = std::log(kTwoPi) + L;
  m.finish_construction();
  return m;
}

Modulus Modulus::tabulated(std::vector<double> deltas, std::vector<double> values) {
  if (deltas.size() != values.size() || deltas.size() < 2)
    throw DomainError("tabulated modulus needs at least two (delta, omega) nodes");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0) || !(values[i] > 0.0))
      throw DomainError("tabulated modulus nodes must be positive");
    if (i > 0 && (!(deltas[i] > deltas[i - 1]) || !(values[i] > values[i - 1])))
      throw DomainError("tabulated modulus nodes must be strictly increasing");
  }
  if (deltas.back() < kTwoPi * (1.0 - 1e-12))
    throw DomainError("tabulated modulus must cover delta = 2*pi");
  Modulus m;
  m.kind_ = Kind::Tabulated;
  m.log_d_.reserve(deltas.size());
  m.log_w_.reserve(values.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    m.log_d_.push_back(std::log(deltas[i]));
    m.log_w_.push_back(std::log(values[i]));
  }
  m.finish_construction();
  return m;
}

double Modulus::raw(double delta) const {
  if (delta <= 0.0) return 0.0;
  switch (kind_) {
    case Kind::Power:
      return std::pow(delta / kTwoPi, alpha_);
    case Kind::PowerLog: {
      // Beyond 2*pi continue as a pure power so the doubling probe at 4*pi
      // stays meaningful.
      if (delta > kTwoPi) {
        const double at = std::pow(kTwoPi, alpha_) * std::pow(log_anchor_ - std::log(kTwoPi), beta_);
        return at * std::pow(delta / kTwoPi, alpha_);
      }
      return std::pow(delta, alpha_) * std::pow(log_anchor_ - std::log(delta), beta_);
    }
    case Kind::Tabulated: {
      const double x = std::log(delta);
      const std::size_t n = log_d_.size();
      std::size_t i;
      if (x <= log_d_[0])
        i = 0;
      else if (x >= log_d_[n - 1])
        i = n - 2;
      else
        i = static_cast<std::size_t>(std::upper_bound(log_d_.begin(), log_d_.end(), x) - log_d_.begin()) - 1;
      const double s = (log_w_[i + 1] - log_w_[i]) / (log_d_[i + 1] - log_d_[i]);
      return std::exp(log_w_[i] + s * (x - log_d_[i]));
    }
  }
  return 0.0;
}

void Modulus::finish_construction() {
  scale_ = kind_ == Kind::Power ? 1.0 : 1.0 / raw(kTwoPi);
  for (int i = 0; i < kDoublingProbes; ++i) {
    const double d = kTwoPi * std::ldexp(1.0, -i);
    const double w1 = omega(d);
    const double w2 = omega(2.0 * d);
    if (w2 > 2.0 * w1 * (1.0 + 1e-12))
      throw ConstructionError(fmt("modulus violates doubling omega(2d) <= 2 omega(d) at d = %.17g", d));
    if (!strict_violation_ && !(w2 < 2.0 * w1 * (1.0 - 1e-12))) strict_violation_ = d;
  }
}

std::string Modulus::describe() const {
  char buf[128];
  switch (kind_) {
    case Kind::Power:
      std::snprintf(buf, sizeof buf, "power(alpha=%g)", alpha_);
      break;
    case Kind::PowerLog:
      std::snprintf(buf, sizeof buf, "power-log(alpha=%g, beta=%g, scale=%.6g)", alpha_, beta_, scale_);
      break;
    case Kind::Tabulated:
      std::snprintf(buf, sizeof buf, "tabulated(%zu nodes, scale=%.6g)", log_d_.size(), scale_);
      break;
  }
  return buf;
}

double Modulus::omega(double delta) const {
  if (std::isnan(delta) || delta < 0.0) throw DomainError(fmt("omega needs delta >= 0, got %g", delta));
  return scale_ * raw(delta);
}

double Modulus::chi(double delta) const { return delta * omega(delta); }

// Bisection in log(delta) for omega(delta) = target or chi(delta) = target.
double Modulus::solve_increasing(double target, bool use_chi) const {
  auto f = [&](double x) {
    const double d = std::exp(x);
    return use_chi ? chi(d) : omega(d);
  };
  double lo = kLogFloor;
  double hi = std::log(kTwoPi);
  if (f(lo) >= target) throw NumericError(fmt("root below representable range for target %g", target));
  for (int it = 0; it < kBisectionCap; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < target ? lo : hi) = mid;
  }
  // hi is the upper end of the final bracket; f(hi) >= target.
  const double d = std::exp(hi);
  const double residual = std::abs((use_chi ? chi(d) : omega(d)) - target);
  if (!(residual <= 1e-10 * target))
    throw NumericError(fmt("bisection did not converge, residual %g", residual));
  return hi == std::log(kTwoPi) ? kTwoPi : d;
}

double Modulus::chi_inv(double u) const {
  const double top = chi(kTwoPi);
  if (!(u > 0.0) || u > top * (1.0 + 1e-15))
    throw DomainError(fmt("chi_inv needs u in (0, chi(2 pi)], got %g", u));
  if (u >= top) return kTwoPi;
  return solve_increasing(u, true);
}

double Modulus::rho(int j) const {
  if (j < 0) throw DomainError("rho needs j >= 0");
  if (j == 0) return kTwoPi;
  return solve_increasing(std::ldexp(1.0, -j), false);
}

double Modulus::activation(int j) const {
  // chi(rho_j) = rho_j * 2^-j.
  return std::ldexp(1.0, j) / rho(j);
}

bool Modulus::theta_saturated(double y) const {
  if (!(y > 1.0)) throw DomainError(fmt("theta needs y > 1, got %g", y));
  const double l = std::log(y);
  return l * l / y > chi(kTwoPi);
}

double Modulus::theta(double y) const {
  const double l = std::log(y);
  if (theta_saturated(y)) return y / l * kTwoPi;
  return y / l * chi_inv(l * l / y);
}

double Modulus::theta_p_integral(double p, double y0, double y1) const {
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError(fmt("theta_p needs p in (1, 2), got %g", p));
  if (!(y0 >= 1.0 && y1 >= y0)) throw DomainError("theta_p integral needs 1 <= y0 <= y1");
  if (y1 == y0) return 0.0;
  // tau = e^s: int e^s chi^{-1}(e^{-s})^p ds.
  auto f = [&](double s) { return std::exp(s) * std::pow(chi_inv(std::exp(-s)), p); };
  const double a = std::log(y0);
  const double b = std::log(y1);
  // Split into unit-length pieces in s so each panel is smooth and well-scaled.
  detail::Accumulator acc;
  const int pieces = std::max(1, static_cast<int>(std::ceil(b - a)));
  for (int i = 0; i < pieces; ++i) {
    const double s0 = a + (b - a) * i / pieces;
    const double s1 = i + 1 == pieces ? b : a + (b - a) * (i + 1) / pieces;
    acc.add(detail::integrate(f, s0, s1, 1e-10));
  }
  return acc.value();
}

double Modulus::theta_p(double p, double y) const {
  if (!(p > 1.0 && p < 2.0)) throw DomainError(fmt("theta_p needs p in (1, 2), got %g", p));
  if (!(y >= 1.0)) throw DomainError(fmt("theta_p needs y >= 1, got %g", y));
  return std::pow(theta_p_integral(p, 1.0, y), 1.0 / p);
}

}  // namespace apnorm
