#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>

namespace apnorm {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace detail {

inline constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;

// sin(2*pi*x) with exact zeros at multiples of 1/2, exact +-1 at 1/4 and 3/4,
// and sin2pi(1 - x) == -sin2pi(x) bit-for-bit whenever 1 - x is exact.
inline double sin2pi(double x) {
  auto core = [](double r) {  // r in [0, 1/4]
    return r <= 0.125 ? std::sin(kTwoPi * r) : std::cos(kTwoPi * (0.25 - r));
  };
  double r = x - std::floor(x);
  if (r <= 0.25) return core(r);
  if (r <= 0.5) return core(0.5 - r);
  if (r <= 0.75) return -core(r - 0.5);
  return -core(1.0 - r);
}

inline double cos2pi(double x) { return sin2pi(x + 0.25); }

// e^{i(a*b - c*d)} with both products formed exactly (fma error terms) so the
// only rounding left is in the final sincos.
inline std::complex<double> exp_i_diff(double a, double b, double c, double d) {
  const double p1 = a * b;
  const double e1 = std::fma(a, b, -p1);
  const double p2 = c * d;
  const double e2 = std::fma(c, d, -p2);
  const double hi = p1 - p2;
  const double bb = hi - p1;
  const double e3 = (p1 - (hi - bb)) + (-p2 - bb);
  const double lo = e1 - e2 + e3;
  const std::complex<double> base(std::cos(hi), std::sin(hi));
  return base * std::complex<double>(1.0, lo);
}

// sin(x)/x, continuous at 0.
inline double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

// Compensated (Neumaier) summation.
class Accumulator {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail
}  // namespace apnorm
