#include "apnorm/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "apnorm/error.hpp"

namespace apnorm {

CantorLevels CantorLevels::build(const Modulus& m, int depth, int base) {
  if (depth < 0 || depth > kMaxDepth)
    throw DomainError("Cantor depth must lie in [0, " + std::to_string(kMaxDepth) + "]");
  if (base < 0) throw DomainError("Cantor base level must be >= 0");
  if (auto d = m.strict_doubling_violation(); d && depth > 0) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "strict doubling omega(2d) < 2 omega(d) fails at d = %.17g", *d);
    throw ConstructionError(buf);
  }
  CantorLevels cl(m);
  cl.depth_ = depth;
  cl.base_ = base;
  cl.rho_.reserve(depth + 1);
  for (int j = 0; j <= depth; ++j) {
    cl.rho_.push_back(m.rho(base + j));
    if (j > 0 && !(2.0 * cl.rho_[j] < cl.rho_[j - 1])) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "levels do not separate: 2*rho_%d >= rho_%d (scale %.17g)", base + j,
                    base + j - 1, cl.rho_[j - 1]);
      throw ConstructionError(buf);
    }
  }
  return cl;
}

double CantorLevels::rho(int j) const {
  if (j < 0 || j > depth_) throw DomainError("level index out of range");
  return rho_[j];
}

void CantorLevels::check_level(int j) const {
  if (j < 0 || j > depth_)
    throw DomainError("level " + std::to_string(j) + " exceeds the built depth " + std::to_string(depth_));
  if (j > kMaxMaterialized)
    throw DomainError("level " + std::to_string(j) + " is too deep to materialize");
}

std::vector<double> CantorLevels::left_endpoints(int j) const {
  check_level(j);
  // Left half by sums of shift lengths (rho_{i-1} - rho_i); right half mirrored.
  // Coarsest shift first, so each endpoint is summed in the same order as the
  // staircase descent.
  std::vector<double> left{0.0};
  if (j == 0) return left;
  for (int i = 2; i <= j; ++i) {
    const double shift = rho_[i - 1] - rho_[i];
    std::vector<double> next(2 * left.size());
    for (std::size_t k = 0; k < left.size(); ++k) {
      next[2 * k] = left[k];
      next[2 * k + 1] = left[k] + shift;
    }
    left.swap(next);
  }
  const std::size_t half = left.size();
  std::vector<double> out(2 * half);
  std::copy(left.begin(), left.end(), out.begin());
  for (std::size_t k = 0; k < half; ++k) out[2 * half - 1 - k] = span() - (left[k] + rho_[j]);
  return out;
}

std::vector<Interval> CantorLevels::cover(int j) const {
  const auto lefts = left_endpoints(j);
  std::vector<Interval> out(lefts.size());
  const std::size_t half = lefts.size() / 2;
  for (std::size_t k = 0; k < lefts.size(); ++k) {
    if (j == 0) {
      out[k] = {0.0, span()};
    } else if (k < half) {
      out[k] = {lefts[k], lefts[k] + rho_[j]};
    } else {
      // mirror image of the left-half interval, endpoint by endpoint
      const Interval& m = out[lefts.size() - 1 - k];
      out[k] = {span() - m.hi, span() - m.lo};
    }
  }
  return out;
}

std::vector<Interval> CantorLevels::gaps(int j) const {
  const auto c = cover(j);
  std::vector<Interval> out;
  out.reserve(c.size() - 1);
  for (std::size_t k = 0; k + 1 < c.size(); ++k) out.push_back({c[k].hi, c[k + 1].lo});
  return out;
}

// Descent for t in [0, span/2]: follows the branch containing t and stops in
// the first gap it meets.
double CantorLevels::staircase_left(double t) const {
  double a = 0.0;
  double value = 0.0;
  for (int j = 1; j <= depth_; ++j) {
    const double gain = std::ldexp(1.0, -j);
    const double x = t - a;
    if (x <= rho_[j]) continue;
    const double shift = rho_[j - 1] - rho_[j];
    if (x >= shift) {
      value += gain;
      a += shift;
      continue;
    }
    return value + gain;
  }
  const double frac = std::clamp((t - a) / rho_[depth_], 0.0, 1.0);
  return value + std::ldexp(frac, -depth_);
}

double CantorLevels::staircase(double t) const {
  const double L = span();
  if (t < 0.0 || t > L) t -= L * std::floor(t / L);
  if (t <= 0.5 * L) return staircase_left(t);
  // L - t is exact for t in [L/2, L], so the mirror identity holds bit-for-bit.
  return 1.0 - staircase_left(L - t);
}

std::vector<double> CantorLevels::staircase_nodes() const {
  const auto c = cover(depth_);
  std::vector<double> out;
  out.reserve(2 * c.size());
  const double gain = std::ldexp(1.0, -depth_);
  for (std::size_t k = 0; k < c.size(); ++k) {
    out.push_back(gain * static_cast<double>(k));
    out.push_back(gain * static_cast<double>(k + 1));
  }
  return out;
}

}  // namespace apnorm
