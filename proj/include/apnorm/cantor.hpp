#pragma once

#include <vector>

#include "apnorm/modulus.hpp"

namespace apnorm {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double t) const { return lo <= t && t <= hi; }
};

// Symmetric perfect set built from the level lengths rho_j of a modulus.
//
// The root interval is [0, rho_base] (base = 0 gives [0, 2*pi]); level i
// below the root consists of 2^i closed intervals of length rho_{base+i},
// obtained by keeping both ends of each parent and removing the concentric
// open middle. Only the lengths are stored; covers and gaps are generated on
// request, so large depths are cheap as long as one only evaluates the
// staircase.
class CantorLevels {
 public:
  // Largest level whose interval list may be materialized (2^26 intervals).
  static constexpr int kMaxMaterialized = 26;
  static constexpr int kMaxDepth = 40;

  static CantorLevels build(const Modulus& m, int depth, int base = 0);

  const Modulus& modulus() const noexcept { return modulus_; }
  int depth() const noexcept { return depth_; }
  int base() const noexcept { return base_; }
  double span() const noexcept { return rho_.front(); }
  // Length of the level-j intervals, relative to the root (rho_{base+j}).
  double rho(int j) const;
  const std::vector<double>& rhos() const noexcept { return rho_; }

  // Sorted left endpoints of the 2^j level-j intervals.
  std::vector<double> left_endpoints(int j) const;
  // F_j as 2^j closed intervals in increasing order.
  std::vector<Interval> cover(int j) const;
  // G_j = root minus F_j as 2^j - 1 open intervals in increasing order.
  std::vector<Interval> gaps(int j) const;

  // Normalized staircase sigma on [0, span]; exact dyadic values on gaps,
  // linear inside depth-J intervals. Arguments are reduced modulo span.
  double staircase(double t) const;
  // sigma at both endpoints of every depth-J interval, in order.
  std::vector<double> staircase_nodes() const;

 private:
  CantorLevels(Modulus m) : modulus_(std::move(m)) {}
  double staircase_left(double t) const;
  void check_level(int j) const;

  Modulus modulus_;
  int depth_ = 0;
  int base_ = 0;
  std::vector<double> rho_;
};

inline CantorLevels build_levels(const Modulus& m, int depth) { return CantorLevels::build(m, depth); }

}  // namespace apnorm
