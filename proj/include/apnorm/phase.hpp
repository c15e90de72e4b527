#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "apnorm/cantor.hpp"
#include "apnorm/modulus.hpp"

namespace apnorm {

struct LipCertificate {
  Modulus modulus;
  double constant = 0.0;
};

// Smooth phase phi(t) = winding * t + q(t) with q 2*pi-periodic.
struct SmoothPart {
  std::function<double(double)> q;
  std::function<double(double)> dq;
  double sup_dq = 0.0;   // sup |q'|
  double sup_d2q = 0.0;  // sup |q''|
};

/// A real phase on [0, 2*pi], stored as phi(t) = w t + b(t) with w the
/// integer winding number and b periodic (b(0) == b(2 pi) exactly).
///
/// The periodic part b is either piecewise affine (knots t_0 = 0 < ... <
/// t_n = 2*pi, node values and one slope per piece) or smooth (exact
/// evaluators). Keeping w apart makes lifts and integer modulations exact.
/// Every phase carries the metadata used by the spectral and witness code:
/// a bound on sup|phi'|, the number of intervals on which phi' is monotone,
/// and the certified sup-distance to the infinite-depth phase it
/// approximates.
class PhaseFn {
 public:
  // Periodic part given by node values and slopes; the last value is snapped
  // onto the first after a continuity check.
  static PhaseFn from_pieces(std::vector<double> knots, std::vector<double> base_values,
                             std::vector<double> base_slopes, int winding, int monotone_pieces, double perturbation,
                             std::string name);
  static PhaseFn from_smooth(int winding, SmoothPart part, int monotone_pieces, std::string name);

  bool is_affine() const noexcept { return !smooth_.has_value(); }
  bool is_smooth() const noexcept { return smooth_.has_value(); }
  const std::string& name() const noexcept { return name_; }

  int winding() const noexcept { return winding_; }
  double sup_deriv() const noexcept { return sup_deriv_; }
  int monotone_pieces() const noexcept { return monotone_pieces_; }
  double perturbation() const noexcept { return perturbation_; }
  const std::optional<LipCertificate>& lip_cert() const noexcept { return lip_cert_; }
  void set_lip_cert(LipCertificate cert) { lip_cert_ = std::move(cert); }

  // Affine representation of b; empty for smooth phases.
  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& base_values() const noexcept { return values_; }
  const std::vector<double>& base_slopes() const noexcept { return slopes_; }
  std::size_t piece_count() const noexcept { return slopes_.size(); }
  // phi' on piece i (w + b').
  double slope(std::size_t i) const { return winding_ + slopes_[i]; }
  // Smooth representation; throws DispatchError for affine phases.
  const SmoothPart& smooth() const;

  // phi(t), extended to the real line by phi(t + 2 pi) = phi(t) + 2 pi w.
  double value(double t) const;
  // b(t) = phi(t) - w t, periodic.
  double base_value(double t) const;
  // phi'(t); right derivative at knots (left one at 2*pi).
  double derivative(double t) const;
  // Index of the piece containing t in [0, 2*pi].
  std::size_t piece_index(double t) const;

 private:
  PhaseFn() = default;

  std::string name_;
  int winding_ = 0;
  double sup_deriv_ = 0.0;
  int monotone_pieces_ = 1;
  double perturbation_ = 0.0;
  std::optional<LipCertificate> lip_cert_;
  std::vector<double> knots_, values_, slopes_;
  std::optional<SmoothPart> smooth_;
};

// Number of maximal runs on which a step function with these slopes is
// monotone (1 + number of direction changes, ignoring flat steps).
int count_monotone_runs(const std::vector<double>& slopes);

PhaseFn linear_phase(int slope, double offset = 0.0);
PhaseFn cos_phase();
PhaseFn pl_phase(std::vector<double> breakpoints, std::vector<double> values);

// Primitive of psi = sin(2 pi sigma) over the depth-J Cantor staircase on
// [0, 2*pi]. Inside depth-J intervals psi is replaced by its average, so
// the result is exactly piecewise affine and vanishes at both ends.
PhaseFn cantor_primitive(const Modulus& m, int depth);

struct NestedSchedule {
  int levels = 0;                 // achieved M
  int requested_levels = 0;
  std::vector<Interval> intervals;  // I_0..I_M
  std::vector<double> epsilon;      // eps_0..eps_M
  std::vector<double> delta;        // delta_0..delta_M
  std::vector<double> rho;          // rho_0..rho_M
  std::vector<int> depth;           // Cantor depth used for each f_m
  std::string stop_reason;          // non-empty if the build stopped early
};

struct NestedPhase {
  PhaseFn phase;  // S_M
  NestedSchedule schedule;
  std::vector<PhaseFn> components;  // f_0..f_M, each supported on I_m

  // S_j = sum_{m <= j} eps_m f_m, for 0 <= j <= M.
  PhaseFn partial_sum(int j) const;
  // sup |r_j'| <= delta_j.
  double remainder_bound(int j) const;
};

NestedPhase nested_phase(const Modulus& m, int levels, int depth);

// h(t) = t + eps * phi(t); phi must have winding 0.
PhaseFn diffeo(const PhaseFn& phi, double eps);
// (phi_0, w) with phi = phi_0 + w t; exact.
std::pair<PhaseFn, int> lift(const PhaseFn& circle_map);
// phi + m t; exact.
PhaseFn modulate(const PhaseFn& phi, int m);

// sup over I of |phi - secant of phi over I|; exact at knots for affine
// phases, on a 4096-point grid otherwise.
double chord_deviation(const PhaseFn& phi, const Interval& I);

}  // namespace apnorm
