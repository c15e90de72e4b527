#pragma once

#include <optional>
#include <string>
#include <vector>

namespace apnorm {

/// A modulus of continuity omega, normalized so that omega(2*pi) == 1.
///
/// Three families are built in: the power law delta^alpha, the power-log law
/// delta^alpha * log(C/delta)^beta, and a tabulated monotone node list
/// interpolated linearly in log-log coordinates. Every derived scale used by
/// the growth estimates is exposed here: chi(delta) = delta * omega(delta)
/// and its inverse, the Cantor level lengths rho_j (omega(rho_j) = 2^-j), the
/// activation scales a_j = 1 / chi(rho_j), and the envelopes Theta and
/// Theta_p.
///
/// Construction rejects moduli that break the weak doubling condition
/// omega(2 delta) <= 2 omega(delta) on the dyadic probe grid. Strict doubling
/// (needed by the Cantor construction) is recorded and queried separately,
/// so the linear modulus alpha = 1 remains usable for C^{1,1} phases.
///
/// Immutable; all member functions are pure and safe to call concurrently.
class Modulus {
 public:
  enum class Kind { Power, PowerLog, Tabulated };

  static Modulus power(double alpha);
  static Modulus power_log(double alpha, double beta);
  /// Nodes (delta_i, omega_i), both strictly increasing and positive; the
  /// table must reach 2*pi. Values are rescaled so omega(2*pi) = 1.
  static Modulus tabulated(std::vector<double> deltas, std::vector<double> values);

  Kind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  /// Factor applied to the raw formula to get omega(2*pi) = 1.
  double scale() const noexcept { return scale_; }
  std::string describe() const;

  /// True when omega(2 delta) < 2 omega(delta) at every dyadic probe.
  bool strictly_doubling() const noexcept { return !strict_violation_.has_value(); }
  /// First dyadic probe delta at which strict doubling fails, if any.
  std::optional<double> strict_doubling_violation() const noexcept { return strict_violation_; }

  double omega(double delta) const;
  double chi(double delta) const;
  /// Inverse of chi on (0, chi(2*pi)], by bisection.
  double chi_inv(double u) const;
  /// Level length rho_j with omega(rho_j) = 2^-j; rho(0) = 2*pi.
  double rho(int j) const;
  /// a_j = 1 / chi(rho_j).
  double activation(int j) const;

  /// Theta(y) = y / log y * chi^{-1}((log y)^2 / y); saturates at
  /// y / log y * 2*pi when the argument leaves the range of chi.
  double theta(double y) const;
  bool theta_saturated(double y) const;
  /// Theta_p(y) = (int_1^y chi^{-1}(1/tau)^p dtau)^{1/p}, 1 < p < 2.
  double theta_p(double p, double y) const;
  /// The raw integral int_{y0}^{y1} chi^{-1}(1/tau)^p dtau (1 <= y0 <= y1).
  double theta_p_integral(double p, double y0, double y1) const;

 private:
  Modulus() = default;
  double raw(double delta) const;
  void finish_construction();
  double solve_increasing(double target, bool use_chi) const;

  Kind kind_ = Kind::Power;
  double alpha_ = 1.0;
  double beta_ = 0.0;
  double log_anchor_ = 0.0;  // C in log(C/delta) for the power-log family
  double scale_ = 1.0;
  std::vector<double> log_d_;  // tabulated nodes in log-log form
  std::vector<double> log_w_;
  std::optional<double> strict_violation_;
};

}  // namespace apnorm
