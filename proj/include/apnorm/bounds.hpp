#pragma once

#include <string>
#include <vector>

#include "apnorm/cantor.hpp"
#include "apnorm/modulus.hpp"

namespace apnorm {

class PhaseFn;

// 1.25 * max over delta in {rho_1..rho_J} of osc(phi' on windows of length
// delta) / omega(delta). Exact for piecewise-affine phases (two-pointer scan
// over the slope sequence); smooth phases are probed on 2^14 points.
// levels = 0 uses 16.
double lip_estimate(const PhaseFn& phi, const Modulus& m, int levels = 0);

// delta_lambda = chi^{-1}(1 / (2 c lambda)) / 2.
double delta_lambda(const Modulus& m, double c, double lambda);
// Checks delta_lambda >= chi^{-1}(1/lambda) / (4 (c + 1)); returns the bound.
struct DeltaLambdaCheck {
  double delta = 0.0;
  double bound = 0.0;
  bool holds = false;
};
DeltaLambdaCheck delta_lambda_check(const Modulus& m, double c, double lambda);

struct DerivativeRange {
  double min = 0.0;
  double max = 0.0;
  bool exact = true;    // false when sampled
  int grid_points = 0;  // sample count for smooth phases
};
DerivativeRange derivative_range(const PhaseFn& phi);

struct WitnessReport {
  double lambda = 0.0;
  long k = 0;
  double t = 0.0;  // phi'(t) = k / lambda, or the jump node crossing it
  Interval window;
  double delta = 0.0;
  double measured = 0.0;
  double threshold = 0.0;  // delta / (4 pi)
  double quad_error = 0.0;
  bool pass = false;
};

// Coefficient lower-bound check at one (lambda, k). Throws PreconditionError naming the
// first binding condition: c > 0, 1/(2 c lambda) <= chi(2 pi),
// 2 delta < 2 pi, lambda > 2 / (M - m), m lambda < k < M lambda.
WitnessReport witness(const PhaseFn& phi, const Modulus& m, double c, double lambda, long k);

// Up to `count` equispaced integers in the open range (m lambda, M lambda).
std::vector<long> admissible_ks(const PhaseFn& phi, double lambda, int count = 16);

double lower_env(const Modulus& m, double p, double lambda);
double upper_env_A(const Modulus& m, double lambda);
double upper_env_Ap(const Modulus& m, double p, double lambda);
double c2_env(double p, double lambda);

// ((M - m) lambda / 2)^{1/p} * delta / (4 pi): lower bound for the A_p norm.
double final_inequality_lhs(double deriv_spread, double lambda, double delta, double p);

}  // namespace apnorm
