#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace apnorm::detail {

// Adaptive 15-point Gauss-Kronrod; `rel_tol` is relative to the integral
// estimate. Works for real and std::complex<double> integrands.
template <class F>
auto integrate(F&& f, double a, double b, double rel_tol = 1e-12, double* error = nullptr,
               unsigned max_depth = 20) {
  double err = 0.0;
  auto value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      std::forward<F>(f), a, b, max_depth, rel_tol, &err);
  if (error) *error = err;
  return value;
}

}  // namespace apnorm::detail
