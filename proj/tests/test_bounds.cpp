#include <cmath>
#include <numbers>

#include "apnorm/bounds.hpp"
#include "apnorm/error.hpp"
#include "apnorm/phase.hpp"
#include "apnorm/spectrum.hpp"
#include "doctest.h"

using namespace apnorm;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

PhaseFn tent() { return pl_phase({0.0, kPi, kTwoPi}, {0.0, 1.0, 0.0}); }
}  // namespace

TEST_CASE("lip estimate of a linear phase is zero") {
  CHECK(lip_estimate(linear_phase(2), Modulus::power(0.5)) == 0.0);
  CHECK(lip_estimate(linear_phase(0, 1.0), Modulus::power(1.0)) == 0.0);
}

TEST_CASE("lip estimate of cos against the linear modulus") {
  // |sin t1 - sin t2| <= |t1 - t2| and omega(d) = d / 2 pi.
  const double c = lip_estimate(cos_phase(), Modulus::power(1.0));
  CHECK(c >= 1.25);
  CHECK(c <= 1.25 * kTwoPi * (1 + 1e-12));
  // Dense sampling of sup|phi''| = 1 predicts 2 pi * 1.25 at fine scales.
  CHECK(c == doctest::Approx(1.25 * kTwoPi).epsilon(1e-3));
}

TEST_CASE("lip estimate of the cantor primitive is stable under refinement") {
  const auto m = Modulus::power(0.5);
  const double coarse = cantor_primitive(m, 8).lip_cert()->constant;
  CHECK(coarse > 0.0);
  for (int depth : {10, 12}) {
    const auto f = cantor_primitive(m, depth);
    const double fine = f.lip_cert()->constant;
    CHECK(std::abs(fine - coarse) <= 0.1 * coarse);
    CHECK(fine == lip_estimate(f, m, depth - 2));
  }
}

TEST_CASE("delta_lambda closed form for alpha = 1") {
  const auto m = Modulus::power(1.0);
  for (double c : {0.5, 2.0}) {
    for (double lam : {10.0, 100.0, 1e4}) {
      CAPTURE(lam);
      CHECK(delta_lambda(m, c, lam) == doctest::Approx(std::sqrt(kPi / (4 * c * lam))).epsilon(1e-10));
    }
  }
}

TEST_CASE("delta_lambda decreases in lambda and satisfies its lower bound") {
  const auto m = Modulus::power(0.5);
  double prev = 1e9;
  for (double lam : {10.0, 20.0, 100.0, 1000.0}) {
    const double d = delta_lambda(m, 2.0, lam);
    CHECK(d < prev);
    prev = d;
  }
  for (double lam : {10.0, 100.0, 1000.0}) {
    const auto chk = delta_lambda_check(m, 2.0, lam);
    CHECK(chk.holds);
    CHECK(chk.delta >= chk.bound);
    CHECK(chk.bound == doctest::Approx(m.chi_inv(1.0 / lam) / 12.0));
  }
}

TEST_CASE("delta_lambda preconditions") {
  const auto m = Modulus::power(0.5);
  CHECK_THROWS_AS(delta_lambda(m, 0.0, 10.0), PreconditionError);
  CHECK_THROWS_AS(delta_lambda(m, 1.0, 1e-3), PreconditionError);
}

TEST_CASE("derivative ranges") {
  const auto rc = derivative_range(cos_phase());
  CHECK(rc.min == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rc.max == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(rc.exact);
  CHECK(rc.grid_points == 16384);
  const auto rt = derivative_range(tent());
  CHECK(rt.exact);
  CHECK(rt.min == doctest::Approx(-1.0 / kPi));
  CHECK(rt.max == doctest::Approx(1.0 / kPi));
  const auto r0 = derivative_range(linear_phase(0, 3.0));
  CHECK(r0.min == 0.0);
  CHECK(r0.max == 0.0);
}

TEST_CASE("constant phase has no admissible k") {
  const auto f = linear_phase(0, 3.0);
  CHECK(admissible_ks(f, 100.0).empty());
  CHECK_THROWS_AS(witness(f, Modulus::power(0.5), 1.0, 100.0, 0), PreconditionError);
}

TEST_CASE("admissible ks lie strictly inside the range") {
  const auto ks = admissible_ks(cos_phase(), 256.0, 16);
  REQUIRE(ks.size() == 16);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    CHECK(ks[i] > -256);
    CHECK(ks[i] < 256);
    if (i) CHECK(ks[i] > ks[i - 1]);
  }
  CHECK(admissible_ks(cos_phase(), 2.0, 16).size() == 3);
}

TEST_CASE("witness passes for cos on the dyadic grid") {
  const auto f = cos_phase();
  const auto m = Modulus::power(1.0);
  const double c = lip_estimate(f, m);
  for (int e = 6; e <= 10; ++e) {
    const double lam = std::ldexp(1.0, e);
    for (long k : admissible_ks(f, lam, 16)) {
      const auto w = witness(f, m, c, lam, k);
      CAPTURE(lam);
      CAPTURE(k);
      CHECK(w.pass);
      CHECK(w.threshold == doctest::Approx(w.delta / (4 * kPi)));
      CHECK(w.window.lo >= 0.0);
      CHECK(w.window.hi <= kTwoPi);
      CHECK(w.window.length() == doctest::Approx(2 * w.delta));
      CHECK(w.window.contains(w.t));
      CHECK(std::abs(f.derivative(w.t) - k / lam) <= 1e-9);
    }
  }
}

TEST_CASE("witness on an exactly stationary piece equals the triangle mass") {
  // On the first piece phi' = 1/pi; with lambda = 64 pi and k = 64 the
  // integrand is the bare triangle, whose mean is delta / 2 pi.
  const auto f = pl_phase({0.0, kPi, 1.5 * kPi, kTwoPi}, {0.0, 1.0, 2.0, 0.0});
  const auto m = Modulus::power(0.5);
  const double lam = 64.0 * kPi;
  const auto w = witness(f, m, 1.0, lam, 64);
  CHECK(w.window.hi <= kPi);
  CHECK(w.measured == doctest::Approx(triangle_coeffs(w.delta, 0)).epsilon(1e-10));
  CHECK(w.measured == doctest::Approx(w.delta / kTwoPi).epsilon(1e-10));
  CHECK(w.pass);
}

TEST_CASE("witness preconditions name the binding condition") {
  const auto f = cos_phase();
  const auto m = Modulus::power(1.0);
  CHECK_THROWS_AS(witness(f, m, 0.0, 100.0, 0), PreconditionError);
  CHECK_THROWS_AS(witness(f, m, 1.0, 100.0, 100), PreconditionError);
  CHECK_THROWS_AS(witness(f, m, 1.0, 100.0, -150), PreconditionError);
  try {
    witness(f, m, 8.0, 0.9, 0);
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("too small") != std::string::npos);
  }
}

TEST_CASE("witness passes on the cantor primitive") {
  const auto m = Modulus::power(0.5);
  const auto f = cantor_primitive(m, 6);
  const double c = f.lip_cert()->constant;
  for (double lam : {64.0, 256.0}) {
    for (long k : admissible_ks(f, lam, 8)) {
      CAPTURE(k);
      CHECK(witness(f, m, c, lam, k).pass);
    }
  }
}

TEST_CASE("power-law envelopes in closed form") {
  // alpha = 1/2: chi(d) = d^{3/2} / sqrt(2 pi), chi^{-1}(u) = (u sqrt(2 pi))^{2/3}.
  const auto m = Modulus::power(0.5);
  const double k = std::cbrt(kTwoPi);
  for (double lam : {64.0, 1e3, 1e6}) {
    CAPTURE(lam);
    CHECK(lower_env(m, 1.0, lam) == doctest::Approx(k * std::cbrt(lam)).epsilon(1e-9));
    // Theta(y) = (2 pi)^{1/3} y^{1/3} (log y)^{1/3}.
    CHECK(upper_env_A(m, lam) == doctest::Approx(k * std::cbrt(lam * std::log(lam))).epsilon(1e-9));
    CHECK(c2_env(2.0, lam) == 1.0);
    CHECK(c2_env(1.0, lam) == doctest::Approx(std::sqrt(lam)));
  }
  CHECK(lower_env(m, 1.0, 2e6) / lower_env(m, 1.0, 1e6) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-9));
  CHECK(upper_env_Ap(m, 1.2, 100.0) == doctest::Approx(m.theta_p(1.2, 100.0)));
  CHECK_THROWS_AS(lower_env(m, 3.0, 10.0), DomainError);
  CHECK_THROWS_AS(upper_env_A(m, 1.0), DomainError);
  CHECK_THROWS_AS(c2_env(1.0, -1.0), DomainError);
}

TEST_CASE("final inequality holds for cos") {
  const auto f = cos_phase();
  const auto m = Modulus::power(1.0);
  const double c = lip_estimate(f, m);
  const auto r = derivative_range(f);
  for (double lam : {64.0, 256.0}) {
    const auto s = compute_spectrum(f, lam, band_for(lam), Engine::Dft);
    const double d = delta_lambda(m, c, lam);
    for (double p : {1.0, 1.2}) CHECK(final_inequality_lhs(r.max - r.min, lam, d, p) <= ap_norm(s, p).hi);
  }
}
