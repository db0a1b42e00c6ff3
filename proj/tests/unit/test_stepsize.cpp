#include "clipfl/errors.hpp"
#include "clipfl/stepsize.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace clipfl;
using namespace clipfl::testing;

TEST_CASE("stepsize substitution") {
  CHECK(stepsize(ClipPolicy(1.0, 1.0, StepsizeMode::kPseudogradient), 3.0) == 0.25);
  const ClipPolicy c(2.0, 0.0, StepsizeMode::kConstant);
  for (double n : {0.0, 1.0, 1e6}) CHECK(stepsize(c, n) == 0.5);
  CHECK(stepsize(ClipPolicy::constant(0.125), 42.0) == 0.125);
}

TEST_CASE("stepsize lies in the beta-lambda bracket") {
  const ClipPolicy p(1.0, 2.0, StepsizeMode::kExactGradient);
  const auto bl = to_beta_lambda(1.0, 2.0);
  CHECK(bl.beta == 0.5);
  CHECK(bl.lambda == 0.5);
  // With beta = 1/(2 c0) the stepsize is 2 beta lambda / (lambda + norm), so
  // it sits between beta * clip and 2 beta * clip.
  for (double n : {0.1, 1.0, 10.0, 100.0}) {
    const double clip = std::min(1.0, bl.lambda / n);
    const double s = stepsize(p, n);
    CHECK(s >= bl.beta * clip);
    CHECK(s <= 2.0 * bl.beta * clip);
    CHECK(s == doctest::Approx(2.0 * bl.beta * bl.lambda / (bl.lambda + n)).epsilon(1e-15));
  }
  // The halved bracket is exceeded whenever the norm is below lambda.
  CHECK(stepsize(p, 0.1) > bl.beta);
}

TEST_CASE("invalid policies and norms") {
  CHECK_THROWS_AS(ClipPolicy(0.0, 1.0, StepsizeMode::kPseudogradient), UsageError);
  CHECK_THROWS_AS(ClipPolicy(1.0, -1.0, StepsizeMode::kPseudogradient), UsageError);
  CHECK_THROWS_AS(ClipPolicy(1.0, 1.0, StepsizeMode::kConstant), UsageError);
  CHECK_THROWS_AS(ClipPolicy(INFINITY, 0.0, StepsizeMode::kConstant), UsageError);
  const ClipPolicy p(1.0, 1.0, StepsizeMode::kPseudogradient);
  CHECK_THROWS_AS(stepsize(p, -1.0), InputError);
  CHECK_THROWS_AS(stepsize(p, NAN), InputError);
  CHECK_THROWS_AS(stepsize(p, INFINITY), InputError);
}

TEST_CASE("beta-lambda conversion") {
  const auto c = from_beta_lambda(0.5, 0.5);
  CHECK(c.c0 == 1.0);
  CHECK(c.c1 == 2.0);
  CHECK_THROWS_AS(to_beta_lambda(1.0, 0.0), UsageError);
  CHECK_THROWS_AS(to_beta_lambda(0.0, 1.0), UsageError);
}

TEST_CASE("beta-lambda round trip on random pairs") {
  for_all(200, 4, [](Gen& gen, std::size_t) {
    const double c0 = gen.log_real(1e-8, 1e8);
    const double c1 = gen.log_real(1e-8, 1e8);
    const auto bl = to_beta_lambda(c0, c1);
    const auto back = from_beta_lambda(bl.beta, bl.lambda);
    const bool ok = rel_err(back.c0, c0) <= 1e-15 && rel_err(back.c1, c1) <= 1e-15;
    CHECK(rel_err(back.c0, c0) <= 1e-15);
    CHECK(rel_err(back.c1, c1) <= 1e-15);
    return ok;
  });
}

TEST_CASE("stepsize is monotone and sandwiched") {
  for_all(200, 5, [](Gen& gen, std::size_t) {
    const double c0 = gen.log_real(1e-3, 1e3);
    const double c1 = gen.log_real(1e-3, 1e3);
    const ClipPolicy p(c0, c1, StepsizeMode::kPseudogradient);
    const double a = gen.log_real(1e-6, 1e6);
    const double b = a * gen.real(1.0, 10.0);
    bool ok = stepsize(p, b) <= stepsize(p, a);
    ok = ok && stepsize(p, a) > 0.0 && stepsize(p, a) <= 1.0 / c0;
    const auto bl = to_beta_lambda(c0, c1);
    const double clip = std::min(1.0, bl.lambda / a);
    ok = ok && stepsize(p, a) >= bl.beta * clip * (1 - 1e-15) &&
         stepsize(p, a) <= 2.0 * bl.beta * clip * (1 + 1e-15);
    CHECK(ok);
    return ok;
  });
}

TEST_CASE("theory ranges degenerate to the smooth case when L1 = 0") {
  const GradientNorms n{3.0, 5.0, 9.0};
  const auto b = theory_stepsize_ranges(2.0, 0.0, n, 4, 0.25, 100);
  CHECK(b.a_hat == 2.0);
  CHECK(b.a_local == 2.0);
  CHECK(b.a_tilde == 2.0);
  CHECK(b.gamma_lower == doctest::Approx(0.25 / 2.0));
  CHECK(b.gamma_upper == doctest::Approx(1.0 / 8.0));
  CHECK(b.alpha_max == doctest::Approx(std::min(1.0 / (2 * 4 * 2.0), 1.0 / (10.0 * 2.0))));
}

TEST_CASE("theory ranges with H = 1") {
  const GradientNorms n{1.0, 2.0, 4.0};
  const double L0 = 1.0, L1 = 0.5;
  const auto b = theory_stepsize_ranges(L0, L1, n, 1, 0.1, 16);
  const double a_hat = L0 + L1 * 1.0, a = L0 + L1 * 2.0;
  CHECK(b.a_hat == a_hat);
  CHECK(b.a_local == a);
  CHECK(b.a_tilde == L0 + L1 * 4.0);
  CHECK(b.alpha_max == doctest::Approx(std::min(1.0 / (2.0 * a), std::sqrt(a_hat / a) / (4.0 * a))));
  CHECK(b.gamma_lower <= b.gamma_upper);
}

TEST_CASE("theory ranges validate their inputs") {
  const GradientNorms n{1.0, 1.0, 1.0};
  CHECK_THROWS_AS(theory_stepsize_ranges(0.0, 1.0, n, 1, 0.25, 1), InputError);
  CHECK_THROWS_AS(theory_stepsize_ranges(1.0, -1.0, n, 1, 0.25, 1), InputError);
  CHECK_THROWS_AS(theory_stepsize_ranges(1.0, 1.0, n, 0, 0.25, 1), InputError);
  CHECK_THROWS_AS(theory_stepsize_ranges(1.0, 1.0, n, 1, 0.3, 1), InputError);
  CHECK_THROWS_AS(theory_stepsize_ranges(1.0, 1.0, n, 1, 0.25, 0), InputError);
}

TEST_CASE("clipped stepsize with c0 = 4 L0, c1 = 4 L1 satisfies the theorem premise at zeta = 1/4") {
  for_all(100, 6, [](Gen& gen, std::size_t) {
    const double L0 = gen.log_real(1e-2, 1e2);
    const double L1 = gen.log_real(1e-3, 1e1);
    const double gn = gen.log_real(1e-4, 1e4);
    const GradientNorms n{gn, gn * 2.0, gn * 3.0};
    const auto b = theory_stepsize_ranges(L0, L1, n, 3, 0.25, 50);
    const double gamma = stepsize(ClipPolicy(4.0 * L0, 4.0 * L1, StepsizeMode::kExactGradient), gn);
    CHECK(b.admits(gamma));
    CHECK(b.a_hat <= b.a_local);
    CHECK(b.a_local <= b.a_tilde);
    return b.admits(gamma);
  });
}

TEST_CASE("PL inner stepsize cap") {
  CHECK(pl_inner_stepsize_cap(4.0, 1.0, 1) == doctest::Approx(2.0));
  CHECK(pl_inner_stepsize_cap(4.0, 4.0, 4) == doctest::Approx(0.5));
}

TEST_CASE("mode names round-trip") {
  for (auto m : {StepsizeMode::kExactGradient, StepsizeMode::kPseudogradient, StepsizeMode::kConstant}) {
    CHECK(stepsize_mode_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(stepsize_mode_from_string("bogus"), UsageError);
}
