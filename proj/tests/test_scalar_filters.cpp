#include <doctest.h>

#include <cmath>
#include <limits>

#include "geocbf/errors.hpp"
#include "geocbf/oracles.hpp"
#include "geocbf/scalar_filters.hpp"

using namespace geocbf;

TEST_CASE("alpha evaluation") {
  CHECK(alpha_eval(AlphaSpec::linear(1.0), 0.0) == 0.0);
  CHECK(alpha_eval(AlphaSpec::linear(2.0), 3.0) == 6.0);
  CHECK(alpha_eval(AlphaSpec::cubic(1.0), -2.0) == -8.0);
  CHECK(alpha_derivative(AlphaSpec::cubic(2.0), 3.0) == doctest::Approx(54.0));
  CHECK(alpha_derivative(AlphaSpec::linear(0.5), -7.0) == 0.5);
}

TEST_CASE("alpha rejects non-finite arguments and bad gains") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(alpha_eval(AlphaSpec::linear(1.0), nan), std::invalid_argument);
  CHECK_THROWS_AS(alpha_eval(AlphaSpec::cubic(1.0), INFINITY), std::invalid_argument);
  CHECK_THROWS_AS(alpha_eval(AlphaSpec::linear(0.0), 1.0), std::invalid_argument);
}

TEST_CASE("alpha kind names") {
  CHECK(parse_alpha_kind("linear") == AlphaSpec::Kind::Linear);
  CHECK(parse_alpha_kind("cubic") == AlphaSpec::Kind::Cubic);
  CHECK(to_string(AlphaSpec::Kind::Cubic) == "cubic");
  CHECK_THROWS_AS(parse_alpha_kind("quadratic"), std::invalid_argument);
}

TEST_CASE("lambda_qp examples") {
  CHECK(lambda_qp(1.0, 0.0) == 0.0);
  CHECK(lambda_qp(-2.0, 4.0) == 0.5);
  CHECK(lambda_qp(3.0, 5.0) == 0.0);
  CHECK_THROWS_AS(lambda_qp(0.0, 0.0), CbfConditionViolated);
  CHECK_THROWS_AS(lambda_qp(-1.0, 0.0), CbfConditionViolated);
}

TEST_CASE("lambda_hs examples") {
  CHECK(lambda_hs(5.0, 0.0) == 0.0);
  CHECK(lambda_hs(0.0, 4.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(lambda_hs(-3.0, 4.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(lambda_hs(-1.0, 0.0), CbfConditionViolated);
}

TEST_CASE("violation error carries the offending pair") {
  try {
    lambda_hs(-2.5, 0.0);
    FAIL("expected throw");
  } catch (const CbfConditionViolated& e) {
    CHECK(e.a() == -2.5);
    CHECK(e.b() == 0.0);
  }
}

TEST_CASE("lambda_hs is accurate when a >> b") {
  // Reference from the series b/(4a) (1 - b^2/(4a^2)) for b << a.
  const double a = 1e8, b = 1e-3;
  const double ref = b / (4 * a) * (1 - b * b / (4 * a * a));
  CHECK(lambda_hs(a, b) == doctest::Approx(ref).epsilon(1e-14));
  CHECK(lambda_hs(a, b) > 0.0);
}

TEST_CASE("lambda identities on random pairs") {
  oracle::Rng rng(7);
  for (int i = 0; i < 5000; ++i) {
    const double a = oracle::uniform(rng, -10, 10);
    const double b = oracle::uniform(rng, 1e-6, 10);
    const double lq = lambda_qp(a, b), lh = lambda_hs(a, b);
    REQUIRE(lq >= 0.0);
    REQUIRE(lh >= lq);
    CHECK(a + b * lq == doctest::Approx(std::max(a, 0.0)).epsilon(1e-12).scale(1.0));
    CHECK(a + b * lh ==
          doctest::Approx(0.5 * (a + std::hypot(a, b))).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("lambda_hs tends to zero approaching b = 0 with a > 0") {
  double prev = lambda_hs(0.5, 1.0);
  for (double b = 0.5; b > 1e-14; b *= 0.5) {
    const double cur = lambda_hs(0.5, b);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev < 1e-13);
}

TEST_CASE("lambda_qp is continuous across the b = 0 boundary for a > 0") {
  for (double a : {1e-3, 0.5, 20.0})
    for (double b : {1e-1, 1e-5, 1e-12, 0.0}) CHECK(lambda_qp(a, b) == 0.0);
}

TEST_CASE("lambda_hs partials match finite differences") {
  oracle::Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double a = oracle::uniform(rng, -4, 4);
    const double b = oracle::uniform(rng, 0.1, 4);
    const LambdaPartials p = lambda_hs_partials(a, b);
    CHECK(p.value == lambda_hs(a, b));
    const double fa = oracle::central_difference([&](double s) { return lambda_hs(a + s, b); }, 1e-5);
    const double fb = oracle::central_difference([&](double s) { return lambda_hs(a, b + s); }, 1e-5);
    CHECK(p.d_a == doctest::Approx(fa).epsilon(1e-6));
    CHECK(p.d_b == doctest::Approx(fb).epsilon(1e-6));
  }
  CHECK_THROWS(lambda_hs_partials(1.0, 0.0));
}

TEST_CASE("domain membership") {
  CHECK(FilterGainPair{1.0, 0.0}.in_domain());
  CHECK(FilterGainPair{-1.0, 0.1}.in_domain());
  CHECK_FALSE(FilterGainPair{0.0, 0.0}.in_domain());
}
