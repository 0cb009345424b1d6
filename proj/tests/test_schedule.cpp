#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "lsaga/schedule.hpp"

using lsaga::StepSchedule;
using lsaga::validate_rate_conditions;

TEST_CASE("gamma evaluates c / n^alpha") {
  CHECK(StepSchedule::create(1.0, 1.0).gamma(1) == 1.0);
  CHECK(StepSchedule::create(1.0, 1.0).gamma(4) == 0.25);
  // 2 / 16^0.75 = 2 / 8
  CHECK(StepSchedule::create(2.0, 0.75).gamma(16) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(StepSchedule::create(1.0, 1.0).gamma(0), std::invalid_argument);
}

TEST_CASE("schedule validation") {
  CHECK_NOTHROW(StepSchedule::create(1.0, 1.0));
  CHECK_NOTHROW(StepSchedule::create(0.3, 0.51));
  CHECK_THROWS_WITH_AS(StepSchedule::create(1.0, 0.5), doctest::Contains("alpha must exceed 1/2"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(StepSchedule::create(-1.0, 0.75), doctest::Contains("c must be positive"),
                       std::invalid_argument);
  CHECK_THROWS_AS(StepSchedule::create(0.0, 0.75), std::invalid_argument);
  CHECK_THROWS_AS(StepSchedule::create(1.0, 1.0000001), std::invalid_argument);
}

TEST_CASE("steps are decreasing and eventually below any threshold") {
  for (double alpha : {0.55, 0.75, 1.0}) {
    for (double c : {0.1, 1.0, 5.0}) {
      const auto s = StepSchedule::create(c, alpha);
      for (std::uint64_t n = 1; n < 5000; ++n) CHECK(s.gamma(n + 1) <= s.gamma(n));
      for (double eps : {1e-1, 1e-3, 1e-5}) {
        const auto cut = s.steps_below(eps);
        CHECK(s.gamma(cut + 1) < eps);
        CHECK(s.gamma(cut * 10 + 7) < eps);
      }
    }
  }
}

TEST_CASE("rate conditions") {
  const auto unit = StepSchedule::create(1.0, 1.0);

  auto r = validate_rate_conditions(unit, 0.9, 1);
  CHECK(r.l2_rate_ok);  // 1.8 <= 2 and 1.8 > 1
  CHECK(r.p == 1);
  CHECK(r.mu == 0.9);

  r = validate_rate_conditions(unit, 0.4, 1);
  CHECK_FALSE(r.l2_rate_ok);  // 0.8 <= 1
  CHECK_FALSE(r.messages.empty());

  r = validate_rate_conditions(unit, 1.5, 2);
  CHECK_FALSE(r.l2p_rate_ok);  // p c mu = 3 > 2

  // alpha < 1 drops the lower bound.
  const auto slow = StepSchedule::create(std::pow(2.0, -0.25), 0.75);
  r = validate_rate_conditions(slow, 1.0, 1);
  CHECK(r.l2_rate_ok);  // 2 c mu = 2^alpha exactly

  // At alpha = 1, p = 2 cannot satisfy both p c mu <= 2 and c mu > 1.
  for (double mu : {0.5, 0.9, 1.0, 1.1}) {
    CHECK_FALSE(validate_rate_conditions(unit, mu, 2).l2p_rate_ok);
  }

  CHECK_THROWS_AS(validate_rate_conditions(unit, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(validate_rate_conditions(unit, 1.0, 0), std::invalid_argument);
}

TEST_CASE("rate condition check is pure") {
  const auto s = StepSchedule::create(0.7, 0.8);
  const auto first = validate_rate_conditions(s, 1.3, 3);
  const auto second = validate_rate_conditions(s, 1.3, 3);
  CHECK(first == second);
  CHECK(s.c() == 0.7);
  CHECK(s.alpha() == 0.8);
}
