#include <cmath>

#include "doctest.h"
#include "tontine/errors.hpp"
#include "tontine/mortality.hpp"

using namespace tontine;

// Reference values computed independently at 50-digit precision.
TEST_CASE("gompertz-makeham hazard and cumulative hazard at reference ages") {
  CHECK(hazard(kUkMale, 65.0) == doctest::Approx(0.011757088922884729).epsilon(1e-13));
  CHECK(cumulative_hazard(kUkMale, 65.0, 95.0) == doctest::Approx(2.537903551049811).epsilon(1e-13));
  CHECK(survival(kUkMale, 65.0, 95.0) == doctest::Approx(0.0790319126).epsilon(1e-9));
}

TEST_CASE("cumulative hazard is additive and survival starts at one") {
  const double a = cumulative_hazard(kUkMale, 60.0, 80.0);
  const double b = cumulative_hazard(kUkMale, 80.0, 110.0);
  CHECK(a + b == doctest::Approx(cumulative_hazard(kUkMale, 60.0, 110.0)).epsilon(1e-14));
  CHECK(survival(kUkMale, 70.0, 70.0) == 1.0);
  CHECK(cumulative_hazard(kUkMale, 70.0, 70.0) == 0.0);
}

TEST_CASE("survival decreases with the horizon") {
  double prev = 1.0;
  for (double t = 66.0; t <= 120.0; t += 1.0) {
    const double s = survival(kUkMale, 65.0, t);
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("reversed interval is rejected") {
  CHECK_THROWS_AS(cumulative_hazard(kUkMale, 70.0, 60.0), ConfigError);
}

TEST_CASE("negative makeham term gives a lower bound on valid ages") {
  const double t0 = validate_hazard_domain(kUkMale, 0.0);
  CHECK(t0 == doctest::Approx(52.06862083097393).epsilon(1e-12));
  CHECK(std::abs(hazard(kUkMale, t0)) < 1e-15);
  CHECK(hazard(kUkMale, 50.0) < 0.0);
  CHECK(validate_hazard_domain(kUkMale, 65.0) == 65.0);

  const Hazard h(kUkMale);
  CHECK_THROWS_AS(h.require_nonnegative_from(40.0), DomainError);
  CHECK_NOTHROW(h.require_nonnegative_from(65.0));
}

TEST_CASE("nonnegative makeham term is valid everywhere") {
  const GompertzMakehamParams p{83.43, 10.94, 0.001};
  CHECK(validate_hazard_domain(p, 0.0) == 0.0);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(validate(GompertzMakehamParams{83.0, 0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(validate(GompertzMakehamParams{83.0, -1.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(validate(GompertzMakehamParams{NAN, 10.0, 0.0}), ConfigError);
  CHECK_NOTHROW(validate(kUkMale));
}

TEST_CASE("constant hazard") {
  const Hazard h(ConstantHazard{0.03});
  CHECK(h.rate(90.0) == 0.03);
  CHECK(h.cumulative(60.0, 70.0) == doctest::Approx(0.3));
  CHECK(h.survival(60.0, 70.0) == doctest::Approx(std::exp(-0.3)));
  CHECK(h.nonnegative_from(10.0) == 10.0);
  CHECK_THROWS_AS(Hazard(ConstantHazard{-0.01}).require_nonnegative_from(0.0), DomainError);
}
