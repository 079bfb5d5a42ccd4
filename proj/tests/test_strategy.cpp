#include <cmath>

#include "doctest.h"
#include "tontine/errors.hpp"
#include "tontine/strategy.hpp"

using namespace tontine;

namespace {
const MarketParams kMarket{};
const Hazard kHz(kUkMale);
}  // namespace

TEST_CASE("merton weight") {
  CHECK(std::abs(merton_weight(kMarket, PreferenceParams::power(0.8, 3.0)) - 3.75) < 1e-12);
  CHECK(std::abs(merton_weight(kMarket, PreferenceParams::power(0.25, 3.0)) - 1.0) < 1e-12);
  CHECK(merton_weight(kMarket, PreferenceParams::logarithmic(1.0)) == doctest::Approx(0.75));
}

TEST_CASE("effective discount rate") {
  CHECK(beta(kMarket, PreferenceParams::power(0.25, 3.0)) == doctest::Approx(0.015).epsilon(1e-14));
  CHECK(beta(kMarket, PreferenceParams::power(0.8, 3.0)) == doctest::Approx(-0.205).epsilon(1e-14));
  CHECK(beta(kMarket, PreferenceParams::logarithmic(3.0)) == doctest::Approx(0.02).epsilon(1e-14));
  const MarketParams impatient{0.02, 0.05, 0.2, 0.05};
  // rho enters as (rho - r) / (1 - gamma).
  CHECK(beta(impatient, PreferenceParams::power(0.5, 1.0)) ==
        doctest::Approx(0.02 + 0.06 - 0.25 * 0.0225 / 0.25).epsilon(1e-14));
}

TEST_CASE("level risk exponent") {
  const double g = level_gamma(kMarket);
  CHECK(g == doctest::Approx(-0.08225035112351855).epsilon(1e-12));
  const auto prefs = PreferenceParams::power(g, 1.0);
  CHECK(std::abs(beta(kMarket, prefs) - (kMarket.mu - kMarket.r) * merton_weight(kMarket, prefs)) < 1e-12);

  // With a 4% premium and 20% volatility 1 - gamma is the golden ratio.
  const MarketParams steep{0.02, 0.06, 0.2, 0.02};
  CHECK(level_gamma(steep) == doctest::Approx(1.0 - (1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-11));
}

TEST_CASE("bequest multiple and consumption-bequest ratio") {
  CHECK(bequest_multiple(PreferenceParams::power(-0.0825, 10.0)) == doctest::Approx(8.4).epsilon(0.05 / 8.4));
  CHECK(bequest_multiple(PreferenceParams::power(0.25, 3.0)) == doctest::Approx(std::pow(3.0, 4.0 / 3.0)));
  CHECK(bequest_multiple(PreferenceParams::logarithmic(7.0)) == 7.0);
  CHECK(bequest_multiple(PreferenceParams::power(0.25, 0.0)) == 0.0);
  CHECK(mcbr(PreferenceParams::power(0.25, 3.0)) == doctest::Approx(std::pow(3.0, -4.0 / 3.0)));
  CHECK_THROWS_AS(mcbr(PreferenceParams::power(0.25, 0.0)), ConfigError);
}

TEST_CASE("preference validation") {
  CHECK_THROWS_AS(PreferenceParams::power(1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(PreferenceParams::power(1.5, 1.0), ConfigError);
  CHECK_THROWS_AS(PreferenceParams::power(0.5, -1.0), ConfigError);
}

TEST_CASE("feasibility arithmetic") {
  const auto prefs = PreferenceParams::logarithmic(100.0);
  const auto f = feasibility(prefs, 0.05, 25.0);
  CHECK_FALSE(f.feasible);
  CHECK(std::abs(f.margin) < 1e-14);
  const auto g = feasibility(PreferenceParams::logarithmic(200.0), 0.05, 25.0);
  CHECK_FALSE(g.feasible);
  CHECK(g.margin < 0.0);
  const auto neutral = feasibility(PreferenceParams::logarithmic(20.0), 0.05, 25.0);
  CHECK(neutral.feasible);
  CHECK(neutral.margin == doctest::Approx(20.0 / 25.0));
}

TEST_CASE("regimes") {
  CHECK(regime(PreferenceParams::power(0.25, 3.0), 0.015) == Regime::Annuitant);
  CHECK(regime(PreferenceParams::logarithmic(50.0), 0.02) == Regime::Neutral);
  CHECK(regime(PreferenceParams::logarithmic(100.0), 0.02) == Regime::Insuree);
  CHECK(regime(PreferenceParams::logarithmic(0.0), 0.02) == Regime::Annuitant);
  CHECK(regime(PreferenceParams::logarithmic(100.0), -0.02) == Regime::Annuitant);
}

TEST_CASE("schedule columns and row count") {
  const auto s = reference_scenario(0.25, 3.0);
  const auto sched = schedule(s);
  REQUIRE(sched.size() == 41);
  CHECK(sched.age[0] == 65.0);
  CHECK(sched.age[40] == 105.0);
  for (Eigen::Index i = 0; i < sched.size(); ++i) {
    CHECK(sched.c_star[i] > 0.0);
    CHECK(sched.bequest_prop[i] == doctest::Approx(sched.k * sched.c_star[i]));
    CHECK(sched.alpha_star[i] == doctest::Approx(1.0 - sched.bequest_prop[i]));
    CHECK(sched.c_star[i] * sched.m_price[i] == doctest::Approx(1.0));
    CHECK(sched.w_star[i] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sched.regime[static_cast<std::size_t>(i)] == Regime::Annuitant);
  }
  // Annuitant: bequest proportion rises toward one with age.
  for (Eigen::Index i = 1; i < sched.size(); ++i) CHECK(sched.bequest_prop[i] > sched.bequest_prop[i - 1]);
  CHECK(sched.mcbr.has_value());
  CHECK_FALSE(sched.conjectural);
}

TEST_CASE("no bequest motive") {
  const auto sched = schedule(reference_scenario(0.25, 0.0));
  CHECK((sched.bequest_prop == 0.0).all());
  CHECK((sched.alpha_star == 1.0).all());
  CHECK_FALSE(sched.mcbr.has_value());
}

TEST_CASE("neutral regime holds nothing in the tontine") {
  auto s = reference_scenario(0.0, 50.0);  // log utility, beta = 0.02, k = 50
  const auto sched = schedule(s);
  for (Eigen::Index i = 0; i < sched.size(); ++i) {
    CHECK(std::abs(sched.alpha_star[i]) < 1e-12);
    CHECK(sched.c_star[i] == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(sched.regime[static_cast<std::size_t>(i)] == Regime::Neutral);
  }
}

TEST_CASE("insuree regime has negative alpha shrinking in magnitude") {
  const auto sched = schedule(reference_scenario(0.0, 200.0));
  for (Eigen::Index i = 0; i < sched.size(); ++i) {
    CHECK(sched.alpha_star[i] < 0.0);
    CHECK(sched.regime[static_cast<std::size_t>(i)] == Regime::Insuree);
  }
  for (Eigen::Index i = 1; i < sched.size(); ++i) CHECK(sched.bequest_prop[i] < sched.bequest_prop[i - 1]);
}

TEST_CASE("scalar entry points match the schedule") {
  const auto s = reference_scenario(-2.0, 10.0);
  const auto sched = schedule(s);
  for (Eigen::Index i = 0; i < sched.size(); i += 10) {
    CHECK(consumption_rate(kHz, sched.age[i], s.prefs, s.market) == doctest::Approx(sched.c_star[i]).epsilon(1e-14));
    CHECK(bequest_proportion(kHz, sched.age[i], s.prefs, s.market) ==
          doctest::Approx(sched.bequest_prop[i]).epsilon(1e-14));
  }
}

TEST_CASE("constant curves reproduce the schedule") {
  const auto s = reference_scenario(0.8, 3.0);
  const AgeGrid grid{65.0, 105.0, 0.5};
  const auto a = schedule(s, grid);
  const auto b = schedule_tv(TimeVaryingMarket::constant(s.market), s, grid);
  CHECK(b.conjectural);
  CHECK(((a.c_star - b.c_star).abs() / a.c_star).maxCoeff() < 1e-10);
  CHECK(((a.bequest_prop - b.bequest_prop).abs() / a.bequest_prop).maxCoeff() < 1e-10);
  CHECK((a.beta - b.beta).abs().maxCoeff() < 1e-14);
}

TEST_CASE("price splits into annuity and hazard-weighted parts") {
  // m = k + (1 - beta k) A equals A + k * int lambda D, so it stays positive.
  const auto s = reference_scenario(0.0, 200.0);
  const AgeCurve beta = [](double) { return 0.02; };
  const AgeCurve lambda = [](double t) { return hazard(kUkMale, t); };
  for (double t : {65.0, 85.0, 100.0}) {
    const double a = annuity_factor(kHz, t, 0.02);
    const double weighted = discounted_integral_tv(kHz, t, beta, lambda);
    CHECK(m_price(kHz, t, 0.02, s.prefs) == doctest::Approx(a + 200.0 * weighted).epsilon(1e-9));
  }
}

TEST_CASE("scenario validation") {
  auto s = reference_scenario(0.25, 3.0);
  s.entry_age = 45.0;
  CHECK_THROWS_AS(validate(s), DomainError);
  s = reference_scenario(0.25, 3.0);
  s.end_age = 140.0;
  CHECK_THROWS_AS(validate(s), ConfigError);
  s = reference_scenario(0.25, 3.0);
  s.initial_wealth = 0.0;
  CHECK_THROWS_AS(validate(s), ConfigError);
}
