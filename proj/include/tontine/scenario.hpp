#pragma once

#include <cstdint>

#include "tontine/annuity.hpp"
#include "tontine/mortality.hpp"
#include "tontine/params.hpp"

namespace tontine {

/// Everything needed to evaluate one member's optimal strategy and simulate it.
struct ScenarioConfig {
  MarketParams market;
  PreferenceParams prefs = PreferenceParams::power(0.25, 3.0);
  GompertzMakehamParams mortality = kUkMale;
  double entry_age = 65.0;
  double initial_wealth = 1.0;
  double end_age = 105.0;
  double dt = 1.0 / 252.0;
  std::uint64_t paths = 10000;
  std::uint64_t seed = 1;
  QuadratureSettings quadrature;

  Hazard hazard() const { return Hazard(mortality); }
};

/// Field-level checks. Throws ConfigError, or DomainError if the hazard is negative at entry.
void validate(const ScenarioConfig& scenario);

/// r = rho = 0.02, mu = 0.05, sigma = 0.2, UK male mortality, entry at 65.
ScenarioConfig reference_scenario(double gamma, double b);

}  // namespace tontine
