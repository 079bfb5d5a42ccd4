#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "tontine/pool.hpp"
#include "tontine/scenario.hpp"
#include "tontine/strategy.hpp"
#include "tontine/table.hpp"

namespace tontine {

using json = nlohmann::json;

/// Reads and parses a JSON file. Throws ConfigError on I/O or syntax errors.
json load_json(const std::filesystem::path& path);

/// Scenario document:
///   market{r,mu,sigma,rho}, prefs{gamma | log_utility, b}, mortality{m,q,v}   (required)
///   scenario{entry_age,initial_wealth,end_age,dt,paths,seed}, quadrature{...} (optional)
/// Errors name the offending key, e.g. "missing key: mortality.q".
ScenarioConfig scenario_from_json(const json& doc);
json to_json(const ScenarioConfig& scenario);

/// 16 hex digits of FNV-1a over the canonical (key-sorted, compact) dump.
std::string config_hash(const json& doc);

struct PoolSpec {
  std::vector<pool::Member> members;
  double dt = 1.0 / 252.0;
  std::size_t steps = 1;
  std::size_t replications = 10000;
  std::uint64_t seed = 1;
};

/// Either a bare member array or {members:[...], dt, steps, replications, seed}.
/// A member carries age, wealth, optional mortality, optional count, and either a
/// fixed `alpha` or a `scenario` object with market/prefs (and optional quadrature).
PoolSpec pool_spec_from_json(const json& doc);

/// Columns: age, lambda, annuity_A, m_price, c_star, alpha_star, bequest_prop, w_star, regime.
Table schedule_table(const StrategySchedule& schedule);

}  // namespace tontine
