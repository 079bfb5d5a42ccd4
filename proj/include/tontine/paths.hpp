#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "tontine/scenario.hpp"

namespace tontine {

/// One simulated wealth trajectory with its account split and cash flows.
struct WealthPath {
  Eigen::ArrayXd age;
  Eigen::ArrayXd wiener;            ///< W(t) - W(s)
  Eigen::ArrayXd wealth;            ///< X(t)
  Eigen::ArrayXd bequest_account;   ///< (1 - alpha*) X
  Eigen::ArrayXd consumption;       ///< c* X, currency per year
  Eigen::ArrayXd mortality_credit;  ///< alpha* lambda X, currency per year
};

/// Summary of a lognormal (or degenerate point-mass) random variable.
struct LognormalSummary {
  double mean = 0.0;
  double median = 0.0;
  double mode = 0.0;
  double log_location = 0.0;  ///< mean of ln B
  double log_scale = 0.0;     ///< standard deviation of ln B
  bool degenerate = false;
  std::vector<std::pair<double, double>> quantiles;  ///< (probability, value)

  double density(double x) const;
  double quantile(double p) const;
};

/// Wealth at age t given W(t) - W(s).
double wealth_closed_form(const ScenarioConfig& scenario, double t, double wiener_increment);

double expected_wealth(const ScenarioConfig& scenario, double t);

/// E[C(t)]: expected present value (at r, to entry) of the consumption amount, per unit of x_s.
double expected_consumption_pv(const ScenarioConfig& scenario, double t);

/// E[B(t)] = k E[C(t)]; zero when b = 0.
double expected_bequest_pv(const ScenarioConfig& scenario, double t);

/// E[I(t)]: expected present value of the mortality credit rate; negative for insurees.
double expected_income_pv(const ScenarioConfig& scenario, double t);

/// Distribution of the present-valued bequest B(t). Throws ConfigError unless t > entry age.
LognormalSummary bequest_distribution(const ScenarioConfig& scenario, double t,
                                      std::span<const double> probabilities = {});

struct SimulationOptions {
  /// Ages at which cross-sectional summaries are taken; must lie on the dt grid.
  std::vector<double> report_ages;
  /// Number of leading paths to return in full.
  std::size_t keep_paths = 0;
  unsigned threads = 1;
};

/// Monte Carlo cross-section at one age. Present values are discounted at r to entry
/// and divided by x_s.
struct AgeSummary {
  double age = 0.0;
  double mean_wealth = 0.0;
  double mean_c = 0.0, se_c = 0.0;
  double mean_b = 0.0, se_b = 0.0;
  double mean_i = 0.0, se_i = 0.0;
  double q05_b = 0.0, q50_b = 0.0, q95_b = 0.0;
};

struct SimulationResult {
  std::vector<AgeSummary> summaries;
  std::vector<WealthPath> paths;
  /// max over paths and steps of |X_euler / X_closed - 1| on shared noise.
  double max_pathwise_deviation = 0.0;
  /// max |B - k C| over paths at report ages (simulated wealth).
  double max_bequest_identity_error = 0.0;
  /// max |B(from closed-form X) - B(direct lognormal form)| at report ages.
  double max_discount_consistency_error = 0.0;
  std::size_t steps = 0;
};

/// Euler-Maruyama on ln X with the deterministic optimal controls frozen at each step
/// start. Path i draws from its own generator seeded by (seed, i), so results do not
/// depend on the thread count or on how many other paths are requested.
SimulationResult simulate_paths(const ScenarioConfig& scenario, const SimulationOptions& options);

}  // namespace tontine
