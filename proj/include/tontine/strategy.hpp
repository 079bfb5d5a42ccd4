#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tontine/annuity.hpp"
#include "tontine/params.hpp"
#include "tontine/scenario.hpp"

namespace tontine {

enum class Regime { Annuitant, Neutral, Insuree };

std::string_view to_string(Regime regime);

/// |beta k - 1| below this is treated as the neutral regime.
inline constexpr double kNeutralTolerance = 1e-12;

/// Effective discount rate
/// beta = r + (rho - r)/(1 - gamma) - (gamma/2) ((mu - r)/sigma)^2 / (1 - gamma)^2.
double beta(const MarketParams& market, const PreferenceParams& prefs);

/// Merton proportion in the risky asset, w* = (mu - r) / ((1 - gamma) sigma^2).
double merton_weight(const MarketParams& market, const PreferenceParams& prefs);

/// k = b^(1/(1-gamma)): desired bequest as a multiple of the yearly consumption amount.
double bequest_multiple(const PreferenceParams& prefs);

/// Monetary consumption-bequest ratio 1/k. Throws ConfigError when b == 0.
double mcbr(const PreferenceParams& prefs);

struct Feasibility {
  bool feasible = false;
  /// 1 + k / A_s - k beta; feasible iff positive.
  double margin = 0.0;
};

Feasibility feasibility(const PreferenceParams& prefs, double beta, double annuity_at_entry);

Regime regime(const PreferenceParams& prefs, double beta);

/// The (beta, k, w*) triple that fully determines the optimal controls.
struct ControlLaw {
  double beta = 0.0;
  double k = 0.0;
  double w_star = 0.0;

  static ControlLaw from(const MarketParams& market, const PreferenceParams& prefs);

  double price(double annuity) const { return k + (1.0 - beta * k) * annuity; }
  double consumption(double annuity) const { return 1.0 / price(annuity); }
  double bequest_proportion(double annuity) const { return k / price(annuity); }
};

/// c*(t) = 1 / m(t). Throws InfeasibleScenario if m(t) <= 0.
double consumption_rate(const Hazard& hazard, double t, const PreferenceParams& prefs,
                        const MarketParams& market, const QuadratureSettings& settings = {});

/// 1 - alpha*(t) = k c*(t).
double bequest_proportion(const Hazard& hazard, double t, const PreferenceParams& prefs,
                          const MarketParams& market, const QuadratureSettings& settings = {});

/// Risk exponent gamma < 1 solving beta(gamma) = (mu - r) w*(gamma).
///
/// Bisection over (-50, 1 - 1e-9), stopped once the residual is below 1e-12.
/// Throws NumericalFailure if the bracket holds no sign change.
double level_gamma(const MarketParams& market);

/// Evaluation ages for schedules and analytics tables.
struct AgeGrid {
  double from = 65.0;
  double to = 105.0;
  double step = 1.0;
};

Eigen::ArrayXd ages(const AgeGrid& grid);

/// Deterministic age-indexed optimal strategy.
struct StrategySchedule {
  double entry_age = 0.0;
  Eigen::ArrayXd age;
  Eigen::ArrayXd lambda;
  Eigen::ArrayXd annuity;
  Eigen::ArrayXd m_price;
  Eigen::ArrayXd c_star;
  Eigen::ArrayXd alpha_star;
  Eigen::ArrayXd bequest_prop;
  Eigen::ArrayXd w_star;
  Eigen::ArrayXd beta;
  std::vector<Regime> regime;
  double k = 0.0;
  std::optional<double> mcbr;
  /// True for the time-varying-parameter schedule, whose formulas are unproven.
  bool conjectural = false;

  Eigen::Index size() const { return age.size(); }
};

/// Optimal schedule on the given grid. Throws InfeasibleScenario (entry-age condition)
/// or DomainError (negative hazard).
StrategySchedule schedule(const ScenarioConfig& scenario, const AgeGrid& grid);

/// Schedule from entry_age to end_age in unit steps.
StrategySchedule schedule(const ScenarioConfig& scenario);

/// Market parameters that vary deterministically with age.
struct TimeVaryingMarket {
  AgeCurve r;
  AgeCurve mu;
  AgeCurve sigma;
  AgeCurve rho;

  static TimeVaryingMarket constant(const MarketParams& market);
};

/// beta(t) with age-varying market parameters.
double beta_tv(const TimeVaryingMarket& market, const PreferenceParams& prefs, double t);

/// Schedule under age-varying parameters. Feasibility (m(t) > 0) is checked at every
/// grid age; failures throw InfeasibleScenario naming the age.
StrategySchedule schedule_tv(const TimeVaryingMarket& market, const ScenarioConfig& scenario,
                             const AgeGrid& grid);

}  // namespace tontine
