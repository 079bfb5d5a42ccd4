#include "tontine/figures.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "tontine/errors.hpp"
#include "tontine/paths.hpp"
#include "tontine/scenario.hpp"

namespace tontine::figures {

namespace {

void add_common_metadata(Table& t, const FigureSpec& spec) {
  t.metadata.emplace_back("figure", std::to_string(spec.id));
  t.metadata.emplace_back("entry_age", format_double(spec.entry_age));
  t.metadata.emplace_back("mortality.m", format_double(spec.mortality.m));
  t.metadata.emplace_back("mortality.q", format_double(spec.mortality.q));
  t.metadata.emplace_back("mortality.v", format_double(spec.mortality.v));
}

void add_market_metadata(Table& t, const FigureSpec& spec) {
  t.metadata.emplace_back("market.r", format_double(spec.market.r));
  t.metadata.emplace_back("market.mu", format_double(spec.market.mu));
  t.metadata.emplace_back("market.sigma", format_double(spec.market.sigma));
  t.metadata.emplace_back("market.rho", format_double(spec.market.rho));
}

PreferenceParams prefs_for(double gamma, double b) {
  return gamma == 0.0 ? PreferenceParams::logarithmic(b) : PreferenceParams::power(gamma, b);
}

ScenarioConfig scenario_for(const FigureSpec& spec, double gamma, double b) {
  ScenarioConfig s;
  s.market = spec.market;
  s.prefs = prefs_for(gamma, b);
  s.mortality = spec.mortality;
  s.entry_age = spec.entry_age;
  s.end_age = std::max(spec.ages.to, spec.bequest_age);
  s.quadrature = spec.quadrature;
  return s;
}

}  // namespace

void validate(const FigureSpec& spec) {
  if (spec.id < 1 || spec.id > 6) throw ConfigError("figure id must be between 1 and 6");
  if (spec.mcbr_grid.empty() || spec.beta_grid.empty() || spec.b_grid.empty() ||
      spec.gamma_grid.empty() || spec.bequest_gammas.empty()) {
    throw ConfigError("figure grids must be nonempty");
  }
  for (const double b : spec.beta_grid) {
    if (!(b > -1.0)) throw ConfigError("figure beta grid values must exceed -1");
  }
  for (const double m : spec.mcbr_grid) {
    if (!(m > 0.0)) throw ConfigError("figure MCBR grid values must be positive");
  }
  if (spec.density_points < 2) throw ConfigError("figure density_points must be at least 2");
  validate(spec.mortality);
  validate(spec.quadrature);
  Hazard(spec.mortality).require_nonnegative_from(spec.entry_age);
}

Table figure1(const FigureSpec& spec) {
  validate(spec);
  Table t;
  add_common_metadata(t, spec);
  t.columns = {"age", "mcbr", "beta", "bequest_prop", "reason"};
  const Hazard hz(spec.mortality);
  const Eigen::ArrayXd age = ages(spec.ages);
  for (const double mcbr_value : spec.mcbr_grid) {
    for (const double beta_value : spec.beta_grid) {
      std::string reason;
      try {
        const double a_entry = annuity_factor(hz, spec.entry_age, beta_value, spec.quadrature);
        if (!(1.0 + (mcbr_value - beta_value) * a_entry > 0.0)) {
          reason = "infeasible: 1 + (MCBR - beta) A(s, beta) <= 0";
        }
      } catch (const Error& e) {
        reason = e.what();
      }
      for (const double a : age) {
        std::vector<Cell> row{a, mcbr_value, beta_value};
        if (reason.empty()) {
          row.emplace_back(1.0 / (1.0 + (mcbr_value - beta_value) * annuity_factor(hz, a, beta_value, spec.quadrature)));
          row.emplace_back(std::string{});
        } else {
          row.emplace_back(Null{});
          row.emplace_back(reason);
        }
        t.rows.push_back(std::move(row));
      }
    }
  }
  return t;
}

Table figures2to5(const FigureSpec& spec) {
  validate(spec);
  Table t;
  add_common_metadata(t, spec);
  add_market_metadata(t, spec);
  t.columns = {"age", "b", "gamma", "bequest_prop", "e_c_pv", "e_b_pv", "e_i_pv", "regime", "reason"};
  const Eigen::ArrayXd age = ages(spec.ages);
  for (const double gamma : spec.gamma_grid) {
    for (const double b : spec.b_grid) {
      std::string reason;
      std::optional<StrategySchedule> sched;
      const auto scenario = scenario_for(spec, gamma, b);
      try {
        sched = schedule(scenario, spec.ages);
      } catch (const Error& e) {
        reason = e.what();
      }
      for (Eigen::Index i = 0; i < age.size(); ++i) {
        std::vector<Cell> row{age[i], b, gamma};
        if (sched) {
          const double a = age[i];
          row.emplace_back(sched->bequest_prop[i]);
          row.emplace_back(expected_consumption_pv(scenario, a));
          row.emplace_back(expected_bequest_pv(scenario, a));
          row.emplace_back(expected_income_pv(scenario, a));
          row.emplace_back(std::string(to_string(sched->regime[static_cast<std::size_t>(i)])));
          row.emplace_back(std::string{});
        } else {
          for (int k = 0; k < 5; ++k) row.emplace_back(Null{});
          row.emplace_back(reason);
        }
        t.rows.push_back(std::move(row));
      }
    }
  }
  return t;
}

Table figure6(const FigureSpec& spec) {
  validate(spec);
  Table t;
  add_common_metadata(t, spec);
  add_market_metadata(t, spec);
  t.metadata.emplace_back("bequest_age", format_double(spec.bequest_age));
  t.metadata.emplace_back("b", format_double(spec.bequest_b));
  t.columns = {"gamma", "kind", "x", "value"};
  const std::vector<double> probs{0.05, 0.25, 0.5, 0.75, 0.95};
  for (const double gamma : spec.bequest_gammas) {
    const auto s = scenario_for(spec, gamma, spec.bequest_b);
    const auto d = bequest_distribution(s, spec.bequest_age, probs);
    t.rows.push_back({gamma, std::string("mean"), Null{}, d.mean});
    t.rows.push_back({gamma, std::string("median"), Null{}, d.median});
    t.rows.push_back({gamma, std::string("mode"), Null{}, d.mode});
    for (const auto& [p, q] : d.quantiles) t.rows.push_back({gamma, std::string("quantile"), p, q});
    if (d.degenerate) continue;
    // Log-spaced density samples between the 0.1% and 99.9% quantiles.
    const double lo = std::log(d.quantile(0.001));
    const double hi = std::log(d.quantile(0.999));
    for (int k = 0; k < spec.density_points; ++k) {
      const double x = std::exp(lo + (hi - lo) * k / (spec.density_points - 1));
      t.rows.push_back({gamma, std::string("density"), x, d.density(x)});
    }
  }
  return t;
}

Table figure(const FigureSpec& spec) {
  validate(spec);
  if (spec.id == 1) return figure1(spec);
  if (spec.id == 6) return figure6(spec);
  static const char* const kQuantity[] = {"bequest_prop", "e_c_pv", "e_b_pv", "e_i_pv"};
  const std::string keep = kQuantity[spec.id - 2];
  Table all = figures2to5(spec);
  Table t;
  t.metadata = all.metadata;
  t.metadata.emplace_back("quantity", keep);
  t.columns = {"age", "b", "gamma", keep, "reason"};
  std::size_t col = 0;
  while (all.columns[col] != keep) ++col;
  for (auto& row : all.rows) {
    t.rows.push_back({row[0], row[1], row[2], row[col], row.back()});
  }
  return t;
}

}  // namespace tontine::figures
