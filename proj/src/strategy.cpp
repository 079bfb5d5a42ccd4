#include "tontine/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tontine/errors.hpp"

namespace tontine {

namespace {

double beta_formula(double r, double mu, double sigma, double rho, double gamma) {
  const double sharpe = (mu - r) / sigma;
  const double inv = 1.0 / (1.0 - gamma);
  return r + (rho - r) * inv - 0.5 * gamma * sharpe * sharpe * inv * inv;
}

double merton_formula(double r, double mu, double sigma, double gamma) {
  return (mu - r) / ((1.0 - gamma) * sigma * sigma);
}

Regime classify(double beta_k) {
  if (std::abs(beta_k - 1.0) <= kNeutralTolerance) return Regime::Neutral;
  return beta_k < 1.0 ? Regime::Annuitant : Regime::Insuree;
}

void require_positive_price(double price, double t) {
  if (!(price > 0.0)) {
    std::ostringstream os;
    os << "infeasible scenario at age " << t << ": price m(t) = " << price << " <= 0";
    throw InfeasibleScenario(os.str(), price);
  }
}

}  // namespace

void validate(const MarketParams& m) {
  if (!std::isfinite(m.r) || !std::isfinite(m.mu) || !std::isfinite(m.sigma) ||
      !std::isfinite(m.rho)) {
    throw ConfigError("market parameters must be finite");
  }
  if (!(m.sigma > 0.0)) throw ConfigError("market.sigma must be positive");
  if (m.mu < m.r) throw ConfigError("market.mu must not be below market.r");
}

PreferenceParams PreferenceParams::power(double gamma, double b) {
  if (!std::isfinite(gamma) || !(gamma < 1.0)) throw ConfigError("prefs.gamma must be below 1");
  if (gamma == 0.0) {
    throw ConfigError("prefs.gamma = 0 is the logarithmic branch; set prefs.log_utility instead");
  }
  if (!std::isfinite(b) || b < 0.0) throw ConfigError("prefs.b must be nonnegative");
  return {gamma, b, false};
}

PreferenceParams PreferenceParams::logarithmic(double b) {
  if (!std::isfinite(b) || b < 0.0) throw ConfigError("prefs.b must be nonnegative");
  return {0.0, b, true};
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Annuitant: return "annuitant";
    case Regime::Neutral: return "neutral";
    case Regime::Insuree: return "insuree";
  }
  return "unknown";
}

double beta(const MarketParams& m, const PreferenceParams& prefs) {
  if (prefs.log_utility()) return m.rho;
  return beta_formula(m.r, m.mu, m.sigma, m.rho, prefs.gamma());
}

double merton_weight(const MarketParams& m, const PreferenceParams& prefs) {
  return merton_formula(m.r, m.mu, m.sigma, prefs.gamma());
}

double bequest_multiple(const PreferenceParams& prefs) {
  if (prefs.log_utility()) return prefs.b();
  return std::pow(prefs.b(), 1.0 / (1.0 - prefs.gamma()));
}

double mcbr(const PreferenceParams& prefs) {
  if (prefs.b() == 0.0) throw ConfigError("MCBR is undefined for b = 0");
  return 1.0 / bequest_multiple(prefs);
}

Feasibility feasibility(const PreferenceParams& prefs, double beta, double annuity_at_entry) {
  const double k = bequest_multiple(prefs);
  Feasibility f;
  f.margin = 1.0 + k / annuity_at_entry - k * beta;
  f.feasible = f.margin > 0.0;
  return f;
}

Regime regime(const PreferenceParams& prefs, double beta) {
  if (prefs.b() == 0.0) return Regime::Annuitant;
  return classify(beta * bequest_multiple(prefs));
}

ControlLaw ControlLaw::from(const MarketParams& market, const PreferenceParams& prefs) {
  return {tontine::beta(market, prefs), bequest_multiple(prefs), merton_weight(market, prefs)};
}

double consumption_rate(const Hazard& hazard, double t, const PreferenceParams& prefs,
                        const MarketParams& market, const QuadratureSettings& settings) {
  const auto law = ControlLaw::from(market, prefs);
  const double price = law.price(annuity_factor(hazard, t, law.beta, settings));
  require_positive_price(price, t);
  return 1.0 / price;
}

double bequest_proportion(const Hazard& hazard, double t, const PreferenceParams& prefs,
                          const MarketParams& market, const QuadratureSettings& settings) {
  return bequest_multiple(prefs) * consumption_rate(hazard, t, prefs, market, settings);
}

double level_gamma(const MarketParams& m) {
  validate(m);
  if (!(m.mu > m.r)) throw ConfigError("level_gamma requires mu > r");
  auto residual = [&](double g) {
    return beta_formula(m.r, m.mu, m.sigma, m.rho, g) - (m.mu - m.r) * merton_formula(m.r, m.mu, m.sigma, g);
  };
  double lo = -50.0;
  double hi = 1.0 - 1e-9;
  double f_lo = residual(lo);
  const double f_hi = residual(hi);
  if (f_lo * f_hi > 0.0) throw NumericalFailure("level_gamma: no sign change on (-50, 1)");
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    mid = 0.5 * (lo + hi);
    const double f_mid = residual(mid);
    if (f_mid == 0.0) break;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) break;
  }
  if (!(std::abs(residual(mid)) < 1e-12)) throw NumericalFailure("level_gamma: residual above 1e-12");
  return mid;
}

Eigen::ArrayXd ages(const AgeGrid& grid) {
  if (!(grid.step > 0.0)) throw ConfigError("age grid step must be positive");
  if (!(grid.to >= grid.from)) throw ConfigError("age grid end must not precede its start");
  const auto n = static_cast<Eigen::Index>(std::llround((grid.to - grid.from) / grid.step)) + 1;
  Eigen::ArrayXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = grid.from + grid.step * static_cast<double>(i);
  return out;
}

void validate(const ScenarioConfig& s) {
  validate(s.market);
  validate(s.mortality);
  validate(s.quadrature);
  if (!(s.initial_wealth > 0.0)) throw ConfigError("scenario.initial_wealth must be positive");
  if (!(s.dt > 0.0)) throw ConfigError("scenario.dt must be positive");
  if (!std::isfinite(s.entry_age)) throw ConfigError("scenario.entry_age must be finite");
  if (!(s.end_age > s.entry_age)) throw ConfigError("scenario.end_age must exceed entry_age");
  if (!(s.end_age < s.quadrature.max_age)) {
    throw ConfigError("scenario.end_age must be below quadrature.max_age");
  }
  s.hazard().require_nonnegative_from(s.entry_age);
}

ScenarioConfig reference_scenario(double gamma, double b) {
  ScenarioConfig s;
  s.prefs = gamma == 0.0 ? PreferenceParams::logarithmic(b) : PreferenceParams::power(gamma, b);
  return s;
}

namespace {

void require_entry_feasible(const PreferenceParams& prefs, double beta, double annuity_at_entry,
                            double entry_age) {
  const auto f = feasibility(prefs, beta, annuity_at_entry);
  if (!f.feasible) {
    const double k = bequest_multiple(prefs);
    std::ostringstream os;
    os.precision(17);
    os << "infeasible scenario at entry age " << entry_age << ": k*beta = " << k * beta
       << " must be below 1 + k/A(s,beta) = " << 1.0 + k / annuity_at_entry
       << " (margin " << f.margin << ")";
    throw InfeasibleScenario(os.str(), f.margin);
  }
}

void require_grid_within(const Eigen::ArrayXd& age, const ScenarioConfig& s) {
  if (age.size() == 0) throw ConfigError("empty age grid");
  if (age.minCoeff() < s.entry_age - 1e-9) throw ConfigError("schedule ages must not precede entry_age");
  if (!(age.maxCoeff() < s.quadrature.max_age)) {
    throw ConfigError("schedule ages must be below quadrature.max_age");
  }
}

StrategySchedule allocate(const ScenarioConfig& s, Eigen::ArrayXd age) {
  StrategySchedule out;
  out.entry_age = s.entry_age;
  const auto n = age.size();
  out.age = std::move(age);
  for (auto* col : {&out.lambda, &out.annuity, &out.m_price, &out.c_star, &out.alpha_star,
                    &out.bequest_prop, &out.w_star, &out.beta}) {
    col->resize(n);
  }
  out.regime.resize(static_cast<std::size_t>(n));
  out.k = bequest_multiple(s.prefs);
  if (s.prefs.b() > 0.0) out.mcbr = mcbr(s.prefs);
  return out;
}

}  // namespace

StrategySchedule schedule(const ScenarioConfig& s, const AgeGrid& grid) {
  validate(s);
  const Hazard hz = s.hazard();
  const auto law = ControlLaw::from(s.market, s.prefs);
  require_entry_feasible(s.prefs, law.beta, annuity_factor(hz, s.entry_age, law.beta, s.quadrature),
                         s.entry_age);

  auto out = allocate(s, ages(grid));
  require_grid_within(out.age, s);
  const Regime reg = regime(s.prefs, law.beta);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double t = out.age[i];
    const double a = annuity_factor(hz, t, law.beta, s.quadrature);
    const double price = law.price(a);
    require_positive_price(price, t);
    out.lambda[i] = hz.rate(t);
    out.annuity[i] = a;
    out.m_price[i] = price;
    out.c_star[i] = 1.0 / price;
    out.bequest_prop[i] = law.k / price;
    out.alpha_star[i] = 1.0 - out.bequest_prop[i];
    out.w_star[i] = law.w_star;
    out.beta[i] = law.beta;
    out.regime[static_cast<std::size_t>(i)] = reg;
  }
  return out;
}

StrategySchedule schedule(const ScenarioConfig& s) {
  return schedule(s, AgeGrid{s.entry_age, s.end_age, 1.0});
}

TimeVaryingMarket TimeVaryingMarket::constant(const MarketParams& m) {
  return {[r = m.r](double) { return r; }, [mu = m.mu](double) { return mu; },
          [sigma = m.sigma](double) { return sigma; }, [rho = m.rho](double) { return rho; }};
}

double beta_tv(const TimeVaryingMarket& market, const PreferenceParams& prefs, double t) {
  const double r = market.r(t);
  const double rho = market.rho(t);
  if (prefs.log_utility()) return rho;
  return beta_formula(r, market.mu(t), market.sigma(t), rho, prefs.gamma());
}

StrategySchedule schedule_tv(const TimeVaryingMarket& market, const ScenarioConfig& s,
                             const AgeGrid& grid) {
  validate(s.mortality);
  validate(s.quadrature);
  const Hazard hz = s.hazard();
  hz.require_nonnegative_from(s.entry_age);
  const double k = bequest_multiple(s.prefs);
  const AgeCurve beta_curve = [&](double t) { return beta_tv(market, s.prefs, t); };
  const AgeCurve price_weight = [&](double u) { return 1.0 - k * beta_curve(u); };

  auto price_at = [&](double t) {
    return k + discounted_integral_tv(hz, t, beta_curve, price_weight, s.quadrature);
  };
  require_positive_price(price_at(s.entry_age), s.entry_age);

  auto out = allocate(s, ages(grid));
  require_grid_within(out.age, s);
  out.conjectural = true;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double t = out.age[i];
    const double price = price_at(t);
    require_positive_price(price, t);
    const double b_t = beta_curve(t);
    const double sigma = market.sigma(t);
    if (!(sigma > 0.0)) throw ConfigError("sigma(t) must be positive");
    out.lambda[i] = hz.rate(t);
    out.annuity[i] = annuity_factor_tv(hz, t, beta_curve, s.quadrature);
    out.m_price[i] = price;
    out.c_star[i] = 1.0 / price;
    out.bequest_prop[i] = k / price;
    out.alpha_star[i] = 1.0 - out.bequest_prop[i];
    out.w_star[i] = merton_formula(market.r(t), market.mu(t), sigma, s.prefs.gamma());
    out.beta[i] = b_t;
    out.regime[static_cast<std::size_t>(i)] =
        s.prefs.b() == 0.0 ? Regime::Annuitant : classify(b_t * k);
  }
  return out;
}

}  // namespace tontine
