#include "tontine/oracle.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "tontine/errors.hpp"

namespace tontine::oracle {

namespace {

using Rhs = std::function<double(double, double)>;

/// Classical RK4 on a fixed grid. `guard` may stop the run early by returning false.
Trajectory rk4(const Rhs& f, double y0, const OdeSettings& s,
               const std::function<bool(double, double)>& guard = {}) {
  validate(s);
  const auto steps = static_cast<Eigen::Index>(std::llround((s.end_age - s.start_age) / s.step));
  const double h = (s.end_age - s.start_age) / static_cast<double>(steps);
  Trajectory out;
  out.age.resize(steps + 1);
  out.value.resize(steps + 1);
  out.age[0] = s.start_age;
  out.value[0] = y0;
  double y = y0;
  for (Eigen::Index i = 0; i < steps; ++i) {
    const double t = s.start_age + h * static_cast<double>(i);
    const double k1 = f(t, y);
    const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = f(t + h, y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.age[i + 1] = s.start_age + h * static_cast<double>(i + 1);
    out.value[i + 1] = y;
    if (guard && !guard(out.age[i + 1], y)) {
      out.age.conservativeResize(i + 2);
      out.value.conservativeResize(i + 2);
      break;
    }
  }
  return out;
}

Rhs consumption_rhs(const Hazard& hz, const ControlLaw& law) {
  return [hz, law](double t, double c) {
    const double lambda = hz.rate(t);
    return c * (c * (1.0 + law.k * lambda) - lambda - law.beta);
  };
}

double closed_form_rate(const ScenarioConfig& s, const ControlLaw& law, double t) {
  return law.consumption(annuity_factor(s.hazard(), t, law.beta, s.quadrature));
}

void require_power_utility(const ScenarioConfig& s) {
  if (s.prefs.log_utility()) {
    throw ConfigError("the HJB value function x^gamma/gamma needs a power-utility scenario");
  }
}

}  // namespace

void validate(const OdeSettings& s) {
  if (!(s.step > 0.0)) throw ConfigError("ode step must be positive");
  if (!(s.end_age > s.start_age)) throw ConfigError("ode end age must exceed start age");
}

double Trajectory::at(double t) const {
  const double h = (age[age.size() - 1] - age[0]) / static_cast<double>(age.size() - 1);
  const auto i = static_cast<Eigen::Index>(std::llround((t - age[0]) / h));
  if (i < 0 || i >= age.size() || std::abs(age[i] - t) > 1e-9) {
    std::ostringstream os;
    os << "age " << t << " is not a node of the trajectory";
    throw ConfigError(os.str());
  }
  return value[i];
}

Trajectory integrate_consumption_ode(const ScenarioConfig& s, const OdeSettings& settings,
                                     double initial_rate) {
  const auto law = ControlLaw::from(s.market, s.prefs);
  double failed_at = NAN;
  auto traj = rk4(consumption_rhs(s.hazard(), law), initial_rate, settings,
                  [&](double t, double c) {
                    if (std::isfinite(c) && c > 0.0) return true;
                    failed_at = t;
                    return false;
                  });
  if (!std::isnan(failed_at)) {
    std::ostringstream os;
    os << "consumption ODE left (0, inf) at age " << failed_at;
    throw NumericalFailure(os.str());
  }
  return traj;
}

Trajectory integrate_consumption_ode(const ScenarioConfig& s, const OdeSettings& settings) {
  const auto law = ControlLaw::from(s.market, s.prefs);
  return integrate_consumption_ode(s, settings, closed_form_rate(s, law, settings.start_age));
}

double max_relative_deviation(const Trajectory& ode, const ScenarioConfig& s,
                              const Eigen::ArrayXd& ages) {
  const auto law = ControlLaw::from(s.market, s.prefs);
  double worst = 0.0;
  for (const double t : ages) {
    worst = std::max(worst, std::abs(ode.at(t) / closed_form_rate(s, law, t) - 1.0));
  }
  return worst;
}

std::string_view to_string(Divergence d) {
  switch (d) {
    case Divergence::NegativeDenominator: return "negative_denominator";
    case Divergence::BequestLimitViolated: return "bequest_limit_violated";
    case Divergence::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

DivergenceReport boundary_divergence_demo(const ScenarioConfig& s, double epsilon,
                                          const OdeSettings& settings) {
  const auto law = ControlLaw::from(s.market, s.prefs);
  const double start_price = law.price(annuity_factor(s.hazard(), settings.start_age, law.beta, s.quadrature));
  // Ratios to the closed form beyond these bounds count as divergence.
  constexpr double kBlowUp = 100.0;
  constexpr double kCollapse = 0.01;

  DivergenceReport report;
  report.age = settings.end_age;
  double next_check = std::ceil(settings.start_age);
  auto guard = [&](double t, double c) {
    if (!std::isfinite(c) || c <= 0.0) {
      report.kind = Divergence::NegativeDenominator;
      report.age = t;
      return false;
    }
    if (t + 1e-9 < next_check) return true;
    next_check += 1.0;
    const double ratio = c / closed_form_rate(s, law, t);
    if (ratio > kBlowUp) {
      report.kind = Divergence::NegativeDenominator;
    } else if (ratio < kCollapse) {
      report.kind = Divergence::BequestLimitViolated;
    } else {
      report.max_relative_deviation = std::max(report.max_relative_deviation, std::abs(ratio - 1.0));
      return true;
    }
    report.age = t;
    return false;
  };
  rk4(consumption_rhs(s.hazard(), law), 1.0 / (start_price + epsilon), settings, guard);
  return report;
}

ValueTerms value_terms(const ScenarioConfig& s, const ControlLaw& law, double t, double x,
                       TimeDerivative mode) {
  require_power_utility(s);
  const double gamma = s.prefs.gamma();
  const Hazard hz = s.hazard();
  const double lambda = hz.rate(t);
  const double c = closed_form_rate(s, law, t);

  double dlnc_dt = 0.0;
  if (mode == TimeDerivative::Analytic) {
    dlnc_dt = c * (1.0 + law.k * lambda) - lambda - law.beta;
  } else {
    constexpr double h = 1e-4;
    dlnc_dt = (std::log(closed_form_rate(s, law, t + h)) - std::log(closed_form_rate(s, law, t - h))) /
              (2.0 * h);
  }

  ValueTerms out;
  const double cg = std::pow(c, gamma - 1.0);
  out.v = cg * std::pow(x, gamma) / gamma;
  out.v_t = (gamma - 1.0) * out.v * dlnc_dt;
  out.v_x = cg * std::pow(x, gamma - 1.0);
  out.v_xx = (gamma - 1.0) * cg * std::pow(x, gamma - 2.0);
  out.optimal = {c, 1.0 - law.k * c, law.w_star};
  return out;
}

double hjb_bracket(const ScenarioConfig& s, const ValueTerms& vt, double t, double x,
                   const Controls& u) {
  require_power_utility(s);
  const double gamma = s.prefs.gamma();
  const double lambda = s.hazard().rate(t);
  const auto& m = s.market;
  // Outside the utility's domain the maximand is -infinity, not NaN.
  if (!(u.c > 0.0) || (s.prefs.b() > 0.0 && !(u.alpha < 1.0))) {
    return -std::numeric_limits<double>::infinity();
  }
  const double consumption = std::pow(u.c * x, gamma) / gamma;
  const double bequest =
      s.prefs.b() > 0.0 ? s.prefs.b() * lambda * std::pow((1.0 - u.alpha) * x, gamma) / gamma : 0.0;
  const double drift = x * vt.v_x * (m.r + u.w * (m.mu - m.r) + u.alpha * lambda - u.c);
  const double diffusion = 0.5 * x * x * m.sigma * m.sigma * u.w * u.w * vt.v_xx;
  return consumption + bequest + vt.v_t + drift + diffusion;
}

double hjb_residual(const ScenarioConfig& s, const ControlLaw& law, double t, double x,
                    TimeDerivative mode) {
  const auto vt = value_terms(s, law, t, x, mode);
  const double lhs = (s.hazard().rate(t) + s.market.rho) * vt.v;
  return lhs - hjb_bracket(s, vt, t, x, vt.optimal);
}

double hjb_residual(const ScenarioConfig& s, double t, double x, TimeDerivative mode) {
  return hjb_residual(s, ControlLaw::from(s.market, s.prefs), t, x, mode);
}

double decumulation_log(const Hazard& hazard, double t, double b, double rho,
                        const QuadratureSettings& settings) {
  const double price = b + (1.0 - b * rho) * annuity_factor(hazard, t, rho, settings);
  if (!(price > 0.0)) {
    std::ostringstream os;
    os << "log decumulation infeasible at age " << t << ": rho must be below 1/b + 1/A(t, rho)";
    throw InfeasibleScenario(os.str(), price);
  }
  return 1.0 / price;
}

double decumulation_no_bequest(const Hazard& hazard, double t, double gamma, double beta,
                               const QuadratureSettings& settings) {
  if (!(gamma < 1.0) || gamma == 0.0) throw ConfigError("decumulation needs gamma < 1, gamma != 0");
  return 1.0 / annuity_factor_scaled(hazard, t, beta, 1.0 / (1.0 - gamma), settings);
}

Trajectory integrate_decumulation_ode(const Hazard& hazard, double gamma, double beta, double b,
                                      double initial_rate, const OdeSettings& settings) {
  if (b > 0.0 && gamma != 0.0) {
    throw ConfigError("decumulation ODE with b > 0 and gamma != 0 has no stated boundary condition");
  }
  const double inv = 1.0 / (1.0 - gamma);
  auto f = [&](double t, double c) {
    const double lambda = hazard.rate(t);
    const double psi = lambda + beta + gamma * lambda * inv;
    return c * (c + b * lambda * std::pow(c, 1.0 - gamma) * inv - psi);
  };
  return rk4(f, initial_rate, settings);
}

double annuity_factor_gauss_legendre(const Hazard& hazard, double t, double beta,
                                     const QuadratureSettings& settings) {
  if (!(t < settings.max_age)) throw ConfigError("annuity age must be below max_age");
  hazard.require_nonnegative_from(t);
  auto integrand = [&](double u) { return std::exp(-hazard.cumulative(t, u) - beta * (u - t)); };
  if (!(integrand(settings.max_age) <= settings.abs_tol)) {
    throw NumericalFailure("annuity integrand not negligible at max_age");
  }
  double sum = 0.0;
  for (double a = t; a < settings.max_age; a += 1.0) {
    const double b = std::min(a + 1.0, settings.max_age);
    sum += boost::math::quadrature::gauss<double, 20>::integrate(integrand, a, b);
  }
  return sum;
}

bool VerificationReport::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return !checks.empty();
}

namespace {

ScenarioConfig with_prefs(const ScenarioConfig& base, PreferenceParams prefs) {
  ScenarioConfig s = base;
  s.prefs = prefs;
  return s;
}

/// Regime coverage around the base market: annuitant, neutral, insuree, negative beta.
std::vector<ScenarioConfig> regime_scenarios(const ScenarioConfig& base) {
  std::vector<ScenarioConfig> out;
  if (!base.prefs.log_utility()) out.push_back(base);
  const double gamma = 0.25;
  const double b_neutral_beta = beta(base.market, PreferenceParams::power(gamma, 1.0));
  out.push_back(with_prefs(base, PreferenceParams::power(gamma, 3.0)));
  out.push_back(with_prefs(base, PreferenceParams::power(0.8, 3.0)));
  out.push_back(with_prefs(base, PreferenceParams::power(-2.0, 10.0)));
  if (b_neutral_beta > 0.0) {
    const double b_neutral = std::pow(1.0 / b_neutral_beta, 1.0 - gamma);
    out.push_back(with_prefs(base, PreferenceParams::power(gamma, b_neutral)));
    out.push_back(with_prefs(base, PreferenceParams::power(gamma, 4.0 * b_neutral)));
  }
  return out;
}

CheckResult make_check(std::string name, double err, double tol) {
  return {std::move(name), err, tol, std::isfinite(err) && err <= tol};
}

}  // namespace

VerificationReport run_verification(const ScenarioConfig& base, const VerifyOptions& options) {
  validate(base);
  VerificationReport report;
  const Hazard hz = base.hazard();
  const auto& q = base.quadrature;
  const double s0 = base.entry_age;
  const double s1 = base.end_age;

  {
    double worst = 0.0;
    for (double a = s0; a < s1; a += 5.0) {
      for (double len : {0.5, 7.0, 25.0}) {
        const double b = std::min(a + len, q.max_age);
        const double ref = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double y) { return hz.rate(y); }, a, b, 15, 1e-14);
        worst = std::max(worst, std::abs(hz.cumulative(a, b) - ref) / std::abs(ref));
      }
    }
    report.checks.push_back(make_check("cumulative_hazard_vs_quadrature", worst, 1e-10));
  }

  {
    double worst = 0.0;
    for (double t = s0; t <= s1; t += 5.0) {
      for (double beta : {-0.25, -0.1, 0.0, 0.02, 0.1}) {
        const double simpson = annuity_factor(hz, t, beta, q);
        const double gl = annuity_factor_gauss_legendre(hz, t, beta, q);
        worst = std::max(worst, std::abs(simpson / gl - 1.0));
      }
    }
    report.checks.push_back(make_check("annuity_simpson_vs_gauss_legendre", worst, 1e-8));
  }

  const auto scenarios = regime_scenarios(base);
  {
    double fd_worst = 0.0;
    double ode_worst = 0.0;
    Eigen::ArrayXd check_ages = ages(AgeGrid{s0, std::min(s1, s0 + 40.0), 1.0});
    for (const auto& s : scenarios) {
      const auto law = ControlLaw::from(s.market, s.prefs);
      for (const double t : check_ages) {
        constexpr double h = 1e-4;
        const double c = closed_form_rate(s, law, t);
        const double fd = (std::log(closed_form_rate(s, law, t + h)) -
                           std::log(closed_form_rate(s, law, t - h))) / (2.0 * h);
        const double lambda = hz.rate(t);
        const double rhs = c * (1.0 + law.k * lambda) - lambda - law.beta;
        fd_worst = std::max(fd_worst, std::abs(fd - rhs) / std::max(1.0, std::abs(rhs)));
      }
      OdeSettings ode{1.0 / 256.0, OdeMethod::RungeKutta4, s0, check_ages[check_ages.size() - 1]};
      ode_worst = std::max(ode_worst, max_relative_deviation(integrate_consumption_ode(s, ode), s, check_ages));
    }
    report.checks.push_back(make_check("consumption_log_derivative_identity", fd_worst, 1e-6));
    report.checks.push_back(make_check("consumption_rk4_vs_closed_form", ode_worst, 1e-8));
  }

  {
    double worst = 0.0;
    for (const auto& s : scenarios) {
      auto law = ControlLaw::from(s.market, s.prefs);
      if (options.inject_beta_sign_fault) {
        const double premium = beta(s.market, s.prefs) -
                               (s.market.r + (s.market.rho - s.market.r) / (1.0 - s.prefs.gamma()));
        law.beta -= 2.0 * premium;
      }
      for (double t = s0; t <= s1; t += (s1 - s0) / 19.0) {
        for (double x = 0.1; x <= 10.0; x *= std::pow(100.0, 1.0 / 19.0)) {
          const auto vt = value_terms(s, law, t, x);
          const double scale = std::abs(s.market.rho * vt.v);
          worst = std::max(worst, std::abs(hjb_residual(s, law, t, x)) / scale);
        }
      }
    }
    report.checks.push_back(make_check("hjb_residual", worst, 1e-8));
  }

  {
    double worst = 0.0;
    for (double b : {0.0, 1.0, 10.0}) {
      const auto prefs = PreferenceParams::logarithmic(b);
      for (double t = s0; t <= s1; t += 1.0) {
        const double d = decumulation_log(hz, t, b, base.market.rho, q);
        const double c = consumption_rate(hz, t, prefs, base.market, q);
        worst = std::max(worst, std::abs(d / c - 1.0));
      }
    }
    report.checks.push_back(make_check("decumulation_log_equals_tontine", worst, 1e-14));
  }

  {
    const double gamma = 0.25;
    const double b = beta(base.market, PreferenceParams::power(gamma, 1.0));
    OdeSettings ode{1.0 / 256.0, OdeMethod::RungeKutta4, s0, s1};
    const auto traj = integrate_decumulation_ode(hz, gamma, b, 0.0,
                                                 decumulation_no_bequest(hz, s0, gamma, b, q), ode);
    double worst = 0.0;
    for (double t = s0; t <= s1; t += 1.0) {
      worst = std::max(worst, std::abs(traj.at(t) / decumulation_no_bequest(hz, t, gamma, b, q) - 1.0));
    }
    report.checks.push_back(make_check("decumulation_no_bequest_rk4", worst, 1e-8));
  }

  {
    const AgeGrid grid{s0, s1, 1.0};
    const auto flat = schedule(scenarios.front(), grid);
    const auto tv = schedule_tv(TimeVaryingMarket::constant(scenarios.front().market),
                                scenarios.front(), grid);
    double worst = 0.0;
    auto cmp = [&](const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
      worst = std::max(worst, ((a - b).abs() / a.abs().max(1.0)).maxCoeff());
    };
    cmp(flat.lambda, tv.lambda);
    cmp(flat.annuity, tv.annuity);
    cmp(flat.m_price, tv.m_price);
    cmp(flat.c_star, tv.c_star);
    cmp(flat.alpha_star, tv.alpha_star);
    cmp(flat.bequest_prop, tv.bequest_prop);
    cmp(flat.w_star, tv.w_star);
    report.checks.push_back(make_check("schedule_tv_constant_reduction", worst, 1e-10));
  }

  {
    const auto& s = scenarios.front();
    OdeSettings ode{1.0 / 256.0, OdeMethod::RungeKutta4, s0, q.max_age - 1.0};
    const bool ok =
        boundary_divergence_demo(s, -1e-3, ode).kind == Divergence::NegativeDenominator &&
        (s.prefs.b() == 0.0 ||
         boundary_divergence_demo(s, 1e-3, ode).kind == Divergence::BequestLimitViolated);
    report.checks.push_back(make_check("boundary_condition_divergence", ok ? 0.0 : 1.0, 0.0));
  }
  return report;
}

}  // namespace tontine::oracle
