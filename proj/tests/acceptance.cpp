// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include "tontine/annuity.hpp"
#include "tontine/errors.hpp"
#include "tontine/oracle.hpp"
#include "tontine/paths.hpp"
#include "tontine/pool.hpp"
#include "tontine/strategy.hpp"

using namespace tontine;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

const MarketParams kMarket{};
const Hazard kHz(kUkMale);

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

void merton_weights(Outcome& o) {
  const double w08 = merton_weight(kMarket, PreferenceParams::power(0.8, 3.0));
  const double w025 = merton_weight(kMarket, PreferenceParams::power(0.25, 3.0));
  o.detail << "w*(0.8)=" << w08 << " w*(0.25)=" << w025;
  o.require(std::abs(w08 - 3.75) < 1e-12, "w*(0.8) = 3.75");
  o.require(std::abs(w025 - 1.0) < 1e-12, "w*(0.25) = 1");
}

void level_root(Outcome& o) {
  const double g = level_gamma(kMarket);
  const auto prefs = PreferenceParams::power(g, 1.0);
  const double residual = std::abs(beta(kMarket, prefs) - (kMarket.mu - kMarket.r) * merton_weight(kMarket, prefs));
  o.detail.precision(12);
  o.detail << "gamma=" << g << " residual=" << residual;
  o.require(g >= -0.0830 && g <= -0.0820, "root in [-0.0830, -0.0820]");
  o.require(residual < 1e-12, "residual < 1e-12");
}

void multiple(Outcome& o) {
  const double k = bequest_multiple(PreferenceParams::power(-0.0825, 10.0));
  o.detail << "k=" << k;
  o.require(std::abs(k - 8.4) <= 0.05, "k = 8.4 +- 0.05");
}

void level_profile(Outcome& o) {
  const auto s = reference_scenario(level_gamma(kMarket), 10.0);
  const double c0 = expected_consumption_pv(s, 65.0);
  double drift = 0.0;
  for (double t = 65.0; t <= 105.0; t += 0.5) drift = std::max(drift, std::abs(expected_consumption_pv(s, t) - c0));
  const double b = expected_bequest_pv(s, 80.0);
  o.detail << "E[C]=" << c0 << " max drift=" << drift << " E[B]=" << b;
  o.require(drift < 1e-12, "E[C] constant to 1e-12");
  o.require(std::abs(c0 - 0.05) <= 0.005, "E[C] = 0.05 +- 0.005");
  o.require(std::abs(b - 0.42) <= 0.04, "E[B] = 0.42 +- 0.04");
}

void bequest_spread(Outcome& o) {
  const std::vector<double> probs{0.95};
  const auto hi = bequest_distribution(reference_scenario(0.8, 3.0), 95.0, probs);
  const double p95 = hi.quantiles[0].second;
  o.detail << "gamma=0.8: median=" << hi.median << " P95=" << p95 << " mean=" << hi.mean;
  o.require(hi.median >= 0.015 && hi.median <= 0.025, "median in [0.015, 0.025]");
  o.require(p95 >= 14.0 && p95 <= 17.0, "P95 in [14, 17]");
  o.require(hi.mean >= 75.0 && hi.mean <= 105.0, "mean in [75, 105]");
  const auto lv = bequest_distribution(reference_scenario(-0.08225, 3.0), 95.0, probs);
  o.detail << "; gamma=-0.08225: mean=" << lv.mean << " median=" << lv.median << " mode=" << lv.mode;
  o.require(std::abs(lv.mean - 0.17) <= 0.02, "mean 0.17 +- 0.02");
  o.require(std::abs(lv.median - 0.13) <= 0.015, "median 0.13 +- 0.015");
  o.require(std::abs(lv.mode - 0.07) <= 0.01, "mode 0.07 +- 0.01");
}

// Random feasible scenarios, a third in each regime.
std::vector<ScenarioConfig> random_scenarios(std::size_t per_regime, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gamma_d(-10.0, 0.9), rho_d(0.0, 0.04), mu_d(0.03, 0.08),
      b_d(0.0, 60.0), ratio_d(1.2, 5.0);
  std::vector<ScenarioConfig> out;
  std::size_t counts[3] = {0, 0, 0};
  while (out.size() < 3 * per_regime) {
    ScenarioConfig s = reference_scenario(0.25, 1.0);
    s.market.rho = rho_d(rng);
    s.market.mu = mu_d(rng);
    const double gamma = gamma_d(rng);
    const double bt = beta(s.market, PreferenceParams::power(gamma, 1.0));
    const int want = static_cast<int>(out.size() % 3);
    double b = b_d(rng);
    if (want > 0) {
      if (bt <= 0.0) continue;
      const double k = want == 1 ? 1.0 / bt : ratio_d(rng) / bt;
      b = std::pow(k, 1.0 - gamma);
    }
    s.prefs = PreferenceParams::power(gamma, b);
    const Regime r = regime(s.prefs, bt);
    const int got = r == Regime::Annuitant ? 0 : (r == Regime::Neutral ? 1 : 2);
    if (got != want || counts[got] >= per_regime) continue;
    try {
      schedule(s, AgeGrid{65.0, 65.0, 1.0});
    } catch (const Error&) {
      continue;
    }
    ++counts[got];
    out.push_back(s);
  }
  return out;
}

void ode_oracle(Outcome& o) {
  const auto scenarios = random_scenarios(10, 2024);
  const Eigen::ArrayXd grid = ages(AgeGrid{65.0, 105.0, 1.0});
  double fd_worst = 0.0, ode_worst = 0.0;
  for (const auto& s : scenarios) {
    const auto law = ControlLaw::from(s.market, s.prefs);
    const auto c_at = [&](double t) { return law.consumption(annuity_factor(kHz, t, law.beta, s.quadrature)); };
    for (const double t : grid) {
      constexpr double h = 1e-4;
      const double fd = (std::log(c_at(t + h)) - std::log(c_at(t - h))) / (2.0 * h);
      const double lambda = kHz.rate(t);
      const double rhs = c_at(t) * (1.0 + law.k * lambda) - lambda - law.beta;
      // Residual of dc/dt relative to c.
      fd_worst = std::max(fd_worst, std::abs(fd - rhs));
    }
    const auto traj = oracle::integrate_consumption_ode(s, oracle::OdeSettings{});
    ode_worst = std::max(ode_worst, oracle::max_relative_deviation(traj, s, grid));
  }
  o.detail << scenarios.size() << " scenarios, finite-difference residual=" << fd_worst
           << " RK4 deviation=" << ode_worst;
  o.require(scenarios.size() >= 30, ">= 30 scenarios");
  o.require(fd_worst < 1e-6, "finite-difference residual < 1e-6");
  o.require(ode_worst < 1e-8, "RK4 deviation < 1e-8");
}

void hjb(Outcome& o) {
  std::vector<ScenarioConfig> scenarios;
  for (double g : {0.8, 0.25, -0.08225, -2.0, -10.0}) {
    for (double b : {3.0, 30.0}) scenarios.push_back(reference_scenario(g, b));
  }
  double worst = 0.0;
  std::size_t not_lower = 0, points = 0;
  for (const auto& s : scenarios) {
    const auto law = ControlLaw::from(s.market, s.prefs);
    for (int i = 0; i < 20; ++i) {
      const double t = 65.0 + 40.0 * i / 19.0;
      for (int j = 0; j < 20; ++j) {
        const double x = 0.1 * std::pow(100.0, j / 19.0);
        const auto vt = oracle::value_terms(s, law, t, x);
        worst = std::max(worst, std::abs(oracle::hjb_residual(s, law, t, x)) / std::abs(s.market.rho * vt.v));
        const double best = oracle::hjb_bracket(s, vt, t, x, vt.optimal);
        for (double d : {-0.05, 0.05}) {
          auto c = vt.optimal;
          c.c *= 1.0 + d;
          auto a = vt.optimal;
          a.alpha += d;
          auto w = vt.optimal;
          w.w += d;
          for (const auto& p : {c, a, w}) {
            ++points;
            if (!(oracle::hjb_bracket(s, vt, t, x, p) < best)) ++not_lower;
          }
        }
      }
    }
  }
  o.detail << scenarios.size() << " scenarios x 400 points, max |residual|/|rho V|=" << worst
           << ", perturbations not lowering bracket: " << not_lower << "/" << points;
  o.require(worst < 1e-8, "residual < 1e-8 |rho V|");
  o.require(not_lower == 0, "perturbations strictly lower the bracket");
}

double pathwise(double dt) {
  auto s = reference_scenario(0.25, 3.0);
  s.end_age = 95.0;
  s.dt = dt;
  s.paths = 1000;
  s.seed = 17;
  SimulationOptions opt;
  opt.report_ages = {95.0};
  return simulate_paths(s, opt).max_pathwise_deviation;
}

void sde(Outcome& o) {
  const double coarse = pathwise(1.0 / 252.0);
  const double fine = pathwise(1.0 / 504.0);
  const double ratio = fine / (coarse / 2.0);
  o.detail << "deviation(1/252)=" << coarse << " deviation(1/504)=" << fine << " fine/(coarse/2)=" << ratio;
  o.require(coarse < 5e-3, "deviation < 5e-3");
  o.require(ratio >= 0.7 && ratio <= 1.3, "halves within 30%");
}

void monte_carlo(Outcome& o) {
  auto s = reference_scenario(0.25, 3.0);
  s.end_age = 95.0;
  s.paths = 100000;
  s.seed = 1;
  SimulationOptions opt;
  opt.report_ages = {75.0, 85.0, 95.0};
  opt.threads = std::max(1u, std::thread::hardware_concurrency());
  const auto r = simulate_paths(s, opt);
  double worst = 0.0;
  for (const auto& a : r.summaries) {
    const double zc = (a.mean_c - expected_consumption_pv(s, a.age)) / a.se_c;
    const double zb = (a.mean_b - expected_bequest_pv(s, a.age)) / a.se_b;
    const double zi = (a.mean_i - expected_income_pv(s, a.age)) / a.se_i;
    o.detail << "age " << a.age << ": z(C)=" << zc << " z(B)=" << zb << " z(I)=" << zi << "; ";
    worst = std::max({worst, std::abs(zc), std::abs(zb), std::abs(zi)});
  }
  o.require(worst <= 3.0, "all |z| <= 3");
}

void pool_fairness(Outcome& o) {
  using namespace tontine::pool;
  auto check = [&](const char* label, std::vector<Member> members, std::uint64_t seed) {
    const auto runs = replicate(make_pool(std::move(members)), 10000, 1.0 / 12.0, seed);
    const auto rep = fairness_report(runs);
    double worst_net = 0.0, worst_rate = 0.0;
    for (const auto& m : rep.members) {
      worst_net = std::max(worst_net, std::abs(m.mean_net_rate) / m.se_net_rate);
      worst_rate = std::max(worst_rate, std::abs(m.mean_received_rate - m.expected_rate) / m.se_received_rate);
    }
    o.detail << label << ": max |net|/SE=" << worst_net << " max |rate - lambda alpha X|/SE=" << worst_rate << "; ";
    o.require(rep.fair(), std::string(label) + " net flows within 3 SE");
    o.require(rep.credit_rates_match(), std::string(label) + " credit rates within 3 SE");
  };
  std::vector<Member> homogeneous;
  for (std::size_t i = 0; i < 100; ++i) {
    Member m;
    m.id = i;
    m.age = 95.0;
    m.wealth = 1.0;
    m.fixed_alpha = 0.8;
    homogeneous.push_back(m);
  }
  check("100 members", homogeneous, 42);
  Member a, b;
  a.id = 0, a.age = 85.0, a.wealth = 1.0, a.fixed_alpha = 0.9;
  b.id = 1, b.age = 95.0, b.wealth = 5.0, b.fixed_alpha = 0.4;
  check("2 members", {a, b}, 42);
}

void log_equality(Outcome& o) {
  double worst = 0.0;
  for (double b : {0.0, 1.0, 10.0}) {
    const auto prefs = PreferenceParams::logarithmic(b);
    for (double t = 65.0; t <= 105.0; t += 1.0) {
      const double d = oracle::decumulation_log(kHz, t, b, kMarket.rho);
      worst = std::max(worst, rel(d, consumption_rate(kHz, t, prefs, kMarket)));
    }
  }
  o.detail << "max relative difference=" << worst;
  o.require(worst <= 1e-14, "equal to 1e-14");
}

void tv_reduction(Outcome& o) {
  double worst = 0.0;
  for (const auto& s : {reference_scenario(0.25, 3.0), reference_scenario(0.8, 3.0), reference_scenario(0.0, 50.0),
                        reference_scenario(0.0, 200.0), reference_scenario(-10.0, 60.0)}) {
    const AgeGrid grid{65.0, 105.0, 1.0};
    const auto a = schedule(s, grid);
    const auto b = schedule_tv(TimeVaryingMarket::constant(s.market), s, grid);
    for (const auto& [x, y] : {std::pair{&a.lambda, &b.lambda}, {&a.annuity, &b.annuity}, {&a.m_price, &b.m_price},
                               {&a.c_star, &b.c_star}, {&a.alpha_star, &b.alpha_star},
                               {&a.bequest_prop, &b.bequest_prop}, {&a.w_star, &b.w_star}, {&a.beta, &b.beta}}) {
      const Eigen::ArrayXd scale = x->abs().max(1.0);
      worst = std::max(worst, ((*x - *y).abs() / scale).maxCoeff());
    }
    if (a.regime != b.regime) worst = INFINITY;
  }
  o.detail << "max scaled difference=" << worst;
  o.require(worst <= 1e-10, "equal to 1e-10");
}

void quadrature(Outcome& o) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> t_d(65.0, 105.0), b_d(-0.25, 0.1);
  double worst = 0.0;
  for (int n = 0; n < 50; ++n) {
    const double t = t_d(rng), b = b_d(rng);
    worst = std::max(worst, rel(annuity_factor(kHz, t, b), oracle::annuity_factor_gauss_legendre(kHz, t, b)));
  }
  std::size_t monotone_breaks = 0;
  double deriv_worst = 0.0;
  for (double t = 65.0; t <= 105.0; t += 2.0) {
    for (double b = -0.25; b <= 0.1 + 1e-12; b += 0.025) {
      const double a = annuity_factor(kHz, t, b);
      if (!(annuity_factor(kHz, t, b + 0.025) < a)) ++monotone_breaks;
      if (!(annuity_factor(kHz, t + 2.0, b) < a)) ++monotone_breaks;
      constexpr double h = 1e-3;
      const double fd = (annuity_factor(kHz, t + h, b) - annuity_factor(kHz, t - h, b)) / (2.0 * h);
      deriv_worst = std::max(deriv_worst, rel(fd, (kHz.rate(t) + b) * a - 1.0));
    }
  }
  o.detail << "max Simpson/Gauss-Legendre gap=" << worst << " monotonicity breaks=" << monotone_breaks
           << " derivative identity gap=" << deriv_worst;
  o.require(worst < 1e-8, "schemes agree to 1e-8");
  o.require(monotone_breaks == 0, "monotone in t and beta");
  o.require(deriv_worst < 1e-6, "derivative identity");
}

}  // namespace

int main(int argc, char** argv) {
  // Optional argument: run a single criterion by number.
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "Merton weights", 1.0, merton_weights},
      {2, "level risk exponent", 1.0, level_root},
      {3, "bequest multiple", 1.0, multiple},
      {4, "level consumption and bequest profile", 1.0, level_profile},
      {5, "bequest distribution at 95", 1.0, bequest_spread},
      {6, "consumption ODE oracle", 30.0, ode_oracle},
      {7, "HJB residual and optimality", 10.0, hjb},
      {8, "pathwise SDE agreement", 60.0, sde},
      {9, "Monte Carlo vs analytic expectations", 300.0, monte_carlo},
      {10, "pool fairness", 120.0, pool_fairness},
      {11, "log-utility decumulation equality", 1.0, log_equality},
      {12, "constant-curve reduction", 1.0, tv_reduction},
      {13, "annuity quadrature cross-check", 10.0, quadrature},
  };
  int failures = 0;
  int ran = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    Outcome o;
    o.detail.precision(6);
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_seconds) {
      std::ostringstream os;
      os << "runtime " << secs << " s over " << c.budget_seconds << " s";
      o.require(false, os.str());
    }
    std::printf("%s criterion %2d (%s): %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  std::printf("%d of %d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
