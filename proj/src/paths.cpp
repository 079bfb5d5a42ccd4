#include "tontine/paths.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "tontine/errors.hpp"
#include "tontine/strategy.hpp"

namespace tontine {

namespace {

struct Analytics {
  ControlLaw law;
  double c_entry;
  /// -beta + (mu - r) w*: exponent of every present-valued expectation.
  double pv_growth;
  double sigma_w;
};

Analytics analytics(const ScenarioConfig& s) {
  validate(s);
  const auto law = ControlLaw::from(s.market, s.prefs);
  const double c = consumption_rate(s.hazard(), s.entry_age, s.prefs, s.market, s.quadrature);
  return {law, c, -law.beta + (s.market.mu - s.market.r) * law.w_star, s.market.sigma * law.w_star};
}

void require_not_before_entry(const ScenarioConfig& s, double t) {
  if (!(t >= s.entry_age)) {
    std::ostringstream os;
    os << "age " << t << " precedes entry age " << s.entry_age;
    throw ConfigError(os.str());
  }
}

double rate_at(const ScenarioConfig& s, double t) {
  return consumption_rate(s.hazard(), t, s.prefs, s.market, s.quadrature);
}

/// Linear-interpolated sample quantile (Hyndman-Fan type 7) of sorted data.
double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::mt19937_64 path_generator(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

double LognormalSummary::density(double x) const {
  if (degenerate || !(x > 0.0)) return 0.0;
  const double z = (std::log(x) - log_location) / log_scale;
  return std::exp(-0.5 * z * z) / (x * log_scale * std::sqrt(2.0 * M_PI));
}

double LognormalSummary::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("quantile probability must lie in (0, 1)");
  if (degenerate) return mean;
  const boost::math::normal_distribution<double> standard;
  return std::exp(log_location + log_scale * boost::math::quantile(standard, p));
}

double wealth_closed_form(const ScenarioConfig& s, double t, double wiener_increment) {
  require_not_before_entry(s, t);
  const auto a = analytics(s);
  const double w = a.law.w_star;
  const auto& m = s.market;
  const double drift = m.r - a.law.beta + (m.mu - m.r) * w - 0.5 * m.sigma * m.sigma * w * w;
  return s.initial_wealth * a.c_entry / rate_at(s, t) *
         std::exp(drift * (t - s.entry_age) + a.sigma_w * wiener_increment);
}

double expected_wealth(const ScenarioConfig& s, double t) {
  require_not_before_entry(s, t);
  const auto a = analytics(s);
  const double growth = s.market.r + a.pv_growth;
  return s.initial_wealth * a.c_entry / rate_at(s, t) * std::exp(growth * (t - s.entry_age));
}

double expected_consumption_pv(const ScenarioConfig& s, double t) {
  require_not_before_entry(s, t);
  const auto a = analytics(s);
  return a.c_entry * std::exp(a.pv_growth * (t - s.entry_age));
}

double expected_bequest_pv(const ScenarioConfig& s, double t) {
  return bequest_multiple(s.prefs) * expected_consumption_pv(s, t);
}

double expected_income_pv(const ScenarioConfig& s, double t) {
  require_not_before_entry(s, t);
  const auto a = analytics(s);
  const double c_t = rate_at(s, t);
  const double alpha = 1.0 - a.law.k * c_t;
  return alpha * s.hazard().rate(t) * std::exp(a.pv_growth * (t - s.entry_age)) * a.c_entry / c_t;
}

LognormalSummary bequest_distribution(const ScenarioConfig& s, double t,
                                      std::span<const double> probabilities) {
  if (!(t > s.entry_age)) throw ConfigError("bequest distribution needs t > entry age");
  const auto a = analytics(s);
  LognormalSummary out;
  out.mean = a.law.k * a.c_entry * std::exp(a.pv_growth * (t - s.entry_age));
  const double variance = a.sigma_w * a.sigma_w * (t - s.entry_age);
  out.degenerate = variance == 0.0 || out.mean == 0.0;
  if (out.degenerate) {
    out.median = out.mode = out.mean;
    out.log_location = out.mean > 0.0 ? std::log(out.mean) : -std::numeric_limits<double>::infinity();
  } else {
    out.log_scale = std::sqrt(variance);
    out.log_location = std::log(out.mean) - 0.5 * variance;
    out.median = std::exp(out.log_location);
    out.mode = std::exp(out.log_location - variance);
  }
  for (const double p : probabilities) out.quantiles.emplace_back(p, out.quantile(p));
  return out;
}

SimulationResult simulate_paths(const ScenarioConfig& s, const SimulationOptions& opt) {
  const auto a = analytics(s);
  const Hazard hz = s.hazard();
  const auto& m = s.market;
  const double horizon = s.end_age - s.entry_age;
  const auto steps = static_cast<std::size_t>(std::max<long long>(1, std::llround(horizon / s.dt)));
  const double h = horizon / static_cast<double>(steps);
  const double sqrt_h = std::sqrt(h);
  const double w = a.law.w_star;

  // Deterministic controls on the step grid.
  Eigen::ArrayXd grid(static_cast<Eigen::Index>(steps + 1));
  Eigen::ArrayXd c(grid.size()), alpha(grid.size()), lambda(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    grid[i] = s.entry_age + h * static_cast<double>(i);
    lambda[i] = hz.rate(grid[i]);
    c[i] = rate_at(s, grid[i]);
    alpha[i] = 1.0 - a.law.k * c[i];
  }
  const Eigen::ArrayXd log_c = c.log();

  std::vector<std::size_t> report_idx;
  for (const double age : opt.report_ages) {
    const long long idx = std::llround((age - s.entry_age) / h);
    if (idx < 0 || idx > static_cast<long long>(steps) ||
        std::abs(grid[idx] - age) > 1e-9 * std::max(1.0, std::abs(age))) {
      std::ostringstream os;
      os << "report age " << age << " is not on the simulation grid";
      throw ConfigError(os.str());
    }
    report_idx.push_back(static_cast<std::size_t>(idx));
  }

  const double log_drift_base = m.r + (m.mu - m.r) * w - 0.5 * m.sigma * m.sigma * w * w;
  const double closed_drift = log_drift_base - a.law.beta;
  const double log_x0 = std::log(s.initial_wealth);
  const auto n_paths = static_cast<std::size_t>(s.paths);
  const auto n_rep = report_idx.size();

  // Per-path outputs, reduced afterwards in path order.
  std::vector<double> wealth_at(n_paths * n_rep), c_pv(n_paths * n_rep), b_pv(n_paths * n_rep),
      i_pv(n_paths * n_rep);
  std::vector<double> deviation(n_paths, 0.0), identity(n_paths, 0.0), consistency(n_paths, 0.0);
  std::vector<WealthPath> kept(std::min(opt.keep_paths, n_paths));

  auto run_path = [&](std::size_t p) {
    auto gen = path_generator(s.seed, p);
    std::normal_distribution<double> normal;
    double log_x = log_x0;
    double wiener = 0.0;
    double worst = 0.0;
    std::size_t next = 0;
    WealthPath* keep = p < kept.size() ? &kept[p] : nullptr;
    if (keep) {
      for (auto* col : {&keep->wiener, &keep->wealth, &keep->bequest_account, &keep->consumption,
                        &keep->mortality_credit}) {
        col->resize(grid.size());
      }
      keep->age = grid;
    }
    auto record = [&](std::size_t i) {
      const double x = std::exp(log_x);
      if (keep) {
        keep->wiener[i] = wiener;
        keep->wealth[i] = x;
        keep->bequest_account[i] = (1.0 - alpha[i]) * x;
        keep->consumption[i] = c[i] * x;
        keep->mortality_credit[i] = alpha[i] * lambda[i] * x;
      }
      while (next < n_rep && report_idx[next] == i) {
        const double tau = grid[i] - s.entry_age;
        const double disc = std::exp(-m.r * tau) / s.initial_wealth;
        const std::size_t slot = p * n_rep + next;
        wealth_at[slot] = x;
        c_pv[slot] = disc * c[i] * x;
        b_pv[slot] = disc * (1.0 - alpha[i]) * x;
        i_pv[slot] = disc * alpha[i] * lambda[i] * x;
        identity[p] = std::max(identity[p], std::abs(b_pv[slot] - a.law.k * c_pv[slot]));
        const double x_closed = std::exp(log_x0 + log_c[0] - log_c[i] + closed_drift * tau + a.sigma_w * wiener);
        const double b_from_x = disc * (1.0 - alpha[i]) * x_closed;
        const double b_direct = a.law.k * a.c_entry *
                                std::exp(a.pv_growth * tau + a.sigma_w * wiener -
                                         0.5 * a.sigma_w * a.sigma_w * tau);
        consistency[p] = std::max(consistency[p], std::abs(b_from_x - b_direct) / std::max(1.0, b_direct));
        ++next;
      }
    };
    record(0);
    for (std::size_t i = 0; i < steps; ++i) {
      const double dw = sqrt_h * normal(gen);
      log_x += (log_drift_base + alpha[i] * lambda[i] - c[i]) * h + a.sigma_w * dw;
      wiener += dw;
      const double tau = grid[i + 1] - s.entry_age;
      const double log_closed = log_x0 + log_c[0] - log_c[i + 1] + closed_drift * tau + a.sigma_w * wiener;
      worst = std::max(worst, std::abs(std::expm1(log_x - log_closed)));
      record(i + 1);
    }
    deviation[p] = worst;
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(std::max<std::size_t>(1, n_paths))));
  if (threads == 1) {
    for (std::size_t p = 0; p < n_paths; ++p) run_path(p);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t p = t; p < n_paths; p += threads) run_path(p);
      });
    }
    for (auto& th : pool) th.join();
  }

  SimulationResult out;
  out.steps = steps;
  out.paths = std::move(kept);
  for (std::size_t p = 0; p < n_paths; ++p) {
    out.max_pathwise_deviation = std::max(out.max_pathwise_deviation, deviation[p]);
    out.max_bequest_identity_error = std::max(out.max_bequest_identity_error, identity[p]);
    out.max_discount_consistency_error = std::max(out.max_discount_consistency_error, consistency[p]);
  }
  if (n_paths == 0) return out;

  const double n = static_cast<double>(n_paths);
  auto mean_se = [&](const std::vector<double>& v, std::size_t r) {
    double sum = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) sum += v[p * n_rep + r];
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
      const double d = v[p * n_rep + r] - mean;
      ss += d * d;
    }
    const double se = n_paths > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return std::pair{mean, se};
  };
  std::vector<double> sorted(n_paths);
  for (std::size_t r = 0; r < n_rep; ++r) {
    AgeSummary row;
    row.age = opt.report_ages[r];
    row.mean_wealth = mean_se(wealth_at, r).first;
    std::tie(row.mean_c, row.se_c) = mean_se(c_pv, r);
    std::tie(row.mean_b, row.se_b) = mean_se(b_pv, r);
    std::tie(row.mean_i, row.se_i) = mean_se(i_pv, r);
    for (std::size_t p = 0; p < n_paths; ++p) sorted[p] = b_pv[p * n_rep + r];
    std::sort(sorted.begin(), sorted.end());
    row.q05_b = sorted_quantile(sorted, 0.05);
    row.q50_b = sorted_quantile(sorted, 0.50);
    row.q95_b = sorted_quantile(sorted, 0.95);
    out.summaries.push_back(row);
  }
  return out;
}

}  // namespace tontine
