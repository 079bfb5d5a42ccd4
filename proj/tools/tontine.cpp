#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tontine/config.hpp"
#include "tontine/errors.hpp"
#include "tontine/figures.hpp"
#include "tontine/oracle.hpp"
#include "tontine/paths.hpp"
#include "tontine/pool.hpp"
#include "tontine/strategy.hpp"

namespace fs = std::filesystem;
using namespace tontine;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kConfig = 2, kInfeasible = 3, kNumerical = 4 };

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> paths;
  std::optional<double> dt;
  std::optional<double> from_age;
  std::optional<double> to_age;
  double step = 1.0;
  int figure = 1;
  std::optional<std::size_t> replications;
  bool inject_fault = false;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

unsigned thread_count() {
  const char* env = std::getenv("TONTINE_THREADS");
  if (!env || !*env) return 1;
  try {
    const long n = std::stol(env);
    return n > 0 ? static_cast<unsigned>(n) : 1u;
  } catch (const std::exception&) {
    throw ConfigError(std::string("TONTINE_THREADS must be a positive integer, got ") + env);
  }
}

/// Collects outputs and writes them atomically, followed by the run manifest.
class Run {
 public:
  Run(std::string command, const Flags& flags) : command_(std::move(command)), flags_(flags), started_(utc_now()) {}

  void set_config(const json& doc) { hash_ = config_hash(doc); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  /// Writes to --out (or a path derived from it by `suffix`); stdout when --out is absent.
  void emit(const std::string& content, const std::string& suffix = {}) {
    if (flags_.out.empty()) {
      if (suffix.empty()) std::cout << content;
      return;
    }
    const fs::path path = suffix.empty() ? fs::path(flags_.out) : sibling(suffix);
    write_file_atomic(path, content);
    outputs_.push_back(path.string());
  }

  void finish() {
    if (flags_.out.empty()) return;
    json m = {{"command", command_},
              {"tool_version", kVersion},
              {"started", started_},
              {"finished", utc_now()},
              {"outputs", outputs_}};
    m["config_hash"] = hash_.empty() ? json(nullptr) : json(hash_);
    m["seed"] = seed_ ? json(*seed_) : json(nullptr);
    write_file_atomic(sibling(".manifest.json"), m.dump(2) + "\n");
  }

 private:
  fs::path sibling(const std::string& suffix) const {
    fs::path p(flags_.out);
    return p.parent_path() / (p.stem().string() + suffix);
  }

  std::string command_;
  const Flags& flags_;
  std::string started_;
  std::string hash_;
  std::optional<std::uint64_t> seed_;
  std::vector<std::string> outputs_;
};

ScenarioConfig load_scenario(const Flags& f, Run& run) {
  if (f.config.empty()) throw ConfigError("--config is required");
  const json doc = load_json(f.config);
  ScenarioConfig s = scenario_from_json(doc);
  if (f.seed) s.seed = *f.seed;
  if (f.paths) s.paths = *f.paths;
  if (f.dt) s.dt = *f.dt;
  run.set_config(doc);
  return s;
}

AgeGrid grid_for(const ScenarioConfig& s, const Flags& f) {
  AgeGrid g{f.from_age.value_or(s.entry_age), f.to_age.value_or(s.end_age), f.step};
  if (!(g.step > 0.0)) throw ConfigError("--step must be positive");
  if (g.to < g.from) throw ConfigError("--to-age must not be below --from-age");
  return g;
}

int cmd_schedule(const Flags& f) {
  Run run("schedule", f);
  const ScenarioConfig s = load_scenario(f, run);
  validate(s);
  const auto sched = schedule(s, grid_for(s, f));
  run.emit(to_csv(schedule_table(sched)));
  run.finish();
  return kOk;
}

json summary_json(const LognormalSummary& d, double age) {
  json q = json::array();
  for (const auto& [p, v] : d.quantiles) q.push_back({{"p", p}, {"value", v}});
  return {{"age", age},         {"mean", d.mean},
          {"median", d.median}, {"mode", d.mode},
          {"log_location", d.log_location}, {"log_scale", d.log_scale},
          {"degenerate", d.degenerate}, {"quantiles", q}};
}

int cmd_simulate(const Flags& f) {
  Run run("simulate", f);
  ScenarioConfig s = load_scenario(f, run);
  validate(s);
  run.set_seed(s.seed);
  // Feasibility at entry, with the margin in the message.
  schedule(s, AgeGrid{s.entry_age, s.entry_age, 1.0});
  const Eigen::ArrayXd report = ages(grid_for(s, f));

  Table t;
  t.metadata = {{"seed", std::to_string(s.seed)},
                {"dt", format_double(s.dt)},
                {"paths", std::to_string(s.paths)},
                {"scenario_hash", config_hash(to_json(s))}};
  json meta = {{"seed", s.seed}, {"dt", s.dt}, {"paths", s.paths},
               {"scenario_hash", config_hash(to_json(s))}, {"scenario", to_json(s)}};

  if (s.paths == 0) {
    t.columns = {"age", "expected_X", "expected_C_pv", "expected_B_pv", "expected_I_pv"};
    for (const double a : report) {
      t.rows.push_back({a, expected_wealth(s, a), expected_consumption_pv(s, a),
                        expected_bequest_pv(s, a), expected_income_pv(s, a)});
    }
  } else {
    SimulationOptions opt;
    opt.report_ages.assign(report.begin(), report.end());
    opt.threads = thread_count();
    const auto res = simulate_paths(s, opt);
    t.columns = {"age", "mean_X", "mean_C_pv", "mean_B_pv", "mean_I_pv", "q05_B", "q50_B", "q95_B"};
    for (const auto& r : res.summaries) {
      t.rows.push_back({r.age, r.mean_wealth, r.mean_c, r.mean_b, r.mean_i, r.q05_b, r.q50_b, r.q95_b});
    }
    meta["steps"] = res.steps;
    meta["max_pathwise_deviation"] = res.max_pathwise_deviation;
    meta["max_bequest_identity_error"] = res.max_bequest_identity_error;
  }

  const std::vector<double> probs{0.05, 0.5, 0.95};
  json dist = json::array();
  for (const double a : report) {
    if (a > s.entry_age) dist.push_back(summary_json(bequest_distribution(s, a, probs), a));
  }
  meta["bequest_distribution"] = dist;

  run.emit(to_csv(t));
  run.emit(meta.dump(2) + "\n", ".meta.json");
  if (f.out.empty()) std::cerr << meta.dump(2) << "\n";
  run.finish();
  return kOk;
}

int cmd_pool(const Flags& f) {
  Run run("pool", f);
  if (f.config.empty()) throw ConfigError("--config is required");
  const json doc = load_json(f.config);
  run.set_config(doc);
  PoolSpec spec = pool_spec_from_json(doc);
  if (f.seed) spec.seed = *f.seed;
  if (f.replications) spec.replications = *f.replications;
  if (f.dt) spec.dt = *f.dt;
  run.set_seed(spec.seed);

  const pool::PoolState initial = pool::make_pool(spec.members);
  json report;
  bool has_s2 = false;
  for (const auto& m : initial.members) has_s2 = has_s2 || pool::subset_of(m) == pool::Subset::S2;
  if (has_s2) {
    const auto fc = pool::s2_solvency(initial);
    report["s2_solvency"] = {{"feasible", fc.feasible}, {"worst_i", initial.members[fc.worst_i].id},
                           {"worst_j", initial.members[fc.worst_j].id}, {"margin", fc.margin},
                           {"degenerate", fc.degenerate}};
    if (!fc.feasible) {
      std::ostringstream os;
      os << "finite S2 solvency condition fails: worst pair (i=" << initial.members[fc.worst_i].id
         << ", j=" << initial.members[fc.worst_j].id << "), margin " << fc.margin;
      throw InfeasibleScenario(os.str(), fc.margin);
    }
  }

  const auto runs = pool::replicate(initial, spec.replications, spec.dt, spec.seed, spec.steps);
  const auto fair = pool::fairness_report(runs);
  json members = json::array();
  for (const auto& m : fair.members) {
    members.push_back(json{{"id", m.id},
                       {"mean_net_rate", m.mean_net_rate},
                       {"se_net_rate", m.se_net_rate},
                       {"mean_received_rate", m.mean_received_rate},
                       {"se_received_rate", m.se_received_rate},
                       {"expected_rate", m.expected_rate},
                       {"net_within_3se", m.net_within_3se},
                       {"received_within_3se", m.received_within_3se}});
  }
  report["replications"] = fair.replications;
  report["dt"] = spec.dt;
  report["steps"] = spec.steps;
  report["seed"] = spec.seed;
  report["fair"] = fair.fair();
  report["credit_rates_match"] = fair.credit_rates_match();
  report["members"] = members;

  // Event log of one sample run on the same seed.
  Table log;
  log.columns = {"time", "deceased", "subset", "member", "received", "donated", "degenerate"};
  pool::PoolState state = initial;
  std::mt19937_64 rng(spec.seed);
  for (std::size_t k = 0; k < spec.steps; ++k) {
    const auto step_log = pool::step(state, spec.dt, rng);
    for (const auto& d : step_log.deaths) {
      for (std::size_t j = 0; j < d.received.size(); ++j) {
        if (d.received[j] == 0.0 && d.donated[j] == 0.0) continue;
        log.rows.push_back(std::vector<Cell>{step_log.time, static_cast<std::int64_t>(state.members[d.deceased].id),
                            std::string(pool::to_string(d.subset)),
                            static_cast<std::int64_t>(state.members[j].id), d.received[j], d.donated[j],
                            static_cast<std::int64_t>(d.degenerate)});
      }
    }
  }

  run.emit(report.dump(2) + "\n");
  run.emit(to_csv(log), ".events.csv");
  run.finish();
  return kOk;
}

int cmd_figure(const Flags& f) {
  Run run("figure", f);
  figures::FigureSpec spec;
  spec.id = f.figure;
  if (!f.config.empty()) {
    const json doc = load_json(f.config);
    const ScenarioConfig s = scenario_from_json(doc);
    run.set_config(doc);
    spec.market = s.market;
    spec.mortality = s.mortality;
    spec.entry_age = s.entry_age;
    spec.quadrature = s.quadrature;
    spec.ages = AgeGrid{s.entry_age, s.end_age, 1.0};
  }
  if (f.from_age) spec.ages.from = *f.from_age;
  if (f.to_age) spec.ages.to = *f.to_age;
  spec.ages.step = f.step;
  run.emit(to_csv(figures::figure(spec)));
  run.finish();
  return kOk;
}

int cmd_verify(const Flags& f) {
  Run run("verify", f);
  ScenarioConfig base = reference_scenario(0.25, 3.0);
  if (!f.config.empty()) base = load_scenario(f, run);
  oracle::VerifyOptions opt;
  opt.inject_beta_sign_fault = f.inject_fault;
  const auto rep = oracle::run_verification(base, opt);
  json checks = json::array();
  for (const auto& c : rep.checks) {
    checks.push_back({{"name", c.name}, {"max_error", c.max_error}, {"tolerance", c.tolerance}, {"passed", c.passed}});
  }
  const json out = {{"all_passed", rep.all_passed()}, {"fault_injected", f.inject_fault}, {"checks", checks}};
  run.emit(out.dump(2) + "\n");
  run.finish();
  if (!rep.all_passed()) {
    for (const auto& c : rep.checks) {
      if (!c.passed) std::cerr << "check failed: " << c.name << " (max error " << c.max_error << ")\n";
    }
    return kNumerical;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal tontine-with-bequest strategy engine"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Flags f;

  auto add_io = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", f.config, "JSON configuration file");
    if (config_required) opt->required();
    sub->add_option("--out", f.out, "output file (stdout if omitted)");
  };
  auto add_ages = [&](CLI::App* sub) {
    sub->add_option("--from-age", f.from_age, "first reported age");
    sub->add_option("--to-age", f.to_age, "last reported age");
    sub->add_option("--step", f.step, "age step")->check(CLI::PositiveNumber);
  };

  auto* sched = app.add_subcommand("schedule", "optimal strategy schedule as CSV");
  add_io(sched, true);
  add_ages(sched);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo or analytic wealth/bequest summaries");
  add_io(sim, true);
  add_ages(sim);
  sim->add_option("--paths", f.paths, "number of paths (0 = analytic only)");
  sim->add_option("--seed", f.seed, "RNG seed");
  sim->add_option("--dt", f.dt, "time step in years")->check(CLI::PositiveNumber);

  auto* pl = app.add_subcommand("pool", "finite-pool fairness experiment");
  add_io(pl, true);
  pl->add_option("--replications", f.replications, "number of replications");
  pl->add_option("--seed", f.seed, "RNG seed");
  pl->add_option("--dt", f.dt, "time step in years")->check(CLI::PositiveNumber);

  auto* fig = app.add_subcommand("figure", "data behind a chart");
  add_io(fig, false);
  add_ages(fig);
  fig->add_option("--figure", f.figure, "chart id")->required()->check(CLI::Range(1, 6));

  auto* ver = app.add_subcommand("verify", "cross-check closed forms against numerical oracles");
  add_io(ver, false);
  ver->add_flag("--inject-beta-fault", f.inject_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*sched) return cmd_schedule(f);
    if (*sim) return cmd_simulate(f);
    if (*pl) return cmd_pool(f);
    if (*fig) return cmd_figure(f);
    if (*ver) return cmd_verify(f);
  } catch (const InfeasibleScenario& e) {
    std::cerr << "infeasible: " << e.what() << "\nmargin: " << format_double(e.margin()) << "\n";
    return kInfeasible;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const PoolError& e) {
    std::cerr << "pool error: " << e.what() << "\n";
    return kInfeasible;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
