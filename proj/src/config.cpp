#include "tontine/config.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>

#include "tontine/errors.hpp"

namespace tontine {

namespace {

std::string joined(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix,
                    std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key: " + joined(prefix, key));
  }
}

const json& section(const json& doc, const std::string& prefix, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw ConfigError("missing key: " + joined(prefix, key));
  if (!it->is_object()) throw ConfigError("expected object: " + joined(prefix, key));
  return *it;
}

double number(const json& obj, const std::string& prefix, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError("missing key: " + joined(prefix, key));
  if (!it->is_number()) throw ConfigError("expected number: " + joined(prefix, key));
  return it->get<double>();
}

double number_or(const json& obj, const std::string& prefix, const char* key, double fallback) {
  return obj.contains(key) ? number(obj, prefix, key) : fallback;
}

std::uint64_t count_or(const json& obj, const std::string& prefix, const char* key,
                       std::uint64_t fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
    throw ConfigError("expected non-negative integer: " + joined(prefix, key));
  }
  return it->get<std::uint64_t>();
}

MarketParams market_from(const json& m, const std::string& p) {
  reject_unknown(m, p, {"r", "mu", "sigma", "rho"});
  return {number(m, p, "r"), number(m, p, "mu"), number(m, p, "sigma"), number(m, p, "rho")};
}

PreferenceParams prefs_from(const json& pr, const std::string& p) {
  reject_unknown(pr, p, {"gamma", "log_utility", "b"});
  const double b = number(pr, p, "b");
  bool log_utility = false;
  if (const auto it = pr.find("log_utility"); it != pr.end()) {
    if (!it->is_boolean()) throw ConfigError("expected boolean: " + joined(p, "log_utility"));
    log_utility = it->get<bool>();
  }
  if (log_utility) {
    if (pr.contains("gamma") && number(pr, p, "gamma") != 0.0) {
      throw ConfigError("conflicting keys: " + joined(p, "gamma") + " with log_utility");
    }
    return PreferenceParams::logarithmic(b);
  }
  const double gamma = number(pr, p, "gamma");
  if (gamma == 0.0) return PreferenceParams::logarithmic(b);
  return PreferenceParams::power(gamma, b);
}

GompertzMakehamParams mortality_from(const json& m, const std::string& p) {
  reject_unknown(m, p, {"m", "q", "v"});
  return {number(m, p, "m"), number(m, p, "q"), number(m, p, "v")};
}

QuadratureSettings quadrature_from(const json& doc, const std::string& p) {
  QuadratureSettings q;
  if (!doc.contains("quadrature")) return q;
  const std::string qp = joined(p, "quadrature");
  const json& s = section(doc, p, "quadrature");
  reject_unknown(s, qp, {"max_age", "rel_tol", "abs_tol"});
  q.max_age = number_or(s, qp, "max_age", q.max_age);
  q.rel_tol = number_or(s, qp, "rel_tol", q.rel_tol);
  q.abs_tol = number_or(s, qp, "abs_tol", q.abs_tol);
  return q;
}

json prefs_json(const PreferenceParams& prefs) {
  if (prefs.log_utility()) return {{"log_utility", true}, {"b", prefs.b()}};
  return {{"gamma", prefs.gamma()}, {"b", prefs.b()}};
}

json market_json(const MarketParams& m) {
  return {{"r", m.r}, {"mu", m.mu}, {"sigma", m.sigma}, {"rho", m.rho}};
}

json quadrature_json(const QuadratureSettings& q) {
  return {{"max_age", q.max_age}, {"rel_tol", q.rel_tol}, {"abs_tol", q.abs_tol}};
}

pool::Member member_from(const json& m, const std::string& p) {
  if (!m.is_object()) throw ConfigError("expected object: " + p);
  reject_unknown(m, p, {"age", "wealth", "alpha", "scenario", "mortality", "count"});
  pool::Member member;
  member.age = number(m, p, "age");
  member.wealth = number(m, p, "wealth");
  if (m.contains("mortality")) member.mortality = mortality_from(section(m, p, "mortality"), joined(p, "mortality"));
  const bool has_alpha = m.contains("alpha");
  const bool has_scenario = m.contains("scenario");
  if (has_alpha == has_scenario) {
    throw ConfigError("member needs exactly one of alpha or scenario: " + p);
  }
  if (has_alpha) {
    member.fixed_alpha = number(m, p, "alpha");
  } else {
    const std::string sp = joined(p, "scenario");
    const json& s = section(m, p, "scenario");
    reject_unknown(s, sp, {"market", "prefs", "quadrature"});
    pool::MemberStrategy strat;
    strat.market = market_from(section(s, sp, "market"), joined(sp, "market"));
    strat.prefs = prefs_from(section(s, sp, "prefs"), joined(sp, "prefs"));
    strat.quadrature = quadrature_from(s, sp);
    member.strategy = strat;
  }
  return member;
}

}  // namespace

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

ScenarioConfig scenario_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc, "", {"market", "prefs", "mortality", "scenario", "quadrature"});
  ScenarioConfig s;
  s.market = market_from(section(doc, "", "market"), "market");
  s.prefs = prefs_from(section(doc, "", "prefs"), "prefs");
  s.mortality = mortality_from(section(doc, "", "mortality"), "mortality");
  if (doc.contains("scenario")) {
    const json& sc = section(doc, "", "scenario");
    reject_unknown(sc, "scenario", {"entry_age", "initial_wealth", "end_age", "dt", "paths", "seed"});
    s.entry_age = number_or(sc, "scenario", "entry_age", s.entry_age);
    s.initial_wealth = number_or(sc, "scenario", "initial_wealth", s.initial_wealth);
    s.end_age = number_or(sc, "scenario", "end_age", s.end_age);
    s.dt = number_or(sc, "scenario", "dt", s.dt);
    s.paths = count_or(sc, "scenario", "paths", s.paths);
    s.seed = count_or(sc, "scenario", "seed", s.seed);
  }
  s.quadrature = quadrature_from(doc, "");
  validate(s.mortality);
  validate(s.quadrature);
  return s;
}

json to_json(const ScenarioConfig& s) {
  return {
      {"market", market_json(s.market)},
      {"prefs", prefs_json(s.prefs)},
      {"mortality", {{"m", s.mortality.m}, {"q", s.mortality.q}, {"v", s.mortality.v}}},
      {"scenario",
       {{"entry_age", s.entry_age},
        {"initial_wealth", s.initial_wealth},
        {"end_age", s.end_age},
        {"dt", s.dt},
        {"paths", s.paths},
        {"seed", s.seed}}},
      {"quadrature", quadrature_json(s.quadrature)},
  };
}

std::string config_hash(const json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PoolSpec pool_spec_from_json(const json& doc) {
  PoolSpec spec;
  const json* list = &doc;
  if (doc.is_object()) {
    reject_unknown(doc, "", {"members", "dt", "steps", "replications", "seed"});
    const auto it = doc.find("members");
    if (it == doc.end()) throw ConfigError("missing key: members");
    list = &*it;
    spec.dt = number_or(doc, "", "dt", spec.dt);
    spec.steps = count_or(doc, "", "steps", spec.steps);
    spec.replications = count_or(doc, "", "replications", spec.replications);
    spec.seed = count_or(doc, "", "seed", spec.seed);
  }
  if (!list->is_array()) throw ConfigError("expected array: members");
  if (list->empty()) throw ConfigError("empty member list");
  for (std::size_t i = 0; i < list->size(); ++i) {
    const std::string p = "members[" + std::to_string(i) + "]";
    const json& m = (*list)[i];
    const pool::Member member = member_from(m, p);
    const std::uint64_t n = m.is_object() ? count_or(m, p, "count", 1) : 1;
    if (n == 0) throw ConfigError("count must be positive: " + p);
    for (std::uint64_t c = 0; c < n; ++c) {
      spec.members.push_back(member);
      spec.members.back().id = spec.members.size() - 1;
    }
  }
  if (!(spec.dt > 0.0)) throw ConfigError("dt must be positive");
  if (spec.steps == 0) throw ConfigError("steps must be positive");
  return spec;
}

Table schedule_table(const StrategySchedule& s) {
  Table t;
  t.metadata.emplace_back("entry_age", format_double(s.entry_age));
  t.metadata.emplace_back("k", format_double(s.k));
  if (s.mcbr) t.metadata.emplace_back("mcbr", format_double(*s.mcbr));
  if (s.conjectural) t.metadata.emplace_back("conjectural", "true");
  t.columns = {"age", "lambda", "annuity_A", "m_price", "c_star", "alpha_star", "bequest_prop", "w_star", "regime"};
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    t.rows.push_back({s.age[i], s.lambda[i], s.annuity[i], s.m_price[i], s.c_star[i], s.alpha_star[i],
                      s.bequest_prop[i], s.w_star[i],
                      std::string(to_string(s.regime[static_cast<std::size_t>(i)]))});
  }
  return t;
}

}  // namespace tontine
