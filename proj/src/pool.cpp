#include "tontine/pool.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tontine/errors.hpp"
#include "tontine/strategy.hpp"

namespace tontine::pool {

namespace {

double alpha_of(const Member& m) {
  if (m.fixed_alpha) return *m.fixed_alpha;
  const auto& st = *m.strategy;
  return 1.0 - bequest_proportion(Hazard(m.mortality), m.age, st.prefs, st.market, st.quadrature);
}

void validate_member(const Member& m) {
  validate(m.mortality);
  if (!(m.wealth > 0.0)) {
    std::ostringstream os;
    os << "member " << m.id << ": wealth must be positive";
    throw ConfigError(os.str());
  }
  if (m.fixed_alpha.has_value() == m.strategy.has_value()) {
    std::ostringstream os;
    os << "member " << m.id << ": give exactly one of a fixed alpha or a strategy";
    throw ConfigError(os.str());
  }
  if (m.fixed_alpha && !(*m.fixed_alpha <= 1.0)) {
    std::ostringstream os;
    os << "member " << m.id << ": alpha must not exceed 1";
    throw ConfigError(os.str());
  }
  Hazard(m.mortality).require_nonnegative_from(m.age);
}

/// Weights lambda_k alpha_k X_k over the living members of one subset.
double subset_weight(const PoolState& st, Subset subset) {
  double sum = 0.0;
  for (const auto& m : st.members) {
    if (m.alive && subset_of(m) == subset) sum += m.hazard * m.alpha * m.wealth;
  }
  return sum;
}

std::size_t subset_size(const PoolState& st, Subset subset) {
  return static_cast<std::size_t>(std::count_if(st.members.begin(), st.members.end(), [&](const Member& m) {
    return m.alive && subset_of(m) == subset;
  }));
}

}  // namespace

std::string_view to_string(Subset s) { return s == Subset::S1 ? "S1" : "S2"; }

std::size_t PoolState::index_of(std::size_t id) const {
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].id == id) return i;
  }
  std::ostringstream os;
  os << "no member with id " << id;
  throw PoolError(os.str());
}

std::size_t PoolState::alive_count() const {
  return static_cast<std::size_t>(
      std::count_if(members.begin(), members.end(), [](const Member& m) { return m.alive; }));
}

PoolState make_pool(std::vector<Member> members) {
  if (members.empty()) throw ConfigError("pool has no members");
  for (const auto& m : members) validate_member(m);
  PoolState st;
  st.members = std::move(members);
  st.received.assign(st.members.size(), 0.0);
  st.donated.assign(st.members.size(), 0.0);
  refresh(st);
  return st;
}

void refresh(PoolState& st) {
  for (auto& m : st.members) {
    if (!m.alive) continue;
    m.alpha = alpha_of(m);
    if (!(m.alpha <= 1.0)) {
      std::ostringstream os;
      os << "member " << m.id << ": alpha " << m.alpha << " exceeds 1";
      throw PoolError(os.str());
    }
    m.hazard = hazard(m.mortality, m.age);
  }
}

CreditAllocation credit_shares_on_death(const PoolState& st, std::size_t deceased_id) {
  const std::size_t i = st.index_of(deceased_id);
  const Member& dead = st.members[i];
  if (!dead.alive) {
    std::ostringstream os;
    os << "member " << deceased_id << " is already dead";
    throw PoolError(os.str());
  }
  CreditAllocation out;
  out.deceased = i;
  out.subset = subset_of(dead);
  out.received.assign(st.members.size(), 0.0);
  out.donated.assign(st.members.size(), 0.0);
  out.degenerate = subset_size(st, out.subset) == 1;

  // Tontine balance released by the death; negative in S2.
  const double balance = dead.alpha * dead.wealth;
  if (balance != 0.0) {
    const double total = subset_weight(st, out.subset);
    if (total == 0.0) {
      std::ostringstream os;
      os << "subset " << to_string(out.subset) << " has zero total weight at the death of member "
         << deceased_id;
      throw PoolError(os.str());
    }
    for (std::size_t j = 0; j < st.members.size(); ++j) {
      const Member& m = st.members[j];
      if (!m.alive || subset_of(m) != out.subset) continue;
      const double share = m.hazard * m.alpha * m.wealth / total;
      if (out.subset == Subset::S1) {
        out.received[j] = balance * share;
      } else {
        out.donated[j] = -balance * share;
        if (j != i && !(m.wealth - out.donated[j] > 0.0)) {
          std::ostringstream os;
          os << "finite-S2 solvency violated: death of member " << deceased_id << " would leave member "
             << m.id << " with wealth " << m.wealth - out.donated[j];
          throw PoolError(os.str());
        }
      }
    }
    if (out.subset == Subset::S1) {
      out.donated[i] = balance;
    } else {
      out.received[i] = -balance;
    }
  }
  out.gross_deceased_wealth =
      out.subset == Subset::S2 ? dead.wealth + out.received[i] : dead.wealth - out.donated[i];
  out.estate = dead.wealth + out.received[i] - out.donated[i];
  return out;
}

void apply(PoolState& st, const CreditAllocation& a) {
  for (std::size_t j = 0; j < st.members.size(); ++j) {
    if (a.received[j] == 0.0 && a.donated[j] == 0.0) continue;
    st.members[j].wealth += a.received[j] - a.donated[j];
    st.received[j] += a.received[j];
    st.donated[j] += a.donated[j];
  }
  Member& dead = st.members[a.deceased];
  dead.estate = dead.wealth;
  dead.alive = false;
}

StepLog step(PoolState& st, double dt, std::mt19937_64& rng) {
  if (!(dt > 0.0)) throw ConfigError("pool step must be positive");
  StepLog log;
  log.time = st.clock;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> deaths;
  for (const auto& m : st.members) {
    if (!m.alive) continue;
    if (m.hazard * dt >= 0.1) log.coarse_step = true;
    if (unit(rng) < m.hazard * dt) deaths.push_back(m.id);
  }
  std::shuffle(deaths.begin(), deaths.end(), rng);
  for (const std::size_t id : deaths) {
    auto alloc = credit_shares_on_death(st, id);
    apply(st, alloc);
    log.deaths.push_back(std::move(alloc));
  }
  for (auto& m : st.members) {
    if (m.alive) m.age += dt;
  }
  st.clock += dt;
  refresh(st);
  return log;
}

SolvencyCheck s2_solvency(const PoolState& st) {
  const double total = subset_weight(st, Subset::S2);
  std::vector<std::size_t> s2;
  for (std::size_t j = 0; j < st.members.size(); ++j) {
    if (st.members[j].alive && subset_of(st.members[j]) == Subset::S2) s2.push_back(j);
  }
  if (s2.empty()) throw PoolError("solvency check needs a nonempty S2");
  SolvencyCheck out;
  out.degenerate = s2.size() == 1;
  out.margin = std::numeric_limits<double>::infinity();
  for (const std::size_t i : s2) {
    const auto& mi = st.members[i];
    const double owed = -mi.alpha * mi.wealth;
    for (const std::size_t j : s2) {
      const auto& mj = st.members[j];
      const double p = mj.hazard * mj.alpha * mj.wealth / total;
      const double margin = mj.wealth / owed - p;
      if (margin < out.margin) {
        out.margin = margin;
        out.worst_i = mi.id;
        out.worst_j = mj.id;
      }
    }
  }
  out.feasible = out.margin > 0.0;
  return out;
}

Replications replicate(const PoolState& initial, std::size_t replications, double dt,
                       std::uint64_t seed, std::size_t steps) {
  Replications out;
  out.duration = dt * static_cast<double>(steps);
  for (const auto& m : initial.members) {
    out.ids.push_back(m.id);
    out.expected_rate.push_back(m.alive ? m.hazard * std::abs(m.alpha) * m.wealth : 0.0);
  }
  out.received.reserve(replications);
  out.donated.reserve(replications);
  for (std::size_t r = 0; r < replications; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
    std::mt19937_64 rng(seq);
    PoolState st = initial;
    for (std::size_t k = 0; k < steps; ++k) step(st, dt, rng);
    out.received.push_back(std::move(st.received));
    out.donated.push_back(std::move(st.donated));
  }
  return out;
}

bool FairnessReport::fair() const {
  return std::all_of(members.begin(), members.end(), [](const MemberFairness& m) { return m.net_within_3se; });
}

bool FairnessReport::credit_rates_match() const {
  return std::all_of(members.begin(), members.end(),
                     [](const MemberFairness& m) { return m.received_within_3se; });
}

FairnessReport fairness_report(const Replications& runs) {
  const std::size_t n = runs.received.size();
  if (n < 2) throw ConfigError("fairness report needs at least two replications");
  FairnessReport out;
  out.replications = n;
  const double nn = static_cast<double>(n);
  for (std::size_t j = 0; j < runs.ids.size(); ++j) {
    double sum_net = 0.0, sum_rec = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      sum_net += (runs.received[r][j] - runs.donated[r][j]) / runs.duration;
      sum_rec += runs.received[r][j] / runs.duration;
    }
    MemberFairness f;
    f.id = runs.ids[j];
    f.mean_net_rate = sum_net / nn;
    f.mean_received_rate = sum_rec / nn;
    double ss_net = 0.0, ss_rec = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double dn = (runs.received[r][j] - runs.donated[r][j]) / runs.duration - f.mean_net_rate;
      const double dr = runs.received[r][j] / runs.duration - f.mean_received_rate;
      ss_net += dn * dn;
      ss_rec += dr * dr;
    }
    f.se_net_rate = std::sqrt(ss_net / (nn - 1.0) / nn);
    f.se_received_rate = std::sqrt(ss_rec / (nn - 1.0) / nn);
    f.expected_rate = runs.expected_rate[j];
    f.net_within_3se = std::abs(f.mean_net_rate) <= 3.0 * f.se_net_rate;
    f.received_within_3se = std::abs(f.mean_received_rate - f.expected_rate) <= 3.0 * f.se_received_rate;
    out.members.push_back(f);
  }
  return out;
}

}  // namespace tontine::pool
