#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "tontine/annuity.hpp"
#include "tontine/mortality.hpp"
#include "tontine/params.hpp"

namespace tontine::pool {

/// Preferences a member follows when alpha comes from the optimal strategy.
struct MemberStrategy {
  MarketParams market;
  PreferenceParams prefs = PreferenceParams::power(0.25, 3.0);
  QuadratureSettings quadrature;
};

struct Member {
  std::size_t id = 0;
  double age = 65.0;
  double wealth = 1.0;
  GompertzMakehamParams mortality = kUkMale;
  /// Fixed tontine proportion; otherwise alpha*(age) from `strategy`.
  std::optional<double> fixed_alpha;
  std::optional<MemberStrategy> strategy;
  bool alive = true;
  /// Amount passed to the estate on death.
  double estate = 0.0;

  // Refreshed from the fields above by refresh().
  double alpha = 0.0;
  double hazard = 0.0;
};

enum class Subset { S1, S2 };

std::string_view to_string(Subset s);

/// Members with alpha >= 0 form S1; alpha < 0 form S2.
inline Subset subset_of(const Member& m) { return m.alpha >= 0.0 ? Subset::S1 : Subset::S2; }

struct PoolState {
  std::vector<Member> members;
  double clock = 0.0;
  /// Cumulative credits per member (same order as members).
  std::vector<double> received;
  std::vector<double> donated;

  std::size_t index_of(std::size_t id) const;
  std::size_t alive_count() const;
};

/// Builds a pool, validates members and evaluates their alpha and hazard.
PoolState make_pool(std::vector<Member> members);

/// Re-evaluates alpha and hazard of every living member at its current age.
void refresh(PoolState& state);

/// Credit flows triggered by one death, indexed like PoolState::members.
struct CreditAllocation {
  std::size_t deceased = 0;  ///< member index
  Subset subset = Subset::S1;
  std::vector<double> received;
  std::vector<double> donated;
  /// The deceased's subset had a single member.
  bool degenerate = false;
  /// Deceased wealth after the credits it receives, before its own share is donated.
  double gross_deceased_wealth = 0.0;
  /// Final amount passed to the estate.
  double estate = 0.0;
};

/// Applies the sharing rule. In S1 the deceased's tontine balance alpha_i X_i is split over
/// S1 (deceased included) in proportion to lambda_j alpha_j X_j. In S2 every member j of S2
/// (deceased included) pays -alpha_i X_i p_j to the deceased, p_j the same weight share
/// within S2. Throws PoolError if a payer's wealth would not stay positive or the weight
/// sum vanishes.
CreditAllocation credit_shares_on_death(const PoolState& state, std::size_t deceased_id);

/// Moves the credits, settles the estate and marks the deceased as dead.
void apply(PoolState& state, const CreditAllocation& allocation);

struct StepLog {
  double time = 0.0;
  std::vector<CreditAllocation> deaths;
  /// Some member had lambda dt >= 0.1.
  bool coarse_step = false;
};

/// One time step: Bernoulli deaths with probability lambda dt, processed in random order,
/// then survivors age by dt and alpha / subsets are refreshed.
StepLog step(PoolState& state, double dt, std::mt19937_64& rng);

struct SolvencyCheck {
  bool feasible = true;
  /// Pair (deceased i, payer j) with the smallest margin X_j / (-alpha_i X_i) - p_j.
  std::size_t worst_i = 0;
  std::size_t worst_j = 0;
  double margin = 0.0;
  bool degenerate = false;
};

/// Finite-S2 solvency condition. Throws PoolError if S2 is empty.
SolvencyCheck s2_solvency(const PoolState& state);

/// Credits per replication and member, over a run of `steps` steps of length dt.
struct Replications {
  double duration = 0.0;
  std::vector<std::size_t> ids;
  std::vector<double> expected_rate;  ///< lambda |alpha| X at the start
  std::vector<std::vector<double>> received;  ///< [replication][member]
  std::vector<std::vector<double>> donated;
};

Replications replicate(const PoolState& initial, std::size_t replications, double dt,
                       std::uint64_t seed, std::size_t steps = 1);

struct MemberFairness {
  std::size_t id = 0;
  double mean_net_rate = 0.0;
  double se_net_rate = 0.0;
  double mean_received_rate = 0.0;
  double se_received_rate = 0.0;
  double expected_rate = 0.0;
  bool net_within_3se = false;
  bool received_within_3se = false;
};

struct FairnessReport {
  std::size_t replications = 0;
  std::vector<MemberFairness> members;
  bool fair() const;
  bool credit_rates_match() const;
};

/// Per-member mean net credit flow (received - donated) per year with standard errors.
/// Requires at least two replications.
FairnessReport fairness_report(const Replications& runs);

}  // namespace tontine::pool
