#pragma once

#include <cstdint>
#include <vector>

#include "sunfleet/environment.hpp"

namespace sunfleet {

struct OracleResult {
  double value = 0.0;                // optimum of the model the oracle solved
  std::vector<JointAction> profile;  // extracted charging profile
  EpisodeTrace trace;                // profile replayed on the exact dynamics
  double true_return() const { return trace.total_return; }
};

inline constexpr int kDpMaxFleet = 3;
inline constexpr double kDpWorkBudget = 8e9;           // joint states * joint actions * T
inline constexpr double kDpMemoryBudgetBytes = 1.5e9;  // value tables for all slots

// Backward induction on battery residues floored to `battery_bins` evenly
// spaced levels in [0, capacity]. The value is undiscounted and, because
// floors are pessimistic, a lower bound on the exact optimum. The profile is
// extracted greedily against the value tables from the exact state.
OracleResult dp_oracle(const Environment& env, int battery_bins);

inline constexpr int kExhaustiveMaxFleet = 2;
inline constexpr int kExhaustiveMaxHorizon = 8;
inline constexpr std::uint64_t kExhaustiveBudget = 4'782'969;  // 3^14 action sequences

// True optimum by enumerating every action sequence on the exact dynamics.
// Ties keep the lexicographically first profile.
OracleResult exhaustive_oracle(const Environment& env);

}  // namespace sunfleet
