#include "sunfleet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sunfleet/error.hpp"

namespace sunfleet {

namespace {

int ipow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

JointAction decode_action(int index, int fleet) {
  JointAction a(static_cast<std::size_t>(fleet));
  for (int i = 0; i < fleet; ++i) {
    a[static_cast<std::size_t>(i)] = static_cast<Level>(index % kLevelCount);
    index /= kLevelCount;
  }
  return a;
}

// Residue grid: bin b holds b * width, b in [0, bins).
struct Grid {
  int bins;
  double width;

  int floor_bin(double residue) const {
    // tolerance keeps exact grid values on their own bin
    const int b = static_cast<int>(std::floor(residue / width + 1e-9));
    return std::clamp(b, 0, bins - 1);
  }
  double value(int bin) const { return bin * width; }
};

}  // namespace

OracleResult dp_oracle(const Environment& env, int battery_bins) {
  const Scenario& sc = env.scenario();
  const int fleet = env.fleet_size();
  const int horizon = env.horizon();
  if (battery_bins < 2) throw InputError("dp oracle needs at least 2 battery bins");
  if (fleet > kDpMaxFleet) throw SizeError("dp oracle supports at most " + std::to_string(kDpMaxFleet) + " UAVs");

  const int local = battery_bins * kLevelCount;  // per-UAV states
  const double joint_states = std::pow(double(local), fleet);
  const int joint_actions = ipow(kLevelCount, fleet);
  const double work = joint_states * joint_actions * horizon;
  const double memory = joint_states * (horizon + 1) * sizeof(float);
  if (work > kDpWorkBudget || memory > kDpMemoryBudgetBytes) {
    throw SizeError("dp oracle with " + std::to_string(battery_bins) + " bins and " + std::to_string(fleet) +
                    " UAVs needs " + std::to_string(work) + " operations and " + std::to_string(memory) +
                    " bytes; budget is " + std::to_string(kDpWorkBudget) + " / " + std::to_string(kDpMemoryBudgetBytes));
  }
  const Grid grid{battery_bins, sc.physics.battery_capacity_wh / (battery_bins - 1)};
  const auto n_states = static_cast<std::size_t>(joint_states);

  // Per-UAV transition tables: next local state and the UAV's own reward
  // (sustainability penalty plus its share of the r3 incentive).
  const auto per_slot = static_cast<std::size_t>(local * kLevelCount);
  std::vector<int> next_local(per_slot * static_cast<std::size_t>(horizon));
  std::vector<double> local_reward(next_local.size());
  for (int t = 0; t < horizon; ++t) {
    const double hour = sc.hour_of_day(t);
    const bool landing = env.mode(t) == BeneficialMode::Landing;
    for (int s = 0; s < local; ++s) {
      const int bin = s / kLevelCount;
      const auto level = static_cast<Level>(s % kLevelCount);
      for (int a = 0; a < kLevelCount; ++a) {
        const auto act = static_cast<Level>(a);
        const SlotEnergyResult e = slot_transition(level, act, grid.value(bin), hour, sc.slot_seconds, sc.physics,
                                                   sc.solar, sc.altitudes);
        const auto k = static_cast<std::size_t>(t) * per_slot + static_cast<std::size_t>(s * kLevelCount + a);
        next_local[k] = grid.floor_bin(e.new_residue_wh) * kLevelCount + a;
        double r = env.sustainability_violated(act, e) ? sc.reward.penalty_sustainability : 0.0;
        if (landing && act == Level::Ground) r += sc.reward.ground_coeff;
        if (!landing && act == Level::Charging) r += sc.reward.charge_coeff;
        local_reward[k] = r;
      }
    }
  }

  std::vector<int> stride(static_cast<std::size_t>(fleet));
  for (int i = 0, m = 1; i < fleet; ++i, m *= local) stride[static_cast<std::size_t>(i)] = m;

  std::vector<std::vector<float>> values(static_cast<std::size_t>(horizon + 1));
  values[static_cast<std::size_t>(horizon)].assign(n_states, 0.0f);

  std::vector<int> serving_count(static_cast<std::size_t>(joint_actions));
  for (int j = 0; j < joint_actions; ++j) {
    const JointAction a = decode_action(j, fleet);
    int n = 0;
    for (Level l : a) n += l == Level::Serving;
    serving_count[static_cast<std::size_t>(j)] = n;
  }

  std::vector<int> locals(static_cast<std::size_t>(fleet));
  for (int t = horizon - 1; t >= 0; --t) {
    auto& v = values[static_cast<std::size_t>(t)];
    const auto& v_next = values[static_cast<std::size_t>(t + 1)];
    v.assign(n_states, 0.0f);
    std::vector<double> fleet_reward(static_cast<std::size_t>(fleet + 1));
    for (int n = 0; n <= fleet; ++n) fleet_reward[static_cast<std::size_t>(n)] = env.fleet_reward(t, n);
    const std::size_t base = static_cast<std::size_t>(t) * per_slot;

    for (std::size_t idx = 0; idx < n_states; ++idx) {
      std::size_t rest = idx;
      for (int i = 0; i < fleet; ++i) {
        locals[static_cast<std::size_t>(i)] = static_cast<int>(rest % static_cast<std::size_t>(local));
        rest /= static_cast<std::size_t>(local);
      }
      double best = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < joint_actions; ++j) {
        int code_rest = j;
        std::size_t next = 0;
        double r = fleet_reward[static_cast<std::size_t>(serving_count[static_cast<std::size_t>(j)])];
        for (int i = 0; i < fleet; ++i) {
          const int a = code_rest % kLevelCount;
          code_rest /= kLevelCount;
          const std::size_t k = base + static_cast<std::size_t>(locals[static_cast<std::size_t>(i)] * kLevelCount + a);
          next += static_cast<std::size_t>(next_local[k]) * static_cast<std::size_t>(stride[static_cast<std::size_t>(i)]);
          r += local_reward[k];
        }
        best = std::max(best, r + double(v_next[next]));
      }
      v[idx] = static_cast<float>(best);
    }
  }

  auto joint_index = [&](const EnvState& s) {
    std::size_t idx = 0;
    for (int i = 0; i < fleet; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const int l = grid.floor_bin(s.residue_wh[u]) * kLevelCount + code(s.level[u]);
      idx += static_cast<std::size_t>(l) * static_cast<std::size_t>(stride[u]);
    }
    return idx;
  };

  OracleResult result;
  EnvState state = env.reset();
  result.value = values[0][joint_index(state)];
  result.trace.initial = state;
  for (int t = 0; t < horizon; ++t) {
    double best = -std::numeric_limits<double>::infinity();
    JointAction best_action;
    StepOutcome best_outcome;
    for (int j = 0; j < joint_actions; ++j) {
      JointAction a = decode_action(j, fleet);
      StepOutcome out = env.step(state, a);
      const double q = out.reward + double(values[static_cast<std::size_t>(t + 1)][joint_index(out.next)]);
      if (q > best) {
        best = q;
        best_action = std::move(a);
        best_outcome = std::move(out);
      }
    }
    result.trace.total_return += best_outcome.reward;
    state = best_outcome.next;
    result.trace.steps.push_back({t, best_action, std::move(best_outcome)});
    result.profile.push_back(std::move(best_action));
  }
  return result;
}

namespace {

struct Search {
  const Environment& env;
  int joint_actions;
  std::vector<JointAction> actions;
  std::vector<JointAction> current;
  std::vector<JointAction> best_profile;
  double best = -std::numeric_limits<double>::infinity();

  void visit(const EnvState& state, double acc) {
    if (state.t >= env.horizon()) {
      if (acc > best) {
        best = acc;
        best_profile = current;
      }
      return;
    }
    for (const JointAction& a : actions) {
      const StepOutcome out = env.step(state, a);
      current.push_back(a);
      visit(out.next, acc + out.reward);
      current.pop_back();
    }
  }
};

}  // namespace

OracleResult exhaustive_oracle(const Environment& env) {
  const int fleet = env.fleet_size();
  const int horizon = env.horizon();
  if (fleet > kExhaustiveMaxFleet || horizon > kExhaustiveMaxHorizon) {
    throw SizeError("exhaustive oracle supports N <= " + std::to_string(kExhaustiveMaxFleet) + " and T <= " +
                    std::to_string(kExhaustiveMaxHorizon));
  }
  const double sequences = std::pow(double(kLevelCount), fleet * horizon);
  if (sequences > double(kExhaustiveBudget)) {
    throw SizeError("exhaustive oracle needs " + std::to_string(sequences) + " sequences; budget is " +
                    std::to_string(kExhaustiveBudget));
  }
  Search search{env, ipow(kLevelCount, fleet), {}, {}, {}};
  for (int j = 0; j < search.joint_actions; ++j) search.actions.push_back(decode_action(j, fleet));
  search.visit(env.reset(), 0.0);

  OracleResult result;
  result.value = search.best;
  result.profile = search.best_profile;
  result.trace = rollout(ProfilePolicy(result.profile), env);
  return result;
}

}  // namespace sunfleet
