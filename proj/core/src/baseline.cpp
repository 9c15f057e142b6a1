#include "sunfleet/baseline.hpp"

#include <algorithm>
#include <numeric>

namespace sunfleet {

int GreedyPolicy::required_serving(int t) const {
  const int users = env_.scenario().users_at(t);
  if (users == 0) return 0;
  for (int n = 0; n <= env_.fleet_size(); ++n) {
    if (env_.meets_service_rate(t, env_.coverage_map().served(t, n))) return n;
  }
  return env_.fleet_size();
}

bool GreedyPolicy::eligible(const EnvState& state, std::size_t i) const {
  const Scenario& sc = env_.scenario();
  const SlotEnergyResult e = slot_transition(state.level[i], Level::Serving, state.residue_wh[i],
                                             sc.hour_of_day(state.t), sc.slot_seconds, sc.physics, sc.solar,
                                             sc.altitudes);
  return e.new_residue_wh >= env_.min_energy(Level::Serving);
}

JointAction GreedyPolicy::act(const EnvState& state) const {
  const std::size_t n = state.fleet_size();
  const Level idle = env_.mode(state.t) == BeneficialMode::Charging ? Level::Charging : Level::Ground;
  JointAction action(n, idle);

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    if (eligible(state, i)) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return state.residue_wh[a] > state.residue_wh[b]; });
  const auto wanted = static_cast<std::size_t>(required_serving(state.t));
  for (std::size_t k = 0; k < std::min(wanted, order.size()); ++k) action[order[k]] = Level::Serving;
  return action;
}

std::vector<bool> GreedyResult::service_met() const {
  std::vector<bool> met;
  for (const auto& s : trace.steps) met.push_back(!s.outcome.service_violation);
  return met;
}

GreedyResult greedy_baseline(const Environment& env) {
  const GreedyPolicy policy(env);
  GreedyResult result;
  result.trace = rollout(policy, env);
  EnvState state = result.trace.initial;
  for (const auto& s : result.trace.steps) {
    std::size_t eligible = 0;
    for (std::size_t i = 0; i < state.fleet_size(); ++i) eligible += policy.eligible(state, i);
    const int wanted = policy.required_serving(s.t);
    const bool reachable = env.meets_service_rate(s.t, env.coverage_map().served(s.t, wanted));
    result.infeasible.push_back(!reachable || eligible < static_cast<std::size_t>(wanted));
    result.profile.push_back(s.action);
    state = s.outcome.next;
  }
  return result;
}

}  // namespace sunfleet
