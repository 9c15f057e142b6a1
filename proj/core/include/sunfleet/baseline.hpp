#pragma once

#include <vector>

#include "sunfleet/environment.hpp"

namespace sunfleet {

// Each slot: the fewest serving UAVs that reach the minimum service rate,
// drawn from the highest-residue UAVs that can serve and still keep their
// climb reserve; everyone else follows the slot's beneficial mode.
class GreedyPolicy final : public Policy {
 public:
  explicit GreedyPolicy(const Environment& env) : env_(env) {}

  JointAction act(const EnvState& state) const override;

  // Serving UAVs the service-rate constraint asks for at slot t.
  int required_serving(int t) const;
  // Whether UAV i can serve this slot without breaking its reserve.
  bool eligible(const EnvState& state, std::size_t i) const;

 private:
  const Environment& env_;
};

struct GreedyResult {
  std::vector<JointAction> profile;
  std::vector<bool> infeasible;  // per slot: not enough eligible UAVs
  EpisodeTrace trace;

  // Slots whose replayed service rate meets p_min.
  std::vector<bool> service_met() const;
};

GreedyResult greedy_baseline(const Environment& env);

}  // namespace sunfleet
