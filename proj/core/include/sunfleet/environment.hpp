#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "sunfleet/coverage_map.hpp"
#include "sunfleet/energy.hpp"
#include "sunfleet/scenario.hpp"

namespace sunfleet {

using JointAction = std::vector<Level>;

struct EnvState {
  std::vector<double> residue_wh;
  std::vector<Level> level;
  int t = 0;

  std::size_t fleet_size() const { return residue_wh.size(); }
  friend bool operator==(const EnvState&, const EnvState&) = default;
};

enum class BeneficialMode { Landing, Charging };

struct RewardParts {
  double r1 = 0.0;  // constraint penalties
  double r2 = 0.0;  // served users
  double r3 = 0.0;  // landing / charging incentive

  friend bool operator==(const RewardParts&, const RewardParts&) = default;
};

struct StepOutcome {
  EnvState next;
  double reward = 0.0;
  RewardParts parts;
  int users = 0;
  int served_users = 0;
  int n_srv = 0;
  int n_gnd = 0;
  int n_chg = 0;
  double harvested_wh = 0.0;
  double consumed_wh = 0.0;
  double discarded_harvest_wh = 0.0;
  double unmet_consumption_wh = 0.0;
  std::vector<bool> sustainability_violation;
  bool service_violation = false;

  int sustainability_violations() const;
  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

// Landing pays off unless a full dwell at the charging altitude has positive net energy.
BeneficialMode beneficial_mode(int t, const Scenario& scenario);

// The day-long charging-profile decision process. Stateless: step() is a pure
// function of (state, action), so one instance may be shared by many rollouts.
class Environment {
 public:
  Environment(Scenario scenario, CoverageMap map);

  const Scenario& scenario() const { return scenario_; }
  const CoverageMap& coverage_map() const { return map_; }
  int horizon() const { return scenario_.horizon; }
  int fleet_size() const { return scenario_.fleet_size; }

  // All UAVs grounded at t = 0; full batteries unless residues are given.
  EnvState reset(const std::optional<std::vector<double>>& initial_residues = std::nullopt) const;

  StepOutcome step(const EnvState& state, const JointAction& action) const;

  // Served-user reward for n serving UAVs at t, capped at the smallest count
  // that already serves everyone.
  double service_reward(int t, int n_srv) const;
  // Sum of r2 and the service-rate penalty for n serving UAVs at t.
  double fleet_reward(int t, int n_srv) const;
  bool meets_service_rate(int t, int served) const;

  BeneficialMode mode(int t) const { return modes_.at(static_cast<std::size_t>(t)); }
  double min_energy(Level a) const { return min_energy_[static_cast<std::size_t>(code(a))]; }
  // Sustainability check after a slot that ended at level a. A battery emptied mid-slot
  // counts: its unclamped residue went below zero.
  bool sustainability_violated(Level a, const SlotEnergyResult& e) const {
    return e.new_residue_wh < min_energy(a) || e.unmet_consumption_wh > 0.0;
  }

 private:
  Scenario scenario_;
  CoverageMap map_;
  std::vector<BeneficialMode> modes_;
  std::vector<double> min_energy_;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual JointAction act(const EnvState& state) const = 0;
};

// Replays a fixed per-slot action list.
class ProfilePolicy final : public Policy {
 public:
  explicit ProfilePolicy(std::vector<JointAction> profile) : profile_(std::move(profile)) {}
  JointAction act(const EnvState& state) const override;
  const std::vector<JointAction>& profile() const { return profile_; }

 private:
  std::vector<JointAction> profile_;
};

struct TraceStep {
  int t = 0;
  JointAction action;
  StepOutcome outcome;
};

struct EpisodeTrace {
  EnvState initial;
  std::vector<TraceStep> steps;
  double total_return = 0.0;

  std::vector<JointAction> profile() const;
};

EpisodeTrace rollout(const Policy& policy, const Environment& env,
                     const std::optional<EnvState>& initial = std::nullopt);

// Columns: t, a_i..., residue_i..., n_srv, served_users, r1, r2, r3, E_h, E_c.
void write_trace_csv(const EpisodeTrace& trace, const std::filesystem::path& path);

// Columns: t, a_i...
void write_profile_csv(const std::vector<JointAction>& profile, const std::filesystem::path& path);
std::vector<JointAction> read_profile_csv(const std::filesystem::path& path);

}  // namespace sunfleet
