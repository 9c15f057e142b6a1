#include "sunfleet/environment.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "sunfleet/error.hpp"

namespace sunfleet {

int StepOutcome::sustainability_violations() const {
  return static_cast<int>(std::count(sustainability_violation.begin(), sustainability_violation.end(), true));
}

BeneficialMode beneficial_mode(int t, const Scenario& scenario) {
  const double harvest = harvest_power(solar_intensity(scenario.hour_of_day(t), scenario.solar), scenario.solar);
  return harvest > hover_power(scenario.physics) ? BeneficialMode::Charging : BeneficialMode::Landing;
}

Environment::Environment(Scenario scenario, CoverageMap map) : scenario_(std::move(scenario)), map_(std::move(map)) {
  scenario_.validate();
  map_.validate_against(scenario_);
  for (int t = 0; t < scenario_.horizon; ++t) modes_.push_back(beneficial_mode(t, scenario_));
  for (int a = 0; a < kLevelCount; ++a) {
    min_energy_.push_back(sunfleet::min_energy(static_cast<Level>(a), scenario_.physics, scenario_.altitudes));
  }
}

EnvState Environment::reset(const std::optional<std::vector<double>>& initial_residues) const {
  const auto n = static_cast<std::size_t>(fleet_size());
  const double cap = scenario_.physics.battery_capacity_wh;
  EnvState s;
  s.residue_wh = initial_residues.value_or(std::vector<double>(n, cap));
  if (s.residue_wh.size() != n) throw InputError("initial residues must have one entry per UAV");
  for (double r : s.residue_wh) {
    if (!(r >= 0.0 && r <= cap)) throw InputError("initial residue outside [0, battery_capacity]");
  }
  s.level.assign(n, Level::Ground);
  s.t = 0;
  return s;
}

double Environment::service_reward(int t, int n_srv) const {
  const int users = scenario_.users_at(t);
  int capped = n_srv;
  for (int n = 0; n < n_srv; ++n) {
    if (map_.served(t, n) >= users) {
      capped = n;
      break;
    }
  }
  return static_cast<double>(map_.served(t, capped));
}

bool Environment::meets_service_rate(int t, int served) const {
  return !(served < scenario_.p_min * scenario_.users_at(t));
}

double Environment::fleet_reward(int t, int n_srv) const {
  const double r2 = service_reward(t, n_srv);
  const double penalty = meets_service_rate(t, map_.served(t, n_srv)) ? 0.0 : scenario_.reward.penalty_service;
  return r2 + penalty;
}

StepOutcome Environment::step(const EnvState& state, const JointAction& action) const {
  const auto n = static_cast<std::size_t>(fleet_size());
  if (action.size() != n) throw InputError("joint action has wrong length");
  if (state.fleet_size() != n || state.level.size() != n) throw InputError("state has wrong fleet size");
  if (state.t < 0 || state.t >= horizon()) throw InputError("cannot step past the horizon");

  const int t = state.t;
  const auto& rw = scenario_.reward;
  StepOutcome out;
  out.next.residue_wh.resize(n);
  out.next.level.resize(n);
  out.next.t = t + 1;
  out.sustainability_violation.assign(n, false);

  const double hour = scenario_.hour_of_day(t);
  for (std::size_t i = 0; i < n; ++i) {
    const SlotEnergyResult e = slot_transition(state.level[i], action[i], state.residue_wh[i], hour,
                                               scenario_.slot_seconds, scenario_.physics, scenario_.solar,
                                               scenario_.altitudes);
    out.next.residue_wh[i] = e.new_residue_wh;
    out.next.level[i] = e.new_level;
    out.harvested_wh += e.harvested_wh;
    out.consumed_wh += e.consumed_wh;
    out.discarded_harvest_wh += e.discarded_harvest_wh;
    out.unmet_consumption_wh += e.unmet_consumption_wh;
    if (sustainability_violated(action[i], e)) {
      out.sustainability_violation[i] = true;
      out.parts.r1 += rw.penalty_sustainability;
    }
    switch (action[i]) {
      case Level::Ground: ++out.n_gnd; break;
      case Level::Serving: ++out.n_srv; break;
      case Level::Charging: ++out.n_chg; break;
    }
  }

  out.users = scenario_.users_at(t);
  out.served_users = map_.served(t, out.n_srv);
  if (!meets_service_rate(t, out.served_users)) {
    out.service_violation = true;
    out.parts.r1 += rw.penalty_service;
  }
  out.parts.r2 = service_reward(t, out.n_srv);
  out.parts.r3 = mode(t) == BeneficialMode::Landing ? rw.ground_coeff * out.n_gnd : rw.charge_coeff * out.n_chg;
  out.reward = out.parts.r1 + out.parts.r2 + out.parts.r3;
  return out;
}

JointAction ProfilePolicy::act(const EnvState& state) const {
  return profile_.at(static_cast<std::size_t>(state.t));
}

std::vector<JointAction> EpisodeTrace::profile() const {
  std::vector<JointAction> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.action);
  return out;
}

EpisodeTrace rollout(const Policy& policy, const Environment& env, const std::optional<EnvState>& initial) {
  EpisodeTrace trace;
  trace.initial = initial.value_or(env.reset());
  EnvState state = trace.initial;
  while (state.t < env.horizon()) {
    TraceStep step;
    step.t = state.t;
    step.action = policy.act(state);
    step.outcome = env.step(state, step.action);
    trace.total_return += step.outcome.reward;
    state = step.outcome.next;
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

void write_trace_csv(const EpisodeTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  const std::size_t n = trace.initial.fleet_size();
  out << "t";
  for (std::size_t i = 0; i < n; ++i) out << ",a_" << i;
  for (std::size_t i = 0; i < n; ++i) out << ",residue_" << i;
  out << ",n_srv,served_users,r1,r2,r3,E_h,E_c\n";
  out << std::setprecision(10);
  for (const auto& s : trace.steps) {
    out << s.t;
    for (Level a : s.action) out << ',' << code(a);
    for (double r : s.outcome.next.residue_wh) out << ',' << r;
    out << ',' << s.outcome.n_srv << ',' << s.outcome.served_users << ',' << s.outcome.parts.r1 << ','
        << s.outcome.parts.r2 << ',' << s.outcome.parts.r3 << ',' << s.outcome.harvested_wh << ','
        << s.outcome.consumed_wh << '\n';
  }
}

void write_profile_csv(const std::vector<JointAction>& profile, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  const std::size_t n = profile.empty() ? 0 : profile.front().size();
  out << "t";
  for (std::size_t i = 0; i < n; ++i) out << ",a_" << i;
  out << '\n';
  for (std::size_t t = 0; t < profile.size(); ++t) {
    out << t;
    for (Level a : profile[t]) out << ',' << code(a);
    out << '\n';
  }
}

std::vector<JointAction> read_profile_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open profile " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("t", 0) != 0) throw InputError(path.string() + ": missing header");
  std::vector<JointAction> profile;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    if (std::stoi(cell) != static_cast<int>(profile.size())) {
      throw InputError(path.string() + ": rows out of order at line " + std::to_string(line_no));
    }
    JointAction a;
    while (std::getline(ls, cell, ',')) a.push_back(level_from_code(std::stoi(cell)));
    profile.push_back(std::move(a));
  }
  return profile;
}

}  // namespace sunfleet
