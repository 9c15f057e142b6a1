// Acceptance gate: one PASS/FAIL line per criterion.
//
//   sunfleet_acceptance fast       criteria 1-9 and 13 (seconds to minutes)
//   sunfleet_acceptance learning   criteria 10-12 (trains the desk scenario)
//   sunfleet_acceptance all
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sunfleet/baseline.hpp"
#include "sunfleet/coverage_map.hpp"
#include "sunfleet/ddpg.hpp"
#include "sunfleet/error.hpp"
#include "sunfleet/evaluation.hpp"
#include "sunfleet/oracle.hpp"

using namespace sunfleet;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// --- independent reference models -------------------------------------------

// Rotorcraft power law with the default airframe (4 rotors of radius 0.3 m).
double ref_kinematic(double v_lv, double v_vt) {
  const double W = 49.0, rho = 1.225, A = 4.0 * std::numbers::pi * 0.3 * 0.3;
  const double Vh = std::sqrt(W / (2.0 * rho * A));
  const double induced = W * W / (std::numbers::sqrt2 * rho * A) /
                         std::sqrt(v_lv * v_lv + std::sqrt(std::pow(v_lv, 4) + 4.0 * std::pow(Vh, 4)));
  const double drag = 0.125 * 5e-4 * rho * 0.056 * A * std::pow(150.0, 3);
  return std::max(0.0, induced + W * v_vt + drag);
}

// Served-user test of the admission inequality with an independently coded link budget.
double ref_rate(const Point& user, std::size_t server, const Placement& pl, int rbs, const RadioParams& r) {
  auto gain = [&](const Point& uav) {
    const double d = std::sqrt(std::pow(uav.x - user.x, 2) + std::pow(uav.y - user.y, 2) +
                               r.serve_altitude_m * r.serve_altitude_m);
    const double pl_db = 20.0 * std::log10(4.0 * std::numbers::pi * r.carrier_hz * d / 299792458.0) + r.los_excess_db;
    return std::pow(10.0, -pl_db / 20.0);
  };
  double interference = 0.0;
  for (std::size_t j = 0; j < pl.size(); ++j) {
    if (j == server) continue;
    if (std::hypot(pl.positions[j].x - user.x, pl.positions[j].y - user.y) <= r.coverage_radius_m) {
      interference += r.tx_psd_w_per_hz * gain(pl.positions[j]);
    }
  }
  const double s = r.tx_psd_w_per_hz * gain(pl.positions[server]) / (r.noise_psd_w_per_hz + interference);
  return rbs * r.rb_bandwidth_hz * std::log2(1.0 + s);
}

UserField random_field(int users, std::uint64_t seed) {
  const Scenario s = default_scenario();
  HourlyDemand d = s.demand[12];
  d.n_users = users;
  return generate_users(d, s.area, seed);
}

std::vector<JointAction> random_profile(int fleet, int horizon, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> c(0, 2);
  std::vector<JointAction> p(static_cast<std::size_t>(horizon));
  for (auto& a : p) {
    for (int i = 0; i < fleet; ++i) a.push_back(level_from_code(c(rng)));
  }
  return p;
}

// --- fast criteria -----------------------------------------------------------

Verdict solar_exactness() {
  const SolarParams s;
  double worst = std::abs(solar_intensity(12, s) - 2000.0);
  for (int t = 0; t <= 23; ++t) {
    if (t <= 6 || t >= 18) worst = std::max(worst, std::abs(solar_intensity(t, s)));
  }
  return {worst <= 1e-9, fmt("max deviation %.3g W/m^2 (tol 1e-9)", worst)};
}

Verdict harvest_continuity() {
  const SolarParams s;
  const double k = s.intensity_threshold;
  const double quadratic = harvest_power(std::nextafter(k, 0.0), s);
  const double linear = harvest_power(k, s);
  const double tol = 1e-9 * s.panel_area_m2 * s.efficiency * k;
  const double gap = std::abs(quadratic - linear);
  return {gap <= tol, fmt("branch gap %.3g W (tol %.3g)", gap, tol)};
}

Verdict energy_oracle() {
  const PhysicsParams p;
  const double pts[3][2] = {{0, 0}, {0, 4}, {6, 0}};
  double worst = 0.0;
  std::string values;
  for (const auto& v : pts) {
    const double got = kinematic_power(v[0], v[1], p);
    worst = std::max(worst, rel_err(got, ref_kinematic(v[0], v[1])));
    values += fmt(" %.2f", got);
  }
  return {worst <= 1e-9, fmt("hover/climb/level W:%s, max rel err %.3g (tol 1e-9)", values.c_str(), worst)};
}

Verdict min_energy_values() {
  const PhysicsParams p;
  const Altitudes alt;
  const double climb_total = ref_kinematic(0, 4) + 5.0;
  const double expect[3] = {1400.0 / 4.0 * climb_total / 3600.0, 1100.0 / 4.0 * climb_total / 3600.0, 0.0};
  double worst = 0.0;
  std::string values;
  for (int a = 0; a < 3; ++a) {
    const double got = min_energy(static_cast<Level>(a), p, alt);
    worst = std::max(worst, a == 2 ? std::abs(got) : rel_err(got, expect[a]));
    values += fmt(" %.2f", got);
  }
  return {worst <= 1e-6, fmt("E_min Wh:%s, max rel err %.3g (tol 1e-6)", values.c_str(), worst)};
}

Verdict ledger_closure() {
  const Scenario s = default_scenario(3, 24);
  CoverageMap m(24, 3);
  for (int t = 0; t < 24; ++t) {
    for (int n = 1; n <= 3; ++n) m.set_served(t, n, std::min(s.users_at(t), n * s.users_at(t) / 2));
  }
  const Environment env(s, m);
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto tr = rollout(ProfilePolicy(random_profile(3, 24, rng)), env);
    double flow = 0.0, discarded = 0.0, unmet = 0.0, scale = 0.0;
    for (const auto& st : tr.steps) {
      flow += st.outcome.harvested_wh - st.outcome.consumed_wh;
      discarded += st.outcome.discarded_harvest_wh;
      unmet += st.outcome.unmet_consumption_wh;
      scale += st.outcome.harvested_wh + st.outcome.consumed_wh;
    }
    double delta = 0.0;
    for (int i = 0; i < 3; ++i) delta += tr.steps.back().outcome.next.residue_wh[i] - tr.initial.residue_wh[i];
    worst = std::max(worst, std::abs(flow - (delta + discarded - unmet)) / std::max(scale, 1.0));
  }
  return {worst <= 1e-6, fmt("1000 sequences, max relative imbalance %.3g (tol 1e-6)", worst)};
}

Verdict association_soundness() {
  const RadioParams r;
  const Area area;
  int admitted = 0, bad = 0, over = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const UserField users = random_field(50, seed);
    const int n = 1 + static_cast<int>(seed % 3);
    const Placement pl = optimize_placement(users, n, r, area, seed).placement;
    const Association a = associate_users(pl, users, r);
    std::vector<int> used(pl.size(), 0);
    for (std::size_t u = 0; u < users.positions.size(); ++u) {
      const int srv = a.server[u];
      if (srv == Association::kUnassigned) continue;
      ++admitted;
      const auto s = static_cast<std::size_t>(srv);
      const bool inside = std::hypot(pl.positions[s].x - users.positions[u].x,
                                     pl.positions[s].y - users.positions[u].y) <= r.coverage_radius_m;
      if (!inside || ref_rate(users.positions[u], s, pl, a.rbs[u], r) < users.rate_bps) ++bad;
      used[s] += a.rbs[u];
    }
    for (std::size_t s = 0; s < pl.size(); ++s) over += used[s] > r.rbs_per_uav || used[s] != a.rb_used[s];
  }
  return {bad == 0 && over == 0 && admitted > 0,
          fmt("%d admitted users re-verified, %d violations, %d RB budget breaches", admitted, bad, over)};
}

Verdict placement_vs_oracle() {
  const RadioParams r;
  const Area area;
  double worst = 1e9;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const UserField users = random_field(30, 100 + seed);
    for (int n : {1, 2}) {
      const int exact = brute_force_placement(users, n, n == 1 ? 10.0 : 50.0, r, area);
      const int got = optimize_placement(users, n, r, area, seed).served;
      worst = std::min(worst, exact == 0 ? 1.0 : static_cast<double>(got) / exact);
    }
  }
  return {worst >= 0.9, fmt("worst optimized/brute-force ratio %.3f over 20 cases (need >= 0.9)", worst)};
}

Verdict map_monotonicity() {
  const int fleets[5] = {2, 3, 3, 4, 5};
  int breaches = 0;
  for (int k = 0; k < 5; ++k) {
    const Scenario s = default_scenario(fleets[k], 24);
    const CoverageMap m = build_coverage_map(s, static_cast<std::uint64_t>(k + 1));
    for (int t = 0; t < s.horizon; ++t) {
      for (int n = 1; n <= s.fleet_size; ++n) {
        breaches += m.served(t, n) < m.served(t, n - 1) || m.served(t, n) > s.users_at(t);
      }
      breaches += m.served(t, 0) != 0;
    }
  }
  return {breaches == 0, fmt("5 scenarios, %d breaches", breaches)};
}

Verdict cross_oracle() {
  const Scenario s = default_scenario(2, 6);
  const Environment env(s, build_coverage_map(s, 1));
  const auto exact = exhaustive_oracle(env);
  const auto dp = dp_oracle(env, 601);
  const double gap = std::abs(dp.true_return() - exact.value) / std::max(std::abs(exact.value), 1e-9);
  return {gap <= 0.02, fmt("exhaustive %.2f, dp (601 bins) replayed %.2f, gap %.2f%% (tol 2%%)", exact.value,
                           dp.true_return(), 100 * gap)};
}

Verdict gradient_sanity() {
  const Scenario s = default_scenario(3, 24);
  const Environment env(s, build_coverage_map(s, 1));
  DdpgHyper h;
  h.hidden = {32, 32};
  h.batch_size = 64;
  h.replay_capacity = 10'000;
  DdpgTrainer tr(env, h, 7);
  for (int k = 0; k < 6; ++k) tr.run_episode();
  std::mt19937_64 rng(13);
  const auto batch = tr.buffer().sample(64, rng);
  nn::Gradients g;
  tr.critic_loss(batch, &g);
  auto& layers = tr.critic().layers();
  std::uniform_int_distribution<std::size_t> pick_layer(0, layers.size() - 1);
  int checked = 0, bad = 0;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t l = pick_layer(rng);
    const bool bias = k % 4 == 3;
    double* param = bias ? layers[l].bias.data() : layers[l].weight.data();
    const double* grad = bias ? g.bias[l].data() : g.weight[l].data();
    const Eigen::Index size = bias ? layers[l].bias.size() : layers[l].weight.size();
    const auto i = std::uniform_int_distribution<Eigen::Index>(0, size - 1)(rng);
    const double orig = param[i], step = 1e-6;
    param[i] = orig + step;
    const double up = tr.critic_loss(batch, nullptr);
    param[i] = orig - step;
    const double down = tr.critic_loss(batch, nullptr);
    param[i] = orig;
    const double fd = (up - down) / (2 * step), an = grad[i];
    const double scale = std::max(std::abs(an), std::abs(fd));
    const double err = std::abs(an - fd);
    // An absolute floor keeps coordinates with a vanishing gradient from dividing by zero.
    if (err > 1e-3 * scale + 1e-9) ++bad;
    if (scale > 1e-6) worst = std::max(worst, err / scale);
    ++checked;
  }
  return {bad == 0, fmt("%d coordinates, %d mismatches, max rel err %.3g (tol 1e-3)", checked, bad, worst)};
}

// --- learning criteria -------------------------------------------------------

// Desk-scale learner: smaller networks and batches than the full-size
// defaults so three seeds train in minutes on one core.
DdpgHyper desk_hyper() {
  DdpgHyper h;
  h.hidden = {64, 64};
  h.batch_size = 128;
  h.actor_lr = 1e-3;
  h.critic_lr = 1e-3;
  h.tau = 5e-3;
  h.replay_capacity = 200'000;
  h.max_episodes = 5000;
  h.eval_every = 1;
  return h;
}

struct Run {
  TrainingResult result;
  EvaluationMetrics metrics;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return v.size() > 1 ? s / static_cast<double>(v.size() - 1) : 0.0;
}

Run train_seed(const Environment& env, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  Run run{train_ddpg(env, desk_hyper(), seed), {}};
  run.metrics = evaluate(run.result.policy, env, 1);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << fmt("  seed %llu: best evaluation %.1f at episode %d (%.0f s)\n", static_cast<unsigned long long>(seed),
                   run.result.log.best_evaluation_return, run.result.log.best_episode, secs);
  return run;
}

struct LearningVerdicts {
  Verdict efficacy, compliance, trend;
};

LearningVerdicts learning(const std::string& desk_path) {
  const Scenario desk = load_scenario(desk_path);
  const Environment env(desk, build_coverage_map(desk, desk.seed));
  // Finest grid inside the solver's budget for three UAVs.
  const double dp = dp_oracle(env, 75).true_return();
  const GreedyResult greedy = greedy_baseline(env);
  const double greedy_return = greedy.trace.total_return;
  std::cerr << fmt("  desk scenario: dp %.1f, greedy %.1f\n", dp, greedy_return);

  const std::uint64_t seeds[3] = {1, 2, 3};
  std::vector<Run> runs;
  for (auto seed : seeds) runs.push_back(train_seed(env, seed));

  LearningVerdicts v;
  {
    std::vector<double> best;
    bool rising = true;
    for (const auto& r : runs) {
      best.push_back(r.result.log.best_evaluation_return);
      const auto& ep = r.result.log.episodes;
      const std::size_t q = ep.size() / 4;
      double first = 0, last = 0;
      for (std::size_t i = 0; i < q; ++i) first += ep[i].moving_average, last += ep[ep.size() - q + i].moving_average;
      rising = rising && q > 0 && last > first;
    }
    const double med = median(best);
    const bool ok = med >= 0.95 * dp && med >= greedy_return && rising;
    v.efficacy = {ok, fmt("median best %.1f vs dp %.1f (ratio %.3f, need >= 0.95) and greedy %.1f; moving average "
                          "rises in every seed: %s",
                          med, dp, med / dp, greedy_return, rising ? "yes" : "no")};
  }
  {
    const auto met = greedy.service_met();
    int sustain = 0, service = 0, hours = 0;
    for (const auto& r : runs) {
      for (const auto& st : r.metrics.first_trace.steps) {
        const auto& o = st.outcome;
        sustain += o.sustainability_violations();
        if (met[static_cast<std::size_t>(st.t)]) {
          ++hours;
          service += !env.meets_service_rate(st.t, o.served_users);
        }
      }
    }
    v.compliance = {sustain == 0 && service == 0,
                    fmt("3 trained policies: %d sustainability violations, %d of %d greedy-feasible hours below p_min",
                        sustain, service, hours)};
  }
  {
    Scenario halved = desk;
    halved.reward.ground_coeff *= 0.5;
    halved.reward.charge_coeff *= 0.5;
    const Environment env_half(halved, env.coverage_map());
    std::vector<double> base, half;
    for (const auto& r : runs) base.push_back(r.metrics.mean_serving_uavs());
    for (auto seed : seeds) half.push_back(train_seed(env_half, seed).metrics.mean_serving_uavs());
    const double noise = 2.0 * std::sqrt(sample_var(base) / 3.0 + sample_var(half) / 3.0);
    const double mb = median(base), mh = median(half);
    v.trend = {mh >= mb - noise, fmt("median mean hourly serving UAVs: halved %.3f vs default %.3f, noise margin %.3f",
                                     mh, mb, noise)};
  }
  return v;
}

void report(int id, const char* name, const Verdict& v, int& failures) {
  std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name << " - " << v.detail << std::endl;
  failures += !v.pass;
}

void run_guarded(int id, const char* name, const std::function<Verdict()>& f, int& failures) {
  Verdict v;
  try {
    v = f();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  report(id, name, v, failures);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string group = argc > 1 ? argv[1] : "fast";
  const std::string desk = argc > 2 ? argv[2] : SUNFLEET_DESK_SCENARIO;
  if (group != "fast" && group != "learning" && group != "all") {
    std::cerr << "usage: sunfleet_acceptance [fast|learning|all] [desk-scenario.yaml]\n";
    return 2;
  }
  int failures = 0;
  if (group != "learning") {
    run_guarded(1, "solar model exactness", solar_exactness, failures);
    run_guarded(2, "harvest continuity", harvest_continuity, failures);
    run_guarded(3, "energy oracle agreement", energy_oracle, failures);
    run_guarded(4, "minimum energy values", min_energy_values, failures);
    run_guarded(5, "ledger closure", ledger_closure, failures);
    run_guarded(6, "association soundness", association_soundness, failures);
    run_guarded(7, "placement vs brute force", placement_vs_oracle, failures);
    run_guarded(8, "coverage map monotonicity", map_monotonicity, failures);
    run_guarded(9, "cross-oracle optimality", cross_oracle, failures);
    run_guarded(13, "critic gradient sanity", gradient_sanity, failures);
  }
  if (group != "fast") {
    LearningVerdicts v;
    try {
      v = learning(desk);
    } catch (const std::exception& e) {
      const Verdict bad{false, std::string("exception: ") + e.what()};
      v = {bad, bad, bad};
    }
    report(10, "learning efficacy", v.efficacy, failures);
    report(11, "constraint compliance", v.compliance, failures);
    report(12, "coefficient trend", v.trend, failures);
  }
  return failures == 0 ? 0 : 1;
}
