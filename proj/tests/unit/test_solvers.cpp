#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "sunfleet/baseline.hpp"
#include "sunfleet/error.hpp"
#include "sunfleet/evaluation.hpp"
#include "sunfleet/oracle.hpp"

using namespace sunfleet;

namespace {

// A hand-made map: n serving UAVs reach min(users, n * users * 0.6).
Environment hand_env(int fleet, int horizon, int start_hour = -1) {
  Scenario s = default_scenario(fleet, horizon);
  if (start_hour >= 0) {
    s.start_hour = start_hour;
    s.demand = default_demand_profile(24);
    std::rotate(s.demand.begin(), s.demand.begin() + start_hour, s.demand.end());
    s.demand.resize(static_cast<std::size_t>(horizon));
  }
  CoverageMap m(horizon, fleet);
  for (int t = 0; t < horizon; ++t) {
    for (int n = 1; n <= fleet; ++n) {
      m.set_served(t, n, std::min(s.users_at(t), static_cast<int>(n * s.users_at(t) * 0.6)));
    }
  }
  return Environment(s, m);
}

std::vector<JointAction> random_profile(int fleet, int horizon, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> c(0, 2);
  std::vector<JointAction> p(static_cast<std::size_t>(horizon));
  for (auto& a : p) {
    for (int i = 0; i < fleet; ++i) a.push_back(level_from_code(c(rng)));
  }
  return p;
}

}  // namespace

TEST(Exhaustive, NightWithoutUsersLands) {
  Scenario s = default_scenario(1, 1);
  s.start_hour = 2;
  s.demand[0].n_users = 0;
  const Environment env(s, CoverageMap(1, 1));
  const auto res = exhaustive_oracle(env);
  ASSERT_EQ(res.profile.size(), 1u);
  EXPECT_EQ(res.profile[0], JointAction{Level::Ground});
  EXPECT_EQ(res.value, s.reward.ground_coeff);
}

TEST(Exhaustive, ServingWinsWhenItPaysMoreThanCharging) {
  Scenario s = default_scenario(1, 2);
  s.start_hour = 11;
  s.demand[0].n_users = s.demand[1].n_users = 40;
  s.p_min = 0.0;
  CoverageMap m(2, 1);
  m.set_served(0, 1, 40);
  m.set_served(1, 1, 40);
  const Environment env(s, m);
  const auto res = exhaustive_oracle(env);
  EXPECT_EQ(res.profile[0], JointAction{Level::Serving});
  EXPECT_EQ(res.profile[1], JointAction{Level::Serving});
  EXPECT_EQ(res.value, 80.0);

  // A served user worth less than the charging bonus flips the decision.
  m.set_served(0, 1, 1);
  m.set_served(1, 1, 1);
  s.demand[0].n_users = s.demand[1].n_users = 1;
  const auto res2 = exhaustive_oracle(Environment(s, m));
  EXPECT_EQ(res2.profile[1], JointAction{Level::Charging});
}

TEST(Exhaustive, BeatsEveryHandWrittenProfile) {
  const auto env = hand_env(2, 5);
  const auto best = exhaustive_oracle(env);
  EXPECT_DOUBLE_EQ(best.value, best.true_return());
  std::mt19937_64 rng(3);
  for (int k = 0; k < 300; ++k) {
    const auto tr = rollout(ProfilePolicy(random_profile(2, 5, rng)), env);
    EXPECT_LE(tr.total_return, best.value);
  }
  const auto greedy = greedy_baseline(env);
  EXPECT_LE(greedy.trace.total_return, best.value);
}

TEST(Exhaustive, SizeLimits) {
  EXPECT_THROW(exhaustive_oracle(hand_env(3, 2)), SizeError);
  EXPECT_THROW(exhaustive_oracle(hand_env(1, 9)), SizeError);
  EXPECT_THROW(exhaustive_oracle(hand_env(2, 8)), SizeError);
}

TEST(Dp, MatchesExhaustiveOnSmallInstance) {
  const auto env = hand_env(2, 6);
  const auto exact = exhaustive_oracle(env);
  const auto dp = dp_oracle(env, 601);
  EXPECT_LE(dp.value, exact.value + 1e-9);
  EXPECT_LE(std::abs(dp.true_return() - exact.value), 0.02 * std::abs(exact.value));
}

TEST(Dp, SingleUavDayIsSelfConsistent) {
  const auto env = hand_env(1, 24);
  const auto dp = dp_oracle(env, 200);
  ASSERT_EQ(dp.profile.size(), 24u);
  EXPECT_GE(dp.true_return(), dp.value - 1e-9);
  EXPECT_LE(std::abs(dp.true_return() - dp.value), 0.02 * std::abs(dp.value));
}

// With a 1 Wh battery every reachable residue is either empty or full, so a
// two-level grid is exact and the value equals the replayed return.
TEST(Dp, ExactGridValueEqualsReplay) {
  Scenario s = default_scenario(2, 24);
  s.physics.battery_capacity_wh = 1.0;
  CoverageMap m(24, 2);
  for (int t = 0; t < 24; ++t) {
    m.set_served(t, 1, s.users_at(t) / 2);
    m.set_served(t, 2, s.users_at(t));
  }
  const Environment env(s, m);
  const auto dp = dp_oracle(env, 2);
  for (const auto& st : dp.trace.steps) {
    for (double r : st.outcome.next.residue_wh) ASSERT_TRUE(r == 0.0 || r == 1.0) << r;
  }
  EXPECT_DOUBLE_EQ(dp.value, dp.true_return());
}

TEST(Dp, CoarserGridsNeverIncreaseValue) {
  const auto env = hand_env(2, 24);
  double previous = std::numeric_limits<double>::infinity();
  for (int bins : {201, 101, 51, 26}) {
    const auto dp = dp_oracle(env, bins);
    EXPECT_LE(dp.value, previous + 1e-9) << bins;
    previous = dp.value;
  }
}

TEST(Dp, LowerBoundsExactOptimum) {
  const auto env = hand_env(1, 8, 8);
  const auto exact = exhaustive_oracle(env);
  for (int bins : {5, 20, 100}) EXPECT_LE(dp_oracle(env, bins).value, exact.value + 1e-9);
}

TEST(Dp, Limits) {
  EXPECT_THROW(dp_oracle(hand_env(4, 2), 10), SizeError);
  EXPECT_THROW(dp_oracle(hand_env(3, 24), 2000), SizeError);
  EXPECT_THROW(dp_oracle(hand_env(1, 2), 1), InputError);
}

TEST(Greedy, ZeroUserHourFollowsMode) {
  Scenario s = default_scenario(3, 24);
  s.demand[3].n_users = 0;
  s.demand[12].n_users = 0;
  CoverageMap m(24, 3);
  for (int t = 0; t < 24; ++t) {
    for (int n = 1; n <= 3; ++n) m.set_served(t, n, std::min(s.users_at(t), n * 40));
  }
  const Environment env(s, m);
  const GreedyPolicy g(env);
  EXPECT_EQ(g.required_serving(3), 0);
  EnvState st = env.reset();
  st.t = 3;
  EXPECT_EQ(g.act(st), JointAction(3, Level::Ground));
  st.t = 12;
  EXPECT_EQ(g.act(st), JointAction(3, Level::Charging));
}

TEST(Greedy, PicksMinimalCountFromFullestEligibleUavs) {
  const auto env = hand_env(3, 24);
  const GreedyPolicy g(env);
  EnvState st = env.reset(std::vector<double>{300, 590, 450});
  st.t = 12;
  const int need = g.required_serving(12);
  ASSERT_EQ(need, 2);
  EXPECT_EQ(g.act(st), (JointAction{Level::Charging, Level::Serving, Level::Serving}));
  for (int n = 0; n <= 3; ++n) {
    EXPECT_EQ(env.meets_service_rate(12, env.coverage_map().served(12, n)), n >= need);
  }
  // A UAV that would end the hour below its climb reserve is skipped.
  st.residue_wh = {300, 590, 60};
  EXPECT_FALSE(g.eligible(st, 2));
  EXPECT_EQ(g.act(st), (JointAction{Level::Serving, Level::Serving, Level::Charging}));
}

TEST(Greedy, MeetsServiceRateWhenFeasible) {
  for (int fleet : {2, 3, 4}) {
    const auto env = hand_env(fleet, 24);
    const auto res = greedy_baseline(env);
    ASSERT_EQ(res.profile.size(), 24u);
    const auto met = res.service_met();
    for (int t = 0; t < 24; ++t) {
      const auto& o = res.trace.steps[static_cast<std::size_t>(t)].outcome;
      EXPECT_EQ(met[static_cast<std::size_t>(t)], !o.service_violation);
      if (!res.infeasible[static_cast<std::size_t>(t)]) EXPECT_FALSE(o.service_violation) << fleet << ' ' << t;
    }
  }
}

TEST(Evaluation, DeterministicPolicyMetrics) {
  const auto env = hand_env(3, 24);
  const GreedyPolicy g(env);
  const auto m = evaluate(g, env, 4);
  ASSERT_EQ(m.episodes.size(), 4u);
  EXPECT_EQ(m.return_variance, 0.0);
  EXPECT_EQ(m.mean_return, m.min_return);
  const auto tr = rollout(g, env);
  EXPECT_EQ(m.mean_return, tr.total_return);
  double harvested = 0, consumed = 0;
  for (const auto& st : tr.steps) harvested += st.outcome.harvested_wh, consumed += st.outcome.consumed_wh;
  EXPECT_NEAR(m.episodes[0].energy.harvested_wh, harvested, 1e-9);
  EXPECT_NEAR(m.episodes[0].energy.consumed_wh, consumed, 1e-9);
  EXPECT_NEAR(m.energy.net_loss_wh(), 4 * (consumed - harvested), 1e-6);
  for (int t = 1; t < 24; ++t) EXPECT_GE(m.cumulative_served[static_cast<std::size_t>(t)], m.cumulative_served[static_cast<std::size_t>(t - 1)]);
  for (int t = 0; t < 24; ++t) {
    const auto& h = m.n_srv_histogram[static_cast<std::size_t>(t)];
    EXPECT_EQ(h[static_cast<std::size_t>(tr.steps[static_cast<std::size_t>(t)].outcome.n_srv)], 4);
  }
}

TEST(Evaluation, CsvShapes) {
  const auto env = hand_env(2, 24);
  const auto m = evaluate(GreedyPolicy(env), env, 3);
  const auto dir = std::filesystem::temp_directory_path() / "sunfleet_tests";
  std::filesystem::create_directories(dir);
  write_episode_metrics_csv(m, dir / "episodes.csv");
  write_hourly_metrics_csv(m, env, dir / "hourly.csv");
  auto count_rows = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    int n = -1;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
  };
  EXPECT_EQ(count_rows(dir / "episodes.csv"), 3);
  EXPECT_EQ(count_rows(dir / "hourly.csv"), 24);
}
