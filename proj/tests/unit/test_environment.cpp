#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "sunfleet/environment.hpp"
#include "sunfleet/error.hpp"

using namespace sunfleet;

namespace {

// Default 24-hour day with a hand-made map: n serving UAVs reach
// min(users, n * users / 2) users.
Environment make_env(int fleet = 3) {
  Scenario s = default_scenario(fleet, 24);
  CoverageMap m(24, fleet);
  for (int t = 0; t < 24; ++t) {
    for (int n = 1; n <= fleet; ++n) m.set_served(t, n, std::min(s.users_at(t), n * s.users_at(t) / 2));
  }
  return Environment(s, m);
}

JointAction uniform(int n, Level l) { return JointAction(static_cast<std::size_t>(n), l); }

double climb_reserve_ground() {
  const double W = 49.0, rho = 1.225, A = 4.0 * std::numbers::pi * 0.09;
  const double vh = std::sqrt(W / (2.0 * rho * A));
  const double climb = W * W / (std::sqrt(2.0) * rho * A) / std::sqrt(2.0 * vh * vh) + W * 4.0 +
                       0.125 * 5e-4 * rho * 0.056 * A * std::pow(150.0, 3) + 5.0;
  return 1400.0 / 4.0 * climb / 3600.0;
}

}  // namespace

TEST(Reset, Defaults) {
  const auto env = make_env();
  const auto s = env.reset();
  EXPECT_EQ(s.t, 0);
  EXPECT_EQ(s.residue_wh, std::vector<double>(3, 600.0));
  EXPECT_EQ(s.level, std::vector<Level>(3, Level::Ground));
}

TEST(Reset, CustomResiduesAndErrors) {
  const auto env = make_env();
  EXPECT_EQ(env.reset(std::vector<double>{1, 2, 3}).residue_wh, (std::vector<double>{1, 2, 3}));
  EXPECT_THROW(env.reset(std::vector<double>{700, 1, 1}), InputError);
  EXPECT_THROW(env.reset(std::vector<double>{-1, 1, 1}), InputError);
  EXPECT_THROW(env.reset(std::vector<double>{1, 1}), InputError);
}

TEST(Step, OvernightGrounded) {
  const auto env = make_env();
  EnvState s = env.reset();
  s.t = 2;
  const auto out = env.step(s, uniform(3, Level::Ground));
  EXPECT_EQ(env.mode(2), BeneficialMode::Landing);
  EXPECT_EQ(out.parts.r3, 3.0 * env.scenario().reward.ground_coeff);
  EXPECT_EQ(out.parts.r2, 0.0);
  ASSERT_GT(env.scenario().users_at(2), 0);
  EXPECT_TRUE(out.service_violation);
  EXPECT_EQ(out.parts.r1, env.scenario().reward.penalty_service);
  EXPECT_EQ(out.reward, out.parts.r1 + out.parts.r2 + out.parts.r3);
  EXPECT_EQ(out.next.t, 3);
}

TEST(Step, SustainabilityBoundary) {
  const auto env = make_env();
  const double reserve = climb_reserve_ground();
  EXPECT_NEAR(env.min_energy(Level::Ground), reserve, 1e-9);
  const double eps = 1e-6;
  // A grounded hour costs exactly the 5 W static draw.
  const auto below = env.step(env.reset(std::vector<double>{reserve + 5.0 - eps, 600, 600}), uniform(3, Level::Ground));
  EXPECT_EQ(below.sustainability_violations(), 1);
  EXPECT_TRUE(below.sustainability_violation[0]);
  const auto above = env.step(env.reset(std::vector<double>{reserve + 5.0 + eps, 600, 600}), uniform(3, Level::Ground));
  EXPECT_EQ(above.sustainability_violations(), 0);
  EXPECT_EQ(below.parts.r1 - above.parts.r1, env.scenario().reward.penalty_sustainability);
}

TEST(Step, EmptiedBatteryAtChargingAltitudeViolates) {
  const auto env = make_env();
  EnvState st = env.reset(std::vector<double>{10, 600, 600});
  st.level = uniform(3, Level::Charging);
  const auto out = env.step(st, uniform(3, Level::Charging));
  EXPECT_EQ(env.min_energy(Level::Charging), 0.0);
  EXPECT_EQ(out.next.residue_wh[0], 0.0);
  EXPECT_GT(out.unmet_consumption_wh, 0.0);
  EXPECT_EQ(out.sustainability_violations(), 1);
  EXPECT_TRUE(out.sustainability_violation[0]);
}

TEST(Step, OverProvisioningCapped) {
  Scenario s = default_scenario(3, 1);
  s.demand[0].n_users = 10;
  CoverageMap m(1, 3);
  m.set_served(0, 1, 7);
  m.set_served(0, 2, 10);
  m.set_served(0, 3, 10);
  const Environment env(s, m);
  EnvState st = env.reset();
  const auto two = env.step(st, {Level::Serving, Level::Serving, Level::Ground});
  const auto three = env.step(st, uniform(3, Level::Serving));
  EXPECT_EQ(two.parts.r2, 10.0);
  EXPECT_EQ(three.parts.r2, 10.0);
  EXPECT_EQ(env.service_reward(0, 1), 7.0);
  EXPECT_FALSE(two.service_violation);
}

TEST(Step, Errors) {
  const auto env = make_env();
  EXPECT_THROW(env.step(env.reset(), uniform(2, Level::Ground)), InputError);
  EnvState s = env.reset();
  s.t = 24;
  EXPECT_THROW(env.step(s, uniform(3, Level::Ground)), InputError);
}

TEST(Step, Deterministic) {
  const auto env = make_env();
  EnvState s = env.reset(std::vector<double>{300, 200, 100});
  s.t = 11;
  s.level = {Level::Serving, Level::Charging, Level::Ground};
  const JointAction a{Level::Charging, Level::Serving, Level::Serving};
  EXPECT_EQ(env.step(s, a), env.step(s, a));
}

TEST(BeneficialMode, NoonChargesNightLands) {
  const auto env = make_env();
  EXPECT_EQ(env.mode(12), BeneficialMode::Charging);
  EXPECT_EQ(env.mode(22), BeneficialMode::Landing);
  int switches = 0;
  for (int t = 1; t < 24; ++t) switches += env.mode(t) != env.mode(t - 1);
  EXPECT_EQ(switches, 2);
  for (int t = 0; t < 24; ++t) {
    const bool expect = 0.25 * std::max(0.0, 2000.0 * (-t * t / 36.0 + 2.0 * t / 3.0 - 3.0)) > 227.53;
    EXPECT_EQ(env.mode(t) == BeneficialMode::Charging, expect) << t;
  }
}

TEST(Rollout, AllGroundHarvestsNothing) {
  const auto env = make_env();
  const ProfilePolicy ground(std::vector<JointAction>(24, uniform(3, Level::Ground)));
  const auto tr = rollout(ground, env);
  ASSERT_EQ(tr.steps.size(), 24u);
  double sum = 0.0, harvested = 0.0;
  for (const auto& st : tr.steps) {
    sum += st.outcome.reward;
    harvested += st.outcome.harvested_wh;
  }
  EXPECT_EQ(harvested, 0.0);
  EXPECT_DOUBLE_EQ(sum, tr.total_return);
}

TEST(Rollout, RandomSequencesSatisfyInvariants) {
  const auto env = make_env();
  const auto& rw = env.scenario().reward;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int ep = 0; ep < 200; ++ep) {
    std::vector<JointAction> profile(24);
    for (auto& a : profile) {
      for (int i = 0; i < 3; ++i) a.push_back(level_from_code(pick(rng)));
    }
    const auto tr = rollout(ProfilePolicy(profile), env);
    double net = 0.0, scale = 0.0;
    for (const auto& st : tr.steps) {
      const auto& o = st.outcome;
      ASSERT_EQ(o.reward, o.parts.r1 + o.parts.r2 + o.parts.r3);
      ASSERT_LE(o.parts.r2, env.scenario().users_at(st.t));
      ASSERT_GE(o.parts.r3, 0.0);
      const double landing = rw.ground_coeff * o.n_gnd, charging = rw.charge_coeff * o.n_chg;
      ASSERT_EQ(o.parts.r3, env.mode(st.t) == BeneficialMode::Landing ? landing : charging);
      if (o.n_srv == 0 && env.scenario().users_at(st.t) > 0) {
        ASSERT_EQ(o.parts.r2, 0.0);
        ASSERT_TRUE(o.service_violation);
      }
      for (double r : o.next.residue_wh) {
        ASSERT_GE(r, 0.0);
        ASSERT_LE(r, 600.0);
      }
      ASSERT_EQ(o.n_srv + o.n_gnd + o.n_chg, 3);
      net += o.harvested_wh - o.discarded_harvest_wh - o.consumed_wh + o.unmet_consumption_wh;
      scale += o.harvested_wh + o.consumed_wh;
    }
    double delta = 0.0;
    for (int i = 0; i < 3; ++i) delta += tr.steps.back().outcome.next.residue_wh[i] - tr.initial.residue_wh[i];
    ASSERT_LE(std::abs(net - delta), 1e-9 * scale);
  }
}

TEST(TraceFiles, ProfileCsvRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "sunfleet_tests";
  std::filesystem::create_directories(dir);
  const std::vector<JointAction> profile{{Level::Ground, Level::Charging}, {Level::Serving, Level::Serving}};
  write_profile_csv(profile, dir / "profile.csv");
  EXPECT_EQ(read_profile_csv(dir / "profile.csv"), profile);

  const auto env = make_env();
  const auto tr = rollout(ProfilePolicy(std::vector<JointAction>(24, uniform(3, Level::Serving))), env);
  write_trace_csv(tr, dir / "trace.csv");
  std::ifstream in(dir / "trace.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("t,a_0,a_1,a_2,residue_0", 0), 0u) << header;
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 24);
}
