#include <benchmark/benchmark.h>

#include "sunfleet/coverage_map.hpp"
#include "sunfleet/ddpg.hpp"
#include "sunfleet/oracle.hpp"

using namespace sunfleet;

namespace {

Environment hand_env(int fleet, int horizon) {
  Scenario s = default_scenario(fleet, horizon);
  CoverageMap m(horizon, fleet);
  for (int t = 0; t < horizon; ++t) {
    for (int n = 1; n <= fleet; ++n) m.set_served(t, n, std::min(s.users_at(t), n * s.users_at(t) / 2));
  }
  return Environment(s, m);
}

}  // namespace

static void BM_SlotTransition(benchmark::State& state) {
  const Scenario s = default_scenario();
  double residue = 400.0;
  for (auto _ : state) {
    const auto r = slot_transition(Level::Ground, Level::Charging, residue, 12.0, 3600.0, s.physics, s.solar, s.altitudes);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_SlotTransition);

static void BM_EnvironmentStep(benchmark::State& state) {
  const auto env = hand_env(3, 24);
  EnvState st = env.reset();
  st.t = 12;
  const JointAction a{Level::Serving, Level::Charging, Level::Ground};
  for (auto _ : state) benchmark::DoNotOptimize(env.step(st, a));
}
BENCHMARK(BM_EnvironmentStep);

static void BM_AssociateUsers(benchmark::State& state) {
  const Scenario s = default_scenario();
  HourlyDemand d = s.demand[12];
  d.n_users = static_cast<int>(state.range(0));
  const UserField users = generate_users(d, s.area, 3);
  const auto placed = optimize_placement(users, 3, s.radio, s.area, 3);
  for (auto _ : state) benchmark::DoNotOptimize(associate_users(placed.placement, users, s.radio));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AssociateUsers)->Arg(25)->Arg(50)->Arg(100)->Arg(200)->Complexity();

static void BM_OptimizePlacement(benchmark::State& state) {
  const Scenario s = default_scenario();
  HourlyDemand d = s.demand[12];
  d.n_users = 50;
  const UserField users = generate_users(d, s.area, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize_placement(users, static_cast<int>(state.range(0)), s.radio, s.area, 3));
  }
}
BENCHMARK(BM_OptimizePlacement)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_DdpgUpdate(benchmark::State& state) {
  const auto env = hand_env(3, 24);
  DdpgHyper h;
  const int width = static_cast<int>(state.range(0));
  h.hidden = {width, width};
  h.batch_size = static_cast<int>(state.range(1));
  h.replay_capacity = 10'000;
  DdpgTrainer trainer(env, h, 1);
  while (trainer.buffer().size() < static_cast<std::size_t>(h.batch_size)) trainer.run_episode();
  for (auto _ : state) trainer.update();
}
BENCHMARK(BM_DdpgUpdate)->Args({64, 64})->Args({128, 128})->Args({400, 512})->Unit(benchmark::kMillisecond);

static void BM_DpOracle(benchmark::State& state) {
  const auto env = hand_env(2, 24);
  for (auto _ : state) benchmark::DoNotOptimize(dp_oracle(env, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_DpOracle)->Arg(51)->Arg(201)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
