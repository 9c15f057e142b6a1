#include "sunfleet_cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sunfleet/baseline.hpp"
#include "sunfleet/coverage_map.hpp"
#include "sunfleet/ddpg.hpp"
#include "sunfleet/error.hpp"
#include "sunfleet/evaluation.hpp"
#include "sunfleet/oracle.hpp"

namespace sunfleet::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string scenario;
  std::string map;
  std::string out;
  std::uint64_t seed = 1;
};

struct ScenarioArgs {
  int fleet = 3;
  int horizon = 24;
  std::string out;
};

struct OracleArgs {
  std::string mode = "dp";
  int bins = 100;
};

struct EvalArgs {
  std::string policy;
  std::string baseline;
  int episodes = 1;
};

fs::path resolve_out(const std::string& out) {
  fs::path p(out);
  if (p.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) p = fs::path(root) / p;
  }
  return p;
}

fs::path prepare_dir(const std::string& out) {
  const fs::path dir = resolve_out(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory " + dir.string());
  return dir;
}

void write_json(const json& doc, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << std::setw(2) << doc << '\n';
}

json hyper_json(const DdpgHyper& h) {
  return {{"hidden", h.hidden},
          {"actor_lr", h.actor_lr},
          {"critic_lr", h.critic_lr},
          {"l2", h.l2},
          {"grad_clip", h.grad_clip},
          {"tau", h.tau},
          {"target_update_every", h.target_update_every},
          {"batch_size", h.batch_size},
          {"noise_var_max", h.noise_var_max},
          {"noise_decay", h.noise_decay},
          {"noise_var_min", h.noise_var_min},
          {"replay_capacity", h.replay_capacity},
          {"gamma", h.gamma},
          {"max_episodes", h.max_episodes},
          {"reward_scale", h.reward_scale},
          {"warmup_steps", h.warmup_steps},
          {"updates_per_step", h.updates_per_step},
          {"eval_every", h.eval_every},
          {"moving_average_window", h.moving_average_window},
          {"discrete_target", h.discrete_target},
          {"preactivation_penalty", h.preactivation_penalty}};
}

// The scenario text is embedded so the run can be replayed from the manifest alone.
json manifest(const std::string& command, const Common& c, const Scenario& s, const fs::path& dir,
              const std::vector<std::string>& args, json parameters) {
  return {{"command", command},
          {"version", SUNFLEET_VERSION},
          {"argv", args},
          {"scenario_path", c.scenario},
          {"map_path", c.map},
          {"seed", c.seed},
          {"output_dir", dir.string()},
          {"scenario", format_scenario(s)},
          {"parameters", std::move(parameters)}};
}

Environment load_environment(const Common& c, const Scenario& s) {
  CoverageMap map = c.map.empty() ? build_coverage_map(s, c.seed) : read_coverage_csv(c.map);
  map.validate_against(s);
  return Environment(s, std::move(map));
}

int cmd_scenario(const ScenarioArgs& a, std::ostream& out) {
  const Scenario s = default_scenario(a.fleet, a.horizon);
  s.validate();
  if (a.out.empty()) {
    out << format_scenario(s);
    return kExitOk;
  }
  const fs::path path = resolve_out(a.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_scenario(s, path);
  out << "wrote " << path.string() << '\n';
  return kExitOk;
}

int cmd_map(const Common& c, const std::vector<std::string>& args, std::ostream& out) {
  const Scenario s = load_scenario(c.scenario);
  const CoverageMap map = build_coverage_map(s, c.seed);
  const fs::path dir = prepare_dir(c.out);
  write_coverage_csv(map, dir / "coverage_map.csv");
  write_placements_json(map, dir / "placements.json");
  write_json(manifest("map", c, s, dir, args, json::object()), dir / "manifest.json");
  out << "coverage map: " << (dir / "coverage_map.csv").string() << '\n';
  return kExitOk;
}

int cmd_train(const Common& c, DdpgHyper hyper, int episodes, const std::vector<std::string>& args,
              std::ostream& out) {
  const Scenario s = load_scenario(c.scenario);
  const Environment env = load_environment(c, s);
  if (episodes > 0) hyper.max_episodes = episodes;
  hyper.validate();
  const fs::path dir = prepare_dir(c.out);
  const TrainingResult res = train_ddpg(env, hyper, c.seed);
  res.policy.save(dir / "policy.txt");
  write_training_log_csv(res.log, dir / "training_log.csv");
  write_evaluation_log_csv(res.log, dir / "eval_log.csv");
  const EpisodeTrace trace = rollout(res.policy, env);
  write_trace_csv(trace, dir / "trace.csv");
  write_profile_csv(trace.profile(), dir / "profile.csv");
  write_json({{"best_evaluation_return", res.log.best_evaluation_return},
              {"best_episode", res.log.best_episode},
              {"episodes", res.log.episodes.size()},
              {"policy_return", trace.total_return}},
             dir / "summary.json");
  write_json(manifest("train", c, s, dir, args, {{"hyper", hyper_json(hyper)}}), dir / "manifest.json");
  out << "best evaluation return " << res.log.best_evaluation_return << " at episode " << res.log.best_episode
      << '\n';
  return kExitOk;
}

int cmd_oracle(const Common& c, const OracleArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const Scenario s = load_scenario(c.scenario);
  const Environment env = load_environment(c, s);
  OracleResult res;
  if (a.mode == "dp") {
    res = dp_oracle(env, a.bins);
  } else {
    res = exhaustive_oracle(env);
  }
  const fs::path dir = prepare_dir(c.out);
  write_profile_csv(res.profile, dir / "profile.csv");
  write_trace_csv(res.trace, dir / "trace.csv");
  write_json({{"mode", a.mode}, {"value", res.value}, {"true_return", res.true_return()}}, dir / "summary.json");
  json params{{"mode", a.mode}};
  if (a.mode == "dp") params["bins"] = a.bins;
  write_json(manifest("oracle", c, s, dir, args, params), dir / "manifest.json");
  out << a.mode << " value " << res.value << ", replayed return " << res.true_return() << '\n';
  return kExitOk;
}

int cmd_eval(const Common& c, const EvalArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const Scenario s = load_scenario(c.scenario);
  const Environment env = load_environment(c, s);
  std::unique_ptr<Policy> policy;
  if (!a.policy.empty()) {
    policy = std::make_unique<ActorPolicy>(ActorPolicy::load(a.policy, s));
  } else {
    policy = std::make_unique<GreedyPolicy>(env);
  }
  const EvaluationMetrics m = evaluate(*policy, env, a.episodes);
  const fs::path dir = prepare_dir(c.out);
  write_hourly_metrics_csv(m, env, dir / "hourly.csv");
  write_episode_metrics_csv(m, dir / "episodes.csv");
  write_trace_csv(m.first_trace, dir / "trace.csv");
  write_json({{"mean_return", m.mean_return},
              {"min_return", m.min_return},
              {"return_variance", m.return_variance},
              {"mean_serving_uavs", m.mean_serving_uavs()},
              {"sustainability_violations", m.sustainability_violations},
              {"service_violations", m.service_violations},
              {"harvested_wh", m.energy.harvested_wh},
              {"consumed_wh", m.energy.consumed_wh},
              {"discarded_harvest_wh", m.energy.discarded_harvest_wh},
              {"unmet_consumption_wh", m.energy.unmet_consumption_wh},
              {"net_loss_wh", m.energy.net_loss_wh()}},
             dir / "summary.json");
  json params{{"episodes", a.episodes}};
  if (!a.policy.empty()) {
    params["policy"] = a.policy;
  } else {
    params["baseline"] = a.baseline;
  }
  write_json(manifest("eval", c, s, dir, args, params), dir / "manifest.json");
  out << "mean return " << m.mean_return << '\n';
  return kExitOk;
}

void add_common(CLI::App* cmd, Common& c, bool needs_map) {
  cmd->add_option("--scenario", c.scenario, "Scenario YAML file")->required()->check(CLI::ExistingFile);
  if (needs_map) cmd->add_option("--map", c.map, "Coverage map CSV; built from the scenario when omitted");
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", c.out, "Output directory")->required();
}

void add_hyper(CLI::App* cmd, DdpgHyper& h) {
  cmd->add_option("--hidden", h.hidden, "Hidden layer widths")->delimiter(',')->capture_default_str();
  cmd->add_option("--actor-lr", h.actor_lr)->capture_default_str();
  cmd->add_option("--critic-lr", h.critic_lr)->capture_default_str();
  cmd->add_option("--l2", h.l2)->capture_default_str();
  cmd->add_option("--grad-clip", h.grad_clip)->capture_default_str();
  cmd->add_option("--tau", h.tau)->capture_default_str();
  cmd->add_option("--target-update-every", h.target_update_every)->capture_default_str();
  cmd->add_option("--batch", h.batch_size)->capture_default_str();
  cmd->add_option("--noise-max", h.noise_var_max)->capture_default_str();
  cmd->add_option("--noise-decay", h.noise_decay)->capture_default_str();
  cmd->add_option("--noise-min", h.noise_var_min)->capture_default_str();
  cmd->add_option("--replay", h.replay_capacity)->capture_default_str();
  cmd->add_option("--gamma", h.gamma)->capture_default_str();
  cmd->add_option("--reward-scale", h.reward_scale)->capture_default_str();
  cmd->add_option("--warmup", h.warmup_steps)->capture_default_str();
  cmd->add_option("--updates-per-step", h.updates_per_step)->capture_default_str();
  cmd->add_option("--eval-every", h.eval_every)->capture_default_str();
  cmd->add_option("--discrete-target", h.discrete_target)->capture_default_str();
  cmd->add_option("--preactivation-penalty", h.preactivation_penalty)->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solar-powered UAV fleet scheduling: coverage maps, training, oracles and evaluation", "sunfleet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SUNFLEET_VERSION);

  Common common;
  ScenarioArgs scenario_args;
  OracleArgs oracle_args;
  EvalArgs eval_args;
  DdpgHyper hyper;
  int episodes = 0;

  auto* scenario = app.add_subcommand("scenario", "Write the default scenario as YAML");
  scenario->add_option("--fleet", scenario_args.fleet)->capture_default_str();
  scenario->add_option("--horizon", scenario_args.horizon)->capture_default_str();
  scenario->add_option("--out", scenario_args.out, "Destination file; stdout when omitted");

  auto* map = app.add_subcommand("map", "Build the coverage map");
  add_common(map, common, false);

  auto* train = app.add_subcommand("train", "Train the actor-critic scheduler");
  add_common(train, common, true);
  train->add_option("--episodes", episodes, "Episode budget")->check(CLI::PositiveNumber);
  add_hyper(train, hyper);

  auto* oracle = app.add_subcommand("oracle", "Solve a small instance exactly or by dynamic programming");
  add_common(oracle, common, true);
  oracle->add_option("--mode", oracle_args.mode)->check(CLI::IsMember({"dp", "exhaustive"}))->capture_default_str();
  oracle->add_option("--bins", oracle_args.bins, "Battery levels per UAV for dp")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Evaluate a trained policy or the greedy baseline");
  add_common(eval, common, true);
  auto* policy_opt = eval->add_option("--policy", eval_args.policy, "Policy checkpoint")->check(CLI::ExistingFile);
  auto* baseline_opt =
      eval->add_option("--baseline", eval_args.baseline, "Baseline name")->check(CLI::IsMember({"greedy"}));
  policy_opt->excludes(baseline_opt);
  eval->add_option("--episodes", eval_args.episodes)->check(CLI::PositiveNumber)->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*scenario) return cmd_scenario(scenario_args, out);
    if (*map) return cmd_map(common, args, out);
    if (*train) return cmd_train(common, hyper, episodes, args, out);
    if (*oracle) return cmd_oracle(common, oracle_args, args, out);
    if (eval_args.policy.empty() && eval_args.baseline.empty()) {
      throw InputError("eval needs --policy or --baseline");
    }
    return cmd_eval(common, eval_args, args, out);
  } catch (const SizeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSize;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace sunfleet::cli
