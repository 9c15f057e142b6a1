#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "sunfleet/environment.hpp"
#include "sunfleet/nn.hpp"
#include "sunfleet/replay_buffer.hpp"

namespace sunfleet {

// The per-UAV action box the discrete codes {0, 1, 2} are relaxed into.
inline constexpr double kRelaxedLow = -0.5;
inline constexpr double kRelaxedHigh = 2.5;

// Clamps each coordinate into the box, then rounds to the nearest code in
// {0, 1, 2}; halves (0.5, 1.5) round up.
JointAction relax_and_discretize(std::span<const double> raw);

// Discrete codes as relaxed coordinates.
std::vector<double> embed(const JointAction& action);

struct DdpgHyper {
  std::vector<int> hidden = {400, 400};
  double actor_lr = 1e-4;
  double critic_lr = 1e-4;
  double l2 = 1e-4;
  double grad_clip = 1.0;
  double tau = 1e-3;
  int target_update_every = 1;
  int batch_size = 512;
  double noise_var_max = 1.5;
  double noise_decay = 1e-4;  // multiplicative, per environment step
  double noise_var_min = 0.2;
  std::size_t replay_capacity = 1'000'000;
  double gamma = 0.99;
  int max_episodes = 100'000;

  double reward_scale = 0.01;  // learner sees reward * reward_scale
  int warmup_steps = 0;        // transitions collected before updates; 0 means batch_size
  int updates_per_step = 1;
  int eval_every = 10;         // episodes between greedy evaluations
  int moving_average_window = 300;
  // Bootstrap from the target critic at the discretised target action, the
  // only kind of action the critic is trained on.
  bool discrete_target = true;
  // Weight of 0.5 * mean z^2 on the actor's output pre-activation z.
  double preactivation_penalty = 0.0;

  void validate() const;
};

// Network input for a state: residues / capacity, level codes / 2, t / T,
// then the slot index one-hot. Demand and sunlight change abruptly from one
// hour to the next, which a single scalar time feature resolves poorly.
Eigen::VectorXd encode_state(const EnvState& state, const Scenario& scenario);
inline int state_dimension(int fleet_size, int horizon) { return 2 * fleet_size + 1 + horizon; }

// Deterministic actor followed by discretisation.
class ActorPolicy final : public Policy {
 public:
  ActorPolicy(nn::Mlp actor, Scenario scenario);

  JointAction act(const EnvState& state) const override;
  // Actor output mapped into the relaxed box.
  std::vector<double> relaxed(const EnvState& state) const;

  const nn::Mlp& network() const { return actor_; }
  const Scenario& scenario() const { return scenario_; }

  void save(const std::filesystem::path& path) const;
  // The checkpoint must match the scenario's fleet size and horizon.
  static ActorPolicy load(const std::filesystem::path& path, const Scenario& scenario);

 private:
  nn::Mlp actor_;
  Scenario scenario_;
};

struct EpisodeRecord {
  int episode = 0;
  double episode_return = 0.0;
  double moving_average = 0.0;
  double noise_variance = 0.0;
};

struct EvaluationRecord {
  int episode = 0;
  double evaluation_return = 0.0;
};

struct TrainingLog {
  std::vector<EpisodeRecord> episodes;
  std::vector<EvaluationRecord> evaluations;
  double best_evaluation_return = 0.0;
  int best_episode = -1;
};

// Columns: episode, return, moving_avg_300, noise_variance.
void write_training_log_csv(const TrainingLog& log, const std::filesystem::path& path);
void write_evaluation_log_csv(const TrainingLog& log, const std::filesystem::path& path);

// Actor-critic learner with target networks over the relaxed action box.
class DdpgTrainer {
 public:
  DdpgTrainer(const Environment& env, DdpgHyper hyper, std::uint64_t seed);

  // One noisy episode with learning; returns the (unscaled) episode return.
  double run_episode();
  // Noise-free rollout of the current actor.
  double evaluate_current() const;

  // Critic objective on a batch: mean 0.5 (Q - y)^2 plus the L2 term, with
  // targets from the target networks. Gradients are written when non-null.
  double critic_loss(const ReplayBuffer::Batch& batch, nn::Gradients* grads) const;

  // One critic + actor update on a sampled minibatch and a target update.
  void update();

  const nn::Mlp& actor() const { return actor_; }
  const nn::Mlp& critic() const { return critic_; }
  nn::Mlp& critic() { return critic_; }
  const nn::Mlp& target_actor() const { return target_actor_; }
  const nn::Mlp& target_critic() const { return target_critic_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  ReplayBuffer& buffer() { return buffer_; }
  double noise_variance() const { return noise_var_; }
  void set_noise_variance(double v) { noise_var_ = v; }
  std::mt19937_64& rng() { return rng_; }
  const DdpgHyper& hyper() const { return hyper_; }

 private:
  nn::Matrix critic_input(const nn::Matrix& states, const nn::Matrix& actions) const;

  const Environment& env_;
  DdpgHyper hyper_;
  std::mt19937_64 rng_;
  nn::Mlp actor_, critic_, target_actor_, target_critic_;
  nn::Adam actor_opt_, critic_opt_;
  ReplayBuffer buffer_;
  double noise_var_;
  long updates_ = 0;
  long steps_ = 0;
};

struct TrainingResult {
  ActorPolicy policy;  // best by noise-free evaluation return
  TrainingLog log;
};

using EpisodeCallback = std::function<void(const EpisodeRecord&)>;

// Trains for hyper.max_episodes episodes. Throws DivergenceError when the
// critic loss becomes non-finite.
TrainingResult train_ddpg(const Environment& env, const DdpgHyper& hyper, std::uint64_t seed,
                          const EpisodeCallback& on_episode = {});

}  // namespace sunfleet
