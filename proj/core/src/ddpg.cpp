#include "sunfleet/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sunfleet/error.hpp"

#if defined(__SSE2__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

namespace sunfleet {

namespace {

constexpr double kBoxCenter = 0.5 * (kRelaxedLow + kRelaxedHigh);
constexpr double kBoxHalfWidth = 0.5 * (kRelaxedHigh - kRelaxedLow);
constexpr const char* kCheckpointMagic = "sunfleet-policy";
constexpr int kCheckpointVersion = 1;

// Networks work in u = (a - center) / half_width, i.e. the box maps to [-1, 1].
double to_unit(double relaxed) { return (relaxed - kBoxCenter) / kBoxHalfWidth; }
double from_unit(double u) { return kBoxCenter + kBoxHalfWidth * u; }

// Ties at the half-way points go up; comparing avoids the rounding of x + 0.5.
int nearest_code(double x) {
  if (x < 0.5) return 0;
  if (x < 1.5) return 1;
  return 2;
}

// The unit coordinate of the discrete code nearest to u.
double snap_unit(double u) { return to_unit(nearest_code(from_unit(u))); }

nn::Mlp make_actor(int fleet_size, int horizon, const DdpgHyper& h, std::mt19937_64& rng) {
  std::vector<int> sizes{state_dimension(fleet_size, horizon)};
  sizes.insert(sizes.end(), h.hidden.begin(), h.hidden.end());
  sizes.push_back(fleet_size);
  return nn::Mlp(sizes, nn::Activation::Relu, nn::Activation::Tanh, rng);
}

nn::Mlp make_critic(int fleet_size, int horizon, const DdpgHyper& h, std::mt19937_64& rng) {
  std::vector<int> sizes{state_dimension(fleet_size, horizon) + fleet_size};
  sizes.insert(sizes.end(), h.hidden.begin(), h.hidden.end());
  sizes.push_back(1);
  return nn::Mlp(sizes, nn::Activation::Relu, nn::Activation::Identity, rng);
}

// Adam moments of dead units decay geometrically into subnormals, which are
// two orders of magnitude slower on x86. Flush them for the guard's lifetime.
class FlushDenormals {
 public:
#if defined(__SSE2__)
  FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
  ~FlushDenormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
};

bool all_finite(const nn::Gradients& g) { return std::isfinite(g.squared_norm()); }

}  // namespace

JointAction relax_and_discretize(std::span<const double> raw) {
  JointAction out;
  out.reserve(raw.size());
  for (double x : raw) {
    if (std::isnan(x)) throw DomainError("relaxed action is NaN");
    out.push_back(static_cast<Level>(nearest_code(x)));
  }
  return out;
}

std::vector<double> embed(const JointAction& action) {
  std::vector<double> out;
  out.reserve(action.size());
  for (Level a : action) out.push_back(static_cast<double>(code(a)));
  return out;
}

void DdpgHyper::validate() const {
  if (hidden.empty()) throw InputError("ddpg: at least one hidden layer required");
  for (int h : hidden) {
    if (h < 1) throw InputError("ddpg: hidden layer sizes must be positive");
  }
  if (!(actor_lr > 0 && critic_lr > 0)) throw InputError("ddpg: learning rates must be positive");
  if (!(l2 >= 0)) throw InputError("ddpg: l2 must be >= 0");
  if (!(grad_clip > 0)) throw InputError("ddpg: gradient threshold must be positive");
  if (!(tau > 0 && tau <= 1)) throw InputError("ddpg: tau must be in (0, 1]");
  if (target_update_every < 1) throw InputError("ddpg: target update frequency must be >= 1");
  if (batch_size < 1) throw InputError("ddpg: batch size must be >= 1");
  if (!(noise_var_min > 0 && noise_var_min <= noise_var_max)) {
    throw InputError("ddpg: noise variances must satisfy 0 < min <= max");
  }
  if (!(noise_decay >= 0 && noise_decay < 1)) throw InputError("ddpg: noise decay must be in [0, 1)");
  if (replay_capacity < static_cast<std::size_t>(batch_size)) throw InputError("ddpg: replay smaller than a batch");
  if (!(gamma > 0 && gamma <= 1)) throw InputError("ddpg: gamma must be in (0, 1]");
  if (max_episodes < 1) throw InputError("ddpg: max episodes must be >= 1");
  if (!(preactivation_penalty >= 0)) throw InputError("ddpg: pre-activation penalty must be >= 0");
  if (!(reward_scale > 0)) throw InputError("ddpg: reward scale must be positive");
  if (warmup_steps < 0 || updates_per_step < 1 || eval_every < 1 || moving_average_window < 1) {
    throw InputError("ddpg: warmup, updates per step, eval interval and window must be positive");
  }
}

Eigen::VectorXd encode_state(const EnvState& state, const Scenario& scenario) {
  const auto n = static_cast<Eigen::Index>(state.fleet_size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(state_dimension(static_cast<int>(n), scenario.horizon));
  const double cap = scenario.physics.battery_capacity_wh;
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = state.residue_wh[static_cast<std::size_t>(i)] / cap;
    x(n + i) = code(state.level[static_cast<std::size_t>(i)]) / 2.0;
  }
  x(2 * n) = static_cast<double>(state.t) / scenario.horizon;
  if (state.t < scenario.horizon) x(2 * n + 1 + state.t) = 1.0;
  return x;
}

// --- policy ------------------------------------------------------------------

ActorPolicy::ActorPolicy(nn::Mlp actor, Scenario scenario) : actor_(std::move(actor)), scenario_(std::move(scenario)) {
  if (actor_.input_size() != state_dimension(scenario_.fleet_size, scenario_.horizon) || actor_.output_size() != scenario_.fleet_size) {
    throw InputError("actor network shape does not match the fleet size");
  }
}

std::vector<double> ActorPolicy::relaxed(const EnvState& state) const {
  const nn::Matrix u = actor_.forward(encode_state(state, scenario_));
  std::vector<double> out(static_cast<std::size_t>(u.rows()));
  for (Eigen::Index i = 0; i < u.rows(); ++i) out[static_cast<std::size_t>(i)] = from_unit(u(i, 0));
  return out;
}

JointAction ActorPolicy::act(const EnvState& state) const { return relax_and_discretize(relaxed(state)); }

void ActorPolicy::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write policy " + path.string());
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "fleet_size " << scenario_.fleet_size << '\n';
  out << "horizon " << scenario_.horizon << '\n';
  out << std::setprecision(17) << "battery_capacity " << scenario_.physics.battery_capacity_wh << '\n';
  out << "box " << kRelaxedLow << ' ' << kRelaxedHigh << '\n';
  actor_.write(out);
}

ActorPolicy ActorPolicy::load(const std::filesystem::path& path, const Scenario& scenario) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open policy " + path.string());
  std::string magic, key;
  int version = 0, fleet = 0, horizon = 0;
  double capacity = 0, lo = 0, hi = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic) throw InputError(path.string() + ": not a policy file");
  if (version != kCheckpointVersion) throw InputError(path.string() + ": unsupported policy version");
  if (!(in >> key >> fleet) || key != "fleet_size" || !(in >> key >> horizon) || key != "horizon" ||
      !(in >> key >> capacity) || key != "battery_capacity" || !(in >> key >> lo >> hi) || key != "box") {
    throw InputError(path.string() + ": malformed policy header");
  }
  if (fleet != scenario.fleet_size || horizon != scenario.horizon) {
    throw InputError(path.string() + ": policy was trained for fleet " + std::to_string(fleet) + ", horizon " +
                     std::to_string(horizon));
  }
  return ActorPolicy(nn::Mlp::read(in), scenario);
}

// --- logs --------------------------------------------------------------------

void write_training_log_csv(const TrainingLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "episode,return,moving_avg_300,noise_variance\n" << std::setprecision(10);
  for (const auto& e : log.episodes) {
    out << e.episode << ',' << e.episode_return << ',' << e.moving_average << ',' << e.noise_variance << '\n';
  }
}

void write_evaluation_log_csv(const TrainingLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "episode,evaluation_return\n" << std::setprecision(10);
  for (const auto& e : log.evaluations) out << e.episode << ',' << e.evaluation_return << '\n';
}

// --- trainer -----------------------------------------------------------------

DdpgTrainer::DdpgTrainer(const Environment& env, DdpgHyper hyper, std::uint64_t seed)
    : env_(env),
      hyper_(std::move(hyper)),
      rng_(seed),
      buffer_(hyper_.replay_capacity, state_dimension(env.fleet_size(), env.horizon()), env.fleet_size()),
      noise_var_(hyper_.noise_var_max) {
  hyper_.validate();
  actor_ = make_actor(env.fleet_size(), env.horizon(), hyper_, rng_);
  critic_ = make_critic(env.fleet_size(), env.horizon(), hyper_, rng_);
  target_actor_ = actor_;
  target_critic_ = critic_;
  actor_opt_ = nn::Adam(actor_, hyper_.actor_lr);
  critic_opt_ = nn::Adam(critic_, hyper_.critic_lr);
}

nn::Matrix DdpgTrainer::critic_input(const nn::Matrix& states, const nn::Matrix& actions) const {
  nn::Matrix x(states.rows() + actions.rows(), states.cols());
  x << states, actions;
  return x;
}

double DdpgTrainer::critic_loss(const ReplayBuffer::Batch& batch, nn::Gradients* grads) const {
  const auto n = static_cast<double>(batch.states.cols());
  nn::Matrix next_actions = target_actor_.forward(batch.next_states);
  if (hyper_.discrete_target) next_actions = next_actions.unaryExpr([](double u) { return snap_unit(u); });
  const nn::Matrix next_q = target_critic_.forward(critic_input(batch.next_states, next_actions));
  const Eigen::RowVectorXd target =
      batch.rewards.array() + hyper_.gamma * (1.0 - batch.terminal.array()) * next_q.row(0).array();

  nn::Mlp::Tape tape;
  const nn::Matrix q = critic_.forward(critic_input(batch.states, batch.actions), tape);
  const Eigen::RowVectorXd err = q.row(0) - target;
  double loss = 0.5 * err.squaredNorm() / n;
  if (grads) {
    *grads = nn::Gradients::zeros_like(critic_);
    critic_.backward(tape, err / n, grads);
    loss += critic_.add_l2(*grads, hyper_.l2);
  } else {
    for (const auto& l : critic_.layers()) loss += 0.5 * hyper_.l2 * l.weight.squaredNorm();
  }
  return loss;
}

void DdpgTrainer::update() {
  const FlushDenormals ftz;
  const auto batch = buffer_.sample(static_cast<std::size_t>(hyper_.batch_size), rng_);
  const auto n = static_cast<double>(hyper_.batch_size);

  nn::Gradients critic_grads;
  const double loss = critic_loss(batch, &critic_grads);
  if (!std::isfinite(loss) || !all_finite(critic_grads)) {
    throw DivergenceError("critic loss became non-finite after " + std::to_string(updates_) + " updates");
  }
  nn::clip_global_norm(critic_grads, hyper_.grad_clip);
  critic_opt_.step(critic_, critic_grads);

  // Deterministic policy gradient: ascend Q(s, mu(s)).
  nn::Mlp::Tape actor_tape, critic_tape;
  const nn::Matrix u = actor_.forward(batch.states, actor_tape);
  critic_.forward(critic_input(batch.states, u), critic_tape);
  const nn::Matrix dq_dx = critic_.backward(critic_tape, nn::Matrix::Constant(1, batch.states.cols(), -1.0 / n), nullptr);
  const nn::Matrix dq_du = dq_dx.bottomRows(u.rows());
  nn::Gradients actor_grads = nn::Gradients::zeros_like(actor_);
  if (hyper_.preactivation_penalty > 0) {
    // 0.5 * lambda * mean z^2 keeps tanh out of saturation.
    const nn::Matrix dz = (hyper_.preactivation_penalty / n) * actor_.output_preactivation(actor_tape);
    actor_.backward(actor_tape, dq_du, &actor_grads, &dz);
  } else {
    actor_.backward(actor_tape, dq_du, &actor_grads);
  }
  actor_.add_l2(actor_grads, hyper_.l2);
  if (!all_finite(actor_grads)) throw DivergenceError("actor gradient became non-finite");
  nn::clip_global_norm(actor_grads, hyper_.grad_clip);
  actor_opt_.step(actor_, actor_grads);

  ++updates_;
  if (updates_ % hyper_.target_update_every == 0) {
    target_actor_.soft_update(actor_, hyper_.tau);
    target_critic_.soft_update(critic_, hyper_.tau);
  }
}

double DdpgTrainer::run_episode() {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto& scenario = env_.scenario();
  const std::size_t warmup =
      static_cast<std::size_t>(std::max(hyper_.warmup_steps, hyper_.batch_size));
  EnvState state = env_.reset();
  double total = 0.0;
  const int fleet = env_.fleet_size();
  std::vector<double> raw(static_cast<std::size_t>(fleet));
  Eigen::VectorXd stored(fleet);
  while (state.t < env_.horizon()) {
    const Eigen::VectorXd x = encode_state(state, scenario);
    const nn::Matrix u = actor_.forward(x);
    const double sigma = std::sqrt(noise_var_);
    for (int i = 0; i < fleet; ++i) raw[static_cast<std::size_t>(i)] = from_unit(u(i, 0)) + sigma * gauss(rng_);
    const JointAction action = relax_and_discretize(raw);
    const StepOutcome out = env_.step(state, action);
    for (int i = 0; i < fleet; ++i) stored(i) = to_unit(code(action[static_cast<std::size_t>(i)]));
    const bool terminal = out.next.t >= env_.horizon();
    buffer_.push(x, stored, out.reward * hyper_.reward_scale, encode_state(out.next, scenario), terminal);
    total += out.reward;
    state = out.next;
    ++steps_;
    noise_var_ = std::max(hyper_.noise_var_min, noise_var_ * (1.0 - hyper_.noise_decay));
    if (buffer_.size() >= warmup) {
      for (int k = 0; k < hyper_.updates_per_step; ++k) update();
    }
  }
  return total;
}

double DdpgTrainer::evaluate_current() const {
  const ActorPolicy policy(actor_, env_.scenario());
  return rollout(policy, env_).total_return;
}

TrainingResult train_ddpg(const Environment& env, const DdpgHyper& hyper, std::uint64_t seed,
                          const EpisodeCallback& on_episode) {
  const FlushDenormals ftz;
  DdpgTrainer trainer(env, hyper, seed);
  TrainingLog log;
  nn::Mlp best = trainer.actor();
  bool have_best = false;
  const auto window = static_cast<std::size_t>(hyper.moving_average_window);
  double window_sum = 0.0;

  auto consider = [&](int episode) {
    const double value = trainer.evaluate_current();
    log.evaluations.push_back({episode, value});
    if (!have_best || value > log.best_evaluation_return) {
      have_best = true;
      log.best_evaluation_return = value;
      log.best_episode = episode;
      best = trainer.actor();
    }
  };

  for (int e = 0; e < hyper.max_episodes; ++e) {
    EpisodeRecord rec;
    rec.episode = e;
    rec.episode_return = trainer.run_episode();
    rec.noise_variance = trainer.noise_variance();
    window_sum += rec.episode_return;
    if (log.episodes.size() >= window) window_sum -= log.episodes[log.episodes.size() - window].episode_return;
    rec.moving_average = window_sum / static_cast<double>(std::min(window, log.episodes.size() + 1));
    log.episodes.push_back(rec);
    if (on_episode) on_episode(rec);
    if ((e + 1) % hyper.eval_every == 0 || e + 1 == hyper.max_episodes) consider(e);
  }
  return {ActorPolicy(std::move(best), env.scenario()), std::move(log)};
}

}  // namespace sunfleet
