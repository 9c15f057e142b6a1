#include "sunfleet/replay_buffer.hpp"

#include <unordered_set>

#include "sunfleet/error.hpp"

namespace sunfleet {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int state_dim, int action_dim) : capacity_(capacity) {
  if (capacity == 0) throw InputError("replay capacity must be positive");
  const auto cap = static_cast<Eigen::Index>(capacity);
  states_.resize(state_dim, cap);
  next_states_.resize(state_dim, cap);
  actions_.resize(action_dim, cap);
  rewards_.resize(cap);
  terminal_.resize(cap);
}

void ReplayBuffer::push(const Eigen::VectorXd& state, const Eigen::VectorXd& action, double reward,
                        const Eigen::VectorXd& next_state, bool terminal) {
  const auto i = static_cast<Eigen::Index>(head_);
  states_.col(i) = state;
  actions_.col(i) = action;
  rewards_(i) = reward;
  next_states_.col(i) = next_state;
  terminal_(i) = terminal ? 1.0 : 0.0;
  head_ = (head_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

ReplayBuffer::Batch ReplayBuffer::sample(std::size_t batch_size, std::mt19937_64& rng) const {
  if (batch_size == 0 || batch_size > size_) throw InputError("minibatch larger than the stored transitions");
  // Floyd's algorithm: batch_size distinct indices in [0, size_).
  std::unordered_set<std::size_t> chosen;
  std::vector<std::size_t> slots;
  slots.reserve(batch_size);
  for (std::size_t j = size_ - batch_size; j < size_; ++j) {
    std::uniform_int_distribution<std::size_t> dist(0, j);
    const std::size_t k = dist(rng);
    const std::size_t pick = chosen.insert(k).second ? k : j;
    if (pick == j) chosen.insert(j);
    slots.push_back(pick);
  }
  Batch b;
  const auto n = static_cast<Eigen::Index>(batch_size);
  b.states.resize(states_.rows(), n);
  b.next_states.resize(states_.rows(), n);
  b.actions.resize(actions_.rows(), n);
  b.rewards.resize(n);
  b.terminal.resize(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto s = static_cast<Eigen::Index>(slots[static_cast<std::size_t>(c)]);
    b.states.col(c) = states_.col(s);
    b.next_states.col(c) = next_states_.col(s);
    b.actions.col(c) = actions_.col(s);
    b.rewards(c) = rewards_(s);
    b.terminal(c) = terminal_(s);
  }
  b.slots = std::move(slots);
  return b;
}

}  // namespace sunfleet
