#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <random>

namespace sunfleet {

// Fixed-capacity ring of transitions, stored column-wise.
class ReplayBuffer {
 public:
  struct Batch {
    Eigen::MatrixXd states;       // state_dim x B
    Eigen::MatrixXd actions;      // action_dim x B
    Eigen::RowVectorXd rewards;   // 1 x B
    Eigen::MatrixXd next_states;  // state_dim x B
    Eigen::RowVectorXd terminal;  // 1 x B, 1.0 at episode end
    std::vector<std::size_t> slots;
  };

  ReplayBuffer(std::size_t capacity, int state_dim, int action_dim);

  void push(const Eigen::VectorXd& state, const Eigen::VectorXd& action, double reward,
            const Eigen::VectorXd& next_state, bool terminal);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  // Uniform sample of distinct stored transitions.
  Batch sample(std::size_t batch_size, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;
  Eigen::MatrixXd states_, actions_, next_states_;
  Eigen::RowVectorXd rewards_, terminal_;
};

}  // namespace sunfleet
