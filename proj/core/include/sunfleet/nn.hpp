#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <random>
#include <vector>

namespace sunfleet::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { Identity, Relu, Tanh };

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::Identity;
};

class Mlp;

// Parameter-shaped accumulator.
struct Gradients {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  static Gradients zeros_like(const Mlp& net);
  double squared_norm() const;
  void scale(double factor);
};

// Fully connected network over column-major batches (features x batch).
class Mlp {
 public:
  // Activations recorded by a forward pass for the matching backward pass.
  struct Tape {
    std::vector<Matrix> inputs;   // input of each layer
    std::vector<Matrix> outputs;  // post-activation output of each layer
  };

  Mlp() = default;
  // sizes = {in, hidden..., out}. Glorot-uniform weights, zero biases; the
  // output layer is drawn from U(-output_init, output_init).
  Mlp(const std::vector<int>& sizes, Activation hidden, Activation output, std::mt19937_64& rng,
      double output_init = 3e-3);

  int input_size() const { return static_cast<int>(layers_.front().weight.cols()); }
  int output_size() const { return static_cast<int>(layers_.back().weight.rows()); }
  std::size_t parameter_count() const;

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, Tape& tape) const;

  // Back-propagates dL/d(output). Adds dL/d(theta) into `grads` when non-null
  // and returns dL/d(input). `grad_output_preactivation`, when given, is an
  // extra dL/dz added at the output layer's pre-activation.
  Matrix backward(const Tape& tape, const Matrix& grad_output, Gradients* grads,
                  const Matrix* grad_output_preactivation = nullptr) const;

  // Output-layer pre-activation for a recorded forward pass.
  Matrix output_preactivation(const Tape& tape) const;

  // theta <- tau * source + (1 - tau) * theta
  void soft_update(const Mlp& source, double tau);

  // Adds lambda * W to the weight gradients; returns 0.5 * lambda * sum ||W||^2.
  double add_l2(Gradients& grads, double lambda) const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  void write(std::ostream& out) const;
  static Mlp read(std::istream& in);

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  std::vector<DenseLayer> layers_;
};

// Scales gradients so their global L2 norm does not exceed `threshold`.
void clip_global_norm(Gradients& grads, double threshold);

class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);
  void step(Mlp& net, const Gradients& grads);

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  Gradients m_, v_;
};

}  // namespace sunfleet::nn
