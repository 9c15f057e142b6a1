#include "sunfleet/nn.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "sunfleet/error.hpp"

namespace sunfleet::nn {

namespace {

Matrix activate(const Matrix& z, Activation a) {
  switch (a) {
    case Activation::Relu: return z.cwiseMax(0.0);
    case Activation::Tanh: return z.array().tanh().matrix();
    case Activation::Identity: return z;
  }
  return z;
}

// dL/dz from dL/dy and the post-activation output y.
Matrix activation_backward(const Matrix& grad, const Matrix& y, Activation a) {
  switch (a) {
    case Activation::Relu: return (y.array() > 0.0).select(grad, 0.0);
    case Activation::Tanh: return (grad.array() * (1.0 - y.array().square())).matrix();
    case Activation::Identity: return grad;
  }
  return grad;
}

const char* name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw InputError("unknown activation '" + s + "'");
}

}  // namespace

Gradients Gradients::zeros_like(const Mlp& net) {
  Gradients g;
  for (const auto& l : net.layers()) {
    g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Vector::Zero(l.bias.size()));
  }
  return g;
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weight) s += w.squaredNorm();
  for (const auto& b : bias) s += b.squaredNorm();
  return s;
}

void Gradients::scale(double factor) {
  for (auto& w : weight) w *= factor;
  for (auto& b : bias) b *= factor;
}

Mlp::Mlp(const std::vector<int>& sizes, Activation hidden, Activation output, std::mt19937_64& rng,
         double output_init) {
  if (sizes.size() < 2) throw InputError("network needs at least an input and an output size");
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    const int in = sizes[k];
    const int out = sizes[k + 1];
    if (in < 1 || out < 1) throw InputError("layer sizes must be positive");
    const bool last = k + 2 == sizes.size();
    const double limit = last ? output_init : std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer;
    layer.weight = Matrix::NullaryExpr(out, in, [&] { return dist(rng); });
    layer.bias = Vector::Zero(out);
    layer.activation = last ? output : hidden;
    layers_.push_back(std::move(layer));
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Matrix Mlp::forward(const Matrix& x) const {
  Matrix h = x;
  for (const auto& l : layers_) {
    Matrix z = l.weight * h;
    z.colwise() += l.bias;
    h = activate(z, l.activation);
  }
  return h;
}

Matrix Mlp::forward(const Matrix& x, Tape& tape) const {
  tape.inputs.clear();
  tape.outputs.clear();
  Matrix h = x;
  for (const auto& l : layers_) {
    tape.inputs.push_back(h);
    Matrix z = l.weight * h;
    z.colwise() += l.bias;
    h = activate(z, l.activation);
    tape.outputs.push_back(h);
  }
  return h;
}

Matrix Mlp::backward(const Tape& tape, const Matrix& grad_output, Gradients* grads,
                     const Matrix* grad_output_preactivation) const {
  Matrix grad = grad_output;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& l = layers_[k];
    Matrix dz = activation_backward(grad, tape.outputs[k], l.activation);
    if (grad_output_preactivation && k + 1 == layers_.size()) dz += *grad_output_preactivation;
    if (grads) {
      grads->weight[k].noalias() += dz * tape.inputs[k].transpose();
      grads->bias[k] += dz.rowwise().sum();
    }
    grad = l.weight.transpose() * dz;
  }
  return grad;
}

Matrix Mlp::output_preactivation(const Tape& tape) const {
  const auto& l = layers_.back();
  return (l.weight * tape.inputs.back()).colwise() + l.bias;
}

void Mlp::soft_update(const Mlp& source, double tau) {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    layers_[k].weight = tau * source.layers_[k].weight + (1.0 - tau) * layers_[k].weight;
    layers_[k].bias = tau * source.layers_[k].bias + (1.0 - tau) * layers_[k].bias;
  }
}

double Mlp::add_l2(Gradients& grads, double lambda) const {
  double penalty = 0.0;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    grads.weight[k] += lambda * layers_[k].weight;
    penalty += 0.5 * lambda * layers_[k].weight.squaredNorm();
  }
  return penalty;
}

void Mlp::write(std::ostream& out) const {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "mlp " << layers_.size() << '\n';
  for (const auto& l : layers_) {
    out << "dense " << l.weight.cols() << ' ' << l.weight.rows() << ' ' << name(l.activation) << '\n';
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out << (c ? " " : "") << l.weight(r, c);
      out << '\n';
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out << (r ? " " : "") << l.bias(r);
    out << '\n';
  }
  out.precision(old);
}

Mlp Mlp::read(std::istream& in) {
  std::string tag;
  std::size_t count = 0;
  if (!(in >> tag >> count) || tag != "mlp" || count == 0) throw InputError("malformed network block");
  Mlp net;
  for (std::size_t k = 0; k < count; ++k) {
    Eigen::Index cols = 0, rows = 0;
    std::string act;
    if (!(in >> tag >> cols >> rows >> act) || tag != "dense" || cols < 1 || rows < 1) {
      throw InputError("malformed dense layer header");
    }
    DenseLayer l;
    l.activation = parse_activation(act);
    l.weight.resize(rows, cols);
    l.bias.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(in >> l.weight(r, c))) throw InputError("truncated layer weights");
      }
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (!(in >> l.bias(r))) throw InputError("truncated layer bias");
    }
    if (!net.layers_.empty() && net.layers_.back().weight.rows() != cols) {
      throw InputError("layer shapes do not chain");
    }
    net.layers_.push_back(std::move(l));
  }
  return net;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t k = 0; k < a.layers_.size(); ++k) {
    const auto& x = a.layers_[k];
    const auto& y = b.layers_[k];
    if (x.activation != y.activation || x.weight.rows() != y.weight.rows() || x.weight.cols() != y.weight.cols() ||
        x.weight != y.weight || x.bias != y.bias) {
      return false;
    }
  }
  return true;
}

void clip_global_norm(Gradients& grads, double threshold) {
  const double norm = std::sqrt(grads.squared_norm());
  if (norm > threshold && norm > 0.0) grads.scale(threshold / norm);
}

Adam::Adam(const Mlp& net, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon), m_(Gradients::zeros_like(net)),
      v_(Gradients::zeros_like(net)) {}

void Adam::step(Mlp& net, const Gradients& g) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
    m = beta1_ * m + (1.0 - beta1_) * grad;
    v = beta2_ * v + (1.0 - beta2_) * grad.cwiseProduct(grad);
    param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  };
  auto& layers = net.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    update(layers[k].weight, m_.weight[k], v_.weight[k], g.weight[k]);
    update(layers[k].bias, m_.bias[k], v_.bias[k], g.bias[k]);
  }
}

}  // namespace sunfleet::nn
