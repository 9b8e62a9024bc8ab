#include "curv/network.hpp"

#include <stdexcept>
#include <string>

namespace curv {

Mlp::Mlp(std::vector<DenseLayer> layers, ActivationKind activation)
    : layers_(std::move(layers)), activation_(activation) {
  if (layers_.size() < 2) throw std::invalid_argument("Mlp: at least 2 layers required");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const DenseLayer& l = layers_[i];
    if (l.weight.rows() != l.bias.size())
      throw std::invalid_argument("Mlp: weight rows != bias length at layer " + std::to_string(i + 1));
    if (i > 0 && l.weight.cols() != layers_[i - 1].weight.rows())
      throw std::invalid_argument("Mlp: shape chain broken at layer " + std::to_string(i + 1));
    if (!l.weight.allFinite() || !l.bias.allFinite())
      throw std::invalid_argument("Mlp: non-finite parameter at layer " + std::to_string(i + 1));
  }
}

std::vector<int> Mlp::dims() const {
  std::vector<int> d;
  d.push_back(input_dim());
  for (const DenseLayer& l : layers_) d.push_back(static_cast<int>(l.weight.rows()));
  return d;
}

ForwardTrace forward(const Mlp& net, const Eigen::VectorXd& x) {
  if (x.size() != net.input_dim())
    throw std::invalid_argument("forward: input has wrong dimension");
  ForwardTrace trace;
  const int L = net.depth();
  trace.a.reserve(static_cast<std::size_t>(L));
  trace.z.reserve(static_cast<std::size_t>(L));
  trace.a.push_back(x);
  for (int i = 0; i < L; ++i) {
    const DenseLayer& l = net.layer(i);
    Eigen::VectorXd z = l.weight * trace.a.back() + l.bias;
    if (i + 1 < L) {
      Eigen::VectorXd a(z.size());
      for (Eigen::Index j = 0; j < z.size(); ++j)
        a[j] = act_eval(net.activation(), z[j], 0);
      trace.a.push_back(std::move(a));
    }
    trace.z.push_back(std::move(z));
  }
  return trace;
}

double margin(const Eigen::VectorXd& logits, int label, int target) {
  if (label == target) throw std::invalid_argument("margin: label == target");
  if (label < 0 || target < 0 || label >= logits.size() || target >= logits.size())
    throw std::invalid_argument("margin: class index out of range");
  return logits[label] - logits[target];
}

double margin(const Mlp& net, const Eigen::VectorXd& x, int label, int target) {
  return margin(forward(net, x).logits(), label, target);
}

int runner_up(const Eigen::VectorXd& logits) {
  if (logits.size() < 2) throw std::invalid_argument("runner_up: need at least 2 classes");
  int best = 0;
  for (int i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[best]) best = i;
  int second = -1;
  for (int i = 0; i < logits.size(); ++i) {
    if (i == best) continue;
    if (second < 0 || logits[i] > logits[second]) second = i;
  }
  return second;
}

int runner_up_target(const Mlp& net, const Eigen::VectorXd& x) {
  return runner_up(forward(net, x).logits());
}

int top_other(const Eigen::VectorXd& logits, int label) {
  int best = -1;
  for (int i = 0; i < logits.size(); ++i) {
    if (i == label) continue;
    if (best < 0 || logits[i] > logits[best]) best = i;
  }
  if (best < 0) throw std::invalid_argument("top_other: need at least 2 classes");
  return best;
}

}  // namespace curv
