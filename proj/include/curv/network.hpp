#pragma once

#include <vector>

#include <Eigen/Dense>

#include "curv/activation.hpp"

namespace curv {

struct DenseLayer {
  Eigen::MatrixXd weight;  // N_I x N_{I-1}
  Eigen::VectorXd bias;    // N_I
};

// Fully connected network: the activation follows every layer except the
// last, so logits are the final pre-activation. Immutable after
// construction; forward passes on a shared Mlp are safe to run concurrently.
class Mlp {
 public:
  Mlp(std::vector<DenseLayer> layers, ActivationKind activation);

  int depth() const { return static_cast<int>(layers_.size()); }
  int input_dim() const { return static_cast<int>(layers_.front().weight.cols()); }
  int class_count() const { return static_cast<int>(layers_.back().weight.rows()); }
  const DenseLayer& layer(int i) const { return layers_[static_cast<std::size_t>(i)]; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  ActivationKind activation() const { return activation_; }
  std::vector<int> dims() const;

 private:
  std::vector<DenseLayer> layers_;
  ActivationKind activation_;
};

// Cached pre-/post-activations of one forward pass: z[i] and a[i] belong to
// layer i+1, a[0] is the input, logits are z.back().
struct ForwardTrace {
  std::vector<Eigen::VectorXd> z;
  std::vector<Eigen::VectorXd> a;
  const Eigen::VectorXd& logits() const { return z.back(); }
};

ForwardTrace forward(const Mlp& net, const Eigen::VectorXd& x);

// logits[label] - logits[target]; the decision-boundary function for the pair.
double margin(const Mlp& net, const Eigen::VectorXd& x, int label, int target);
double margin(const Eigen::VectorXd& logits, int label, int target);

// Index of the second-largest logit; ties break toward the lower index.
int runner_up(const Eigen::VectorXd& logits);
int runner_up_target(const Mlp& net, const Eigen::VectorXd& x);

// Largest logit not equal to `label`; equals runner_up when argmax == label.
int top_other(const Eigen::VectorXd& logits, int label);

}  // namespace curv
