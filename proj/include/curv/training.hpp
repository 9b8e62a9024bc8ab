#pragma once

#include <cstdint>

#include "curv/data_io.hpp"
#include "curv/solver.hpp"

namespace curv {

enum class TrainMode { Standard, CurvatureOnly, Crt };

TrainMode train_mode_from_string(const std::string& name);
std::string to_string(TrainMode mode);

struct TrainConfig {
  TrainMode mode = TrainMode::Standard;
  double gamma = 0;  // curvature regularization coefficient
  double rho = 0;    // attack radius, CRT mode only
  int epochs = 5;
  int batch_size = 64;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
  bool adam = false;    // adaptive-moment option; plain minibatch GD otherwise
  int attack_every = 1; // CRT: recompute attack points on every k-th step,
                        // falling back to the clean input in between
  SolverOptions solver;
};

// Persisted singular-vector estimates, advanced one power step per use.
struct SpectralState {
  struct LayerState {
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    double norm = 0;
  };
  std::vector<LayerState> layers;
};

SpectralState make_spectral_state(const Mlp& net, std::uint64_t seed);

struct SpectralGrad {
  double norm = 0;
  Eigen::MatrixXd grad;  // u v^T
};

// One power-method step on the persisted vectors; the norm gradient is the
// rank-one outer product of the updated singular pair.
SpectralGrad spectral_norm_grad(const Eigen::MatrixXd& W, SpectralState::LayerState& state);

double cross_entropy(const Eigen::VectorXd& logits, int label);

struct LossGrads {
  double loss = 0;
  double k_value = 0;
  std::vector<Eigen::MatrixXd> weight_grads;
  std::vector<Eigen::VectorXd> bias_grads;
};

// Per-sample loss: cross-entropy at x0 (or at the attack point when given)
// plus gamma * K(W, label, target). K's gradient flows through the
// spectral-norm layer and the |.| terms, with subgradient 0 at kinks.
LossGrads crt_loss(const Mlp& net, const Eigen::VectorXd& x0, int label, int target, double gamma,
                   SpectralState& spectral, const Eigen::VectorXd* attack_point = nullptr);

// l2 projected gradient ascent on cross-entropy; returns the worst point
// found over an x0-start run and one random restart.
Eigen::VectorXd pgd_attack(const Mlp& net, const Eigen::VectorXd& x0, int label, double rho,
                           int steps = 40, double step_size = 0 /* 0 -> rho/10 */,
                           std::uint64_t seed = 0);

struct EpochStats {
  int epoch = 0;
  double loss = 0;
  double accuracy = 0;
  double mean_k = 0;
  double wall_seconds = 0;
};

struct TrainResult {
  Mlp net;
  std::vector<EpochStats> epochs;
};

Mlp random_mlp(const std::vector<int>& dims, ActivationKind kind, std::uint64_t seed);

TrainResult train(const Mlp& init, const Dataset& data, const TrainConfig& config);

struct EvalOptions {
  int min_pair_count = 100;  // (label, target) pairs entering K_lb / K_ub
  int pgd_steps = 40;
  int workers = 1;
  std::uint64_t seed = 0;
  SolverOptions solver;
};

struct EvalReport {
  double standard_accuracy = 0;
  double empirical_robust_accuracy = 0;
  double certified_robust_accuracy = 0;
  double attack_success_rate = 0;
  double certificate_success_rate = 0;
  double k_lb = 0;
  double k_ub = 0;
  double mean_crc = 0;
  int sample_count = 0;
  double rho = 0;
};

EvalReport evaluate(const Mlp& net, const Dataset& data, double rho, const EvalOptions& opts = {});

}  // namespace curv
