#pragma once

#include "curv/network.hpp"

namespace curv {

struct PowerResult {
  double magnitude = 0;    // |lambda| of the dominant eigenpair
  Eigen::VectorXd vector;  // unit eigenvector estimate
};

// Dominant-magnitude eigenpair of a symmetric matrix. The start vector is
// pseudorandom with a fixed seed, so results are deterministic. A zero
// matrix yields magnitude 0.
PowerResult power_iteration(const Eigen::MatrixXd& A, int iters = 25);

// Spectral norm of a (possibly nonsymmetric) matrix, via power iteration
// on W^T W.
double spectral_norm(const Eigen::MatrixXd& W, int iters = 25);

enum class BoundScope { Global, Local };

// Eigenvalue bounds of the margin Hessian for a fixed (label, target) pair:
// m I <= H <= M I everywhere (or inside the local ball), and |H| <= K
// everywhere. m <= 0 <= M and K >= max(|m|, M).
struct CurvatureBounds {
  double m = 0;
  double M = 0;
  double K = 0;
  int label = 0;
  int target = 0;
  BoundScope scope = BoundScope::Global;
  double radius = 0;       // local scope only
  Eigen::VectorXd center;  // local scope only
};

// K(W, label, target): depth-L bound on |eigenvalues| of the margin Hessian.
double deep_bound(const Mlp& net, int label, int target, int power_iters = 25);

// Two-layer (m, M) from the PSD/NSD envelope matrices, plus K for step
// sizing. Requires depth exactly 2.
CurvatureBounds two_layer_bounds(const Mlp& net, int label, int target, int power_iters = 25);

// Two-layer bounds restricted to the ball ||x - center|| <= radius, using
// per-neuron pre-activation intervals. Never looser than the global pair.
CurvatureBounds local_two_layer_bounds(const Mlp& net, int label, int target,
                                       const Eigen::VectorXd& center, double radius,
                                       int power_iters = 25);

// Bounds used by the solvers: two-layer envelope when L == 2, otherwise
// m = -K, M = K.
CurvatureBounds margin_bounds(const Mlp& net, int label, int target, int power_iters = 25);

}  // namespace curv
