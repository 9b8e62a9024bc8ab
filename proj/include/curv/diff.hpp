#pragma once

#include <functional>

#include "curv/network.hpp"

namespace curv {

// Chain-rule Jacobians cached for Hessian assembly. For a trace of net:
//   z_jac[I-1]     = d z^{(I)} / d x          (N_I x D),  I = 1..L-1
//   logit_jac[I-1] = d z^{(L)} / d a^{(I)}    (N_L x N_I), I = 1..L-1
struct JacobianStack {
  std::vector<Eigen::MatrixXd> z_jac;
  std::vector<Eigen::MatrixXd> logit_jac;
};

JacobianStack jacobian_stack(const Mlp& net, const ForwardTrace& trace);

// Gradient of coeffs . z^{(L)} with respect to the input, by reverse
// accumulation over the trace.
Eigen::VectorXd input_gradient(const Mlp& net, const ForwardTrace& trace,
                               const Eigen::VectorXd& logit_coeffs);

Eigen::VectorXd grad_margin(const Mlp& net, const Eigen::VectorXd& x, int label, int target);

// Exact Hessian of the margin: sum over hidden layers of
// z_jac^T diag(row ⊙ sigma''(z)) z_jac with the final-layer row taken as
// W^{(L)}_label - W^{(L)}_target.
Eigen::MatrixXd hessian_margin(const Mlp& net, const Eigen::VectorXd& x, int label, int target);

// Central-difference oracles. These evaluate the target function only, so
// they stay independent of the analytic path above.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double step);
Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x, double step);
Eigen::VectorXd fd_grad_margin(const Mlp& net, const Eigen::VectorXd& x, int label, int target,
                               double step = 1e-6);
Eigen::MatrixXd fd_hessian_margin(const Mlp& net, const Eigen::VectorXd& x, int label, int target,
                                  double step = 1e-4);

}  // namespace curv
