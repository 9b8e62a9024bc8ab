#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "curv/curvature.hpp"

namespace curv {

// Raised when an iterate turns non-finite; cannot happen inside the convex
// eta range in exact arithmetic.
class NumericalFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  int outer_iters = 30;  // bisection updates on eta
  int inner_iters = 20;  // majorization-minimization updates per eta
  double inner_tol = 1e-5;
  bool warm_start = true;  // keep x across bisection steps; false re-centers at x0
  double tight_margin_tol = 1e-3;
  double boundary_rel_tol = 1e-3;
  int power_iters = 25;
  double attack_eta_cap = 20.0;  // eta_max = cap * (1 - m)
};

struct CertificateResult {
  double radius = 0;  // certified l2 radius, ||x_cert - x0|| for the global solve
  Eigen::VectorXd x_cert;
  double eta = 0;
  double margin_at_x = 0;
  bool tight = false;  // |margin_at_x| within tolerance: radius is the exact distance
  CurvatureBounds bounds_used;
  double dual_value = 0;  // best converged inner objective over the bisection
};

struct AttackResult {
  Eigen::VectorXd x_attack;
  double eta = 0;
  double margin_at_x = 0;
  bool on_boundary = false;  // | ||x - x0|| - rho | within tolerance: margin is optimal
  double radius_requested = 0;
  double distance = 0;
  bool eta_at_max = false;  // bisection ended pinned at the upper eta limit
};

struct InnerTrace {
  std::vector<double> objective;  // true dual objective after every MM update
};

constexpr double kNoSafeRadius = std::numeric_limits<double>::infinity();

// One MM solve of min_x 1/2 ||x - x0||^2 + eta * margin(x). Steps leaving
// the safe ball around x0 are halved until they stay inside.
Eigen::VectorXd inner_cert(const Mlp& net, const Eigen::VectorXd& x0, int label, int target,
                           double eta, double K, int max_iters = 20, double tol = 1e-5,
                           const Eigen::VectorXd* x_init = nullptr, InnerTrace* trace = nullptr,
                           double safe_radius = kNoSafeRadius);

// One MM solve of min_x margin(x) + eta/2 (||x - x0||^2 - rho^2).
Eigen::VectorXd inner_attack(const Mlp& net, const Eigen::VectorXd& x0, int label, int target,
                             double eta, double K, double rho, int max_iters = 20,
                             double tol = 1e-5, const Eigen::VectorXd* x_init = nullptr,
                             InnerTrace* trace = nullptr);

CertificateResult certify(const Mlp& net, const Eigen::VectorXd& x0, int label, int target,
                          const SolverOptions& opts = {});
CertificateResult certify_with_bounds(const Mlp& net, const Eigen::VectorXd& x0, int label,
                                      int target, const CurvatureBounds& bounds,
                                      const SolverOptions& opts = {},
                                      double safe_radius = kNoSafeRadius);

AttackResult attack(const Mlp& net, const Eigen::VectorXd& x0, int label, int target, double rho,
                    const SolverOptions& opts = {});
AttackResult attack_with_bounds(const Mlp& net, const Eigen::VectorXd& x0, int label, int target,
                                double rho, const CurvatureBounds& bounds,
                                const SolverOptions& opts = {});

// Two-layer refinement: re-solve with local bounds inside the previously
// certified ball, growing the radius; non-decreasing across refinements.
CertificateResult certify_local(const Mlp& net, const Eigen::VectorXd& x0, int label, int target,
                                int refinements = 5, const SolverOptions& opts = {});

}  // namespace curv
