#include "curv/solver.hpp"

#include <cmath>

#include "curv/diff.hpp"

namespace curv {

namespace {

constexpr double kDegenerate = 1e-12;

void check_finite(const Eigen::VectorXd& x, const char* where) {
  if (!x.allFinite()) throw NumericalFault(std::string(where) + ": divergent iterate");
}

// Halve the proposed step until the iterate stays inside the safe ball.
Eigen::VectorXd clip_to_safe(const Eigen::VectorXd& current, Eigen::VectorXd proposed,
                             const Eigen::VectorXd& x0, double safe_radius) {
  if (!std::isfinite(safe_radius)) return proposed;
  double slack = safe_radius * (1.0 + 1e-12);
  for (int halvings = 0; halvings < 60; ++halvings) {
    if ((proposed - x0).norm() <= slack) return proposed;
    proposed = current + 0.5 * (proposed - current);
  }
  return current;
}

}  // namespace

Eigen::VectorXd inner_cert(const Mlp& net, const Eigen::VectorXd& x0, int label, int target,
                           double eta, double K, int max_iters, double tol,
                           const Eigen::VectorXd* x_init, InnerTrace* trace, double safe_radius) {
  Eigen::VectorXd x = x_init ? *x_init : x0;
  const double etak = std::abs(eta * K);
  auto objective = [&](const Eigen::VectorXd& p) {
    return 0.5 * (p - x0).squaredNorm() + eta * margin(net, p, label, target);
  };
  if (trace) trace->objective.push_back(objective(x));
  for (int k = 0; k < max_iters; ++k) {
    Eigen::VectorXd g = grad_margin(net, x, label, target);
    if ((eta * g + (x - x0)).norm() < tol) break;
    Eigen::VectorXd next = (x0 + etak * x - eta * g) / (1.0 + etak);
    x = clip_to_safe(x, std::move(next), x0, safe_radius);
    check_finite(x, "inner_cert");
    if (trace) trace->objective.push_back(objective(x));
  }
  return x;
}

Eigen::VectorXd inner_attack(const Mlp& net, const Eigen::VectorXd& x0, int label, int target,
                             double eta, double K, double rho, int max_iters, double tol,
                             const Eigen::VectorXd* x_init, InnerTrace* trace) {
  if (!(K + eta > 0.0)) throw std::invalid_argument("inner_attack: K + eta must be positive");
  Eigen::VectorXd x = x_init ? *x_init : x0;
  auto objective = [&](const Eigen::VectorXd& p) {
    return margin(net, p, label, target) + 0.5 * eta * ((p - x0).squaredNorm() - rho * rho);
  };
  if (trace) trace->objective.push_back(objective(x));
  for (int k = 0; k < max_iters; ++k) {
    Eigen::VectorXd g = grad_margin(net, x, label, target);
    if ((g + eta * (x - x0)).norm() < tol) break;
    x = (K * x + eta * x0 - g) / (K + eta);
    check_finite(x, "inner_attack");
    if (trace) trace->objective.push_back(objective(x));
  }
  return x;
}

CertificateResult certify_with_bounds(const Mlp& net, const Eigen::VectorXd& x0, int label,
                                      int target, const CurvatureBounds& bounds,
                                      const SolverOptions& opts, double safe_radius) {
  CertificateResult res;
  res.bounds_used = bounds;
  res.x_cert = x0;
  res.margin_at_x = margin(net, x0, label, target);
  res.tight = std::abs(res.margin_at_x) <= opts.tight_margin_tol;

  // Misclassified (or boundary) inputs certify trivially at radius zero.
  if (res.margin_at_x <= 0.0) return res;

  // Constant margin: no decision boundary for this pair anywhere.
  if (bounds.K <= kDegenerate && bounds.M <= kDegenerate && bounds.m >= -kDegenerate) {
    Eigen::VectorXd g = grad_margin(net, x0, label, target);
    if (g.norm() <= kDegenerate) {
      res.radius = std::numeric_limits<double>::infinity();
      res.tight = false;
      return res;
    }
  }

  double eta_min = bounds.M > kDegenerate ? -1.0 / bounds.M : 0.0;
  double eta_max;
  bool bracketed = bounds.m < -kDegenerate;
  if (bracketed) {
    eta_max = -1.0 / bounds.m;
  } else {
    // Locally convex margin (m ~ 0): the dual is solvable for every eta, so
    // bracket by doubling until the inner solution crosses the boundary.
    eta_max = std::max(1.0, 2.0 * std::abs(eta_min));
    Eigen::VectorXd x = x0;
    for (int i = 0; i < 60; ++i) {
      x = inner_cert(net, x0, label, target, eta_max, bounds.K, opts.inner_iters, opts.inner_tol,
                     opts.warm_start ? &x : nullptr, nullptr, safe_radius);
      if (margin(net, x, label, target) <= 0.0) break;
      eta_max *= 2.0;
    }
  }

  double eta = 0.5 * (eta_min + eta_max);
  Eigen::VectorXd x = x0;
  double best_dist = 0.0;
  for (int outer = 0; outer < opts.outer_iters; ++outer) {
    x = inner_cert(net, x0, label, target, eta, bounds.K, opts.inner_iters, opts.inner_tol,
                   opts.warm_start ? &x : nullptr, nullptr, safe_radius);
    double f = margin(net, x, label, target);
    double dist = (x - x0).norm();
    res.dual_value = std::max(res.dual_value, 0.5 * dist * dist + eta * f);
    // The certificate only counts points still on the safe side of the
    // boundary; keep the farthest of those.
    if (f >= 0.0 && dist > best_dist) {
      best_dist = dist;
      res.x_cert = x;
      res.eta = eta;
      res.margin_at_x = f;
    }
    if (f > 0.0)
      eta_min = eta;
    else
      eta_max = eta;
    eta = 0.5 * (eta_min + eta_max);
  }
  res.radius = best_dist;
  res.tight = std::abs(res.margin_at_x) <= opts.tight_margin_tol;
  return res;
}

CertificateResult certify(const Mlp& net, const Eigen::VectorXd& x0, int label, int target,
                          const SolverOptions& opts) {
  return certify_with_bounds(net, x0, label, target,
                             margin_bounds(net, label, target, opts.power_iters), opts);
}

AttackResult attack_with_bounds(const Mlp& net, const Eigen::VectorXd& x0, int label, int target,
                                double rho, const CurvatureBounds& bounds,
                                const SolverOptions& opts) {
  if (!(rho > 0.0)) throw std::invalid_argument("attack: rho must be positive");
  AttackResult res;
  res.radius_requested = rho;
  res.x_attack = x0;
  res.margin_at_x = margin(net, x0, label, target);
  res.distance = 0.0;

  double eta_min = std::max(0.0, -bounds.m);
  const double eta_cap = opts.attack_eta_cap * (1.0 - bounds.m);
  double eta_max = eta_cap;
  double eta = 0.5 * (eta_min + eta_max);
  Eigen::VectorXd x = x0;
  const double feasible_slack = rho * (1.0 + 1e-9);

  for (int outer = 0; outer < opts.outer_iters; ++outer) {
    x = inner_attack(net, x0, label, target, eta, bounds.K, rho, opts.inner_iters, opts.inner_tol,
                     opts.warm_start ? &x : nullptr, nullptr);
    double dist = (x - x0).norm();
    if (dist <= feasible_slack) {
      double f = margin(net, x, label, target);
      if (f < res.margin_at_x) {
        res.margin_at_x = f;
        res.x_attack = x;
        res.distance = dist;
        res.eta = eta;
      }
    }
    if (dist < rho)
      eta_max = eta;
    else
      eta_min = eta;
    eta = 0.5 * (eta_min + eta_max);
  }
  res.on_boundary = std::abs(res.distance - rho) <= opts.boundary_rel_tol * rho;
  res.eta_at_max = eta_min >= eta_cap * (1.0 - 1e-9);
  return res;
}

AttackResult attack(const Mlp& net, const Eigen::VectorXd& x0, int label, int target, double rho,
                    const SolverOptions& opts) {
  return attack_with_bounds(net, x0, label, target, rho,
                            margin_bounds(net, label, target, opts.power_iters), opts);
}

CertificateResult certify_local(const Mlp& net, const Eigen::VectorXd& x0, int label, int target,
                                int refinements, const SolverOptions& opts) {
  if (net.depth() != 2)
    throw std::invalid_argument("certify_local: local bounds are two-layer only");
  CertificateResult res = certify(net, x0, label, target, opts);
  if (refinements <= 0) return res;
  if (!(res.radius > 0.0) || !std::isfinite(res.radius)) return res;

  double radius = res.radius;
  for (int k = 0; k < refinements; ++k) {
    CurvatureBounds local =
        local_two_layer_bounds(net, label, target, x0, radius, opts.power_iters);
    CertificateResult refined =
        certify_with_bounds(net, x0, label, target, local, opts, radius);
    // Inside the safe ball the margin stays positive unless the certificate
    // is already exact, so the dual value rather than the final distance
    // carries the improvement.
    double candidate = std::max(refined.radius, std::sqrt(std::max(0.0, 2.0 * refined.dual_value)));
    if (candidate > radius) {
      radius = candidate;
      res = refined;
      res.radius = radius;
    }
  }
  return res;
}

}  // namespace curv
