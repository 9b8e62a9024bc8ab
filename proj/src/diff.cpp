#include "curv/diff.hpp"

#include <stdexcept>

namespace curv {

namespace {

Eigen::VectorXd activation_deriv(const Mlp& net, const Eigen::VectorXd& z, int order) {
  Eigen::VectorXd d(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) d[i] = act_eval(net.activation(), z[i], order);
  return d;
}

}  // namespace

JacobianStack jacobian_stack(const Mlp& net, const ForwardTrace& trace) {
  const int L = net.depth();
  JacobianStack s;
  s.z_jac.resize(static_cast<std::size_t>(L - 1));
  s.logit_jac.resize(static_cast<std::size_t>(L - 1));

  // z_jac: forward recursion from the first layer.
  s.z_jac[0] = net.layer(0).weight;
  for (int I = 2; I <= L - 1; ++I) {
    Eigen::VectorXd sp = activation_deriv(net, trace.z[static_cast<std::size_t>(I - 2)], 1);
    s.z_jac[static_cast<std::size_t>(I - 1)] =
        net.layer(I - 1).weight * sp.asDiagonal() * s.z_jac[static_cast<std::size_t>(I - 2)];
  }

  // logit_jac: reverse accumulation from the last layer.
  s.logit_jac[static_cast<std::size_t>(L - 2)] = net.layer(L - 1).weight;
  for (int I = L - 2; I >= 1; --I) {
    Eigen::VectorXd sp = activation_deriv(net, trace.z[static_cast<std::size_t>(I)], 1);
    s.logit_jac[static_cast<std::size_t>(I - 1)] =
        s.logit_jac[static_cast<std::size_t>(I)] * sp.asDiagonal() * net.layer(I).weight;
  }
  return s;
}

Eigen::VectorXd input_gradient(const Mlp& net, const ForwardTrace& trace,
                               const Eigen::VectorXd& logit_coeffs) {
  const int L = net.depth();
  if (logit_coeffs.size() != net.class_count())
    throw std::invalid_argument("input_gradient: coefficient size mismatch");
  Eigen::VectorXd v = net.layer(L - 1).weight.transpose() * logit_coeffs;
  for (int I = L - 1; I >= 1; --I) {
    Eigen::VectorXd sp = activation_deriv(net, trace.z[static_cast<std::size_t>(I - 1)], 1);
    v = net.layer(I - 1).weight.transpose() * (sp.cwiseProduct(v));
  }
  return v;
}

Eigen::VectorXd grad_margin(const Mlp& net, const Eigen::VectorXd& x, int label, int target) {
  if (label == target) throw std::invalid_argument("grad_margin: label == target");
  ForwardTrace trace = forward(net, x);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(net.class_count());
  coeffs[label] = 1.0;
  coeffs[target] = -1.0;
  return input_gradient(net, trace, coeffs);
}

Eigen::MatrixXd hessian_margin(const Mlp& net, const Eigen::VectorXd& x, int label, int target) {
  if (label == target) throw std::invalid_argument("hessian_margin: label == target");
  const int L = net.depth();
  const int D = net.input_dim();
  ForwardTrace trace = forward(net, x);
  JacobianStack s = jacobian_stack(net, trace);

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(D, D);
  for (int I = 1; I <= L - 1; ++I) {
    const Eigen::MatrixXd& B = s.z_jac[static_cast<std::size_t>(I - 1)];
    const Eigen::MatrixXd& F = s.logit_jac[static_cast<std::size_t>(I - 1)];
    Eigen::VectorXd row = F.row(label) - F.row(target);
    Eigen::VectorXd spp = activation_deriv(net, trace.z[static_cast<std::size_t>(I - 1)], 2);
    Eigen::VectorXd coeff = row.cwiseProduct(spp);
    H.noalias() += B.transpose() * coeff.asDiagonal() * B;
  }
  return 0.5 * (H + H.transpose());
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step;
    double fp = f(xp);
    xp[i] = x[i] - step;
    double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_hessian: step must be positive");
  const Eigen::Index n = x.size();
  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd xp = x;
  double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      double v;
      if (i == j) {
        xp[i] = x[i] + step;
        double fp = f(xp);
        xp[i] = x[i] - step;
        double fm = f(xp);
        xp[i] = x[i];
        v = (fp - 2.0 * f0 + fm) / (step * step);
      } else {
        xp[i] = x[i] + step;
        xp[j] = x[j] + step;
        double fpp = f(xp);
        xp[j] = x[j] - step;
        double fpm = f(xp);
        xp[i] = x[i] - step;
        xp[j] = x[j] + step;
        double fmp = f(xp);
        xp[j] = x[j] - step;
        double fmm = f(xp);
        xp[i] = x[i];
        xp[j] = x[j];
        v = (fpp - fpm - fmp + fmm) / (4.0 * step * step);
      }
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  return H;
}

Eigen::VectorXd fd_grad_margin(const Mlp& net, const Eigen::VectorXd& x, int label, int target,
                               double step) {
  return fd_gradient([&](const Eigen::VectorXd& p) { return margin(net, p, label, target); }, x,
                     step);
}

Eigen::MatrixXd fd_hessian_margin(const Mlp& net, const Eigen::VectorXd& x, int label, int target,
                                  double step) {
  return fd_hessian([&](const Eigen::VectorXd& p) { return margin(net, p, label, target); }, x,
                    step);
}

}  // namespace curv
