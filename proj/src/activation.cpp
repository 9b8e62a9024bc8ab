#include "curv/activation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace curv {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  // log(1 + exp(x)) without overflow for large positive x.
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

double act_eval(ActivationKind kind, double x, int order) {
  switch (kind) {
    case ActivationKind::Sigmoid: {
      double s = sigmoid(x);
      if (order == 0) return s;
      if (order == 1) return s * (1.0 - s);
      if (order == 2) return s * (1.0 - s) * (1.0 - 2.0 * s);
      break;
    }
    case ActivationKind::Tanh: {
      double t = std::tanh(x);
      if (order == 0) return t;
      if (order == 1) return 1.0 - t * t;
      if (order == 2) return -2.0 * t * (1.0 - t * t);
      break;
    }
    case ActivationKind::Softplus: {
      if (order == 0) return softplus(x);
      double s = sigmoid(x);
      if (order == 1) return s;
      if (order == 2) return s * (1.0 - s);
      break;
    }
  }
  throw std::invalid_argument("act_eval: derivative order must be 0, 1 or 2");
}

ActivationProfile profile(ActivationKind kind) {
  // Extrema of sigma'': sigmoid attains +-sqrt(3)/18 where S(x) = (3 -+ sqrt(3))/6,
  // tanh attains +-4*sqrt(3)/9 where tanh(x) = -+1/sqrt(3), softplus peaks at 1/4
  // at x = 0 and tends to 0 in both tails.
  constexpr double kSigmoidH = 0.096225044864937627;  // sqrt(3)/18
  constexpr double kTanhH = 0.76980035891950101;      // 4*sqrt(3)/9
  switch (kind) {
    case ActivationKind::Sigmoid:
      return {0.25, kSigmoidH, kSigmoidH, -kSigmoidH};
    case ActivationKind::Tanh:
      return {1.0, kTanhH, kTanhH, -kTanhH};
    case ActivationKind::Softplus:
      return {1.0, 0.25, 0.25, 0.0};
  }
  throw std::invalid_argument("profile: unknown activation kind");
}

SecondDerivRange second_deriv_range(ActivationKind kind, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("second_deriv_range: lo > hi");

  // Critical points of sigma'' for each kind, in increasing order.
  double crit[2];
  int n_crit = 0;
  switch (kind) {
    case ActivationKind::Sigmoid:
      // S(x) = (3 - sqrt(3))/6 and (3 + sqrt(3))/6  =>  x = -+log(2 + sqrt(3))
      crit[0] = -std::log(2.0 + std::sqrt(3.0));
      crit[1] = std::log(2.0 + std::sqrt(3.0));
      n_crit = 2;
      break;
    case ActivationKind::Tanh:
      crit[0] = -std::atanh(1.0 / std::sqrt(3.0));
      crit[1] = std::atanh(1.0 / std::sqrt(3.0));
      n_crit = 2;
      break;
    case ActivationKind::Softplus:
      crit[0] = 0.0;
      n_crit = 1;
      break;
  }

  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  auto consider = [&](double x) {
    double v = act_eval(kind, x, 2);
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  };
  consider(lo);
  consider(hi);
  for (int i = 0; i < n_crit; ++i) {
    if (crit[i] > lo && crit[i] < hi) consider(crit[i]);
  }
  return {vmin, vmax};
}

std::string to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Sigmoid:
      return "sigmoid";
    case ActivationKind::Tanh:
      return "tanh";
    case ActivationKind::Softplus:
      return "softplus";
  }
  return "unknown";
}

ActivationKind activation_from_string(const std::string& name) {
  if (name == "sigmoid") return ActivationKind::Sigmoid;
  if (name == "tanh") return ActivationKind::Tanh;
  if (name == "softplus") return ActivationKind::Softplus;
  throw std::invalid_argument("unknown activation: " + name);
}

}  // namespace curv
