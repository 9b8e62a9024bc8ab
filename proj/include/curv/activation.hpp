#pragma once

#include <string>

namespace curv {

enum class ActivationKind { Sigmoid, Tanh, Softplus };

// Global derivative bounds of an activation: |sigma'(x)| <= g and
// h_min <= sigma''(x) <= h_max for all real x, with h = max(|h_min|, h_max).
// All supported kinds satisfy h_min <= 0 <= h_max.
struct ActivationProfile {
  double g;
  double h;
  double h_max;
  double h_min;
};

// sigma(x), sigma'(x) or sigma''(x), selected by derivative order (0, 1, 2).
double act_eval(ActivationKind kind, double x, int order);

ActivationProfile profile(ActivationKind kind);

struct SecondDerivRange {
  double lo;
  double hi;
};

// Exact extrema of sigma'' over [lo, hi], from the closed-form critical
// points clipped to the interval plus the endpoints. Infinite endpoints
// are allowed.
SecondDerivRange second_deriv_range(ActivationKind kind, double lo, double hi);

std::string to_string(ActivationKind kind);
ActivationKind activation_from_string(const std::string& name);

}  // namespace curv
