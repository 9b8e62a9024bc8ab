#include <doctest.h>

#include <cmath>

#include "curv/activation.hpp"
#include "curv/rng.hpp"

using namespace curv;

namespace {
const ActivationKind kKinds[] = {ActivationKind::Sigmoid, ActivationKind::Tanh,
                                 ActivationKind::Softplus};
}

TEST_CASE("activation point values") {
  CHECK(act_eval(ActivationKind::Sigmoid, 0.0, 0) == doctest::Approx(0.5));
  CHECK(act_eval(ActivationKind::Tanh, 0.0, 1) == doctest::Approx(1.0));
  CHECK(act_eval(ActivationKind::Softplus, 0.0, 2) == doctest::Approx(0.25));
  CHECK(act_eval(ActivationKind::Sigmoid, 0.0, 2) == doctest::Approx(0.0));
  CHECK(act_eval(ActivationKind::Softplus, 0.0, 0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("activation profiles match the tabulated constants") {
  ActivationProfile sig = profile(ActivationKind::Sigmoid);
  CHECK(sig.g == doctest::Approx(0.25));
  CHECK(sig.h == doctest::Approx(9.623e-2).epsilon(1e-3));
  CHECK(sig.h_max == doctest::Approx(9.623e-2).epsilon(1e-3));
  CHECK(sig.h_min == doctest::Approx(-9.623e-2).epsilon(1e-3));

  ActivationProfile th = profile(ActivationKind::Tanh);
  CHECK(th.g == doctest::Approx(1.0));
  CHECK(th.h == doctest::Approx(0.76981).epsilon(1e-4));
  CHECK(th.h_max == doctest::Approx(0.76981).epsilon(1e-4));
  CHECK(th.h_min == doctest::Approx(-0.76981).epsilon(1e-4));

  ActivationProfile sp = profile(ActivationKind::Softplus);
  CHECK(sp.g == doctest::Approx(1.0));
  CHECK(sp.h == doctest::Approx(0.25));
  CHECK(sp.h_max == doctest::Approx(0.25));
  CHECK(sp.h_min == 0.0);

  for (ActivationKind kind : kKinds) {
    ActivationProfile p = profile(kind);
    CHECK(p.h_min <= 0.0);
    CHECK(p.h_max >= 0.0);
    CHECK(p.h == doctest::Approx(std::max(std::abs(p.h_min), std::abs(p.h_max))));
    CHECK(p.g > 0.0);
  }
}

TEST_CASE("second derivative range") {
  constexpr double inf = std::numeric_limits<double>::infinity();
  SecondDerivRange whole = second_deriv_range(ActivationKind::Sigmoid, -inf, inf);
  CHECK(whole.lo == doctest::Approx(-9.623e-2).epsilon(1e-3));
  CHECK(whole.hi == doctest::Approx(9.623e-2).epsilon(1e-3));

  SecondDerivRange point = second_deriv_range(ActivationKind::Softplus, 0.0, 0.0);
  CHECK(point.lo == doctest::Approx(0.25));
  CHECK(point.hi == doctest::Approx(0.25));

  // No interior critical point of tanh'' in [0.1, 0.2]; dense sampling must
  // agree with the closed form.
  SecondDerivRange r = second_deriv_range(ActivationKind::Tanh, 0.1, 0.2);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const int n = 1000000;
  for (int i = 0; i <= n; ++i) {
    double x = 0.1 + 0.1 * i / n;
    double v = act_eval(ActivationKind::Tanh, x, 2);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(r.lo == doctest::Approx(lo).epsilon(1e-9));
  CHECK(r.hi == doctest::Approx(hi).epsilon(1e-9));

  CHECK_THROWS_AS(second_deriv_range(ActivationKind::Tanh, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("profiles bound sampled derivatives") {
  Rng rng(101);
  for (ActivationKind kind : kKinds) {
    ActivationProfile p = profile(kind);
    for (int i = 0; i < 100000; ++i) {
      double x = rng.uniform(-30.0, 30.0);
      CHECK(std::abs(act_eval(kind, x, 1)) <= p.g + 1e-15);
      double spp = act_eval(kind, x, 2);
      CHECK(spp >= p.h_min - 1e-15);
      CHECK(spp <= p.h_max + 1e-15);
    }
  }
}

TEST_CASE("second_deriv_range brackets samples and widens monotonically") {
  Rng rng(202);
  for (ActivationKind kind : kKinds) {
    for (int trial = 0; trial < 200; ++trial) {
      double a = rng.uniform(-5.0, 5.0);
      double b = rng.uniform(-5.0, 5.0);
      double lo = std::min(a, b), hi = std::max(a, b);
      SecondDerivRange r = second_deriv_range(kind, lo, hi);
      for (int i = 0; i < 50; ++i) {
        double x = rng.uniform(lo, hi);
        double v = act_eval(kind, x, 2);
        CHECK(v >= r.lo - 1e-12);
        CHECK(v <= r.hi + 1e-12);
      }
      SecondDerivRange wider =
          second_deriv_range(kind, lo - rng.uniform(0.0, 2.0), hi + rng.uniform(0.0, 2.0));
      CHECK(wider.lo <= r.lo + 1e-15);
      CHECK(wider.hi >= r.hi - 1e-15);
    }
  }
}

TEST_CASE("derivatives match central finite differences") {
  Rng rng(303);
  for (ActivationKind kind : kKinds) {
    for (int i = 0; i < 1000; ++i) {
      double x = rng.uniform(-8.0, 8.0);
      double d1 = (act_eval(kind, x + 1e-5, 0) - act_eval(kind, x - 1e-5, 0)) / 2e-5;
      double exact1 = act_eval(kind, x, 1);
      CHECK(std::abs(d1 - exact1) <= 1e-6 * std::max(1.0, std::abs(exact1)));

      double h = 2e-4;
      double d2 =
          (act_eval(kind, x + h, 0) - 2.0 * act_eval(kind, x, 0) + act_eval(kind, x - h, 0)) /
          (h * h);
      double exact2 = act_eval(kind, x, 2);
      CHECK(std::abs(d2 - exact2) <= 1e-6 * std::max(1.0, std::abs(exact2)));
    }
  }
}

TEST_CASE("activation names round trip") {
  for (ActivationKind kind : kKinds) CHECK(activation_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(activation_from_string("relu"), std::invalid_argument);
}
