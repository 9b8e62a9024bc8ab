#include <doctest.h>

#include "curv/curvature.hpp"
#include "curv/diff.hpp"
#include "curv/rng.hpp"
#include "support/oracles.hpp"

using namespace curv;

TEST_CASE("power iteration on known matrices") {
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  CHECK(power_iteration(eye, 25).magnitude == doctest::Approx(1.0));

  Eigen::VectorXd d(3);
  d << 3.0, 1.0, -5.0;
  CHECK(power_iteration(d.asDiagonal(), 200).magnitude == doctest::Approx(5.0));

  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 4);
  PowerResult z = power_iteration(zero, 25);
  CHECK(z.magnitude == 0.0);
  CHECK(z.vector.norm() == doctest::Approx(1.0));

  CHECK_THROWS_AS(power_iteration(eye, 0), std::invalid_argument);
}

TEST_CASE("power iteration matches a dense eigensolver") {
  Rng rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    Eigen::MatrixXd B(50, 50);
    for (Eigen::Index r = 0; r < 50; ++r)
      for (Eigen::Index c = 0; c < 50; ++c) B(r, c) = rng.normal();
    Eigen::MatrixXd A;
    if (trial % 2 == 0) {
      A = B.transpose() * B;  // PSD, like the envelope and Gram matrices
    } else {
      // Indefinite with a planted dominant eigenpair.
      Eigen::VectorXd u = rng.unit_vector(50);
      A = 0.5 * (B + B.transpose()) - 14.0 * u * u.transpose();
    }
    double want = oracles::dense_abs_max_eig(A);
    CHECK(power_iteration(A, 500).magnitude == doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("power iteration is deterministic") {
  Rng rng(32);
  Eigen::MatrixXd B(20, 20);
  for (Eigen::Index r = 0; r < 20; ++r)
    for (Eigen::Index c = 0; c < 20; ++c) B(r, c) = rng.normal();
  Eigen::MatrixXd A = 0.5 * (B + B.transpose());
  PowerResult a = power_iteration(A, 25);
  PowerResult b = power_iteration(A, 25);
  CHECK(a.magnitude == b.magnitude);
  CHECK((a.vector - b.vector).isZero(0.0));
}

TEST_CASE("spectral norm against SVD") {
  Rng rng(33);
  Eigen::MatrixXd W(12, 20);
  for (Eigen::Index r = 0; r < 12; ++r)
    for (Eigen::Index c = 0; c < 20; ++c) W(r, c) = rng.normal();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(W);
  CHECK(spectral_norm(W, 500) == doctest::Approx(svd.singularValues()[0]).epsilon(1e-10));
}

TEST_CASE("two layer bounds: degenerate nets") {
  Rng rng(34);
  std::vector<DenseLayer> layers = oracles::random_net(rng, {4, 6, 3}, ActivationKind::Sigmoid, 1.0).layers();
  layers[1].weight.row(1) = layers[1].weight.row(0);
  Mlp net(layers, ActivationKind::Sigmoid);
  CurvatureBounds b = two_layer_bounds(net, 0, 1);
  CHECK(b.m == 0.0);
  CHECK(b.M == 0.0);
  CHECK(deep_bound(net, 0, 1) == 0.0);

  // Softplus with nonnegative row difference: h_min = 0 makes N vanish.
  std::vector<DenseLayer> sp = layers;
  sp[1].weight.row(0) = sp[1].weight.row(1).cwiseAbs() + Eigen::RowVectorXd::Constant(6, 0.1);
  Mlp sp_net(sp, ActivationKind::Softplus);
  CurvatureBounds sb = two_layer_bounds(sp_net, 0, 1);
  CHECK(sb.m == 0.0);
  CHECK(sb.M > 0.0);

  Mlp deep = oracles::random_net(rng, {4, 5, 5, 3}, ActivationKind::Tanh, 1.0);
  CHECK_THROWS_AS(two_layer_bounds(deep, 0, 1), std::invalid_argument);
}

TEST_CASE("two layer bounds contain sampled hessian eigenvalues") {
  Rng rng(35);
  Mlp net = oracles::random_net(rng, {5, 6, 4}, ActivationKind::Sigmoid, 2.0);
  CurvatureBounds b = two_layer_bounds(net, 0, 2, 500);
  for (int i = 0; i < 10000; ++i) {
    double scale = (i % 4 == 0) ? 10.0 : 1.0;
    Eigen::VectorXd x = scale * rng.normal_vector(5);
    oracles::EigRange r = oracles::dense_eig_range(hessian_margin(net, x, 0, 2));
    CHECK(r.lo >= b.m - 1e-9);
    CHECK(r.hi <= b.M + 1e-9);
  }
}

TEST_CASE("deep bound hand example") {
  // softplus, ||W1|| = 2, max |wdiff| = 3: K = 0.25 * 4 * 3 = 3.
  std::vector<DenseLayer> layers(2);
  layers[0].weight = Eigen::MatrixXd::Constant(1, 1, 2.0);
  layers[0].bias = Eigen::VectorXd::Zero(1);
  layers[1].weight.resize(2, 1);
  layers[1].weight << 3.0, 0.0;
  layers[1].bias = Eigen::VectorXd::Zero(2);
  Mlp net(layers, ActivationKind::Softplus);
  CHECK(deep_bound(net, 0, 1) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("deep bound invariances") {
  Rng rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    Mlp net = oracles::random_net(rng, {4, 6, 5, 3}, ActivationKind::Tanh, 1.5);
    double k01 = deep_bound(net, 0, 1);
    CHECK(deep_bound(net, 1, 0) == doctest::Approx(k01).epsilon(1e-12));

    // Scale the final-layer row difference by c: K scales by exactly c.
    double c = 0.25 + 3.0 * rng.uniform01();
    std::vector<DenseLayer> layers = net.layers();
    Eigen::RowVectorXd wy = layers.back().weight.row(0);
    Eigen::RowVectorXd wt = layers.back().weight.row(1);
    layers.back().weight.row(0) = wt + c * (wy - wt);
    Mlp scaled(layers, ActivationKind::Tanh);
    CHECK(deep_bound(scaled, 0, 1) == doctest::Approx(c * k01).epsilon(1e-10));
  }
}

TEST_CASE("two layer bounds are tighter than the deep bound") {
  Rng rng(37);
  for (int trial = 0; trial < 40; ++trial) {
    ActivationKind kind =
        trial % 3 == 0 ? ActivationKind::Sigmoid
                       : (trial % 3 == 1 ? ActivationKind::Tanh : ActivationKind::Softplus);
    Mlp net = oracles::random_net(rng, {4, 8, 4}, kind, 0.5 + 2.0 * rng.uniform01());
    CurvatureBounds b = two_layer_bounds(net, 0, 1, 500);
    double slack = 1e-12 * std::max(1.0, b.K);
    CHECK(b.m <= 0.0);
    CHECK(b.M >= 0.0);
    CHECK(b.M <= b.K + slack);
    CHECK(-b.K <= b.m + slack);
    CHECK(b.K >= std::max(std::abs(b.m), std::abs(b.M)) - slack);
  }
}

TEST_CASE("deep bound caps the sampled hessian spectral norm") {
  Rng rng(38);
  Mlp net = oracles::random_net(rng, {4, 6, 5, 3}, ActivationKind::Sigmoid, 1.5);
  double K = deep_bound(net, 0, 1, 500);
  for (int i = 0; i < 10000; ++i) {
    double scale = (i % 5 == 0) ? 100.0 : ((i % 3 == 0) ? 10.0 : 1.0);
    Eigen::VectorXd x = scale * rng.normal_vector(4);
    CHECK(oracles::dense_abs_max_eig(hessian_margin(net, x, 0, 1)) <= K + 1e-9);
  }
}

TEST_CASE("local bounds nest inside global and saturate at large radius") {
  Rng rng(39);
  for (int trial = 0; trial < 10; ++trial) {
    Mlp net = oracles::random_net(rng, {4, 7, 3}, ActivationKind::Sigmoid, 2.0);
    Eigen::VectorXd x0 = rng.normal_vector(4);
    CurvatureBounds global = two_layer_bounds(net, 0, 1, 500);

    CurvatureBounds point = local_two_layer_bounds(net, 0, 1, x0, 0.0, 500);
    CHECK(point.m >= global.m - 1e-12);
    CHECK(point.M <= global.M + 1e-12);
    CHECK(point.m <= 0.0);
    CHECK(point.M >= 0.0);

    CurvatureBounds huge = local_two_layer_bounds(net, 0, 1, x0, 1e6, 500);
    CHECK(huge.m == doctest::Approx(global.m).epsilon(1e-9));
    CHECK(huge.M == doctest::Approx(global.M).epsilon(1e-9));
  }
  Mlp net = oracles::random_net(rng, {4, 7, 3}, ActivationKind::Sigmoid, 2.0);
  CHECK_THROWS_AS(local_two_layer_bounds(net, 0, 1, Eigen::VectorXd::Zero(4), -1.0),
                  std::invalid_argument);
}

TEST_CASE("local bounds are monotone in the radius") {
  Rng rng(40);
  for (int trial = 0; trial < 10; ++trial) {
    Mlp net = oracles::random_net(rng, {4, 6, 3}, ActivationKind::Tanh, 1.5);
    Eigen::VectorXd x0 = rng.normal_vector(4);
    double prev_m = 0.0, prev_M = 0.0;
    bool first = true;
    for (double rho : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0}) {
      CurvatureBounds b = local_two_layer_bounds(net, 0, 1, x0, rho, 500);
      if (!first) {
        CHECK(b.m <= prev_m + 1e-9);
        CHECK(b.M >= prev_M - 1e-9);
      }
      prev_m = b.m;
      prev_M = b.M;
      first = false;
    }
  }
}

TEST_CASE("local bounds contain eigenvalues sampled inside the ball") {
  Rng rng(41);
  Mlp net = oracles::random_net(rng, {5, 6, 4}, ActivationKind::Sigmoid, 2.0);
  Eigen::VectorXd x0 = rng.normal_vector(5);
  const double rho = 0.5;
  CurvatureBounds b = local_two_layer_bounds(net, 0, 1, x0, rho, 500);
  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXd dir = rng.unit_vector(5);
    Eigen::VectorXd x = x0 + rho * rng.uniform01() * dir;
    oracles::EigRange r = oracles::dense_eig_range(hessian_margin(net, x, 0, 1));
    CHECK(r.lo >= b.m - 1e-9);
    CHECK(r.hi <= b.M + 1e-9);
  }
}

TEST_CASE("margin_bounds switches between theorem variants") {
  Rng rng(42);
  Mlp two = oracles::random_net(rng, {4, 6, 3}, ActivationKind::Sigmoid, 1.0);
  CurvatureBounds b2 = margin_bounds(two, 0, 1);
  CHECK(b2.M < b2.K);  // theorem-3 envelope is strictly tighter here

  Mlp deep = oracles::random_net(rng, {4, 5, 5, 3}, ActivationKind::Sigmoid, 1.0);
  CurvatureBounds b3 = margin_bounds(deep, 0, 1);
  CHECK(b3.M == b3.K);
  CHECK(b3.m == -b3.K);
}
