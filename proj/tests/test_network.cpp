#include <doctest.h>

#include "curv/network.hpp"
#include "curv/rng.hpp"
#include "support/oracles.hpp"

using namespace curv;

TEST_CASE("forward on degenerate two-layer nets") {
  // Zero weights and biases: z1 = 0, logits = W2 sigma(0) + b2.
  std::vector<DenseLayer> layers(2);
  layers[0].weight = Eigen::MatrixXd::Zero(4, 3);
  layers[0].bias = Eigen::VectorXd::Zero(4);
  layers[1].weight = Eigen::MatrixXd::Random(2, 4);
  layers[1].bias = Eigen::VectorXd::Random(2);
  Mlp net(layers, ActivationKind::Sigmoid);

  Eigen::VectorXd x = Eigen::VectorXd::Random(3);
  ForwardTrace trace = forward(net, x);
  CHECK(trace.z[0].isZero(0.0));
  Eigen::VectorXd expected =
      layers[1].weight * Eigen::VectorXd::Constant(4, 0.5) + layers[1].bias;
  CHECK((trace.logits() - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  // One-input sigmoid net with unit hidden weight and rows [1], [0].
  std::vector<DenseLayer> tiny(2);
  tiny[0].weight = Eigen::MatrixXd::Constant(1, 1, 1.0);
  tiny[0].bias = Eigen::VectorXd::Zero(1);
  tiny[1].weight.resize(2, 1);
  tiny[1].weight << 1.0, 0.0;
  tiny[1].bias = Eigen::VectorXd::Zero(2);
  Mlp tiny_net(tiny, ActivationKind::Sigmoid);
  ForwardTrace t2 = forward(tiny_net, Eigen::VectorXd::Zero(1));
  CHECK(t2.logits()[0] == doctest::Approx(0.5));
  CHECK(t2.logits()[1] == doctest::Approx(0.0));
}

TEST_CASE("forward matches a naive reimplementation") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Mlp net = oracles::random_net(rng, {5, 7, 6, 4}, ActivationKind::Tanh, 1.5);
    Eigen::VectorXd x = rng.normal_vector(5);
    Eigen::VectorXd got = forward(net, x).logits();
    Eigen::VectorXd want = oracles::naive_forward(net, x);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("forward trace satisfies the layer recurrence") {
  Rng rng(12);
  Mlp net = oracles::random_net(rng, {4, 6, 5, 3}, ActivationKind::Softplus, 1.0);
  Eigen::VectorXd x = rng.normal_vector(4);
  ForwardTrace trace = forward(net, x);
  REQUIRE(trace.z.size() == 3);
  REQUIRE(trace.a.size() == 3);
  CHECK((trace.a[0] - x).isZero(0.0));
  for (std::size_t i = 0; i + 1 < trace.z.size(); ++i) {
    for (Eigen::Index j = 0; j < trace.z[i].size(); ++j)
      CHECK(trace.a[i + 1][j] ==
            doctest::Approx(act_eval(net.activation(), trace.z[i][j], 0)).epsilon(1e-15));
  }
}

TEST_CASE("forward is deterministic") {
  Rng rng(13);
  Mlp net = oracles::random_net(rng, {6, 8, 4}, ActivationKind::Sigmoid, 2.0);
  Eigen::VectorXd x = rng.normal_vector(6);
  ForwardTrace a = forward(net, x);
  ForwardTrace b = forward(net, x);
  CHECK((a.logits() - b.logits()).isZero(0.0));
  for (std::size_t i = 0; i < a.z.size(); ++i) CHECK((a.z[i] - b.z[i]).isZero(0.0));
}

TEST_CASE("margin basics") {
  Rng rng(14);
  std::vector<DenseLayer> layers(2);
  layers[0].weight = Eigen::MatrixXd::Random(5, 4);
  layers[0].bias = Eigen::VectorXd::Random(5);
  layers[1].weight.resize(3, 5);
  layers[1].weight.row(0) = Eigen::RowVectorXd::Random(5);
  layers[1].weight.row(1) = layers[1].weight.row(0);
  layers[1].weight.row(2) = Eigen::RowVectorXd::Random(5);
  layers[1].bias.resize(3);
  layers[1].bias << 0.7, 0.7, -0.1;
  Mlp net(layers, ActivationKind::Tanh);

  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd x = rng.normal_vector(4);
    CHECK(margin(net, x, 0, 1) == doctest::Approx(0.0));  // identical rows and biases
    CHECK(margin(net, x, 0, 2) == doctest::Approx(-margin(net, x, 2, 0)));
    Eigen::VectorXd logits = forward(net, x).logits();
    CHECK(margin(net, x, 2, 1) == doctest::Approx(logits[2] - logits[1]));
  }
  CHECK_THROWS_AS(margin(net, Eigen::VectorXd::Zero(4), 1, 1), std::invalid_argument);
}

TEST_CASE("runner up selection") {
  Eigen::VectorXd a(3);
  a << 3.0, 1.0, 2.0;
  CHECK(runner_up(a) == 2);

  Eigen::VectorXd b(2);
  b << 1.0, 1.0;
  CHECK(runner_up(b) == 1);  // tie: argmax is index 0, only other class is 1

  Rng rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd logits = rng.normal_vector(6);
    int got = runner_up(logits);
    // brute force: best index excluding argmax
    int best = 0;
    for (int i = 1; i < 6; ++i)
      if (logits[i] > logits[best]) best = i;
    int second = -1;
    for (int i = 0; i < 6; ++i) {
      if (i == best) continue;
      if (second < 0 || logits[i] > logits[second]) second = i;
    }
    CHECK(got == second);
    CHECK(got != best);
    CHECK(top_other(logits, best) == second);
  }
}

TEST_CASE("mlp construction validates shapes") {
  std::vector<DenseLayer> layers(2);
  layers[0].weight = Eigen::MatrixXd::Zero(4, 3);
  layers[0].bias = Eigen::VectorXd::Zero(4);
  layers[1].weight = Eigen::MatrixXd::Zero(2, 5);  // chain broken: 5 != 4
  layers[1].bias = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(Mlp(layers, ActivationKind::Sigmoid), std::invalid_argument);

  layers[1].weight = Eigen::MatrixXd::Zero(2, 4);
  layers[1].bias = Eigen::VectorXd::Zero(3);  // rows != bias
  CHECK_THROWS_AS(Mlp(layers, ActivationKind::Sigmoid), std::invalid_argument);

  layers[1].bias = Eigen::VectorXd::Zero(2);
  layers[1].weight(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(Mlp(layers, ActivationKind::Sigmoid), std::invalid_argument);

  layers[1].weight(0, 0) = 0.0;
  Mlp ok(layers, ActivationKind::Sigmoid);
  CHECK(ok.depth() == 2);
  CHECK(ok.input_dim() == 3);
  CHECK(ok.class_count() == 2);
  CHECK_THROWS_AS(forward(ok, Eigen::VectorXd::Zero(7)), std::invalid_argument);

  CHECK_THROWS_AS(Mlp(std::vector<DenseLayer>(1, layers[0]), ActivationKind::Sigmoid),
                  std::invalid_argument);
}
