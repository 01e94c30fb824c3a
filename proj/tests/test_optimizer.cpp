#include <doctest.h>

#include "prunelab/optimizer.hpp"

using namespace prunelab;

namespace {

// one scalar "network": a 1x1 dense weight, bias frozen at zero gradient
Network scalar_net(double theta) {
  NetworkSpec s;
  s.input_shape = {1, 1, 1};
  s.num_classes = 2;
  s.layers = {ConvDesc{1, 1, 1, 0}, FlattenDesc{}, DenseDesc{2}};
  Network net = build_network(s, 1);
  net.weights[0][0] = theta;
  return net;
}

ParamGrads grads_like(const Network& net, double conv_grad) {
  ParamGrads g;
  for (const auto& w : net.weights) g.weights.emplace_back(w.shape());
  for (const auto& b : net.biases) g.biases.emplace_back(b.shape());
  g.weights[0][0] = conv_grad;
  return g;
}

}  // namespace

TEST_SUITE("optimizer") {
  TEST_CASE("plain SGD moves by -lr*g") {
    Network net = scalar_net(0.0);
    OptimizerState st = make_optimizer(net, 0.1, 0.0);
    sgd_step(net, grads_like(net, 1.0), st);
    CHECK(net.weights[0][0] == doctest::Approx(-0.1).epsilon(1e-15));
  }

  TEST_CASE("two momentum steps follow the velocity recurrence") {
    Network net = scalar_net(0.0);
    OptimizerState st = make_optimizer(net, 0.1, 0.9);
    sgd_step(net, grads_like(net, 1.0), st);
    CHECK(net.weights[0][0] == doctest::Approx(-0.1).epsilon(1e-15));
    sgd_step(net, grads_like(net, 1.0), st);
    // v2 = 0.9*(-0.1) - 0.1 = -0.19; theta = -0.1 + (-0.19) = -0.29
    CHECK(net.weights[0][0] == doctest::Approx(-0.29).epsilon(1e-15));
  }

  TEST_CASE("zero gradient still moves by the carried velocity") {
    Network net = scalar_net(0.0);
    OptimizerState st = make_optimizer(net, 0.1, 0.9);
    sgd_step(net, grads_like(net, 1.0), st);
    sgd_step(net, grads_like(net, 0.0), st);
    // v2 = 0.9*(-0.1) = -0.09
    CHECK(net.weights[0][0] == doctest::Approx(-0.19).epsilon(1e-15));
  }

  TEST_CASE("bad momentum and mismatched shapes are rejected") {
    Network net = scalar_net(0.0);
    CHECK_THROWS_AS(make_optimizer(net, 0.1, 1.0), InvalidArgument);
    CHECK_THROWS_AS(make_optimizer(net, 0.0, 0.9), InvalidArgument);
    OptimizerState st = make_optimizer(net, 0.1, 0.9);
    ParamGrads g = grads_like(net, 1.0);
    g.weights[0] = Tensor({2, 1, 1, 1});
    CHECK_THROWS_AS(sgd_step(net, g, st), InvalidArgument);
  }
}
