#include <doctest.h>

#include <random>

#include "prunelab/grad_check.hpp"
#include "prunelab/tensor_ops.hpp"

using namespace prunelab;

namespace {

Tensor random_batch(Index b, const LayerShape& shape, std::uint64_t seed, double scale = 1.0) {
  Tensor t({b, shape[0], shape[1], shape[2]});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  for (Index i = 0; i < t.size(); ++i) t[i] = g(rng);
  return t;
}

std::vector<int> random_labels(Index b, Index classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, static_cast<int>(classes) - 1);
  std::vector<int> labels(static_cast<std::size_t>(b));
  for (auto& l : labels) l = d(rng);
  return labels;
}

NetworkSpec tiny_spec() {
  NetworkSpec s;
  s.input_shape = {2, 6, 6};
  s.num_classes = 4;
  s.layers = {ConvDesc{3, 3, 1, 1}, ReluDesc{}, MaxPoolDesc{2, 2},
              ConvDesc{4, 3, 1, 1}, ReluDesc{}, FlattenDesc{}, DenseDesc{4}};
  s.validate();
  return s;
}

}  // namespace

TEST_SUITE("autodiff") {
  TEST_CASE("all-zero parameters give uniform logits and loss ln(num_classes)") {
    Network net = build_network(minicnn_a(4), 1);
    for (auto& w : net.weights) w.array().setZero();
    for (auto& b : net.biases) b.array().setZero();
    const Tensor batch = random_batch(3, net.spec.input_shape, 5);
    Tape tape = forward(net, batch, random_labels(3, 10, 6));
    CHECK(tape.loss() == doctest::Approx(std::log(10.0)).epsilon(1e-12));
  }

  TEST_CASE("identity 1x1 conv on all-ones input records an all-ones activation") {
    NetworkSpec s;
    s.input_shape = {1, 2, 2};
    s.num_classes = 2;
    s.layers = {ConvDesc{1, 1, 1, 0}, FlattenDesc{}, DenseDesc{2}};
    Network net = build_network(s, 1);
    net.weights[0].array().setConstant(1.0);
    net.biases[0].array().setZero();
    Tensor batch = Tensor::constant({1, 1, 2, 2}, 1.0);
    Tape tape = forward(net, batch, std::vector<int>{0});
    const Tensor& act = tape.conv_activation(0);
    for (Index i = 0; i < act.size(); ++i) CHECK(act[i] == 1.0);
  }

  TEST_CASE("random nets have finite positive loss") {
    Network net = build_network(tiny_spec(), 3);
    Tape tape = forward(net, random_batch(5, net.spec.input_shape, 8), random_labels(5, 4, 9));
    CHECK(std::isfinite(tape.loss()));
    CHECK(tape.loss() > 0.0);
  }

  TEST_CASE("analytic gradients match central differences") {
    Network net = build_network(tiny_spec(), 11);
    const Tensor batch = random_batch(2, net.spec.input_shape, 12);
    const auto labels = random_labels(2, 4, 13);
    const GradCheckReport rep = grad_check(net, batch, labels, 1e-5, 1e-4);
    INFO("max rel error ", rep.max_rel_error, " at ", rep.worst_param);
    CHECK(rep.passed);
    CHECK(rep.params_checked == net.param_count());
  }

  TEST_CASE("a coarse step makes the finite-difference oracle fail") {
    Network net = build_network(tiny_spec(), 11);
    const Tensor batch = random_batch(2, net.spec.input_shape, 12);
    const auto labels = random_labels(2, 4, 13);
    const GradCheckReport rep = grad_check(net, batch, labels, 1e-1, 1e-4);
    CHECK_FALSE(rep.passed);
  }

  TEST_CASE("a linear-only network passes the oracle tightly") {
    NetworkSpec s;
    s.input_shape = {2, 4, 4};
    s.num_classes = 3;
    s.layers = {ConvDesc{2, 2, 2, 0}, FlattenDesc{}, DenseDesc{3}};
    Network net = build_network(s, 21);
    const Tensor batch = random_batch(3, s.input_shape, 22, 0.5);
    const auto labels = random_labels(3, 3, 23);
    const GradCheckReport rep = grad_check(net, batch, labels, 1e-5, 1e-8);
    INFO("max rel error ", rep.max_rel_error);
    CHECK(rep.passed);
  }

  TEST_CASE("parameters with no path to the loss get exactly zero gradient") {
    NetworkSpec s;
    s.input_shape = {1, 4, 4};
    s.num_classes = 2;
    s.layers = {ConvDesc{2, 3, 1, 1}, ReluDesc{}, FlattenDesc{}, DenseDesc{2}};
    Network net = build_network(s, 31);
    // kill every dense column fed by conv filter 1 (its 4x4 block)
    auto W = net.weights[1].matrix(2, 32);
    W.block(0, 16, 2, 16).setZero();
    Tape tape = forward(net, random_batch(3, s.input_shape, 32), random_labels(3, 2, 33));
    const BackwardResult back = backward(tape);
    const Tensor& gw = back.grads.weights[0];
    const Tensor& gb = back.grads.biases[0];
    for (Index i = gw.size() / 2; i < gw.size(); ++i) CHECK(gw[i] == 0.0);
    CHECK(gb[1] == 0.0);
    // filter 0 still learns
    double live = 0;
    for (Index i = 0; i < gw.size() / 2; ++i) live += std::abs(gw[i]);
    CHECK(live > 0.0);
  }

  TEST_CASE("a dead relu filter blocks its conv gradients") {
    NetworkSpec s;
    s.input_shape = {1, 4, 4};
    s.num_classes = 2;
    s.layers = {ConvDesc{2, 3, 1, 1}, ReluDesc{}, FlattenDesc{}, DenseDesc{2}};
    Network net = build_network(s, 41);
    net.biases[0][1] = -1e6;  // filter 1 output is negative everywhere
    Tape tape = forward(net, random_batch(4, s.input_shape, 42), random_labels(4, 2, 43));
    const BackwardResult back = backward(tape);
    const Tensor& gw = back.grads.weights[0];
    for (Index i = gw.size() / 2; i < gw.size(); ++i) CHECK(gw[i] == 0.0);
    CHECK(back.grads.biases[0][1] == 0.0);
  }

  TEST_CASE("scaling the loss scales every gradient exactly") {
    Network net = build_network(tiny_spec(), 51);
    const Tensor batch = random_batch(2, net.spec.input_shape, 52);
    const auto labels = random_labels(2, 4, 53);
    Tape t1 = forward(net, batch, labels);
    Tape t2 = forward(net, batch, labels);
    const BackwardResult g1 = backward(t1, 1.0);
    const BackwardResult g2 = backward(t2, 2.0);
    for (std::size_t p = 0; p < g1.grads.weights.size(); ++p)
      for (Index i = 0; i < g1.grads.weights[p].size(); ++i)
        CHECK(g2.grads.weights[p][i] == 2.0 * g1.grads.weights[p][i]);
  }

  TEST_CASE("a consumed tape cannot run backward twice") {
    Network net = build_network(tiny_spec(), 61);
    Tape tape = forward(net, random_batch(2, net.spec.input_shape, 62), random_labels(2, 4, 63));
    (void)backward(tape);
    CHECK_THROWS_AS(backward(tape), StateError);
  }

  TEST_CASE("shape and finiteness violations are rejected") {
    Network net = build_network(tiny_spec(), 71);
    CHECK_THROWS_AS(forward(net, random_batch(2, {2, 5, 5}, 72), random_labels(2, 4, 73)),
                    InvalidArgument);
    Tensor bad = random_batch(2, net.spec.input_shape, 74);
    bad[7] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(forward(net, bad, random_labels(2, 4, 75)), InvalidArgument);
    CHECK_THROWS_AS(forward(net, random_batch(2, net.spec.input_shape, 76),
                            std::vector<int>{0, 9}),
                    InvalidArgument);  // label 9 out of range for 4 classes
  }
}
