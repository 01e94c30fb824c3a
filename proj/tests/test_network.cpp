#include <doctest.h>

#include "prunelab/network.hpp"

using namespace prunelab;

TEST_SUITE("network") {
  TEST_CASE("minicnn-a parameter count matches hand arithmetic") {
    // conv1 16*(3*3*3)+16 = 448      conv2 32*(16*9)+32 = 4640
    // conv3 64*(32*9)+64 = 18496     conv4 32*(64*9)+32 = 18464
    // dense1 128*64+64 = 8256        dense2 64*10+10 = 650
    const Network net = build_network(minicnn_a(), 1);
    CHECK(net.param_count() == 448 + 4640 + 18496 + 18464 + 8256 + 650);
    CHECK(net.param_count() == 50954);
    CHECK(net.conv_census() == std::vector<Index>{16, 32, 64, 32});

    // the narrow variant used for gradient checking stays under 10^4
    const Network small = build_network(minicnn_a(4), 1);
    CHECK(small.param_count() == 112 + 296 + 1168 + 1160 + 528 + 170);
    CHECK(small.param_count() <= 10000);
  }

  TEST_CASE("minicnn-v stacks eight conv layers") {
    const Network net = build_network(minicnn_v(), 1);
    CHECK(net.conv_census() == std::vector<Index>{16, 16, 32, 32, 64, 64, 64, 64});
    CHECK(net.spec.shape_trace().back()[0] == 10);
  }

  TEST_CASE("initialization is deterministic per seed") {
    const Network a = build_network(minicnn_a(4), 7);
    const Network b = build_network(minicnn_a(4), 7);
    const Network c = build_network(minicnn_a(4), 8);
    for (std::size_t i = 0; i < a.weights.size(); ++i) {
      CHECK((a.weights[i].array() == b.weights[i].array()).all());
    }
    CHECK_FALSE((a.weights[0].array() == c.weights[0].array()).all());
  }

  TEST_CASE("shape trace of minicnn-a") {
    const auto trace = minicnn_a().shape_trace();
    CHECK(trace.front() == LayerShape{3, 32, 32});
    CHECK(trace[1] == LayerShape{16, 16, 16});  // stride-2 conv
    CHECK(trace[3] == LayerShape{16, 8, 8});    // pool
    CHECK(trace[11] == LayerShape{32, 2, 2});   // last pool
    CHECK(trace[12] == LayerShape{128, 1, 1});  // flatten
    CHECK(trace.back() == LayerShape{10, 1, 1});
  }

  TEST_CASE("invalid specs are rejected") {
    NetworkSpec s;
    s.input_shape = {3, 8, 8};
    s.num_classes = 10;
    s.layers = {DenseDesc{10}};  // dense before flatten
    CHECK_THROWS_AS(s.validate(), InvalidArgument);

    s.layers = {ConvDesc{4, 3, 1, 1}, FlattenDesc{}, DenseDesc{7}};  // 7 != 10 classes
    CHECK_THROWS_AS(s.validate(), InvalidArgument);

    s.layers = {FlattenDesc{}, DenseDesc{10}};  // no conv at all
    CHECK_THROWS_AS(s.validate(), InvalidArgument);

    s.layers = {ConvDesc{4, 9, 1, 0}, FlattenDesc{}, DenseDesc{10}};  // kernel > input
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
  }

  TEST_CASE("netspec text round-trips") {
    const NetworkSpec spec = minicnn_a();
    const NetworkSpec back = NetworkSpec::parse_string(spec.serialize());
    CHECK(back == spec);
  }

  TEST_CASE("netspec parse errors carry line numbers") {
    CHECK_THROWS_WITH_AS(NetworkSpec::parse_string("input 3 32 32\nclasses 10\nconv out=16\n"),
                         doctest::Contains("line 3"), InvalidArgument);
    CHECK_THROWS_WITH_AS(NetworkSpec::parse_string("input 3 32\n"), doctest::Contains("line 1"),
                         InvalidArgument);
    CHECK_THROWS_WITH_AS(
        NetworkSpec::parse_string("input 3 32 32\nclasses 10\nbatchnorm\n"),
        doctest::Contains("unknown layer"), InvalidArgument);
  }
}
