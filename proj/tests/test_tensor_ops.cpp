#include <doctest.h>

#include <cstring>
#include <random>

#include "prunelab/tensor_ops.hpp"

using namespace prunelab;

namespace {

// independent reference: plain bounds-checked loops, no shared index logic
Tensor conv_reference(const Tensor& in, const Tensor& w, const Tensor& b, Index stride,
                      Index pad) {
  const Index B = in.extent(0), Ci = in.extent(1), H = in.extent(2), W = in.extent(3);
  const Index Co = w.extent(0), K = w.extent(2);
  const Index Ho = (H + 2 * pad - K) / stride + 1;
  const Index Wo = (W + 2 * pad - K) / stride + 1;
  Tensor out({B, Co, Ho, Wo});
  for (Index bi = 0; bi < B; ++bi)
    for (Index co = 0; co < Co; ++co)
      for (Index oy = 0; oy < Ho; ++oy)
        for (Index ox = 0; ox < Wo; ++ox) {
          double acc = b[co];
          for (Index ci = 0; ci < Ci; ++ci)
            for (Index ky = 0; ky < K; ++ky)
              for (Index kx = 0; kx < K; ++kx) {
                const Index iy = oy * stride - pad + ky;
                const Index ix = ox * stride - pad + kx;
                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                acc += w.at({co, ci, ky, kx}) * in.at({bi, ci, iy, ix});
              }
          out.at({bi, co, oy, ox}) = acc;
        }
  return out;
}

Tensor random_tensor(std::vector<Index> shape, std::uint64_t seed, double scale = 1.0) {
  Tensor t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  for (Index i = 0; i < t.size(); ++i) t[i] = g(rng);
  return t;
}

}  // namespace

TEST_SUITE("tensor_ops") {
  TEST_CASE("identity 1x1 conv maps ones to ones") {
    Tensor in = Tensor::constant({2, 1, 4, 4}, 1.0);
    Tensor w = Tensor::constant({1, 1, 1, 1}, 1.0);
    Tensor b({1});
    Tensor out = conv2d_forward(in, w, b, 1, 0);
    CHECK(out.shape() == std::vector<Index>{2, 1, 4, 4});
    for (Index i = 0; i < out.size(); ++i) CHECK(out[i] == 1.0);
  }

  TEST_CASE("conv matches the reference loops across strides and paddings") {
    for (const auto& [stride, pad] : {std::pair<Index, Index>{1, 1}, {2, 1}, {1, 0}, {2, 0}, {3, 2}}) {
      const Tensor in = random_tensor({2, 3, 9, 7}, 42 + stride * 10 + pad);
      const Tensor w = random_tensor({4, 3, 3, 3}, 7);
      const Tensor b = random_tensor({4}, 9);
      const Tensor got = conv2d_forward(in, w, b, stride, pad);
      const Tensor want = conv_reference(in, w, b, stride, pad);
      REQUIRE(got.shape() == want.shape());
      double max_err = 0;
      for (Index i = 0; i < got.size(); ++i) max_err = std::max(max_err, std::abs(got[i] - want[i]));
      CHECK(max_err < 1e-12);
    }
  }

  TEST_CASE("conv results do not depend on the worker count") {
    const Tensor in = random_tensor({4, 3, 16, 16}, 1);
    const Tensor w = random_tensor({8, 3, 3, 3}, 2);
    const Tensor b = random_tensor({8}, 3);
    set_num_threads(1);
    const Tensor serial = conv2d_forward(in, w, b, 1, 1);
    set_num_threads(4);
    const Tensor parallel = conv2d_forward(in, w, b, 1, 1);
    Tensor din_s, dw_s, db_s, din_p, dw_p, db_p;
    const Tensor g = random_tensor(serial.shape(), 4);
    set_num_threads(1);
    conv2d_backward(in, w, g, Index{1}, Index{1}, &din_s, &dw_s, &db_s);
    set_num_threads(4);
    conv2d_backward(in, w, g, Index{1}, Index{1}, &din_p, &dw_p, &db_p);
    set_num_threads(1);
    CHECK(std::memcmp(serial.data(), parallel.data(), sizeof(double) * serial.size()) == 0);
    CHECK(std::memcmp(din_s.data(), din_p.data(), sizeof(double) * din_s.size()) == 0);
    CHECK(std::memcmp(dw_s.data(), dw_p.data(), sizeof(double) * dw_s.size()) == 0);
    CHECK(std::memcmp(db_s.data(), db_p.data(), sizeof(double) * db_s.size()) == 0);
  }

  TEST_CASE("relu backward zeroes gradients exactly where the output is zero") {
    Tensor in = Tensor::from({1, 1, 2, 3}, {-1.0, 0.0, 2.0, -0.5, 3.0, 0.0});
    Tensor out = relu_forward(in);
    Tensor g = Tensor::constant(out.shape(), 5.0);
    Tensor din = relu_backward(out, g);
    for (Index i = 0; i < out.size(); ++i) {
      if (out[i] == 0.0) {
        CHECK(din[i] == 0.0);
      } else {
        CHECK(din[i] == 5.0);
      }
    }
  }

  TEST_CASE("maxpool picks the lowest linear index among ties and routes gradient there") {
    // 4x4 plane of an identical value: every 2x2 window is all ties
    Tensor in = Tensor::constant({1, 1, 4, 4}, 3.5);
    std::vector<Index> argmax;
    Tensor out = maxpool_forward(in, 2, 2, &argmax);
    CHECK(out.shape() == std::vector<Index>{1, 1, 2, 2});
    CHECK(argmax == std::vector<Index>{0, 2, 8, 10});  // top-left of each window

    Tensor g = Tensor::from({1, 1, 2, 2}, {1.0, 2.0, 3.0, 4.0});
    Tensor din = maxpool_backward(in.shape(), argmax, g);
    CHECK(din[0] == 1.0);
    CHECK(din[2] == 2.0);
    CHECK(din[8] == 3.0);
    CHECK(din[10] == 4.0);
    double total = 0;
    for (Index i = 0; i < din.size(); ++i) total += din[i];
    CHECK(total == 10.0);
  }

  TEST_CASE("maxpool forward values") {
    Tensor in = Tensor::from({1, 1, 2, 4}, {1, 9, 2, 3, 4, 5, 6, 7});
    std::vector<Index> argmax;
    Tensor out = maxpool_forward(in, 2, 2, &argmax);
    CHECK(out.shape() == std::vector<Index>{1, 1, 1, 2});
    CHECK(out[0] == 9.0);
    CHECK(out[1] == 7.0);
  }

  TEST_CASE("dense matches a hand matmul") {
    Tensor in = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor w = Tensor::from({2, 3}, {1, 0, -1, 0.5, 0.5, 0.5});
    Tensor b = Tensor::from({2}, {10, -10});
    Tensor out = dense_forward(in, w, b);
    CHECK(out.at({0, 0}) == doctest::Approx(1 - 3 + 10));
    CHECK(out.at({0, 1}) == doctest::Approx(0.5 * 6 - 10));
    CHECK(out.at({1, 0}) == doctest::Approx(4 - 6 + 10));
    CHECK(out.at({1, 1}) == doctest::Approx(0.5 * 15 - 10));
  }

  TEST_CASE("uniform logits give loss ln C and softmax 1/C") {
    Tensor logits({4, 10});
    std::vector<int> labels{0, 3, 7, 9};
    Tensor probs;
    const double loss = softmax_cross_entropy(logits, labels, &probs);
    CHECK(loss == doctest::Approx(std::log(10.0)).epsilon(1e-12));
    for (Index i = 0; i < probs.size(); ++i) CHECK(probs[i] == doctest::Approx(0.1).epsilon(1e-12));
  }

  TEST_CASE("softmax cross-entropy gradient equals (softmax - onehot)/B") {
    const Tensor logits = random_tensor({3, 5}, 11);
    std::vector<int> labels{4, 0, 2};
    Tensor probs;
    softmax_cross_entropy(logits, labels, &probs);
    const Tensor g = softmax_cross_entropy_backward(probs, labels, 1.0);
    for (Index b = 0; b < 3; ++b)
      for (Index c = 0; c < 5; ++c) {
        const double want =
            (probs.at({b, c}) - (labels[static_cast<std::size_t>(b)] == c ? 1.0 : 0.0)) / 3.0;
        CHECK(g.at({b, c}) == doctest::Approx(want).epsilon(1e-12));
      }
  }

  TEST_CASE("label out of range is rejected") {
    Tensor logits({1, 3});
    std::vector<int> labels{3};
    Tensor probs;
    CHECK_THROWS_AS(softmax_cross_entropy(logits, labels, &probs), InvalidArgument);
  }

  TEST_CASE("the tensor core is scalar generic") {
    TensorT<float> t = TensorT<float>::constant({2, 2}, -1.5f);
    TensorT<float> r = relu_forward(t);
    CHECK(r.array().sum() == 0.0f);
    CHECK(t.matrix(2, 2).rows() == 2);
  }
}
