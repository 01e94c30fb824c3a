#include "prunelab/saliency.hpp"

#include <cmath>

namespace prunelab {

SaliencyMap taylor_scores(const Network& net, BatchFeed& feed, Index batches) {
  require(batches >= 1, "taylor_scores needs at least one batch");
  const Index convs = net.spec.conv_count();

  SaliencyMap map;
  map.layer_scores.resize(static_cast<std::size_t>(convs));
  for (Index c = 0; c < convs; ++c) {
    const auto& conv = std::get<ConvDesc>(
        net.spec.layers[static_cast<std::size_t>(net.spec.conv_layer_position(c))]);
    map.layer_scores[static_cast<std::size_t>(c)] = Eigen::ArrayXd::Zero(conv.out_channels);
  }

  for (Index bi = 0; bi < batches; ++bi) {
    const Batch batch = feed.next();
    Tape tape = forward(net, batch.images, batch.labels);
    const BackwardResult back = backward(tape);
    for (Index c = 0; c < convs; ++c) {
      const Tensor& act = tape.conv_activation(c);
      const Tensor& grad = back.activation_grads[static_cast<std::size_t>(c)];
      const Index B = act.extent(0), F = act.extent(1);
      const Index plane = act.extent(2) * act.extent(3);
      auto& scores = map.layer_scores[static_cast<std::size_t>(c)];
      for (Index f = 0; f < F; ++f) {
        double acc = 0;
        for (Index b = 0; b < B; ++b) {
          const double* a = act.data() + (b * F + f) * plane;
          const double* g = grad.data() + (b * F + f) * plane;
          for (Index i = 0; i < plane; ++i) acc += a[i] * g[i];
        }
        scores[f] += std::abs(acc / static_cast<double>(B * plane));
      }
    }
  }

  for (auto& scores : map.layer_scores) {
    scores /= static_cast<double>(batches);
    const double norm = std::sqrt((scores * scores).sum());
    if (norm > 0.0) scores /= norm;
  }
  map.batches_used = batches;
  map.l2_normalized = true;
  return map;
}

}  // namespace prunelab
