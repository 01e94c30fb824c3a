#pragma once

#include <Eigen/Dense>
#include <vector>

#include "prunelab/dataset.hpp"
#include "prunelab/tape.hpp"

namespace prunelab {

/// Per-filter importance scores, one vector per conv layer.
struct SaliencyMap {
  std::vector<Eigen::ArrayXd> layer_scores;
  Index batches_used = 0;
  bool l2_normalized = false;
};

/// Taylor-expansion criterion: score(f) = | mean over batch items and spatial
/// positions of activation(f) * d(loss)/d(activation(f)) |, averaged over
/// `batches` batches from the feed, then L2-normalized within each layer so
/// scores are comparable across layers.
SaliencyMap taylor_scores(const Network& net, BatchFeed& feed, Index batches);

}  // namespace prunelab
