#pragma once

#include "prunelab/dataset.hpp"
#include "prunelab/optimizer.hpp"

namespace prunelab {

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  Index batch_size = 32;
  Index max_updates = 3000;
  Index eval_every = 50;  // updates between score-split evaluations
  Index patience = 5;     // evaluations without improvement before stopping
  std::uint64_t seed = 1;
};

struct TrainResult {
  Index updates_run = 0;
  double best_score_accuracy = 0;
  std::vector<std::pair<Index, double>> history;  // (update, score accuracy)
};

/// SGD-with-momentum training to a score-split plateau (early stopping with
/// the configured patience); the network is left at its best snapshot.
TrainResult train_to_plateau(Network* net, const Dataset& data, const TrainConfig& cfg);

/// Runs `updates` momentum-SGD updates from the feed; fresh optimizer state.
void finetune(Network* net, BatchFeed& feed, Index updates, double learning_rate,
              double momentum);

}  // namespace prunelab
