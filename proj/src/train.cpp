#include "prunelab/train.hpp"

#include "prunelab/rng.hpp"

namespace prunelab {

TrainResult train_to_plateau(Network* net, const Dataset& data, const TrainConfig& cfg) {
  require(cfg.max_updates >= 1 && cfg.eval_every >= 1 && cfg.patience >= 1,
          "training budget fields must be >= 1");
  BatchFeed feed(data.train, cfg.batch_size, substream_seed(cfg.seed, 0x7ea1ULL), true);
  OptimizerState opt = make_optimizer(*net, cfg.learning_rate, cfg.momentum);

  TrainResult res;
  Network best = *net;
  Index evals_since_best = 0;
  for (Index u = 1; u <= cfg.max_updates; ++u) {
    const Batch batch = feed.next();
    Tape tape = forward(*net, batch.images, batch.labels);
    const BackwardResult back = backward(tape);
    sgd_step(*net, back.grads, opt);
    res.updates_run = u;
    if (u % cfg.eval_every == 0) {
      const double acc = evaluate_accuracy(*net, data.score);
      res.history.emplace_back(u, acc);
      if (acc > res.best_score_accuracy) {
        res.best_score_accuracy = acc;
        best = *net;
        evals_since_best = 0;
      } else if (++evals_since_best >= cfg.patience) {
        break;
      }
    }
  }
  *net = std::move(best);
  return res;
}

void finetune(Network* net, BatchFeed& feed, Index updates, double learning_rate,
              double momentum) {
  OptimizerState opt = make_optimizer(*net, learning_rate, momentum);
  for (Index u = 0; u < updates; ++u) {
    const Batch batch = feed.next();
    Tape tape = forward(*net, batch.images, batch.labels);
    const BackwardResult back = backward(tape);
    sgd_step(*net, back.grads, opt);
  }
}

}  // namespace prunelab
