#pragma once

#include "prunelab/dataset.hpp"
#include "prunelab/strategy.hpp"

namespace prunelab {

struct PruneSchedule {
  Index filters_per_step = 2;
  Index finetune_updates = 50;
  Index batch_size = 32;
  Index total_steps = 0;       // > 0: run exactly this many steps
  double stop_fraction = 0.0;  // alternative stop: fraction of initial conv filters pruned
  Index repetitions = 5;
  double finetune_lr = 0.01;
  double momentum = 0.9;
  Index score_batches = 2;  // scoring-split batches per Taylor evaluation

  void validate() const;
  /// Filters to prune in total under this schedule, given the starting census.
  Index prune_target(const std::vector<Index>& census) const;
};

struct StepRecord {
  Index step = 0;
  Index cum_pruned = 0;
  double frac_pruned = 0;  // cum_pruned / prune_target
  double accuracy = 0;     // test accuracy after this step's fine-tune
  std::vector<Index> census;
  bool early_stop = false;  // schedule could not continue without emptying a layer
};

/// One run of the iterative loop: score (if the strategy ranks), select,
/// remove, fine-tune, evaluate. The first record (step 0) is the unpruned
/// baseline. `trained` must already be trained; it is copied, never mutated.
std::vector<StepRecord> prune_finetune_loop(const Network& trained, const Strategy& strategy,
                                            const PruneSchedule& schedule, const Dataset& data,
                                            std::uint64_t seed);

struct TrajectoryPoint {
  Index step = 0;
  Index cum_pruned = 0;
  double frac_pruned = 0;
  double accuracy_mean = 0;
  double accuracy_std = 0;  // sample std over repetitions
  std::vector<Index> census;  // census of the first repetition
  bool early_stop = false;
};

/// Runs `schedule.repetitions` independent seeds (substreams of master_seed)
/// and aggregates mean/std per step. Repetition seeds are derived from the
/// master seed only, so different strategies see paired randomness.
std::vector<TrajectoryPoint> run_repetitions(const Network& trained, const Strategy& strategy,
                                             const PruneSchedule& schedule, const Dataset& data,
                                             std::uint64_t master_seed);

}  // namespace prunelab
