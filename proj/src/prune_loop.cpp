#include "prunelab/prune_loop.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "prunelab/rng.hpp"
#include "prunelab/threading.hpp"
#include "prunelab/train.hpp"

namespace prunelab {

void PruneSchedule::validate() const {
  require(filters_per_step >= 1, "filters_per_step must be >= 1");
  require(finetune_updates >= 1, "finetune_updates must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(repetitions >= 1, "repetitions must be >= 1");
  require(total_steps >= 0, "total_steps must be >= 0");
  require(stop_fraction >= 0.0 && stop_fraction <= 1.0, "stop_fraction must lie in [0,1]");
  require(score_batches >= 1, "score_batches must be >= 1");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0,1)");
}

Index PruneSchedule::prune_target(const std::vector<Index>& census) const {
  if (total_steps > 0) return total_steps * filters_per_step;
  const Index total = std::accumulate(census.begin(), census.end(), Index{0});
  return static_cast<Index>(stop_fraction * static_cast<double>(total));
}

std::vector<StepRecord> prune_finetune_loop(const Network& trained, const Strategy& strategy,
                                            const PruneSchedule& schedule, const Dataset& data,
                                            std::uint64_t seed) {
  schedule.validate();
  Network net = trained;
  const Index target = schedule.prune_target(net.conv_census());
  const Index k = schedule.filters_per_step;

  std::vector<StepRecord> records;
  StepRecord base;
  base.step = 0;
  base.cum_pruned = 0;
  base.frac_pruned = 0;
  base.accuracy = evaluate_accuracy(net, data.test);
  base.census = net.conv_census();
  records.push_back(base);
  if (target <= 0) return records;

  BatchFeed tune_feed(data.train, schedule.batch_size, substream_seed(seed, 0xf17eULL), true);

  Index cum = 0;
  Index step = 0;
  while (cum < target) {
    ++step;
    const std::vector<Index> census = net.conv_census();

    // stop rather than empty a layer
    bool feasible = true;
    if (strategy.kind == Strategy::Kind::GlobalTaylor) {
      Index removable = 0;
      for (Index c : census) removable += c - 1;
      feasible = removable >= k;
    } else {
      const Index layer = strategy.target.resolve(census);
      feasible = census[static_cast<std::size_t>(layer)] >= k + 1;
    }
    if (!feasible) {
      StepRecord halt = records.back();
      halt.step = step;
      halt.early_stop = true;
      records.push_back(halt);
      break;
    }

    SaliencyMap scores;
    if (strategy.needs_scores()) {
      BatchFeed score_feed(data.score, schedule.batch_size, 0, false);
      scores = taylor_scores(net, score_feed, schedule.score_batches);
    }
    const auto picked = select_filters(strategy, strategy.needs_scores() ? &scores : nullptr, net,
                                       k, substream_seed(seed, 0x5e1ecULL + static_cast<std::uint64_t>(step)));

    std::map<Index, std::vector<Index>> by_layer;
    for (const auto& [layer, filter] : picked) by_layer[layer].push_back(filter);
    for (const auto& [layer, ids] : by_layer) net = remove_filters(net, layer, ids);

    finetune(&net, tune_feed, schedule.finetune_updates, schedule.finetune_lr, schedule.momentum);

    StepRecord rec;
    rec.step = step;
    cum += k;
    rec.cum_pruned = cum;
    rec.frac_pruned = static_cast<double>(cum) / static_cast<double>(target);
    rec.accuracy = evaluate_accuracy(net, data.test);
    rec.census = net.conv_census();
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<TrajectoryPoint> run_repetitions(const Network& trained, const Strategy& strategy,
                                             const PruneSchedule& schedule, const Dataset& data,
                                             std::uint64_t master_seed) {
  schedule.validate();
  const Index reps = schedule.repetitions;
  std::vector<std::vector<StepRecord>> runs(static_cast<std::size_t>(reps));
  parallel_for(reps, [&](Index r) {
    runs[static_cast<std::size_t>(r)] = prune_finetune_loop(
        trained, strategy, schedule, data, substream_seed(master_seed, 0x4e9ULL + static_cast<std::uint64_t>(r)));
  });

  std::size_t steps = runs[0].size();
  for (const auto& run : runs) steps = std::min(steps, run.size());

  std::vector<TrajectoryPoint> traj(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    TrajectoryPoint& p = traj[s];
    p.step = runs[0][s].step;
    p.cum_pruned = runs[0][s].cum_pruned;
    p.frac_pruned = runs[0][s].frac_pruned;
    p.census = runs[0][s].census;
    double sum = 0;
    for (const auto& run : runs) {
      sum += run[s].accuracy;
      p.early_stop = p.early_stop || run[s].early_stop;
    }
    p.accuracy_mean = sum / static_cast<double>(reps);
    if (reps >= 2) {
      double ss = 0;
      for (const auto& run : runs) {
        const double d = run[s].accuracy - p.accuracy_mean;
        ss += d * d;
      }
      p.accuracy_std = std::sqrt(ss / static_cast<double>(reps - 1));
    }
  }
  return traj;
}

}  // namespace prunelab
