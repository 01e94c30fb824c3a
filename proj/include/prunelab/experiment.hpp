#pragma once

#include <string>
#include <vector>

#include "prunelab/config.hpp"
#include "prunelab/prune_loop.hpp"

namespace prunelab {

struct StrategyRun {
  Strategy strategy;
  std::vector<TrajectoryPoint> trajectory;
  std::string csv_path;
};

struct ExperimentResult {
  std::string dir;  // out_root/exp-<confighash>
  std::string manifest_path;
  double baseline_test_accuracy = 0;
  Index base_updates = 0;
  std::vector<StrategyRun> runs;
};

/// Fills every omitted key with its default so manifests are complete
/// configs; rejects unknown keys.
Config canonical_experiment_config(const Config& cfg);

/// Full experiment: load data, build (and optionally widen) the network,
/// train to plateau, run every strategy over the repetition seeds, and write
/// one CSV per strategy plus a manifest that reproduces the run.
ExperimentResult run_experiment(const Config& cfg, const std::string& out_root);

}  // namespace prunelab
