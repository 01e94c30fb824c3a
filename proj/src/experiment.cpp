#include "prunelab/experiment.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "prunelab/csv.hpp"
#include "prunelab/rng.hpp"
#include "prunelab/serialize.hpp"
#include "prunelab/train.hpp"

namespace prunelab {

namespace {

const std::map<std::string, std::string> kDefaults = {
    {"arch", "minicnn-a"},
    {"arch_width_divisor", "1"},
    {"dataset", "synthetic"},
    {"data_path", ""},
    {"class_count", "10"},
    {"train_size", "2000"},
    {"score_size", "500"},
    {"test_size", "500"},
    {"separability", "0.15"},
    {"data_seed", "7"},
    {"train_lr", "0.05"},
    {"train_batch_size", "32"},
    {"train_max_updates", "3000"},
    {"train_eval_every", "50"},
    {"train_patience", "5"},
    {"widen_conv", "-1"},
    {"widen_factor", "4"},
    {"strategies", "global-taylor"},
    {"filters_per_step", "2"},
    {"finetune_updates", "50"},
    {"batch_size", "32"},
    {"total_steps", "0"},
    {"stop_fraction", "0"},
    {"repetitions", "5"},
    {"finetune_lr", "0.01"},
    {"momentum", "0.9"},
    {"score_batches", "2"},
    {"master_seed", "1"},
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string sanitize(const std::string& name) {
  std::string s = name;
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-') c = '_';
  return s;
}

NetworkSpec arch_from_config(const Config& cfg) {
  const std::string arch = cfg.get_string("arch");
  const Index div = cfg.get_int("arch_width_divisor", 1);
  if (arch == "minicnn-a") return minicnn_a(div);
  if (arch == "minicnn-v") return minicnn_v(div);
  return load_netspec(arch);  // treat as a netspec file path
}

DatasetSpec dataset_from_config(const Config& cfg) {
  DatasetSpec spec;
  const std::string src = cfg.get_string("dataset");
  if (src == "cifar10") {
    spec.source = DataSource::Cifar10Binary;
    spec.path = cfg.get_string("data_path", "");
    if (spec.path.empty()) {
      const char* env = std::getenv("PRUNELAB_DATA");
      require(env != nullptr && *env != '\0',
              "dataset = cifar10 needs data_path or the PRUNELAB_DATA environment variable");
      spec.path = env;
    }
  } else if (src == "synthetic") {
    spec.source = DataSource::Synthetic;
  } else {
    throw InvalidArgument("unknown dataset '" + src + "' (expected cifar10 or synthetic)");
  }
  spec.class_count = cfg.get_int("class_count", 10);
  spec.train_size = cfg.get_int("train_size", 2000);
  spec.score_size = cfg.get_int("score_size", 500);
  spec.test_size = cfg.get_int("test_size", 500);
  spec.subsample_seed = static_cast<std::uint64_t>(cfg.get_int("data_seed", 7));
  spec.separability = cfg.get_real("separability", 0.15);
  return spec;
}

}  // namespace

Config canonical_experiment_config(const Config& cfg) {
  for (const auto& [key, value] : cfg.values()) {
    (void)value;
    if (kDefaults.count(key) == 0)
      throw InvalidArgument("unknown experiment config key '" + key + "'");
  }
  Config full = cfg;
  for (const auto& [key, value] : kDefaults)
    if (!full.has(key)) full.set(key, value);
  return full;
}

ExperimentResult run_experiment(const Config& raw, const std::string& out_root) {
  namespace fs = std::filesystem;
  const Config cfg = canonical_experiment_config(raw);
  const std::uint64_t master = static_cast<std::uint64_t>(cfg.get_int("master_seed", 1));

  const auto strategy_names = split_list(cfg.get_string("strategies"));
  require(!strategy_names.empty(), "config names no strategies");
  std::vector<Strategy> strategies;
  for (const auto& name : strategy_names) strategies.push_back(Strategy::parse(name));

  const Dataset data = load_dataset(dataset_from_config(cfg));

  NetworkSpec spec = arch_from_config(cfg);
  Network net = build_network(spec, substream_seed(master, 0xa2c4ULL));
  const Index widen_conv = cfg.get_int("widen_conv", -1);
  if (widen_conv >= 0)
    net = widen_layer(net, widen_conv, cfg.get_int("widen_factor", 4),
                      substream_seed(master, 0x31deULL));

  TrainConfig tc;
  tc.learning_rate = cfg.get_real("train_lr", 0.05);
  tc.momentum = cfg.get_real("momentum", 0.9);
  tc.batch_size = cfg.get_int("train_batch_size", 32);
  tc.max_updates = cfg.get_int("train_max_updates", 3000);
  tc.eval_every = cfg.get_int("train_eval_every", 50);
  tc.patience = cfg.get_int("train_patience", 5);
  tc.seed = substream_seed(master, 0x7a18ULL);
  const TrainResult trained = train_to_plateau(&net, data, tc);

  PruneSchedule schedule;
  schedule.filters_per_step = cfg.get_int("filters_per_step", 2);
  schedule.finetune_updates = cfg.get_int("finetune_updates", 50);
  schedule.batch_size = cfg.get_int("batch_size", 32);
  schedule.total_steps = cfg.get_int("total_steps", 0);
  schedule.stop_fraction = cfg.get_real("stop_fraction", 0.0);
  schedule.repetitions = cfg.get_int("repetitions", 5);
  schedule.finetune_lr = cfg.get_real("finetune_lr", 0.01);
  schedule.momentum = cfg.get_real("momentum", 0.9);
  schedule.score_batches = cfg.get_int("score_batches", 2);

  ExperimentResult result;
  result.baseline_test_accuracy = evaluate_accuracy(net, data.test);
  result.base_updates = trained.updates_run;

  const std::string canonical = cfg.canonical();
  char dir_name[32];
  std::snprintf(dir_name, sizeof dir_name, "exp-%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical.data(), canonical.size())));
  const fs::path dir = fs::path(out_root) / dir_name;
  fs::create_directories(dir);
  result.dir = dir.string();

  for (std::size_t i = 0; i < strategies.size(); ++i) {
    StrategyRun run;
    run.strategy = strategies[i];
    run.trajectory = run_repetitions(net, strategies[i], schedule, data, master);
    const fs::path csv = dir / (sanitize(strategy_names[i]) + ".csv");
    write_text_file(csv.string(), trajectory_csv(strategy_names[i], schedule, run.trajectory));
    run.csv_path = csv.string();
    result.runs.push_back(std::move(run));
  }

  std::ostringstream manifest;
  manifest << "# prunelab experiment manifest; re-running this file as a config reproduces the "
              "CSVs\n";
  manifest << "# weights_fnv1a64 = " << std::hex << weights_content_hash(net) << std::dec << "\n";
  manifest << "# baseline_test_accuracy = " << format_real(result.baseline_test_accuracy) << "\n";
  manifest << "# base_training_updates = " << trained.updates_run << "\n";
  manifest << "# format_version = 1\n";
  manifest << canonical;
  const fs::path mpath = dir / "manifest.txt";
  write_text_file(mpath.string(), manifest.str());
  result.manifest_path = mpath.string();
  return result;
}

}  // namespace prunelab
