#include <doctest.h>

#include <filesystem>
#include <random>
#include <unistd.h>

#include "prunelab/csv.hpp"
#include "prunelab/experiment.hpp"

using namespace prunelab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("prunelab_cfg_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const char* kTinyExperiment =
    "arch = minicnn-a\n"
    "arch_width_divisor = 8\n"
    "dataset = synthetic\n"
    "train_size = 64\n"
    "score_size = 32\n"
    "test_size = 32\n"
    "separability = 0.3\n"
    "train_max_updates = 40\n"
    "train_eval_every = 20\n"
    "strategies = layer-random:most-filters, global-taylor\n"
    "filters_per_step = 1\n"
    "finetune_updates = 2\n"
    "batch_size = 8\n"
    "total_steps = 2\n"
    "repetitions = 2\n"
    "score_batches = 1\n"
    "master_seed = 3\n";

}  // namespace

TEST_SUITE("config_csv") {
  TEST_CASE("config parsing: values, comments, errors with line numbers") {
    const Config cfg = Config::parse_string(
        "alpha = 1\n# comment\nbeta = x y  # trailing\n\ngamma=2.5\n", "test.cfg");
    CHECK(cfg.get_int("alpha", 0) == 1);
    CHECK(cfg.get_string("beta") == "x y");
    CHECK(cfg.get_real("gamma", 0) == doctest::Approx(2.5));
    CHECK(cfg.get_int("missing", 42) == 42);
    CHECK_THROWS_AS(cfg.get_string("missing"), InvalidArgument);

    CHECK_THROWS_WITH_AS(Config::parse_string("a = 1\nnonsense\n", "t.cfg"),
                         doctest::Contains("line 2"), InvalidArgument);
    CHECK_THROWS_WITH_AS(Config::parse_string("a = 1\na = 2\n", "t.cfg"),
                         doctest::Contains("duplicate"), InvalidArgument);
    CHECK_THROWS_AS(cfg.get_int("beta", 0), InvalidArgument);
  }

  TEST_CASE("canonical form is sorted and stable") {
    const Config cfg = Config::parse_string("b = 2\na = 1\n");
    CHECK(cfg.canonical() == "a = 1\nb = 2\n");
  }

  TEST_CASE("reals print with 17 significant digits and round-trip") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 200; ++i) {
      const double v = u(rng);
      CHECK(std::stod(format_real(v)) == v);
    }
    CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
  }

  TEST_CASE("csv emitters use LF endings and fixed headers") {
    statmodel::ScenarioEstimates est;
    const std::string s = scenario_csv(est);
    CHECK(s.rfind("scenario,estimate,half_width\n", 0) == 0);
    CHECK(s.find('\r') == std::string::npos);

    std::vector<statmodel::SweepRow> rows(1);
    rows[0].n = 100;
    CHECK(sweep_csv(rows).rfind("n,empirical_lhs,chebyshev_rhs\n", 0) == 0);

    std::vector<TrajectoryPoint> pts(1);
    pts[0].census = {16, 32, 64, 32};
    const std::string t = trajectory_csv("global-taylor", PruneSchedule{}, pts);
    CHECK(t.find("step,cum_pruned,frac_pruned,accuracy_mean,accuracy_std,layer_census\n") !=
          std::string::npos);
    CHECK(t.find("16;32;64;32") != std::string::npos);
    CHECK(t.find("# strategy = global-taylor") != std::string::npos);
  }

  TEST_CASE("unknown experiment keys are rejected") {
    Config cfg = Config::parse_string(kTinyExperiment);
    cfg.set("no_such_key", "1");
    CHECK_THROWS_WITH_AS(canonical_experiment_config(cfg), doctest::Contains("no_such_key"),
                         InvalidArgument);
  }

  TEST_CASE("an experiment writes CSVs and a manifest that reproduces them") {
    TempDir tmp;
    const Config cfg = Config::parse_string(kTinyExperiment);
    const ExperimentResult res = run_experiment(cfg, (tmp.path / "out1").string());
    REQUIRE(res.runs.size() == 2);
    for (const auto& run : res.runs) {
      CHECK(fs::exists(run.csv_path));
      CHECK(run.trajectory.size() == 3);  // baseline + 2 steps
    }
    CHECK(res.baseline_test_accuracy >= 0.0);

    // the manifest alone reproduces every CSV byte
    const Config manifest = Config::parse_file(res.manifest_path);
    const ExperimentResult rerun = run_experiment(manifest, (tmp.path / "out2").string());
    REQUIRE(rerun.runs.size() == res.runs.size());
    for (std::size_t i = 0; i < res.runs.size(); ++i)
      CHECK(read_text_file(rerun.runs[i].csv_path) == read_text_file(res.runs[i].csv_path));
  }
}
