// prunelab command line: Monte Carlo scenario simulation, network training,
// single pruning runs, and full experiment orchestration.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "prunelab/csv.hpp"
#include "prunelab/experiment.hpp"
#include "prunelab/grad_check.hpp"
#include "prunelab/rng.hpp"
#include "prunelab/serialize.hpp"
#include "prunelab/threading.hpp"
#include "prunelab/train.hpp"

namespace fs = std::filesystem;
using namespace prunelab;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 1;
  std::string out_dir = "results";
  int threads = 1;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prunelab: channel pruning as redundancy reduction, desk scale"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "master random seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (never changes results)")
      ->capture_default_str();

  // ---- simulate ----------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "Monte Carlo scenario values and bounds");
  Index sim_m = 10, sim_n = 1000, sim_trials = 100000, sim_drop_k = 1;
  std::string sim_dist = "uniform:0.5:1";
  double sim_a = -1, sim_b = -1, sim_c2 = 0.0, sim_w = 0.0, sim_eps = 0.05;
  double sim_c1 = -1, sim_eps0 = -1;
  std::vector<Index> sim_sweep;
  sim->add_option("--m", sim_m, "first-layer filter count")->capture_default_str();
  sim->add_option("--n", sim_n, "second-layer filter count")->capture_default_str();
  sim->add_option("--dist", sim_dist, "family:location:scale for both layers")
      ->capture_default_str();
  sim->add_option("--a", sim_a, "first-layer threshold (default 0.9*m*mean)");
  sim->add_option("--b", sim_b, "second-layer threshold (default 0.8*n*mean)");
  sim->add_option("--c2", sim_c2, "correlated pair fraction C2")->capture_default_str();
  sim->add_option("--corr-strength", sim_w, "latent weight of correlated pairs")
      ->capture_default_str();
  sim->add_option("--c1", sim_c1, "variance cap C1 (default: the distribution variance)");
  sim->add_option("--eps0", sim_eps0, "mean floor eps0 (default: half the distribution mean)");
  sim->add_option("--trials", sim_trials, "Monte Carlo trials")->capture_default_str();
  sim->add_option("--epsilon", sim_eps, "deviation threshold for the Chebyshev check")
      ->capture_default_str();
  sim->add_option("--sweep-n", sim_sweep, "emit sweep.csv for these n values (comma separated)")
      ->delimiter(',');
  sim->add_option("--drop-k", sim_drop_k, "filters dropped per scenario (ordering asserted for 1)")
      ->capture_default_str();

  // ---- train -------------------------------------------------------------
  auto* tr = app.add_subcommand("train", "train a network, write netspec + weights");
  std::string tr_arch = "minicnn-a", tr_data = "synthetic", tr_data_path, tr_name = "model";
  Index tr_div = 1, tr_updates = 3000, tr_batch = 32, tr_train = 2000, tr_score = 500,
        tr_test = 500;
  double tr_lr = 0.05, tr_sep = 0.15;
  tr->add_option("--arch", tr_arch, "minicnn-a | minicnn-v | path to .netspec")
      ->capture_default_str();
  tr->add_option("--width-divisor", tr_div, "shrink hidden widths")->capture_default_str();
  tr->add_option("--data", tr_data, "synthetic | cifar10")->capture_default_str();
  tr->add_option("--data-path", tr_data_path, "dataset path (or $PRUNELAB_DATA)");
  tr->add_option("--train-size", tr_train)->capture_default_str();
  tr->add_option("--score-size", tr_score)->capture_default_str();
  tr->add_option("--test-size", tr_test)->capture_default_str();
  tr->add_option("--separability", tr_sep)->capture_default_str();
  tr->add_option("--lr", tr_lr)->capture_default_str();
  tr->add_option("--max-updates", tr_updates)->capture_default_str();
  tr->add_option("--batch", tr_batch)->capture_default_str();
  tr->add_option("--name", tr_name, "output file stem")->capture_default_str();

  // ---- prune -------------------------------------------------------------
  auto* pr = app.add_subcommand("prune", "one prune-finetune trajectory for a trained model");
  std::string pr_model = "model", pr_strategy = "global-taylor", pr_data = "synthetic",
              pr_data_path;
  Index pr_k = 2, pr_updates = 50, pr_batch = 32, pr_steps = 10, pr_train = 2000, pr_score = 500,
        pr_test = 500, pr_reps = 5, pr_score_batches = 2;
  double pr_lr = 0.01, pr_sep = 0.15;
  pr->add_option("--model", pr_model, "model file stem (reads <stem>.netspec, <stem>.plab)")
      ->capture_default_str();
  pr->add_option("--strategy", pr_strategy,
                 "global-taylor | layer-random:<rule> | layer-taylor:<rule>; rule = fixed=<i> | "
                 "most-filters")
      ->capture_default_str();
  pr->add_option("--data", pr_data)->capture_default_str();
  pr->add_option("--data-path", pr_data_path);
  pr->add_option("--train-size", pr_train)->capture_default_str();
  pr->add_option("--score-size", pr_score)->capture_default_str();
  pr->add_option("--test-size", pr_test)->capture_default_str();
  pr->add_option("--separability", pr_sep)->capture_default_str();
  pr->add_option("--k", pr_k, "filters per step")->capture_default_str();
  pr->add_option("--finetune-updates", pr_updates)->capture_default_str();
  pr->add_option("--batch", pr_batch)->capture_default_str();
  pr->add_option("--steps", pr_steps)->capture_default_str();
  pr->add_option("--repetitions", pr_reps)->capture_default_str();
  pr->add_option("--finetune-lr", pr_lr)->capture_default_str();
  pr->add_option("--score-batches", pr_score_batches)->capture_default_str();

  // ---- experiment --------------------------------------------------------
  auto* ex = app.add_subcommand("experiment", "run a config-driven experiment");
  std::string ex_config;
  ex->add_option("config", ex_config, "experiment config file")->required();

  // ---- gradcheck ---------------------------------------------------------
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the autodiff engine");
  Index gc_div = 4, gc_batch = 4;
  double gc_step = 1e-5, gc_tol = 1e-4;
  gc->add_option("--width-divisor", gc_div)->capture_default_str();
  gc->add_option("--batch", gc_batch)->capture_default_str();
  gc->add_option("--step", gc_step)->capture_default_str();
  gc->add_option("--tolerance", gc_tol)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  set_num_threads(g.threads);

  try {
    if (sim->parsed()) {
      statmodel::ContributionModel params;
      params.m = sim_m;
      params.n = sim_n;
      params.first_dist = statmodel::DistributionSpec::parse(sim_dist);
      params.second_dist = params.first_dist;
      params.corr_pair_fraction = sim_c2;
      params.corr_strength = sim_w;
      params.variance_cap = sim_c1 > 0 ? sim_c1 : params.second_dist.variance();
      params.mean_floor = sim_eps0 > 0 ? sim_eps0 : params.second_dist.mean() / 2.0;
      params.a = sim_a >= 0 ? sim_a : 0.9 * static_cast<double>(sim_m) * params.first_dist.mean();
      params.b = sim_b >= 0 ? sim_b : 0.8 * static_cast<double>(sim_n) * params.second_dist.mean();
      const auto model = statmodel::build_contribution_model(params);

      fs::create_directories(g.out_dir);
      if (!sim_sweep.empty()) {
        const auto rows = statmodel::convergence_sweep(model, sim_sweep, sim_eps, sim_trials, g.seed);
        const auto path = fs::path(g.out_dir) / "sweep.csv";
        write_text_file(path.string(), sweep_csv(rows));
        std::cout << "wrote " << path.string() << "\n";
        for (const auto& r : rows)
          std::cout << "n=" << r.n << " empirical_lhs=" << format_real(r.empirical_lhs)
                    << " chebyshev_rhs=" << format_real(r.chebyshev_rhs)
                    << " P(sum>=b)=" << format_real(r.p_sum_ge_b) << "\n";
      } else {
        const auto est = statmodel::estimate_scenarios(model, sim_trials, g.seed, static_cast<int>(sim_drop_k));
        const auto path = fs::path(g.out_dir) / "scenarios.csv";
        write_text_file(path.string(), scenario_csv(est));
        std::cout << "wrote " << path.string() << "\n";
        const auto report = statmodel::check_ordering(est);
        for (const auto& c : report.chain)
          std::cout << c.lower << " <= " << c.upper << "  margin=" << format_real(c.margin)
                    << (c.ok ? "  ok" : "  VIOLATED") << "\n";
        const auto bound = statmodel::chebyshev_bound_check(model, sim_eps, sim_trials, g.seed);
        std::cout << "chebyshev: lhs=" << format_real(bound.empirical_lhs)
                  << " rhs=" << format_real(bound.chebyshev_rhs)
                  << (bound.satisfied ? "  ok" : "  VIOLATED") << "\n";
      }
      return 0;
    }

    if (tr->parsed()) {
      DatasetSpec dspec;
      dspec.source = tr_data == "cifar10" ? DataSource::Cifar10Binary : DataSource::Synthetic;
      if (dspec.source == DataSource::Cifar10Binary) {
        dspec.path = tr_data_path;
        if (dspec.path.empty()) {
          const char* env = std::getenv("PRUNELAB_DATA");
          require(env != nullptr, "--data cifar10 needs --data-path or $PRUNELAB_DATA");
          dspec.path = env;
        }
      }
      dspec.train_size = tr_train;
      dspec.score_size = tr_score;
      dspec.test_size = tr_test;
      dspec.separability = tr_sep;
      dspec.subsample_seed = g.seed;
      const Dataset data = load_dataset(dspec);

      NetworkSpec spec = tr_arch == "minicnn-a"   ? minicnn_a(tr_div)
                         : tr_arch == "minicnn-v" ? minicnn_v(tr_div)
                                                  : load_netspec(tr_arch);
      Network net = build_network(spec, substream_seed(g.seed, 0xa2c4ULL));
      TrainConfig tc;
      tc.learning_rate = tr_lr;
      tc.batch_size = tr_batch;
      tc.max_updates = tr_updates;
      tc.seed = substream_seed(g.seed, 0x7a18ULL);
      const TrainResult res = train_to_plateau(&net, data, tc);

      fs::create_directories(g.out_dir);
      const auto stem = fs::path(g.out_dir) / tr_name;
      save_netspec(net.spec, stem.string() + ".netspec");
      save_weights(net, stem.string() + ".plab");
      std::cout << "updates=" << res.updates_run
                << " score_acc=" << format_real(res.best_score_accuracy)
                << " test_acc=" << format_real(evaluate_accuracy(net, data.test)) << "\n"
                << "wrote " << stem.string() << ".netspec, " << stem.string() << ".plab\n";
      return 0;
    }

    if (pr->parsed()) {
      const NetworkSpec spec = load_netspec(pr_model + ".netspec");
      const Network net = load_weights(spec, pr_model + ".plab");
      DatasetSpec dspec;
      dspec.source = pr_data == "cifar10" ? DataSource::Cifar10Binary : DataSource::Synthetic;
      if (dspec.source == DataSource::Cifar10Binary) {
        dspec.path = pr_data_path;
        if (dspec.path.empty()) {
          const char* env = std::getenv("PRUNELAB_DATA");
          require(env != nullptr, "--data cifar10 needs --data-path or $PRUNELAB_DATA");
          dspec.path = env;
        }
      }
      dspec.train_size = pr_train;
      dspec.score_size = pr_score;
      dspec.test_size = pr_test;
      dspec.separability = pr_sep;
      dspec.subsample_seed = g.seed;
      const Dataset data = load_dataset(dspec);

      PruneSchedule schedule;
      schedule.filters_per_step = pr_k;
      schedule.finetune_updates = pr_updates;
      schedule.batch_size = pr_batch;
      schedule.total_steps = pr_steps;
      schedule.repetitions = pr_reps;
      schedule.finetune_lr = pr_lr;
      schedule.score_batches = pr_score_batches;

      const Strategy strategy = Strategy::parse(pr_strategy);
      const auto traj = run_repetitions(net, strategy, schedule, data, g.seed);
      fs::create_directories(g.out_dir);
      const auto path = fs::path(g.out_dir) / "trajectory.csv";
      write_text_file(path.string(), trajectory_csv(pr_strategy, schedule, traj));
      std::cout << "wrote " << path.string() << "\n";
      for (const auto& p : traj)
        std::cout << "step=" << p.step << " pruned=" << p.cum_pruned
                  << " acc=" << format_real(p.accuracy_mean) << " +-"
                  << format_real(p.accuracy_std) << "\n";
      return 0;
    }

    if (ex->parsed()) {
      const Config cfg = Config::parse_file(ex_config);
      const ExperimentResult res = run_experiment(cfg, g.out_dir);
      std::cout << "experiment dir: " << res.dir << "\n"
                << "baseline test accuracy: " << format_real(res.baseline_test_accuracy) << "\n";
      for (const auto& run : res.runs) std::cout << "wrote " << run.csv_path << "\n";
      std::cout << "wrote " << res.manifest_path << "\n";
      return 0;
    }

    if (gc->parsed()) {
      const Network net = build_network(minicnn_a(gc_div), substream_seed(g.seed, 0xa2c4ULL));
      Rng rng = make_rng(substream_seed(g.seed, 0xba7cULL));
      std::normal_distribution<double> gauss(0.0, 1.0);
      Tensor batch({gc_batch, 3, 32, 32});
      for (Index i = 0; i < batch.size(); ++i) batch[i] = gauss(rng);
      std::vector<int> labels(static_cast<std::size_t>(gc_batch));
      std::uniform_int_distribution<int> lab(0, 9);
      for (auto& l : labels) l = lab(rng);
      const GradCheckReport rep = grad_check(net, batch, labels, gc_step, gc_tol);
      std::cout << "params=" << rep.params_checked
                << " max_rel_error=" << format_real(rep.max_rel_error) << " worst=" << rep.worst_param
                << (rep.passed ? "  ok" : "  FAILED") << "\n";
      return rep.passed ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
