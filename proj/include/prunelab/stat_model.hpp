#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "prunelab/distributions.hpp"

namespace prunelab::statmodel {

/// Two-layer contribution model: m filters with i.i.d. contributions from
/// first_dist, n filters from second_dist. The first floor(corr_pair_fraction
/// * n) index pairs (2p, 2p+1) of the second layer are correlated through a
/// shared latent draw s_p:  eta_i = (1-w)*u_i + w*s_p  with w = corr_strength,
/// which preserves the mean, cannot raise the variance, and keeps positivity.
struct ContributionModel {
  Index m = 10;
  Index n = 1000;
  DistributionSpec first_dist;
  DistributionSpec second_dist;
  double corr_pair_fraction = 0.0;  // C2: correlated pairs per filter
  double corr_strength = 0.0;       // latent weight w in [0,1]
  double variance_cap = 1.0 / 12.0; // C1
  double mean_floor = 0.5;          // eps0
  double a = 9.0;
  double b = 800.0;

  // cached closed-form moments, filled by build_contribution_model
  double first_mean = 0, first_variance = 0;
  double second_mean = 0, second_variance = 0;

  Index correlated_pairs() const {
    return static_cast<Index>(corr_pair_fraction * static_cast<double>(n));
  }
  ContributionModel with_n(Index new_n) const;
};

/// Validates all model constraints (positive support, variance <= C1,
/// mean >= eps0, pair budget) and caches the distribution moments.
ContributionModel build_contribution_model(ContributionModel params);

/// One joint sample of both layers; deterministic per seed.
void sample_contributions(const ContributionModel& model, std::uint64_t rng_seed,
                          Eigen::VectorXd* first, Eigen::VectorXd* second);

/// Per-trial statistics needed by every scenario estimator. For drop_k = 1,
/// lowest_k_* is the layer minimum and random_k_eta a single uniformly chosen
/// value; for drop_k > 1 they are sums over k filters.
struct TrialDraw {
  double sum_xi = 0, sum_eta = 0;
  double lowest_k_xi = 0;   // sum of the k smallest first-layer contributions
  double lowest_k_eta = 0;  // sum of the k smallest second-layer contributions
  double random_k_eta = 0;  // sum of k uniformly chosen (distinct) second-layer contributions
  double min_xi = 0, min_eta = 0;
};

/// Draws one trial into scratch buffers (reused across trials).
class TrialSampler {
 public:
  TrialSampler(const ContributionModel& model, int drop_k);
  TrialDraw draw(Rng& rng);
  const Eigen::VectorXd& last_first() const { return xi_; }
  const Eigen::VectorXd& last_second() const { return eta_; }

 private:
  const ContributionModel& model_;
  int drop_k_;
  Eigen::VectorXd xi_, eta_;
  std::vector<Index> pick_;
  std::vector<double> small_;
};

struct EstimateWithCI {
  double value = 0;
  double half_width = 0;  // 95% normal-approximation half-width
};

/// Monte Carlo estimates of the five scenario values, all evaluated on the
/// same joint samples (common random numbers), plus the component survival
/// probabilities they are assembled from.
struct ScenarioEstimates {
  EstimateWithCI v_o, v_sr, v_sl, v_fl, v_gl;
  EstimateWithCI p_a_full;          // P(sum xi >= a)
  EstimateWithCI p_a_drop_lowest;   // P(sum xi - lowest k >= a)
  EstimateWithCI p_b_full;          // P(sum eta >= b)
  EstimateWithCI p_b_drop_lowest;   // P(sum eta - lowest k >= b)
  EstimateWithCI p_b_drop_random;   // P(sum eta - random k >= b)
  Index trials = 0;
  std::uint64_t seed = 0;
  int drop_k = 1;

  double max_half_width() const;
};

ScenarioEstimates estimate_scenarios(const ContributionModel& model, Index trials,
                                     std::uint64_t seed, int drop_k = 1);

struct PairCheck {
  const char* lower = "";
  const char* upper = "";
  double margin = 0;  // upper - lower; passes when margin >= -slack
  double slack = 0;
  bool ok = false;
};

struct OrderingReport {
  std::array<PairCheck, 4> chain;  // (fl,gl), (gl,sr), (sr,sl), (sl,o)
  std::array<PairCheck, 2> sum_chain;  // drop-random <= drop-lowest <= full, on the b side
  bool all_ok = false;
};

/// Checks v_fl <= v_gl <= v_sr <= v_sl <= v_o up to `slack`; slack < 0 means
/// "use the combined half-widths of each pair".
OrderingReport check_ordering(const ScenarioEstimates& est, double slack = -1.0);

struct BoundReport {
  double epsilon = 0;
  double empirical_lhs = 0;   // P(|sum(eta - E eta)|/n >= eps), Monte Carlo
  double chebyshev_rhs = 0;   // C1 (1 + C2) / (eps^2 n)
  double std_error = 0;       // binomial standard error of empirical_lhs
  bool satisfied = false;     // lhs <= rhs + 3 std errors
};

BoundReport chebyshev_bound_check(const ContributionModel& model, double epsilon, Index trials,
                                  std::uint64_t seed);

struct SweepRow {
  Index n = 0;
  double empirical_lhs = 0;
  double chebyshev_rhs = 0;
  double std_error = 0;
  double p_sum_ge_b = 0;           // P(sum eta >= b)
  double p_sum_drop_min_ge_b = 0;  // P(sum eta - min eta >= b)
};

/// Re-runs the deviation estimate for each n in n_values (strictly
/// increasing), keeping every other model parameter fixed.
std::vector<SweepRow> convergence_sweep(const ContributionModel& model_template,
                                        const std::vector<Index>& n_values, double epsilon,
                                        Index trials, std::uint64_t seed);

}  // namespace prunelab::statmodel
