#include "prunelab/stat_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "prunelab/threading.hpp"

namespace prunelab::statmodel {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr Index kBlock = 4096;

struct Accum {
  double sum = 0, sumsq = 0;
  void add(double x) {
    sum += x;
    sumsq += x * x;
  }
  void merge(const Accum& o) {
    sum += o.sum;
    sumsq += o.sumsq;
  }
  EstimateWithCI finish(Index trials) const {
    EstimateWithCI e;
    e.value = sum / static_cast<double>(trials);
    if (trials >= 2) {
      double var = (sumsq - static_cast<double>(trials) * e.value * e.value) /
                   static_cast<double>(trials - 1);
      var = std::max(var, 0.0);
      e.half_width = kZ95 * std::sqrt(var / static_cast<double>(trials));
    }
    return e;
  }
};

}  // namespace

ContributionModel ContributionModel::with_n(Index new_n) const {
  ContributionModel c = *this;
  c.n = new_n;
  return build_contribution_model(c);
}

ContributionModel build_contribution_model(ContributionModel p) {
  require(p.m >= 1 && p.n >= 1, "model requires m >= 1 and n >= 1");
  p.first_dist.validate();
  p.second_dist.validate();
  require(p.corr_pair_fraction >= 0.0 && p.corr_pair_fraction <= 1.0,
          "corr_pair_fraction must lie in [0,1]");
  require(p.corr_strength >= 0.0 && p.corr_strength <= 1.0, "corr_strength must lie in [0,1]");
  require(p.variance_cap > 0.0, "variance_cap (C1) must be > 0");
  require(p.mean_floor > 0.0, "mean_floor (eps0) must be > 0");
  require(p.a >= 0.0 && p.b >= 0.0, "thresholds a, b must be >= 0");

  p.first_mean = p.first_dist.mean();
  p.first_variance = p.first_dist.variance();
  p.second_mean = p.second_dist.mean();
  p.second_variance = p.second_dist.variance();
  if (p.second_variance > p.variance_cap) {
    std::ostringstream os;
    os << "second-layer variance " << p.second_variance << " exceeds variance_cap (C1) "
       << p.variance_cap;
    throw InvalidArgument(os.str());
  }
  if (p.second_mean < p.mean_floor) {
    std::ostringstream os;
    os << "second-layer mean " << p.second_mean << " falls below mean_floor (eps0) "
       << p.mean_floor;
    throw InvalidArgument(os.str());
  }
  if (2 * p.correlated_pairs() > p.n) {
    throw InvalidArgument(
        "corr_pair_fraction too large: disjoint index pairs (2p, 2p+1) need 2*pairs <= n");
  }
  return p;
}

TrialSampler::TrialSampler(const ContributionModel& model, int drop_k)
    : model_(model), drop_k_(drop_k) {
  require(drop_k_ >= 1, "drop_k must be >= 1");
  require(drop_k_ < model_.m && drop_k_ < model_.n,
          "drop_k must leave at least one filter in each layer");
  xi_.resize(model_.m);
  eta_.resize(model_.n);
  small_.resize(static_cast<std::size_t>(drop_k_));
}

TrialDraw TrialSampler::draw(Rng& rng) {
  const Index m = model_.m, n = model_.n;
  const Index pairs = model_.correlated_pairs();
  const double w = model_.corr_strength;

  for (Index i = 0; i < m; ++i) xi_[i] = model_.first_dist.sample(rng);
  for (Index i = 0; i < n; ++i) eta_[i] = model_.second_dist.sample(rng);
  for (Index p = 0; p < pairs; ++p) {
    const double shared = model_.second_dist.sample(rng);
    eta_[2 * p] = (1.0 - w) * eta_[2 * p] + w * shared;
    eta_[2 * p + 1] = (1.0 - w) * eta_[2 * p + 1] + w * shared;
  }

  TrialDraw t;
  t.sum_xi = xi_.sum();
  t.sum_eta = eta_.sum();
  t.min_xi = xi_.minCoeff();
  t.min_eta = eta_.minCoeff();

  if (drop_k_ == 1) {
    std::uniform_int_distribution<Index> pick(0, n - 1);
    t.random_k_eta = eta_[pick(rng)];
    t.lowest_k_eta = t.min_eta;
    t.lowest_k_xi = t.min_xi;
  } else {
    // Floyd's algorithm: drop_k distinct indices, uniform over subsets.
    pick_.clear();
    for (Index i = n - drop_k_; i < n; ++i) {
      std::uniform_int_distribution<Index> d(0, i);
      Index j = d(rng);
      if (std::find(pick_.begin(), pick_.end(), j) != pick_.end()) j = i;
      pick_.push_back(j);
    }
    t.random_k_eta = 0;
    for (Index j : pick_) t.random_k_eta += eta_[j];

    std::partial_sort_copy(eta_.data(), eta_.data() + n, small_.begin(), small_.end());
    t.lowest_k_eta = 0;
    for (double v : small_) t.lowest_k_eta += v;
    std::partial_sort_copy(xi_.data(), xi_.data() + m, small_.begin(), small_.end());
    t.lowest_k_xi = 0;
    for (double v : small_) t.lowest_k_xi += v;
  }
  return t;
}

void sample_contributions(const ContributionModel& model, std::uint64_t rng_seed,
                          Eigen::VectorXd* first, Eigen::VectorXd* second) {
  TrialSampler sampler(model, 1);
  Rng rng = make_rng(rng_seed);
  sampler.draw(rng);
  *first = sampler.last_first();
  *second = sampler.last_second();
}

double ScenarioEstimates::max_half_width() const {
  double h = v_o.half_width;
  h = std::max(h, v_sr.half_width);
  h = std::max(h, v_sl.half_width);
  h = std::max(h, v_fl.half_width);
  h = std::max(h, v_gl.half_width);
  return h;
}

ScenarioEstimates estimate_scenarios(const ContributionModel& model, Index trials,
                                     std::uint64_t seed, int drop_k) {
  if (trials < 1000) {
    std::ostringstream os;
    os << "estimate_scenarios requires trials >= 1000, got " << trials;
    throw InvalidArgument(os.str());
  }

  const double wm = static_cast<double>(model.m) / static_cast<double>(model.m + model.n);
  const double wn = static_cast<double>(model.n) / static_cast<double>(model.m + model.n);
  const Index blocks = (trials + kBlock - 1) / kBlock;
  std::vector<std::array<Accum, 10>> partial(static_cast<std::size_t>(blocks));

  parallel_for(blocks, [&](Index blk) {
    TrialSampler sampler(model, drop_k);
    Rng rng = make_rng(substream_seed(seed, static_cast<std::uint64_t>(blk)));
    const Index lo = blk * kBlock;
    const Index hi = std::min(trials, lo + kBlock);
    auto& acc = partial[static_cast<std::size_t>(blk)];
    for (Index t = lo; t < hi; ++t) {
      const TrialDraw d = sampler.draw(rng);
      const double ia = d.sum_xi >= model.a ? 1.0 : 0.0;
      const double iad = d.sum_xi - d.lowest_k_xi >= model.a ? 1.0 : 0.0;
      const double ib = d.sum_eta >= model.b ? 1.0 : 0.0;
      const double ibd = d.sum_eta - d.lowest_k_eta >= model.b ? 1.0 : 0.0;
      const double ibr = d.sum_eta - d.random_k_eta >= model.b ? 1.0 : 0.0;
      acc[0].add(ia + ib);                                  // v_o
      acc[1].add(ia + ibr);                                 // v_sr
      acc[2].add(ia + ibd);                                 // v_sl
      acc[3].add(iad + ib);                                 // v_fl
      acc[4].add(wm * (iad + ib) + wn * (ia + ibd));        // v_gl
      acc[5].add(ia);
      acc[6].add(iad);
      acc[7].add(ib);
      acc[8].add(ibd);
      acc[9].add(ibr);
    }
  });

  std::array<Accum, 10> total;
  for (const auto& blk : partial)
    for (std::size_t i = 0; i < total.size(); ++i) total[i].merge(blk[i]);

  ScenarioEstimates est;
  est.v_o = total[0].finish(trials);
  est.v_sr = total[1].finish(trials);
  est.v_sl = total[2].finish(trials);
  est.v_fl = total[3].finish(trials);
  est.v_gl = total[4].finish(trials);
  est.p_a_full = total[5].finish(trials);
  est.p_a_drop_lowest = total[6].finish(trials);
  est.p_b_full = total[7].finish(trials);
  est.p_b_drop_lowest = total[8].finish(trials);
  est.p_b_drop_random = total[9].finish(trials);
  est.trials = trials;
  est.seed = seed;
  est.drop_k = drop_k;
  return est;
}

namespace {

PairCheck make_pair(const char* lo_name, const EstimateWithCI& lo, const char* hi_name,
                    const EstimateWithCI& hi, double slack) {
  PairCheck c;
  c.lower = lo_name;
  c.upper = hi_name;
  c.margin = hi.value - lo.value;
  c.slack = slack >= 0.0 ? slack : lo.half_width + hi.half_width;
  c.ok = c.margin >= -c.slack;
  return c;
}

}  // namespace

OrderingReport check_ordering(const ScenarioEstimates& est, double slack) {
  OrderingReport r;
  r.chain[0] = make_pair("v_fl", est.v_fl, "v_gl", est.v_gl, slack);
  r.chain[1] = make_pair("v_gl", est.v_gl, "v_sr", est.v_sr, slack);
  r.chain[2] = make_pair("v_sr", est.v_sr, "v_sl", est.v_sl, slack);
  r.chain[3] = make_pair("v_sl", est.v_sl, "v_o", est.v_o, slack);
  r.sum_chain[0] =
      make_pair("p_b_drop_random", est.p_b_drop_random, "p_b_drop_lowest", est.p_b_drop_lowest, slack);
  r.sum_chain[1] = make_pair("p_b_drop_lowest", est.p_b_drop_lowest, "p_b_full", est.p_b_full, slack);
  r.all_ok = true;
  for (const auto& c : r.chain) r.all_ok = r.all_ok && c.ok;
  for (const auto& c : r.sum_chain) r.all_ok = r.all_ok && c.ok;
  return r;
}

BoundReport chebyshev_bound_check(const ContributionModel& model, double epsilon, Index trials,
                                  std::uint64_t seed) {
  require(epsilon > 0.0, "Chebyshev bound requires epsilon > 0");
  require(trials >= 2, "chebyshev_bound_check requires trials >= 2");

  const double mean_sum = static_cast<double>(model.n) * model.second_mean;
  const double thresh = epsilon * static_cast<double>(model.n);
  const Index blocks = (trials + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);

  parallel_for(blocks, [&](Index blk) {
    TrialSampler sampler(model, 1);
    Rng rng = make_rng(substream_seed(seed, static_cast<std::uint64_t>(blk)));
    const Index lo = blk * kBlock;
    const Index hi = std::min(trials, lo + kBlock);
    double hits = 0;
    for (Index t = lo; t < hi; ++t) {
      const TrialDraw d = sampler.draw(rng);
      if (std::abs(d.sum_eta - mean_sum) >= thresh) hits += 1.0;
    }
    partial[static_cast<std::size_t>(blk)] = hits;
  });

  double hits = 0;
  for (double h : partial) hits += h;

  BoundReport rep;
  rep.epsilon = epsilon;
  rep.empirical_lhs = hits / static_cast<double>(trials);
  rep.chebyshev_rhs = model.variance_cap * (1.0 + model.corr_pair_fraction) /
                      (epsilon * epsilon * static_cast<double>(model.n));
  rep.std_error =
      std::sqrt(rep.empirical_lhs * (1.0 - rep.empirical_lhs) / static_cast<double>(trials));
  rep.satisfied = rep.empirical_lhs <= rep.chebyshev_rhs + 3.0 * rep.std_error;
  return rep;
}

std::vector<SweepRow> convergence_sweep(const ContributionModel& model_template,
                                        const std::vector<Index>& n_values, double epsilon,
                                        Index trials, std::uint64_t seed) {
  require(!n_values.empty(), "convergence_sweep requires a non-empty n list");
  require(epsilon > 0.0, "Chebyshev bound requires epsilon > 0");
  for (std::size_t i = 1; i < n_values.size(); ++i)
    require(n_values[i] > n_values[i - 1], "n_values must be strictly increasing");

  std::vector<SweepRow> rows;
  rows.reserve(n_values.size());
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    const ContributionModel m = model_template.with_n(n_values[i]);
    const std::uint64_t row_seed = substream_seed(seed, 0x5eedULL + i);
    const BoundReport rep = chebyshev_bound_check(m, epsilon, trials, row_seed);

    // One extra pass for the b-threshold survival probabilities.
    const Index blocks = (trials + kBlock - 1) / kBlock;
    std::vector<std::array<double, 2>> partial(static_cast<std::size_t>(blocks), {0.0, 0.0});
    parallel_for(blocks, [&](Index blk) {
      TrialSampler sampler(m, 1);
      Rng rng = make_rng(substream_seed(row_seed, 0xb0bULL + static_cast<std::uint64_t>(blk)));
      const Index lo = blk * kBlock;
      const Index hi = std::min(trials, lo + kBlock);
      auto& acc = partial[static_cast<std::size_t>(blk)];
      for (Index t = lo; t < hi; ++t) {
        const TrialDraw d = sampler.draw(rng);
        if (d.sum_eta >= m.b) acc[0] += 1.0;
        if (d.sum_eta - d.min_eta >= m.b) acc[1] += 1.0;
      }
    });
    double full = 0, drop = 0;
    for (const auto& p : partial) {
      full += p[0];
      drop += p[1];
    }

    SweepRow row;
    row.n = n_values[i];
    row.empirical_lhs = rep.empirical_lhs;
    row.chebyshev_rhs = rep.chebyshev_rhs;
    row.std_error = rep.std_error;
    row.p_sum_ge_b = full / static_cast<double>(trials);
    row.p_sum_drop_min_ge_b = drop / static_cast<double>(trials);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace prunelab::statmodel
