#include <doctest.h>

#include "prunelab/strategy.hpp"

using namespace prunelab;

namespace {

Network net_with_census(const std::vector<Index>& census) {
  NetworkSpec s;
  s.input_shape = {1, 8, 8};
  s.num_classes = 2;
  for (Index c : census) {
    s.layers.emplace_back(ConvDesc{c, 3, 1, 1});
    s.layers.emplace_back(ReluDesc{});
  }
  s.layers.emplace_back(FlattenDesc{});
  s.layers.emplace_back(DenseDesc{2});
  return build_network(s, 1);
}

SaliencyMap map_for(const std::vector<Eigen::ArrayXd>& scores) {
  SaliencyMap m;
  m.layer_scores = scores;
  m.l2_normalized = true;
  m.batches_used = 1;
  return m;
}

}  // namespace

TEST_SUITE("strategy") {
  TEST_CASE("most-filters resolves to the widest layer, ties to the lowest index") {
    LayerRule rule;
    rule.kind = LayerRule::Kind::MostFilters;
    CHECK(rule.resolve({16, 256, 64}) == 1);
    CHECK(rule.resolve({32, 16, 32}) == 0);
    CHECK(rule.resolve({8}) == 0);
  }

  TEST_CASE("global taylor takes the k lowest scores with lexicographic ties") {
    const Network net = net_with_census({2, 1});
    Eigen::ArrayXd l0(2), l1(1);
    l0 << 0.3, 0.1;
    l1 << 0.2;
    const SaliencyMap scores = map_for({l0, l1});
    const Strategy s{Strategy::Kind::GlobalTaylor, {}};
    const auto picked = select_filters(s, &scores, net, 2, 0);
    // lowest is (0,1) at 0.1; next would be (1,0) at 0.2
    REQUIRE(picked.size() == 2);
    CHECK(picked[0] == std::pair<Index, Index>{0, 1});
    CHECK(picked[1] == std::pair<Index, Index>{1, 0});
  }

  TEST_CASE("global taylor never empties a layer") {
    const Network net = net_with_census({2, 4});
    Eigen::ArrayXd l0(2), l1(4);
    l0 << 0.01, 0.02;  // both tiny: naive selection would drain layer 0
    l1 << 0.5, 0.6, 0.7, 0.8;
    const SaliencyMap scores = map_for({l0, l1});
    const Strategy s{Strategy::Kind::GlobalTaylor, {}};
    const auto picked = select_filters(s, &scores, net, 3, 0);
    Index from0 = 0;
    for (const auto& [l, f] : picked)
      if (l == 0) ++from0;
    CHECK(from0 == 1);  // keeps one survivor in layer 0
  }

  TEST_CASE("ties break toward ascending layer and filter ids") {
    const Network net = net_with_census({2, 2});
    Eigen::ArrayXd l0(2), l1(2);
    l0 << 0.5, 0.5;
    l1 << 0.5, 0.5;
    const SaliencyMap scores = map_for({l0, l1});
    const auto picked =
        select_filters(Strategy{Strategy::Kind::GlobalTaylor, {}}, &scores, net, 2, 0);
    CHECK(picked[0] == std::pair<Index, Index>{0, 0});
    CHECK(picked[1] == std::pair<Index, Index>{0, 1});
  }

  TEST_CASE("layer taylor picks inside the resolved layer only") {
    const Network net = net_with_census({3, 5});
    Eigen::ArrayXd l0(3), l1(5);
    l0 << 0.9, 0.8, 0.7;
    l1 << 0.5, 0.1, 0.4, 0.2, 0.3;
    const SaliencyMap scores = map_for({l0, l1});
    Strategy s{Strategy::Kind::LayerTaylor, {LayerRule::Kind::MostFilters, 0}};
    const auto picked = select_filters(s, &scores, net, 2, 0);
    REQUIRE(picked.size() == 2);
    CHECK(picked[0] == std::pair<Index, Index>{1, 1});
    CHECK(picked[1] == std::pair<Index, Index>{1, 3});
  }

  TEST_CASE("layer random is seed-deterministic and in range") {
    const Network net = net_with_census({4, 256});
    Strategy s{Strategy::Kind::LayerRandom, {LayerRule::Kind::Fixed, 1}};
    const auto a = select_filters(s, nullptr, net, 5, 777);
    const auto b = select_filters(s, nullptr, net, 5, 777);
    const auto c = select_filters(s, nullptr, net, 5, 778);
    CHECK(a == b);
    CHECK(a != c);
    for (const auto& [l, f] : a) {
      CHECK(l == 1);
      CHECK(f >= 0);
      CHECK(f < 256);
    }
    // uniqueness
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i] != a[i - 1]);
  }

  TEST_CASE("failures: small target layer and missing scores") {
    const Network net = net_with_census({4, 8});
    Strategy lt{Strategy::Kind::LayerTaylor, {LayerRule::Kind::Fixed, 0}};
    Eigen::ArrayXd l0(4), l1(8);
    l0.setConstant(0.5);
    l1.setConstant(0.5);
    const SaliencyMap scores = map_for({l0, l1});
    CHECK_THROWS_AS(select_filters(lt, &scores, net, 4, 0), InvalidArgument);  // needs k+1
    CHECK_THROWS_AS(select_filters(lt, nullptr, net, 2, 0), InvalidArgument);  // no scores
    Strategy lr{Strategy::Kind::LayerRandom, {LayerRule::Kind::Fixed, 0}};
    CHECK_THROWS_AS(select_filters(lr, nullptr, net, 4, 0), InvalidArgument);
  }

  TEST_CASE("strategy strings parse and print") {
    CHECK(Strategy::parse("global-taylor").kind == Strategy::Kind::GlobalTaylor);
    const Strategy lr = Strategy::parse("layer-random:fixed=2");
    CHECK(lr.kind == Strategy::Kind::LayerRandom);
    CHECK(lr.target.kind == LayerRule::Kind::Fixed);
    CHECK(lr.target.fixed_index == 2);
    CHECK(lr.to_string() == "layer-random:fixed=2");
    const Strategy lt = Strategy::parse("layer-taylor:most-filters");
    CHECK(lt.target.kind == LayerRule::Kind::MostFilters);
    CHECK(lt.to_string() == "layer-taylor:most-filters");
    CHECK_THROWS_AS(Strategy::parse("weight-magnitude"), InvalidArgument);
    CHECK_THROWS_AS(Strategy::parse("layer-random:biggest"), InvalidArgument);
  }
}
