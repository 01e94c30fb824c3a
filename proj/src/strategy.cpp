#include "prunelab/strategy.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "prunelab/rng.hpp"

namespace prunelab {

Index LayerRule::resolve(const std::vector<Index>& census) const {
  if (kind == Kind::Fixed) {
    require(fixed_index >= 0 && fixed_index < static_cast<Index>(census.size()),
            "fixed layer rule out of range");
    return fixed_index;
  }
  Index best = 0;
  for (Index i = 1; i < static_cast<Index>(census.size()); ++i)
    if (census[static_cast<std::size_t>(i)] > census[static_cast<std::size_t>(best)]) best = i;
  return best;
}

std::string Strategy::to_string() const {
  std::string base = kind == Kind::GlobalTaylor ? "global-taylor"
                     : kind == Kind::LayerRandom ? "layer-random"
                                                 : "layer-taylor";
  if (kind == Kind::GlobalTaylor) return base;
  if (target.kind == LayerRule::Kind::MostFilters) return base + ":most-filters";
  std::ostringstream os;
  os << base << ":fixed=" << target.fixed_index;
  return os.str();
}

Strategy Strategy::parse(const std::string& text) {
  Strategy s;
  std::string head = text, tail;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    head = text.substr(0, colon);
    tail = text.substr(colon + 1);
  }
  if (head == "global-taylor") {
    s.kind = Kind::GlobalTaylor;
    require(tail.empty(), "global-taylor takes no target");
    return s;
  }
  if (head == "layer-random") {
    s.kind = Kind::LayerRandom;
  } else if (head == "layer-taylor") {
    s.kind = Kind::LayerTaylor;
  } else {
    throw InvalidArgument("unknown strategy '" + text + "'");
  }
  if (tail == "most-filters" || tail.empty()) {
    s.target.kind = LayerRule::Kind::MostFilters;
  } else if (tail.rfind("fixed=", 0) == 0) {
    s.target.kind = LayerRule::Kind::Fixed;
    try {
      s.target.fixed_index = std::stoll(tail.substr(6));
    } catch (const std::exception&) {
      throw InvalidArgument("bad layer index in strategy '" + text + "'");
    }
  } else {
    throw InvalidArgument("unknown layer rule '" + tail + "' in strategy '" + text + "'");
  }
  return s;
}

std::vector<std::pair<Index, Index>> select_filters(const Strategy& strategy,
                                                    const SaliencyMap* scores, const Network& net,
                                                    Index k, std::uint64_t rng_seed) {
  require(k >= 1, "selection size k must be >= 1");
  const std::vector<Index> census = net.conv_census();
  if (strategy.needs_scores()) {
    require(scores != nullptr, "Taylor strategies need a saliency map");
    require(static_cast<Index>(scores->layer_scores.size()) == static_cast<Index>(census.size()),
            "saliency map does not match network");
    for (std::size_t c = 0; c < census.size(); ++c)
      require(scores->layer_scores[c].size() == census[c],
              "saliency map does not match the current filter census");
  }

  std::vector<std::pair<Index, Index>> picked;
  picked.reserve(static_cast<std::size_t>(k));

  if (strategy.kind == Strategy::Kind::GlobalTaylor) {
    struct Entry {
      double score;
      Index layer, filter;
    };
    std::vector<Entry> entries;
    for (Index c = 0; c < static_cast<Index>(census.size()); ++c) {
      const auto& s = scores->layer_scores[static_cast<std::size_t>(c)];
      for (Index f = 0; f < s.size(); ++f) entries.push_back({s[f], c, f});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.score != b.score) return a.score < b.score;
      if (a.layer != b.layer) return a.layer < b.layer;
      return a.filter < b.filter;
    });
    std::vector<Index> remaining = census;
    for (const Entry& e : entries) {
      if (static_cast<Index>(picked.size()) == k) break;
      if (remaining[static_cast<std::size_t>(e.layer)] <= 1) continue;  // never empty a layer
      picked.emplace_back(e.layer, e.filter);
      --remaining[static_cast<std::size_t>(e.layer)];
    }
    require(static_cast<Index>(picked.size()) == k,
            "cannot select k filters without emptying a layer");
    std::sort(picked.begin(), picked.end());
    return picked;
  }

  const Index layer = strategy.target.resolve(census);
  const Index width = census[static_cast<std::size_t>(layer)];
  if (width < k + 1) {
    std::ostringstream os;
    os << "target conv layer " << layer << " has " << width << " filters; selecting " << k
       << " needs at least " << (k + 1);
    throw InvalidArgument(os.str());
  }

  if (strategy.kind == Strategy::Kind::LayerTaylor) {
    const auto& s = scores->layer_scores[static_cast<std::size_t>(layer)];
    std::vector<Index> ids(static_cast<std::size_t>(width));
    std::iota(ids.begin(), ids.end(), Index{0});
    std::sort(ids.begin(), ids.end(), [&](Index a, Index b) {
      if (s[a] != s[b]) return s[a] < s[b];
      return a < b;
    });
    for (Index i = 0; i < k; ++i) picked.emplace_back(layer, ids[static_cast<std::size_t>(i)]);
  } else {
    // uniform without replacement
    Rng rng = make_rng(rng_seed);
    std::vector<Index> ids(static_cast<std::size_t>(width));
    std::iota(ids.begin(), ids.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
      std::uniform_int_distribution<Index> d(i, width - 1);
      std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(d(rng))]);
      picked.emplace_back(layer, ids[static_cast<std::size_t>(i)]);
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace prunelab
