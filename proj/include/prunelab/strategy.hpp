#pragma once

#include <string>
#include <utility>
#include <vector>

#include "prunelab/saliency.hpp"

namespace prunelab {

/// How layer-local strategies pick their target conv layer.
struct LayerRule {
  enum class Kind { Fixed, MostFilters };
  Kind kind = Kind::MostFilters;
  Index fixed_index = 0;

  /// Resolves to a conv index against the current census. MostFilters picks
  /// the conv layer with the largest surviving filter count, ties toward the
  /// lowest index; re-evaluated at every selection.
  Index resolve(const std::vector<Index>& census) const;
};

struct Strategy {
  enum class Kind { GlobalTaylor, LayerRandom, LayerTaylor };
  Kind kind = Kind::GlobalTaylor;
  LayerRule target;  // unused for GlobalTaylor

  bool needs_scores() const { return kind != Kind::LayerRandom; }
  std::string to_string() const;
  /// Accepts "global-taylor", "layer-random:fixed=2", "layer-taylor:most-filters", ...
  static Strategy parse(const std::string& text);
};

/// Picks k (conv_layer, filter_id) pairs to prune. Taylor strategies need a
/// score map; ties break toward ascending (layer, filter). No selection ever
/// empties a layer: GlobalTaylor skips filters whose layer is down to one
/// survivor, layer-local strategies require k+1 filters in the target layer.
std::vector<std::pair<Index, Index>> select_filters(const Strategy& strategy,
                                                    const SaliencyMap* scores, const Network& net,
                                                    Index k, std::uint64_t rng_seed);

}  // namespace prunelab
