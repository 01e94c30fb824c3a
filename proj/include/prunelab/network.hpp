#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "prunelab/tensor.hpp"

namespace prunelab {

struct ConvDesc {
  Index out_channels = 0;
  Index kernel = 3;
  Index stride = 1;
  Index padding = 1;
  bool operator==(const ConvDesc&) const = default;
};
struct ReluDesc {
  bool operator==(const ReluDesc&) const = default;
};
struct MaxPoolDesc {
  Index kernel = 2;
  Index stride = 2;
  bool operator==(const MaxPoolDesc&) const = default;
};
struct FlattenDesc {
  bool operator==(const FlattenDesc&) const = default;
};
struct DenseDesc {
  Index out_features = 0;
  bool operator==(const DenseDesc&) const = default;
};

using LayerDesc = std::variant<ConvDesc, ReluDesc, MaxPoolDesc, FlattenDesc, DenseDesc>;

/// Per-layer output shape: {channels, height, width} for spatial layers,
/// {features, 1, 1} after flatten/dense.
using LayerShape = std::array<Index, 3>;

/// Topology of a chain CNN. Validation walks the chain and rejects specs
/// whose shapes do not compose (e.g. dense before flatten) or whose final
/// output is not num_classes.
struct NetworkSpec {
  LayerShape input_shape{3, 32, 32};
  Index num_classes = 10;
  std::vector<LayerDesc> layers;

  /// Output shape of every layer, input first. Throws on inconsistency.
  std::vector<LayerShape> shape_trace() const;
  void validate() const { (void)shape_trace(); }

  Index conv_count() const;
  /// Position in `layers` of conv number `conv_index` (0-based among convs).
  Index conv_layer_position(Index conv_index) const;

  std::string serialize() const;
  static NetworkSpec parse(std::istream& in);
  static NetworkSpec parse_string(const std::string& text);

  bool operator==(const NetworkSpec&) const = default;
};

/// A spec plus its realized parameters. Weight/bias vectors are indexed by
/// parameter-bearing layer order (convs and denses, in chain order).
/// Networks are values; surgery returns a new network.
struct Network {
  NetworkSpec spec;
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;

  Index param_count() const;
  /// Surviving filters per conv layer, in conv order.
  std::vector<Index> conv_census() const;
  /// Index into weights/biases for conv number `conv_index`.
  Index conv_param_index(Index conv_index) const;
};

/// He-style fan-in initialization, deterministic per seed.
Network build_network(const NetworkSpec& spec, std::uint64_t init_seed);

/// Multiplies out_channels of one conv layer by `factor` (>= 2). Original
/// filters are preserved bit-exactly; new filters and the new input slices of
/// the consumer layer are freshly initialized.
Network widen_layer(const Network& net, Index conv_index, Index factor, std::uint64_t init_seed);

/// Removes the given output channels of one conv layer together with the
/// matching input slices of the next weight-bearing layer. For a dense
/// consumer (after flatten) each removed channel removes one contiguous block
/// of height*width input columns. filter_ids must be sorted, unique, and
/// leave at least one filter.
Network remove_filters(const Network& net, Index conv_index, const std::vector<Index>& filter_ids);

/// The AlexNet-scale stand-in: 4 conv layers (16, 32, 64, 32 filters) and 2
/// dense layers on 3x32x32 input, 10 classes. width_divisor shrinks every
/// hidden width for cheap test instances.
NetworkSpec minicnn_a(Index width_divisor = 1);
/// The VGG-scale stand-in: 8 conv layers (16,16,32,32,64,64,64,64) + 2 dense.
NetworkSpec minicnn_v(Index width_divisor = 1);

}  // namespace prunelab
