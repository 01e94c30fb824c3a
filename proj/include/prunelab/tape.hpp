#pragma once

#include <span>
#include <vector>

#include "prunelab/network.hpp"
#include "prunelab/tensor.hpp"

namespace prunelab {

/// Per-parameter gradients, aligned with Network::weights / biases.
struct ParamGrads {
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;
};

/// Recording of one forward pass: every layer output plus what the backward
/// pass needs (pool argmax routes, softmax probabilities). The tape borrows
/// the network, which must outlive it; backward may run once.
class Tape {
 public:
  struct Node {
    Index layer_pos = -1;    // index into spec.layers
    Index param_index = -1;  // index into weights/biases, -1 for stateless layers
    Tensor output;
    std::vector<Index> argmax;  // maxpool only
  };

  double loss() const { return loss_; }
  bool consumed() const { return consumed_; }
  const Network& network() const { return *net_; }
  const Tensor& input() const { return input_; }
  std::span<const int> labels() const { return labels_; }
  const Tensor& probs() const { return probs_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Activation used by the Taylor criterion for conv layer `conv_index`:
  /// the output of the ReLU directly after the conv, or of the conv itself
  /// when no ReLU follows.
  const Tensor& conv_activation(Index conv_index) const;
  Index conv_count() const { return static_cast<Index>(saliency_node_.size()); }

 private:
  friend Tape forward(const Network&, const Tensor&, std::span<const int>);
  friend struct BackwardResult backward(Tape&, double);

  const Network* net_ = nullptr;
  Tensor input_;
  std::vector<int> labels_;
  std::vector<Node> nodes_;
  std::vector<Index> saliency_node_;  // per conv layer, node index of its activation
  Tensor probs_;
  double loss_ = 0;
  bool consumed_ = false;
};

/// Runs the network on a batch [B,C,H,W] and records the tape. Rejects shape
/// mismatches and non-finite inputs.
Tape forward(const Network& net, const Tensor& batch, std::span<const int> labels);

struct BackwardResult {
  ParamGrads grads;
  /// d(loss)/d(activation) for every conv layer, aligned with conv order.
  std::vector<Tensor> activation_grads;
};

/// Reverse pass over a recorded tape; computes d(loss_scale * loss)/d(theta).
/// A tape can be consumed only once.
BackwardResult backward(Tape& tape, double loss_scale = 1.0);

}  // namespace prunelab
