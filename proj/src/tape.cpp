#include "prunelab/tape.hpp"

#include <sstream>

#include "prunelab/tensor_ops.hpp"

namespace prunelab {

const Tensor& Tape::conv_activation(Index conv_index) const {
  require(conv_index >= 0 && conv_index < conv_count(), "conv index out of range");
  return nodes_[static_cast<std::size_t>(saliency_node_[static_cast<std::size_t>(conv_index)])]
      .output;
}

Tape forward(const Network& net, const Tensor& batch, std::span<const int> labels) {
  const auto& spec = net.spec;
  require(batch.rank() == 4, "batch must be 4-d [B,C,H,W]");
  require(batch.extent(1) == spec.input_shape[0] && batch.extent(2) == spec.input_shape[1] &&
              batch.extent(3) == spec.input_shape[2],
          "batch shape does not match network input");
  require(batch.extent(0) >= 1, "batch must be non-empty");
  require(batch.extent(0) == static_cast<Index>(labels.size()),
          "label count must match batch size");
  if (!batch.all_finite()) throw InvalidArgument("non-finite values in input batch");

  Tape tape;
  tape.net_ = &net;
  tape.input_ = batch;
  tape.labels_.assign(labels.begin(), labels.end());

  const Index B = batch.extent(0);
  const Tensor* cur = &tape.input_;
  Index param = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    Tape::Node node;
    node.layer_pos = static_cast<Index>(i);
    if (const auto* c = std::get_if<ConvDesc>(&spec.layers[i])) {
      node.param_index = param;
      node.output = conv2d_forward(*cur, net.weights[static_cast<std::size_t>(param)],
                                   net.biases[static_cast<std::size_t>(param)], c->stride,
                                   c->padding);
      ++param;
      tape.saliency_node_.push_back(static_cast<Index>(tape.nodes_.size()));
    } else if (std::holds_alternative<ReluDesc>(spec.layers[i])) {
      node.output = relu_forward(*cur);
      // a relu straight after a conv is that conv's saliency activation
      if (!tape.saliency_node_.empty() && !tape.nodes_.empty() &&
          tape.saliency_node_.back() == static_cast<Index>(tape.nodes_.size()) - 1 &&
          std::holds_alternative<ConvDesc>(
              spec.layers[static_cast<std::size_t>(tape.nodes_.back().layer_pos)])) {
        tape.saliency_node_.back() = static_cast<Index>(tape.nodes_.size());
      }
    } else if (const auto* p = std::get_if<MaxPoolDesc>(&spec.layers[i])) {
      node.output = maxpool_forward(*cur, p->kernel, p->stride, &node.argmax);
    } else if (std::holds_alternative<FlattenDesc>(spec.layers[i])) {
      node.output = cur->reshaped({B, cur->size() / B});
    } else {
      node.param_index = param;
      node.output = dense_forward(*cur, net.weights[static_cast<std::size_t>(param)],
                                  net.biases[static_cast<std::size_t>(param)]);
      ++param;
    }
    tape.nodes_.push_back(std::move(node));
    cur = &tape.nodes_.back().output;
  }

  tape.loss_ = softmax_cross_entropy(*cur, labels, &tape.probs_);
  if (!std::isfinite(tape.loss_)) throw InvalidArgument("non-finite loss (diverged forward pass)");
  return tape;
}

BackwardResult backward(Tape& tape, double loss_scale) {
  if (tape.consumed_) throw StateError("backward called twice on a consumed tape");
  tape.consumed_ = true;

  const Network& net = *tape.net_;
  const auto& spec = net.spec;
  BackwardResult res;
  res.grads.weights.resize(net.weights.size());
  res.grads.biases.resize(net.biases.size());
  res.activation_grads.resize(tape.saliency_node_.size());

  Tensor grad = softmax_cross_entropy_backward(tape.probs_, tape.labels_, loss_scale);

  for (Index j = static_cast<Index>(tape.nodes_.size()) - 1; j >= 0; --j) {
    const auto& node = tape.nodes_[static_cast<std::size_t>(j)];
    const Tensor& in =
        j == 0 ? tape.input_ : tape.nodes_[static_cast<std::size_t>(j - 1)].output;

    // grad currently refers to node j's output; capture saliency slots here
    for (std::size_t ci = 0; ci < tape.saliency_node_.size(); ++ci) {
      if (tape.saliency_node_[ci] == j) res.activation_grads[ci] = grad;
    }

    const auto& layer = spec.layers[static_cast<std::size_t>(node.layer_pos)];
    if (const auto* c = std::get_if<ConvDesc>(&layer)) {
      Tensor din, dw, db;
      conv2d_backward(in, net.weights[static_cast<std::size_t>(node.param_index)], grad, c->stride,
                      c->padding, j > 0 ? &din : nullptr, &dw, &db);
      res.grads.weights[static_cast<std::size_t>(node.param_index)] = std::move(dw);
      res.grads.biases[static_cast<std::size_t>(node.param_index)] = std::move(db);
      if (j > 0) grad = std::move(din);
    } else if (std::holds_alternative<ReluDesc>(layer)) {
      grad = relu_backward(node.output, grad);
    } else if (const auto* p = std::get_if<MaxPoolDesc>(&layer)) {
      (void)p;
      grad = maxpool_backward(in.shape(), node.argmax, grad);
    } else if (std::holds_alternative<FlattenDesc>(layer)) {
      grad = grad.reshaped(in.shape());
    } else {
      Tensor din, dw, db;
      dense_backward(in, net.weights[static_cast<std::size_t>(node.param_index)], grad,
                     j > 0 ? &din : nullptr, &dw, &db);
      res.grads.weights[static_cast<std::size_t>(node.param_index)] = std::move(dw);
      res.grads.biases[static_cast<std::size_t>(node.param_index)] = std::move(db);
      if (j > 0) grad = std::move(din);
    }
  }
  return res;
}

}  // namespace prunelab
