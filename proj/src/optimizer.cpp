#include "prunelab/optimizer.hpp"

namespace prunelab {

OptimizerState make_optimizer(const Network& net, double learning_rate, double momentum) {
  require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0,1)");
  require(learning_rate > 0.0, "learning rate must be > 0");
  OptimizerState st;
  st.learning_rate = learning_rate;
  st.momentum = momentum;
  for (const auto& w : net.weights) st.velocity_w.emplace_back(w.shape());
  for (const auto& b : net.biases) st.velocity_b.emplace_back(b.shape());
  return st;
}

void sgd_step(Network& net, const ParamGrads& grads, OptimizerState& state) {
  require(grads.weights.size() == net.weights.size() && grads.biases.size() == net.biases.size(),
          "gradient layout does not match network");
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    require(grads.weights[i].same_shape(net.weights[i]), "weight gradient shape mismatch");
    require(state.velocity_w[i].same_shape(net.weights[i]), "velocity shape mismatch");
    state.velocity_w[i].array() =
        state.momentum * state.velocity_w[i].array() - state.learning_rate * grads.weights[i].array();
    net.weights[i].array() += state.velocity_w[i].array();

    require(grads.biases[i].same_shape(net.biases[i]), "bias gradient shape mismatch");
    state.velocity_b[i].array() =
        state.momentum * state.velocity_b[i].array() - state.learning_rate * grads.biases[i].array();
    net.biases[i].array() += state.velocity_b[i].array();
  }
}

}  // namespace prunelab
