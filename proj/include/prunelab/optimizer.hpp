#pragma once

#include "prunelab/tape.hpp"

namespace prunelab {

/// Classical SGD momentum state: v <- momentum*v - lr*g; theta <- theta + v.
struct OptimizerState {
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::vector<Tensor> velocity_w;
  std::vector<Tensor> velocity_b;
};

OptimizerState make_optimizer(const Network& net, double learning_rate, double momentum);

void sgd_step(Network& net, const ParamGrads& grads, OptimizerState& state);

}  // namespace prunelab
