#pragma once

#include <string>

#include "prunelab/tape.hpp"

namespace prunelab {

struct GradCheckReport {
  double max_rel_error = 0;
  std::string worst_param;  // "layer <p> weight[i]" / "layer <p> bias[i]"
  double tolerance = 0;
  bool passed = false;
  Index params_checked = 0;
};

/// Compares every parameter gradient against central finite differences of
/// the loss. Intended for small networks; cost is two forward passes per
/// parameter.
GradCheckReport grad_check(const Network& net, const Tensor& batch, std::span<const int> labels,
                           double step = 1e-5, double tolerance = 1e-4);

}  // namespace prunelab
