#include "prunelab/grad_check.hpp"

#include <cmath>
#include <sstream>

namespace prunelab {

namespace {

double loss_at(const Network& net, const Tensor& batch, std::span<const int> labels) {
  return forward(net, batch, labels).loss();
}

double rel_error(double analytic, double numeric) {
  const double denom = std::max(1e-6, std::abs(analytic) + std::abs(numeric));
  return std::abs(analytic - numeric) / denom;
}

}  // namespace

GradCheckReport grad_check(const Network& net, const Tensor& batch, std::span<const int> labels,
                           double step, double tolerance) {
  require(step > 0.0, "finite-difference step must be > 0");
  Tape tape = forward(net, batch, labels);
  const BackwardResult back = backward(tape);

  GradCheckReport rep;
  rep.tolerance = tolerance;
  Network probe = net;

  auto check_tensor = [&](Tensor& param, const Tensor& grad, const char* kind, std::size_t layer) {
    for (Index i = 0; i < param.size(); ++i) {
      const double saved = param[i];
      param[i] = saved + step;
      const double up = loss_at(probe, batch, labels);
      param[i] = saved - step;
      const double down = loss_at(probe, batch, labels);
      param[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double err = rel_error(grad[i], numeric);
      if (err > rep.max_rel_error) {
        rep.max_rel_error = err;
        std::ostringstream os;
        os << "layer " << layer << " " << kind << "[" << i << "]";
        rep.worst_param = os.str();
      }
      ++rep.params_checked;
    }
  };

  for (std::size_t p = 0; p < probe.weights.size(); ++p) {
    check_tensor(probe.weights[p], back.grads.weights[p], "weight", p);
    check_tensor(probe.biases[p], back.grads.biases[p], "bias", p);
  }
  rep.passed = rep.max_rel_error <= tolerance;
  return rep;
}

}  // namespace prunelab
