#pragma once

#include <string>

#include "prunelab/common.hpp"
#include "prunelab/rng.hpp"

namespace prunelab::statmodel {

enum class DistFamily { UniformPositive, LogNormal, ShiftedExponential };

/// A positive-support contribution law with closed-form moments.
///   uniform-positive:     Uniform(location, location + scale)
///   lognormal:            exp(N(location, scale^2))
///   shifted-exponential:  location + Exponential(mean = scale)
struct DistributionSpec {
  DistFamily family = DistFamily::UniformPositive;
  double location = 0.5;
  double scale = 1.0;

  /// Validates positivity of the support and scale > 0; throws otherwise.
  void validate() const;

  double mean() const;
  double variance() const;
  /// Supremum of the support; +inf for unbounded families.
  double support_max() const;

  double sample(Rng& rng) const;

  std::string to_string() const;
  static DistributionSpec parse(const std::string& text);
};

}  // namespace prunelab::statmodel
