#include "prunelab/distributions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace prunelab::statmodel {

void DistributionSpec::validate() const {
  require(std::isfinite(location) && std::isfinite(scale), "distribution parameters must be finite");
  require(scale > 0.0, "distribution scale must be > 0");
  switch (family) {
    case DistFamily::UniformPositive:
      require(location > 0.0, "uniform-positive requires location > 0 (positive support)");
      break;
    case DistFamily::LogNormal:
      break;  // support is (0, inf) for any parameters
    case DistFamily::ShiftedExponential:
      require(location >= 0.0, "shifted-exponential requires location >= 0 (positive support)");
      break;
  }
}

double DistributionSpec::mean() const {
  switch (family) {
    case DistFamily::UniformPositive:
      return location + scale / 2.0;
    case DistFamily::LogNormal:
      return std::exp(location + scale * scale / 2.0);
    case DistFamily::ShiftedExponential:
      return location + scale;
  }
  return 0.0;
}

double DistributionSpec::variance() const {
  switch (family) {
    case DistFamily::UniformPositive:
      return scale * scale / 12.0;
    case DistFamily::LogNormal: {
      const double s2 = scale * scale;
      return (std::exp(s2) - 1.0) * std::exp(2.0 * location + s2);
    }
    case DistFamily::ShiftedExponential:
      return scale * scale;
  }
  return 0.0;
}

double DistributionSpec::support_max() const {
  if (family == DistFamily::UniformPositive) return location + scale;
  return std::numeric_limits<double>::infinity();
}

double DistributionSpec::sample(Rng& rng) const {
  switch (family) {
    case DistFamily::UniformPositive: {
      std::uniform_real_distribution<double> u(location, location + scale);
      return u(rng);
    }
    case DistFamily::LogNormal: {
      std::normal_distribution<double> g(location, scale);
      return std::exp(g(rng));
    }
    case DistFamily::ShiftedExponential: {
      std::exponential_distribution<double> e(1.0 / scale);
      return location + e(rng);
    }
  }
  return 0.0;
}

std::string DistributionSpec::to_string() const {
  const char* name = family == DistFamily::UniformPositive      ? "uniform"
                     : family == DistFamily::LogNormal          ? "lognormal"
                                                                : "shifted-exponential";
  std::ostringstream os;
  os << name << ":" << location << ":" << scale;
  return os.str();
}

DistributionSpec DistributionSpec::parse(const std::string& text) {
  std::istringstream is(text);
  std::string name, loc, sc;
  std::getline(is, name, ':');
  std::getline(is, loc, ':');
  std::getline(is, sc, ':');
  DistributionSpec spec;
  if (name == "uniform" || name == "uniform-positive") {
    spec.family = DistFamily::UniformPositive;
  } else if (name == "lognormal") {
    spec.family = DistFamily::LogNormal;
  } else if (name == "shifted-exponential" || name == "shiftedexp") {
    spec.family = DistFamily::ShiftedExponential;
  } else {
    throw InvalidArgument("unknown distribution family '" + name + "'");
  }
  try {
    if (!loc.empty()) spec.location = std::stod(loc);
    if (!sc.empty()) spec.scale = std::stod(sc);
  } catch (const std::exception&) {
    throw InvalidArgument("bad distribution parameters in '" + text + "'");
  }
  spec.validate();
  return spec;
}

}  // namespace prunelab::statmodel
