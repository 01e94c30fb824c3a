#include <doctest.h>

#include <cmath>

#include "prunelab/distributions.hpp"

using namespace prunelab;
using namespace prunelab::statmodel;

TEST_SUITE("distributions") {
  TEST_CASE("uniform moments are exact") {
    DistributionSpec d{DistFamily::UniformPositive, 0.5, 1.0};
    d.validate();
    CHECK(d.mean() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.variance() == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
    CHECK(d.support_max() == doctest::Approx(1.5));
  }

  TEST_CASE("lognormal and shifted-exponential closed-form moments match sample moments") {
    for (DistributionSpec d : {DistributionSpec{DistFamily::LogNormal, -0.5, 0.4},
                               DistributionSpec{DistFamily::ShiftedExponential, 0.2, 0.7}}) {
      d.validate();
      Rng rng = make_rng(99);
      const int n = 200000;
      double sum = 0, sumsq = 0;
      for (int i = 0; i < n; ++i) {
        const double x = d.sample(rng);
        CHECK(x > 0.0);
        sum += x;
        sumsq += x * x;
      }
      const double mean = sum / n;
      const double var = sumsq / n - mean * mean;
      CHECK(mean == doctest::Approx(d.mean()).epsilon(0.02));
      CHECK(var == doctest::Approx(d.variance()).epsilon(0.05));
    }
  }

  TEST_CASE("non-positive support or scale is rejected") {
    CHECK_THROWS_AS((DistributionSpec{DistFamily::UniformPositive, -0.1, 1.0}.validate()),
                    InvalidArgument);
    CHECK_THROWS_AS((DistributionSpec{DistFamily::UniformPositive, 0.0, 1.0}.validate()),
                    InvalidArgument);
    CHECK_THROWS_AS((DistributionSpec{DistFamily::ShiftedExponential, -0.5, 1.0}.validate()),
                    InvalidArgument);
    CHECK_THROWS_AS((DistributionSpec{DistFamily::UniformPositive, 0.5, 0.0}.validate()),
                    InvalidArgument);
  }

  TEST_CASE("parse round-trips") {
    const DistributionSpec d = DistributionSpec::parse("lognormal:-0.25:0.5");
    CHECK(d.family == DistFamily::LogNormal);
    CHECK(d.location == doctest::Approx(-0.25));
    CHECK(d.scale == doctest::Approx(0.5));
    const DistributionSpec r = DistributionSpec::parse(d.to_string());
    CHECK(r.family == d.family);
    CHECK(r.location == doctest::Approx(d.location));
    CHECK_THROWS_AS(DistributionSpec::parse("cauchy:0:1"), InvalidArgument);
  }
}
