#include <doctest.h>

#include <cmath>

#include "gfa/sampler.hpp"
#include "oracle.hpp"

using namespace gfa;

TEST_SUITE("conditionals") {
TEST_CASE("quadrature oracle recovers known Gaussian, gamma and beta moments") {
  const oracle::Moments n = oracle::real_line([](double x) { return -0.5 * 4.0 * (x - 1.5) * (x - 1.5); });
  CHECK(oracle::rel_error(n.mean, 1.5) < 1e-10);
  CHECK(oracle::rel_error(n.variance, 0.25) < 1e-10);
  const oracle::Moments g = oracle::positive([](double x) { return 2.0 * std::log(x) - 3.0 * x; });
  CHECK(oracle::rel_error(g.mean, 1.0) < 1e-10);
  CHECK(oracle::rel_error(g.variance, 1.0 / 3.0) < 1e-10);
  const oracle::Moments b = oracle::unit_interval([](double x) { return std::log(x) + 3.0 * std::log1p(-x); });
  CHECK(oracle::rel_error(b.mean, 2.0 / 6.0) < 1e-10);
  CHECK(oracle::rel_error(b.variance, 2.0 * 4.0 / (36.0 * 7.0)) < 1e-10);
}

TEST_CASE("spike-and-slab closed form matches quadrature") {
  const double alpha = 0.7, pi = 0.3, prec = 2.2, lin = 1.4;
  const SpikeSlabConditional c = spike_slab_conditional(prec, lin, alpha, pi);
  auto log_slab = [&](double w) {
    return std::log(pi) + 0.5 * std::log(alpha / (2.0 * M_PI)) - 0.5 * alpha * w * w - 0.5 * prec * w * w + lin * w;
  };
  const oracle::SpikeSlab o = oracle::spike_slab(log_slab, std::log(1.0 - pi));
  CHECK(oracle::rel_error(c.inclusion_probability, o.inclusion) < 1e-9);
  CHECK(oracle::rel_error(c.mean, o.mean) < 1e-9);
  CHECK(oracle::rel_error(c.variance, o.variance) < 1e-9);
}

TEST_CASE("every exact conditional matches brute-force quadrature over log_joint") {
  for (const oracle::Check& c : oracle::run_conditional_oracles()) {
    INFO(c.update << " on " << c.where << ": " << c.max_rel_error);
    CHECK(c.max_rel_error < 1e-6);
  }
}

TEST_CASE("extreme log odds stay finite") {
  const SpikeSlabConditional c = spike_slab_conditional(1e6, 1e6, 1.0, 0.5);
  CHECK(std::isfinite(c.log_odds));
  CHECK(c.inclusion_probability == 1.0);
  CHECK(logistic(-800.0) == doctest::Approx(0.0));
  CHECK(logistic(800.0) == 1.0);
}
}
