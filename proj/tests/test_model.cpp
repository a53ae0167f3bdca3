#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "gfa/model.hpp"
#include "gfa/sampler.hpp"

using namespace gfa;

namespace {

DataCollection tiny() {
  DataCollection d;
  Matrix y(2, 2);
  y << 1.0, -0.5, 0.25, 2.0;
  d.views.push_back(make_view("y", 1, y));
  return d;
}

double log_normal(double x, double mean, double precision) {
  return 0.5 * std::log(precision / (2.0 * std::numbers::pi)) - 0.5 * precision * (x - mean) * (x - mean);
}

double log_gamma_pdf(double x, double a, double b) {
  return a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(x) - b * x;
}

double log_beta_pdf(double x, double a, double b) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
}

}  // namespace

TEST_SUITE("model") {
TEST_CASE("log_joint matches a term-by-term computation on N=2, D=2, K=1") {
  const DataCollection data = tiny();
  HyperParams h;
  h.a_pi = 2.0, h.b_pi = 3.0, h.a_alpha = 1.5, h.b_alpha = 0.5, h.a_tau = 2.0, h.b_tau = 4.0;
  ModelState s = empty_state(DataLayout::of(data), {}, {1});
  s.modes[0].X << 0.7, 0.0;
  s.modes[0].H << 1, 0;
  s.modes[0].alpha << 1.3;
  s.modes[0].pi << 0.4;
  LoadingBlock& b = s.modes[0].blocks[0];
  b.W << -1.1, 0.6;
  b.H << 1, 1;
  b.alpha << 0.8;
  b.pi << 0.9;
  s.tau[0] << 2.5;

  double want = 0.0;
  const double x[2] = {0.7, 0.0}, w[2] = {-1.1, 0.6};
  const double y[2][2] = {{1.0, -0.5}, {0.25, 2.0}};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) want += log_normal(y[i][j], x[i] * w[j], 2.5);
  }
  want += std::log(0.4) + log_normal(0.7, 0.0, 1.3) + std::log(0.6);
  want += std::log(0.9) + log_normal(-1.1, 0.0, 0.8) + std::log(0.9) + log_normal(0.6, 0.0, 0.8);
  want += log_gamma_pdf(1.3, 1.5, 0.5) + log_gamma_pdf(0.8, 1.5, 0.5);
  want += log_beta_pdf(0.4, 2.0, 3.0) + log_beta_pdf(0.9, 2.0, 3.0);
  want += log_gamma_pdf(2.5, 2.0, 4.0);
  CHECK(log_joint(s, data, h) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("log_joint rejects a nonzero value with indicator zero") {
  const DataCollection data = tiny();
  ModelState s = empty_state(DataLayout::of(data), {}, {1});
  s.modes[0].X(0, 0) = 0.5;
  CHECK_THROWS_AS(log_joint(s, data, HyperParams{}), InvariantError);
}

TEST_CASE("log_joint reports a non-finite observed cell") {
  DataCollection data = tiny();
  data.views[0].values(1, 0) = std::numeric_limits<double>::infinity();
  const ModelState s = empty_state(DataLayout::of(data), {}, {1});
  CHECK_THROWS_AS(log_joint(s, data, HyperParams{}), NumericalError);
}

TEST_CASE("missing cells do not enter the likelihood") {
  DataCollection data = tiny();
  ModelState s = init_state(data, {2}, HyperParams{}, {}, 5);
  data.views[0].values(0, 1) = std::numeric_limits<double>::quiet_NaN();
  data.views[0].missing(0, 1) = true;
  const double a = log_likelihood(s, data);
  DataCollection other = data;
  other.views[0].values(0, 1) = 123.0;
  CHECK(log_likelihood(s, other) == a);
}

TEST_CASE("prior draws satisfy the spike invariants") {
  DataCollection data = tiny();
  data.views.push_back(make_view("z", 1, Matrix::Ones(2, 3)));
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const ModelState s = sample_prior_state(DataLayout::of(data), {4}, HyperParams{}, {}, rng);
    CHECK_NOTHROW(check_invariants(s, DataLayout::of(data)));
    for (const LoadingBlock& b : s.modes[0].blocks) {
      CHECK(((b.H.array() == 0) == (b.W.array() == 0.0)).all());
    }
  }
}

TEST_CASE("two-mode layout pairs mode-2 views with the first view's features") {
  DataCollection data = tiny();
  data.views.push_back(make_view("m2", 2, Matrix::Ones(2, 4)));
  const ModelState s = init_state(data, {3, 2}, HyperParams{}, {ModelKind::GFA, true}, 1);
  REQUIRE(s.modes.size() == 2);
  CHECK(s.modes[1].X.rows() == 2);
  REQUIRE(s.modes[1].blocks.size() == 2);
  CHECK(s.modes[1].blocks[0].transposed);
  CHECK(s.modes[1].blocks[0].W.rows() == 2);
  CHECK(s.modes[1].blocks[1].W.rows() == 4);
  CHECK(view_mean(s, 0, DataLayout::of(data)).rows() == 2);
}

TEST_CASE("variant checks") {
  DataCollection data = tiny();
  data.views.push_back(make_view("m2", 2, Matrix::Ones(2, 4)));
  CHECK_THROWS_AS(init_state(data, {2}, HyperParams{}, {ModelKind::FA_CONCAT, true}, 1), ConfigError);
  CHECK_THROWS_AS(init_state(tiny(), {2}, HyperParams{}, {ModelKind::GFA, true}, 1), ConfigError);
  CHECK(parse_model_kind("fa") == ModelKind::FA_CONCAT);
  CHECK_THROWS_AS(parse_model_kind("pca"), ConfigError);
}

TEST_CASE("concatenation joins mode-1 views with per-feature noise") {
  DataCollection data = tiny();
  data.views.push_back(make_view("z", 1, Matrix::Ones(2, 3)));
  const DataCollection c = concatenate_views(data);
  REQUIRE(c.views.size() == 1);
  CHECK(c.views[0].cols() == 5);
  CHECK(concatenation_offsets(DataLayout::of(data)) == std::vector<Eigen::Index>{0, 2});
  const ModelState s = init_state(data, {2}, HyperParams{}, {ModelKind::FA_CONCAT, false}, 2);
  CHECK(s.tau[0].size() == 5);
}

TEST_CASE("collection validation") {
  DataCollection data = tiny();
  data.views.push_back(make_view("bad", 1, Matrix::Ones(3, 2)));
  CHECK_THROWS_AS(data.validate(), ConfigError);
  DataCollection dup = tiny();
  dup.views.push_back(dup.views[0]);
  CHECK_THROWS_AS(dup.validate(), ConfigError);
  DataCollection m2 = tiny();
  m2.views.push_back(make_view("m2", 2, Matrix::Ones(3, 2)));
  CHECK_THROWS_AS(m2.validate(), ConfigError);
  CHECK_THROWS_AS(tiny().index_of("nope"), LookupError);
}

TEST_CASE("hyperparameters must be positive") {
  HyperParams h;
  h.b_tau = 0.0;
  CHECK_THROWS_AS(h.validate(), ConfigError);
}
}
