#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "gfa/simulate.hpp"

using namespace gfa;

namespace {

double noise_variance(const Matrix& y, const Matrix& signal) {
  const Matrix r = y - signal;
  const double mean = r.mean();
  return (r.array() - mean).square().sum() / static_cast<double>(r.size() - 1);
}

}  // namespace

TEST_SUITE("simulate") {
TEST_CASE("defaults: five 50 x 100 views with a 35 x 70 bicluster") {
  const auto [data, truth] = generate(SimulationSpec::defaults(Experiment::B));
  REQUIRE(data.views.size() == 5);
  for (const View& v : data.views) {
    CHECK(v.rows() == 50);
    CHECK(v.cols() == 100);
  }
  REQUIRE(truth.biclusters.size() == 1);
  CHECK(truth.biclusters[0].samples.size() == 35);
  for (const auto& f : truth.biclusters[0].features) CHECK(f.size() == 70);
  CHECK(truth.cells[0].count() == 35 * 70);
}

TEST_CASE("noise-free full-activity data is exactly rank one") {
  SimulationSpec spec = SimulationSpec::defaults(Experiment::A);
  spec.activity = 1.0;
  spec.variances.assign(5, {1.0, 0.0});
  const auto [data, truth] = generate(spec);
  for (const View& v : data.views) {
    Eigen::JacobiSVD<Matrix> svd(v.values);
    const Vector s = svd.singularValues();
    CHECK(s[0] > 1.0);
    CHECK(s[1] < 1e-10 * s[0]);
  }
}

TEST_CASE("fixed seed reproduces data and truth") {
  SimulationSpec spec = SimulationSpec::defaults(Experiment::E);
  spec.seed = 99;
  const auto a = generate(spec);
  const auto b = generate(spec);
  for (std::size_t v = 0; v < a.first.views.size(); ++v) CHECK(a.first.views[v].values == b.first.views[v].values);
  CHECK(a.second.biclusters[2].samples == b.second.biclusters[2].samples);
  spec.seed = 100;
  CHECK_FALSE(generate(spec).first.views[0].values == a.first.views[0].values);
}

TEST_CASE("residual variance matches the noise variance per view") {
  SimulationSpec spec = SimulationSpec::defaults(Experiment::B);
  spec.seed = 5;
  const auto [data, truth] = generate(spec);
  const auto vars = spec.resolved_variances();
  for (std::size_t v = 0; v < data.views.size(); ++v) {
    const double got = noise_variance(data.views[v].values, truth.signal[v]);
    CHECK(std::abs(got / vars[v].noise - 1.0) < 0.1);
  }
}

TEST_CASE("truth cells equal the support of the planted products") {
  for (Experiment e : {Experiment::B, Experiment::C, Experiment::E}) {
    SimulationSpec spec = SimulationSpec::defaults(e);
    spec.seed = 21;
    const auto [data, truth] = generate(spec);
    for (std::size_t v = 0; v < data.views.size(); ++v) {
      BoolMatrix support = BoolMatrix::Constant(data.views[v].rows(), data.views[v].cols(), false);
      const Matrix& X = truth.X[0];
      for (const PlantedLoading& l : truth.loadings) {
        if (l.view != v) continue;
        for (Eigen::Index k = 0; k < X.cols(); ++k) {
          support = support || ((X.col(k) * l.W.col(k).transpose()).array() != 0.0);
        }
      }
      CHECK((support == truth.cells[v]).all());
    }
  }
}

TEST_CASE("experiment C leaves every third view empty and is dense inside others") {
  SimulationSpec spec = SimulationSpec::defaults(Experiment::C);
  spec.M = 7;
  const auto [data, truth] = generate(spec);
  CHECK(data.views.size() == 7);
  for (int m = 0; m < 7; ++m) {
    const auto& f = truth.biclusters[0].features[static_cast<std::size_t>(m)];
    if ((m + 1) % 3 == 0) {
      CHECK(f.empty());
    } else {
      CHECK(f.size() == 100);
    }
  }
}

TEST_CASE("experiment D adds dense noise components outside the truth") {
  SimulationSpec spec = SimulationSpec::defaults(Experiment::D);
  REQUIRE(spec.n_noise_components == 4);
  spec.seed = 3;
  const auto [data, truth] = generate(spec);
  CHECK(truth.component_count() == 5);
  Eigen::JacobiSVD<Matrix> svd(truth.signal[1]);
  CHECK(svd.singularValues()[1] > 1e-6);
  CHECK(truth.cells[1].count() == 35 * 70);
}

TEST_CASE("experiment F scales auxiliary loadings by the precision") {
  SimulationSpec spec = SimulationSpec::defaults(Experiment::F);
  spec.alpha_strength = 100.0;
  const auto vars = spec.resolved_variances();
  CHECK(vars[0].bicluster == 1.0);
  CHECK(vars[1].bicluster == doctest::Approx(0.01));
  CHECK(vars[1].noise == 1.0);
}

TEST_CASE("heterogeneous variances cycle over the auxiliary views") {
  SimulationSpec spec = SimulationSpec::defaults(Experiment::B);
  spec.M = 6;
  const auto v = spec.resolved_variances();
  CHECK(v[1].bicluster == 0.2);
  CHECK(v[2].noise == 5.0);
  CHECK(v[3].noise == 5.0);
  CHECK(v[4].bicluster == 5.0);
  CHECK(v[5].bicluster == 0.2);
}

TEST_CASE("block design dimensions, truncation and disjoint blocks") {
  const auto [data, truth] = generate_block_fig1(7);
  REQUIRE(data.views.size() == 4);
  CHECK(data.views[0].rows() == 200);
  CHECK(data.views[0].cols() == 100);
  CHECK(data.views[1].cols() == 50);
  CHECK(data.views[2].cols() == 60);
  CHECK(data.views[3].mode == 2);
  CHECK(data.views[3].rows() == 100);
  CHECK(data.views[3].cols() == 70);
  CHECK(data.two_mode());
  CHECK_NOTHROW(data.validate());
  for (const Matrix& X : truth.X) {
    for (Eigen::Index i = 0; i < X.size(); ++i) {
      const double a = std::abs(X.data()[i]);
      CHECK((a == 0.0 || (a >= 1.0 && a <= 2.0)));
    }
  }
  for (const PlantedLoading& l : truth.loadings) {
    for (Eigen::Index i = 0; i < l.W.size(); ++i) {
      const double a = std::abs(l.W.data()[i]);
      CHECK((a == 0.0 || (a >= 1.0 && a <= 2.0)));
    }
  }
  REQUIRE(truth.biclusters.size() == 4);
  const DataLayout layout = DataLayout::of(data);
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a + 1; b < 4; ++b) {
      GroundTruth ta, tb;
      ta.biclusters = {truth.biclusters[a]};
      tb.biclusters = {truth.biclusters[b]};
      const auto ca = truth_cells(ta, layout), cb = truth_cells(tb, layout);
      for (std::size_t v = 0; v < 4; ++v) CHECK_FALSE((ca[v] && cb[v]).any());
    }
  }
}

TEST_CASE("truth JSON round-trip") {
  const auto [data, truth] = generate_block_fig1(2);
  DataLayout layout;
  const GroundTruth back = ground_truth_from_json(to_json(truth, DataLayout::of(data)), layout);
  CHECK(layout == DataLayout::of(data));
  for (std::size_t v = 0; v < 4; ++v) CHECK((back.cells[v] == truth.cells[v]).all());
}

TEST_CASE("spec validation") {
  SimulationSpec spec;
  spec.activity = 0.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = SimulationSpec{};
  spec.variances.assign(5, {0.0, 1.0});
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  CHECK_THROWS_AS(parse_experiment("z"), ConfigError);
  CHECK(parse_experiment("fig1") == Experiment::BlockFig1);
  const SimulationSpec round = simulation_spec_from_json(to_json(SimulationSpec::defaults(Experiment::D)));
  CHECK(round.n_noise_components == 4);
}
}
