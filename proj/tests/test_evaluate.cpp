#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "gfa/evaluate.hpp"

using namespace gfa;

namespace {

BoolMatrix cells(std::initializer_list<std::pair<int, int>> on, int rows = 3, int cols = 3) {
  BoolMatrix m = BoolMatrix::Constant(rows, cols, false);
  for (auto [i, j] : on) m(i, j) = true;
  return m;
}

}  // namespace

TEST_SUITE("evaluate") {
TEST_CASE("F1 from counts") {
  const BoolMatrix truth = cells({{0, 0}, {0, 1}, {1, 1}});
  const BoolMatrix pred = cells({{0, 0}, {0, 1}, {2, 2}});
  const F1Counts c = f1_counts({pred}, {truth});
  CHECK(c.tp == 2);
  CHECK(c.fn == 1);
  CHECK(c.fp == 1);
  CHECK(c.f1() == doctest::Approx(4.0 / 6.0));
  CHECK(f1_cells({truth}, {truth}) == 1.0);
  CHECK(f1_cells({cells({})}, {truth}) == 0.0);
  CHECK(f1_cells({cells({})}, {cells({})}) == 1.0);
  CHECK_THROWS_AS(f1_cells({cells({}, 2, 3)}, {truth}), DataError);
  CHECK_THROWS_AS(f1_cells({truth, truth}, {truth}), DataError);
}

TEST_CASE("F1 is symmetric and monotone in true positives") {
  const BoolMatrix a = cells({{0, 0}, {1, 2}, {2, 1}});
  const BoolMatrix b = cells({{0, 0}, {1, 1}});
  CHECK(f1_cells({a}, {b}) == f1_cells({b}, {a}));
  BoolMatrix grown = b;
  grown(1, 2) = true;
  CHECK(f1_cells({grown}, {a}) >= f1_cells({b}, {a}));
}

TEST_CASE("regression metrics") {
  const std::vector<double> t = {1.0, 3.0, 2.0, 5.0};
  RegressionMetrics m = regression_metrics(t, t);
  CHECK(m.rmse == 0.0);
  CHECK(m.pearson == doctest::Approx(1.0));
  CHECK(m.spearman == doctest::Approx(1.0));
  std::vector<double> neg;
  for (double v : t) neg.push_back(-v);
  CHECK(regression_metrics(neg, t).pearson == doctest::Approx(-1.0));
  m = regression_metrics({2.0, 2.0, 2.0, 2.0}, t);
  CHECK_FALSE(m.pearson_defined);
  CHECK_FALSE(m.spearman_defined);
  CHECK(m.pearson == 0.0);
  CHECK(regression_metrics({1.0, 2.0}, {2.0, 4.0}).rmse == doctest::Approx(std::sqrt(2.5)));
}

TEST_CASE("average ranks with ties") {
  CHECK(average_ranks({3.0, 1.0, 3.0, 2.0}) == std::vector<double>{3.5, 1.0, 3.5, 2.0});
}

TEST_CASE("masked metrics ignore unmasked cells") {
  Matrix truth(2, 2), pred(2, 2);
  truth << 1, 2, 3, 4;
  pred << 1.5, 9, 2, 4;
  BoolMatrix mask = BoolMatrix::Constant(2, 2, false);
  mask(0, 0) = mask(1, 0) = mask(1, 1) = true;
  const RegressionMetrics a = regression_metrics(pred, truth, mask);
  pred(0, 1) = -1000.0;
  const RegressionMetrics b = regression_metrics(pred, truth, mask);
  CHECK(a.n == 3);
  CHECK(a.rmse == b.rmse);
  CHECK(a.pearson == b.pearson);
}

TEST_CASE("cross-validation folds") {
  const auto f = cv_splits(35, 7, 1);
  REQUIRE(f.size() == 7);
  std::set<Eigen::Index> all;
  for (const auto& fold : f) {
    CHECK(fold.size() == 5);
    for (Eigen::Index i : fold) CHECK(all.insert(i).second);
  }
  CHECK(all.size() == 35);
  CHECK(cv_splits(35, 7, 1) == f);
  CHECK_FALSE(cv_splits(35, 7, 2) == f);
  for (const auto& fold : cv_splits(10, 10, 3)) CHECK(fold.size() == 1);
  const auto uneven = cv_splits(11, 3, 4);
  CHECK(uneven[0].size() == 4);
  CHECK(uneven[2].size() == 3);
  CHECK_THROWS_AS(cv_splits(3, 4, 1), ConfigError);
}

TEST_CASE("grid specs vary the right parameter") {
  CHECK(grid_spec(SimulationSpec::defaults(Experiment::C), 7).M == 7);
  CHECK(grid_spec(SimulationSpec::defaults(Experiment::D), 6).n_noise_components == 6);
  CHECK(grid_spec(SimulationSpec::defaults(Experiment::E), 5).K_true == 5);
  CHECK(grid_spec(SimulationSpec::defaults(Experiment::F), 0.1).alpha_strength == 0.1);
  CHECK(default_grid(Experiment::A).size() == 5);
  CHECK(parse_method("fa") == Method::FA_CONCAT);
  CHECK_THROWS_AS(parse_method("fabia"), ConfigError);
}

TEST_CASE("trivial noiseless grid scores one, failures are recorded") {
  GridConfig g;
  g.base = SimulationSpec::defaults(Experiment::A);
  g.base.N = 20, g.base.D = {15}, g.base.activity = 1.0;
  g.base.variances.assign(1, {1.0, 1e-4});
  g.values = {1};
  g.reps = 1;
  g.methods = {Method::GFA, Method::External};
  g.external_dir = std::filesystem::temp_directory_path() / "gfa_test_no_such_dir";
  g.chain.burn_in = 200, g.chain.thinning = 2, g.chain.n_samples = 20;
  auto planted_min = [&] {
    SimulationSpec spec = grid_spec(g.base, 1);
    spec.seed = g.data_seed(0, 0);
    const auto truth = generate(spec).second;
    double m = truth.X[0].cwiseAbs().minCoeff();
    for (const auto& l : truth.loadings) m = std::min(m, l.W.cwiseAbs().minCoeff());
    return m;
  };
  while (planted_min() < 0.05) ++g.base_seed;
  const GridResult r = run_experiment_grid(g);
  REQUIRE(r.runs.size() == 2);
  CHECK(r.runs[0].ok);
  CHECK(r.runs[0].f1 == doctest::Approx(1.0));
  CHECK_FALSE(r.runs[1].ok);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[1].n_failed == 1);
  const auto path = std::filesystem::temp_directory_path() / "gfa_test_grid.tsv";
  write_grid_tsv(r, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("point\tparameter\tvalue\tmethod", 0) == 0);
  CHECK(to_json(r).at("runs").size() == 2);
}

TEST_CASE("summaries use the sample standard deviation") {
  std::vector<RunRecord> runs(3);
  const double f[3] = {0.7, 0.8, 0.9};
  for (int i = 0; i < 3; ++i) runs[i].ok = true, runs[i].f1 = f[i], runs[i].rep = i;
  const auto rows = summarize(runs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mean_f1 == doctest::Approx(0.8));
  CHECK(rows[0].std_f1 == doctest::Approx(0.1));
  CHECK(rows[0].se_f1 == doctest::Approx(0.1 / std::sqrt(3.0)));
}
}
