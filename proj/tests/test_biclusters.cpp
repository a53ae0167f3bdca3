#include <doctest.h>

#include <filesystem>

#include "gfa/biclusters.hpp"
#include "gfa/simulate.hpp"

using namespace gfa;

namespace {

// One view of 3 samples x 2 features, K = 2.
ModelState snapshot(bool comp0_on, double scale = 1.0) {
  DataLayout layout;
  layout.views.push_back({"y", 1, 3, 2});
  ModelState s = empty_state(layout, {}, {2});
  if (comp0_on) {
    s.modes[0].X.col(0) << scale, scale, 0.0;
    s.modes[0].H.col(0) << 1, 1, 0;
    s.modes[0].blocks[0].W.col(0) << scale, 0.0;
    s.modes[0].blocks[0].H.col(0) << 1, 0;
  }
  return s;
}

PosteriorStore store_of(std::vector<ModelState> snaps, int id = 0) {
  PosteriorStore p;
  p.chain_id = id;
  p.layout.views.push_back({"y", 1, 3, 2});
  p.snapshots = std::move(snaps);
  return p;
}

PosteriorStore fitted(std::uint64_t seed) {
  SimulationSpec spec = SimulationSpec::defaults(Experiment::A);
  spec.M = 2, spec.N = 30, spec.D = {20, 20}, spec.seed = 5;
  const DataCollection data = generate(spec).first;
  ChainConfig c;
  c.k_init = {4};
  c.burn_in = 300, c.thinning = 5, c.n_samples = 30, c.seed = seed;
  return run_chain(data, c, static_cast<int>(seed));
}

}  // namespace

TEST_SUITE("biclusters") {
TEST_CASE("strict majority vote over snapshots") {
  const BiclusterSet set = extract_biclusters(store_of({snapshot(true), snapshot(true), snapshot(false)}));
  REQUIRE(set.biclusters.size() == 2);
  const Bicluster& b = set.biclusters[0];
  CHECK(b.sample_members == std::vector<Eigen::Index>{0, 1});
  CHECK(b.feature_members == std::vector<Eigen::Index>{0});
  CHECK(b.cells.count() == 2);
  CHECK(b.intensity(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(set.biclusters[1].empty());
  CHECK(set.effective_K == std::vector<Eigen::Index>{1});

  const BiclusterSet tie = extract_biclusters(store_of({snapshot(true), snapshot(false)}));
  CHECK(tie.total_effective_K() == 0);
}

TEST_CASE("minimum sample members drops small biclusters") {
  ExtractOptions o;
  o.min_sample_members = 3;
  const BiclusterSet set = extract_biclusters(store_of({snapshot(true)}), o);
  CHECK(set.total_effective_K() == 0);
}

TEST_CASE("bicluster JSON round-trip") {
  const BiclusterSet set = extract_biclusters(store_of({snapshot(true)}));
  const BiclusterSet back = bicluster_set_from_json(to_json(set));
  CHECK(back.layout == set.layout);
  CHECK((back.union_cells()[0] == set.union_cells()[0]).all());
}

TEST_CASE("matching identical chains makes every component robust") {
  const PosteriorStore a = fitted(1);
  PosteriorStore b = a;
  b.chain_id = 1;
  const RobustComponentReport r = match_chains({a, b});
  const Eigen::Index eff = extract_biclusters(a).total_effective_K();
  REQUIRE(eff >= 1);
  CHECK(r.robust_count() == eff);
  for (const ComponentGroup& g : r.groups) {
    CHECK(g.robust);
    CHECK(g.chains_present == 2);
    CHECK(g.members[1].similarity == doctest::Approx(1.0));
  }
}

TEST_CASE("sign flips are matched") {
  PosteriorStore a = store_of({snapshot(true)});
  PosteriorStore b = store_of({snapshot(true, -1.0)}, 1);
  const RobustComponentReport r = match_chains({a, b});
  REQUIRE(r.groups.size() == 1);
  CHECK(r.groups[0].members.size() == 2);
  CHECK(r.groups[0].members[1].flipped);
  CHECK(r.groups[0].consensus_x[0] == doctest::Approx(1.0));
}

TEST_CASE("unmatched components stay singletons and are not robust with strict fraction") {
  PosteriorStore a = store_of({snapshot(true)});
  PosteriorStore b = store_of({snapshot(false)}, 1);
  MatchOptions o;
  o.min_chains_fraction = 1.0;
  const RobustComponentReport r = match_chains({a, b}, o);
  REQUIRE(r.groups.size() == 1);
  CHECK_FALSE(r.groups[0].robust);
  CHECK(r.robust_count() == 0);
}

TEST_CASE("matching argument checks") {
  const PosteriorStore a = store_of({snapshot(true)});
  CHECK_THROWS_AS(match_chains({a}), ConfigError);
  MatchOptions o;
  o.threshold = 1.01;
  CHECK_THROWS_AS(match_chains({a, a}, o), ConfigError);
}

TEST_CASE("FA_CONCAT biclusters are reported per original view") {
  SimulationSpec spec = SimulationSpec::defaults(Experiment::A);
  spec.M = 2, spec.N = 20, spec.D = {10, 8}, spec.seed = 5;
  const DataCollection data = generate(spec).first;
  ChainConfig c;
  c.k_init = {3};
  c.burn_in = 100, c.thinning = 2, c.n_samples = 10;
  c.variant.kind = ModelKind::FA_CONCAT;
  const BiclusterSet set = extract_biclusters(run_chain(data, c));
  REQUIRE(set.union_cells().size() == 2);
  CHECK(set.union_cells()[1].cols() == 8);
}

TEST_CASE("report files are written") {
  const PosteriorStore a = fitted(2);
  PosteriorStore b = a;
  b.chain_id = 1;
  const auto dir = std::filesystem::temp_directory_path() / "gfa_test_bic";
  std::filesystem::remove_all(dir);
  write_bicluster_set(extract_biclusters(a), dir, "set");
  write_robust_report(match_chains({a, b}), dir);
  CHECK(std::filesystem::exists(dir / "set.json"));
  CHECK(std::filesystem::exists(dir / "robust_components.json"));
  CHECK(std::filesystem::exists(dir / "group_0_x.bin"));
}
}
