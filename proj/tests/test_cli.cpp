#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gfa/cli.hpp"
#include "gfa/io.hpp"
#include "gfa/store.hpp"

using namespace gfa;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gfa_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

struct Result {
  int code;
  std::string out, err;
  json record() const {
    std::istringstream lines(out);
    std::string line, rec;
    while (std::getline(lines, line)) {
      if (!line.empty() && line.front() == '{') rec = line;
    }
    return json::parse(rec);
  }
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> quick(std::vector<std::string> args) {
  for (const char* a : {"--burnin", "20", "--thin", "2", "--samples", "5"}) args.push_back(a);
  return args;
}

}  // namespace

TEST_SUITE("io") {
TEST_CASE("TSV round-trip with missing cells") {
  const fs::path dir = scratch("tsv");
  fs::create_directories(dir);
  Matrix m(2, 3);
  m << 1.0 / 3.0, -2e-300, 4.0, std::numeric_limits<double>::quiet_NaN(), 5.5, 1e10;
  View v = make_view("v", 1, m);
  v.row_names = {"a", "b"};
  v.col_names = {"x", "y", "z"};
  write_view_tsv(v, dir / "v.tsv");
  const View back = read_view_tsv(dir / "v.tsv", "v", 1);
  CHECK(back.row_names == v.row_names);
  CHECK(back.col_names == v.col_names);
  CHECK(back.missing(1, 0));
  CHECK(back.values(0, 0) == m(0, 0));
  CHECK(back.values(0, 1) == m(0, 1));
  CHECK(back.observed_count() == 5);
}

TEST_CASE("malformed TSV reports the location") {
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "v.tsv") << "id\ta\tb\nr1\t1\tfoo\n";
  CHECK_THROWS_WITH_AS(read_view_tsv(dir / "v.tsv", "v", 1), doctest::Contains(":2:"), DataError);
  std::ofstream(dir / "w.tsv") << "id\ta\tb\nr1\t1\n";
  CHECK_THROWS_AS(read_view_tsv(dir / "w.tsv", "w", 1), DataError);
}

TEST_CASE("mode-2 rows must match the first view's features") {
  const fs::path dir = scratch("pair");
  fs::create_directories(dir);
  std::ofstream(dir / "a.tsv") << "id\tf1\tf2\ns1\t1\t2\ns2\t3\t4\n";
  std::ofstream(dir / "b.tsv") << "id\tg1\nf2\t1\nf1\t2\n";
  json manifest = {{"views",
                    {{{"name", "a"}, {"file", "a.tsv"}, {"mode", 1}},
                     {{"name", "b"}, {"file", "b.tsv"}, {"mode", 2}, {"paired_to", "a"}}}}};
  write_json(manifest, dir / "collection.json");
  CHECK_THROWS_AS(read_collection(dir / "collection.json"), DataError);
  std::ofstream(dir / "b.tsv") << "id\tg1\nf1\t1\nf2\t2\n";
  const DataCollection d = read_collection(dir / "collection.json");
  CHECK(d.two_mode());
}
}

TEST_SUITE("cli") {
TEST_CASE("simulate writes the views and the truth") {
  const fs::path dir = scratch("sim");
  const Result r = run({"simulate", "--experiment", "fig1", "--seed", "7", "--out", dir.string()});
  REQUIRE(r.code == 0);
  for (const char* f : {"Y11.tsv", "Y21.tsv", "Y31.tsv", "Y12.tsv", "truth.json", "collection.json"}) {
    CHECK(fs::exists(dir / f));
  }
  const json rec = r.record();
  CHECK(rec.at("command") == "simulate");
  CHECK(rec.at("seed") == 7);
  CHECK(rec.contains("wall_seconds"));
  CHECK(rec.at("version") == cli::kVersion);

  const fs::path c = scratch("sim7");
  REQUIRE(run({"simulate", "--experiment", "c", "--m", "7", "--out", c.string()}).code == 0);
  CHECK(read_collection(c / "collection.json").views.size() == 7);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run({"simulate", "--experiment", "zz", "--out", scratch("u").string()}).code == 2);
  CHECK(run({"no-such-command"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"fit", "--data", "x"}).code == 2);
}

TEST_CASE("missing data file exits with code 1 and names the path") {
  const Result r = run({"fit", "--data", "/nonexistent/collection.json", "--out", scratch("m").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("/nonexistent/collection.json") != std::string::npos);
}

TEST_CASE("fit, biclusters, predict and evaluate round-trip") {
  const fs::path dir = scratch("flow");
  const std::string data = (dir / "data").string();
  REQUIRE(run({"simulate", "--experiment", "b", "--m", "2", "--n", "20", "--d", "10", "--seed", "3", "--out", data})
              .code == 0);
  const std::string fit = (dir / "fit").string();
  const Result f = run(quick({"fit", "--data", data, "--out", fit, "--chains", "2", "--seed", "1", "--k", "4"}));
  REQUIRE(f.code == 0);
  CHECK(load_store(dir / "fit" / "chain_0").config.seed == 1);
  CHECK(load_store(dir / "fit" / "chain_1").config.seed == 2);
  CHECK(load_store(dir / "fit" / "chain_1").snapshots.size() == 5);

  const std::string bic = (dir / "bic").string();
  const std::string c0 = (dir / "fit" / "chain_0").string();
  const std::string c1 = (dir / "fit" / "chain_1").string();
  REQUIRE(run({"biclusters", "--chains", c0, "--out", bic}).code == 0);
  CHECK(fs::exists(dir / "bic" / "biclusters.json"));
  CHECK_FALSE(fs::exists(dir / "bic" / "robust_components.json"));
  CHECK(run({"biclusters", "--chains", c0, "--out", bic, "--threshold", "1.01"}).code == 2);
  const Result dup = run({"biclusters", "--chains", c0, c0, "--out", (dir / "dup").string()});
  REQUIRE(dup.code == 0);
  const json report = read_json(dir / "dup" / "robust_components.json");
  for (const json& g : report.at("groups")) CHECK(g.at("robust") == true);

  const Result ev = run({"evaluate", "--task", "bicluster", "--predicted", (dir / "bic" / "biclusters.json").string(),
                         "--truth", data + "/truth.json"});
  REQUIRE(ev.code == 0);
  CHECK(ev.out.find("f1\t") != std::string::npos);

  const Result none = run({"predict", "--chains", c0, "--data", data, "--out", (dir / "pred0").string()});
  CHECK(none.code == 0);
  CHECK(none.err.find("warning") != std::string::npos);

  // Hide some cells, refit and score the imputations against the originals.
  DataCollection d = read_collection(fs::path(data) / "collection.json");
  const View original = d.views[0];
  for (Eigen::Index i = 0; i < 5; ++i) d.views[0].missing(i, i) = true;
  const fs::path masked = write_collection(d, dir / "masked");
  const std::string mfit = (dir / "mfit").string();
  REQUIRE(run(quick({"fit", "--data", masked.string(), "--out", mfit, "--k", "4"})).code == 0);
  const std::string pred = (dir / "pred").string();
  REQUIRE(run({"predict", "--chains", mfit + "/chain_0", "--data", masked.string(), "--out", pred, "--ranking"})
              .code == 0);
  CHECK(fs::exists(fs::path(pred) / "view1_ranking.tsv"));
  write_view_tsv(original, dir / "truth_view1.tsv");
  const Result reg = run({"evaluate", "--task", "regression", "--predicted", pred + "/view1_predicted.tsv", "--truth",
                          (dir / "truth_view1.tsv").string()});
  REQUIRE(reg.code == 0);
  CHECK(reg.out.find("n\t5") != std::string::npos);
}

TEST_CASE("fit run record reproduces the chain bit for bit") {
  const fs::path dir = scratch("repro");
  const std::string data = (dir / "data").string();
  REQUIRE(run({"simulate", "--experiment", "a", "--m", "2", "--n", "10", "--d", "6", "--out", data}).code == 0);
  const Result a = run(quick({"fit", "--data", data, "--out", (dir / "a").string(), "--seed", "5"}));
  REQUIRE(a.code == 0);
  std::vector<std::string> args = a.record().at("args").get<std::vector<std::string>>();
  for (std::string& s : args) {
    if (s == (dir / "a").string()) s = (dir / "b").string();
  }
  REQUIRE(run(args).code == 0);
  const PosteriorStore sa = load_store(dir / "a" / "chain_0");
  const PosteriorStore sb = load_store(dir / "b" / "chain_0");
  CHECK(sa.snapshots.back() == sb.snapshots.back());
}

TEST_CASE("fa variant, hyperparameters and preprocessing") {
  const fs::path dir = scratch("misc");
  const std::string data = (dir / "data").string();
  REQUIRE(run({"simulate", "--experiment", "b", "--m", "3", "--n", "12", "--d", "8", "--out", data}).code == 0);
  CHECK(run(quick({"fit", "--data", data, "--out", (dir / "fa").string(), "--variant", "fa", "--hyper",
                   "a_pi=2,b_pi=3"}))
            .code == 0);
  CHECK(load_store(dir / "fa" / "chain_0").config.hyper.b_pi == 3.0);
  CHECK(run(quick({"fit", "--data", data, "--out", (dir / "x").string(), "--hyper", "a_pi=-1"})).code == 2);
  CHECK(run(quick({"fit", "--data", data, "--out", (dir / "x").string(), "--variant", "pca"})).code == 2);
}

TEST_CASE("preprocessing keeps the genes with the highest average variance") {
  const fs::path dir = scratch("pre");
  auto view = [](const std::string& name, int first, int last) {
    View v;
    v.name = name;
    v.values.resize(4, last - first + 1);
    v.missing.setConstant(4, v.values.cols(), false);
    for (int i = 0; i < 4; ++i) v.row_names.push_back("s" + std::to_string(i + 1));
    for (int g = first; g <= last; ++g) {
      v.col_names.push_back("g" + std::to_string(g));
      v.values.col(g - first) << -g, g, -g, g;
    }
    return v;
  };
  DataCollection data;
  data.views = {view("a", 1, 4), view("b", 2, 5)};
  write_collection(data, dir / "data");
  const Result p = run({"preprocess", "--data", (dir / "data").string(), "--out", (dir / "pre").string(),
                        "--top-variance", "2"});
  REQUIRE(p.code == 0);
  const DataCollection pre = read_collection(dir / "pre" / "collection.json");
  REQUIRE(pre.views.size() == 2);
  CHECK(pre.views[0].col_names == std::vector<std::string>{"g4"});
  CHECK(pre.views[1].col_names == std::vector<std::string>{"g4", "g5"});
  CHECK(pre.views[1].values(1, 1) == 5.0);
  CHECK(run({"preprocess", "--data", (dir / "data").string(), "--out", (dir / "x").string(), "--top-variance", "1"})
            .code != 0);
}

TEST_CASE("two-mode collections ingest and fit") {
  const fs::path dir = scratch("two");
  const std::string data = (dir / "data").string();
  REQUIRE(run({"simulate", "--experiment", "fig1", "--out", data}).code == 0);
  const Result f = run(quick({"fit", "--data", data, "--out", (dir / "fit").string(), "--k", "3", "--k2", "2"}));
  REQUIRE(f.code == 0);
  const PosteriorStore s = load_store(dir / "fit" / "chain_0");
  CHECK(s.snapshots.front().modes[1].K() == 2);
  CHECK(run(quick({"fit", "--data", data, "--out", (dir / "fa").string(), "--variant", "fa"})).code == 2);
}

TEST_CASE("grid command writes tables") {
  const fs::path dir = scratch("grid");
  const Result r = run({"grid", "--experiment", "a", "--values", "1,2", "--reps", "1", "--n", "10", "--burnin", "10",
                        "--thin", "1", "--samples", "3", "--out", dir.string()});
  REQUIRE(r.code == 0);
  std::ifstream in(dir / "grid.tsv");
  int lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == 5);
}
}
