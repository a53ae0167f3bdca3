#include "gfa/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gfa/biclusters.hpp"
#include "gfa/evaluate.hpp"
#include "gfa/io.hpp"
#include "gfa/sampler.hpp"
#include "gfa/simulate.hpp"
#include "gfa/store.hpp"

namespace gfa::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SimulateOptions {
  std::string experiment = "b";
  std::uint64_t seed = 1;
  std::string out;
  std::optional<int> m;
  std::optional<Eigen::Index> n;
  std::vector<Eigen::Index> d;
  std::optional<int> k_true;
  std::optional<double> activity;
  std::optional<int> noise_components;
  std::optional<double> alpha;
  std::optional<double> noise_variance;
};

struct FitOptions {
  std::string data;
  std::string out;
  int chains = 1;
  std::string k = "auto";
  Eigen::Index k_hint = 4;
  std::optional<Eigen::Index> k2;
  long burnin = 2000;
  long thin = 20;
  long samples = 101;
  std::uint64_t seed = 1;
  std::string variant = "gfa";
  std::optional<double> snr;
  std::vector<std::string> hyper;
  int threads = 1;
};

struct BiclusterOptions {
  std::vector<std::string> chains;
  std::string out;
  double threshold = 0.80;
  double min_chains_fraction = 0.5;
  double majority = 0.5;
  Eigen::Index min_sample_members = 0;
};

struct PredictOptions {
  std::vector<std::string> chains;
  std::string data;
  std::string out;
  bool ranking = false;
  bool ascending = false;
};

struct EvaluateOptions {
  std::string task;
  std::string predicted;
  std::string truth;
  std::string scope = "all";
  std::string out;
};

struct PreprocessOptions {
  std::string data;
  std::string out;
  Eigen::Index top_variance = 500;
};

struct GridOptions {
  std::string experiment = "b";
  int reps = 10;
  std::vector<std::string> methods{"gfa", "fa"};
  std::vector<double> values;
  std::string out;
  std::uint64_t seed = 1;
  long burnin = 2000;
  long thin = 20;
  long samples = 101;
  Eigen::Index k_extra = 5;
  std::optional<std::string> scope;
  int threads = 1;
  std::string external_dir;
  std::optional<Eigen::Index> n;
  std::optional<int> m;
  std::optional<double> activity;
};

fs::path manifest_path(const std::string& data) {
  fs::path p = data;
  if (fs::is_directory(p)) p /= "collection.json";
  if (!fs::exists(p)) throw DataError("data file not found: " + p.string());
  return p;
}

HyperParams parse_hyper(const std::vector<std::string>& items) {
  HyperParams h;
  std::map<std::string, double*> fields = {{"a_pi", &h.a_pi},       {"b_pi", &h.b_pi},   {"a_alpha", &h.a_alpha},
                                           {"b_alpha", &h.b_alpha}, {"a_tau", &h.a_tau}, {"b_tau", &h.b_tau}};
  for (const std::string& item : items) {
    std::size_t start = 0;
    while (start <= item.size()) {
      const std::size_t comma = item.find(',', start);
      const std::string kv = item.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      start = comma == std::string::npos ? item.size() + 1 : comma + 1;
      if (kv.empty()) continue;
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--hyper expects key=value, got '" + kv + "'");
      const auto it = fields.find(kv.substr(0, eq));
      if (it == fields.end()) throw ConfigError("unknown hyperparameter '" + kv.substr(0, eq) + "'");
      try {
        std::size_t used = 0;
        *it->second = std::stod(kv.substr(eq + 1), &used);
        if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
      } catch (const std::logic_error&) {
        throw ConfigError("invalid value in --hyper '" + kv + "'");
      }
    }
  }
  h.validate();
  return h;
}

std::vector<PosteriorStore> load_stores(const std::vector<std::string>& dirs) {
  std::vector<PosteriorStore> stores;
  for (const std::string& d : dirs) {
    if (!fs::exists(fs::path(d) / "manifest.json")) throw DataError("no posterior store at " + d);
    stores.push_back(load_store(d));
  }
  return stores;
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) throw ConfigError("--out is required");
  fs::create_directories(dir);
}

json cmd_simulate(const SimulateOptions& o, json& outputs) {
  SimulationSpec spec = SimulationSpec::defaults(parse_experiment(o.experiment));
  spec.seed = o.seed;
  if (o.m) spec.M = *o.m;
  if (o.n) spec.N = *o.n;
  if (!o.d.empty()) spec.D = o.d;
  if (o.k_true) spec.K_true = *o.k_true;
  if (o.activity) spec.activity = *o.activity;
  if (o.noise_components) spec.n_noise_components = *o.noise_components;
  if (o.alpha) spec.alpha_strength = *o.alpha;
  if (o.noise_variance) {
    spec.variances = spec.resolved_variances();
    for (VarianceSetting& v : spec.variances) v.noise = *o.noise_variance;
  }
  if (spec.D.size() == 1 && spec.M > 1) spec.D.resize(static_cast<std::size_t>(spec.M), spec.D.front());
  spec.validate();
  ensure_dir(o.out);
  auto [data, truth] = generate(spec);
  const fs::path manifest = write_collection(data, o.out);
  const fs::path truth_path = fs::path(o.out) / "truth.json";
  write_truth(truth, DataLayout::of(data), truth_path);
  outputs.push_back(manifest.string());
  for (const View& v : data.views) outputs.push_back((fs::path(o.out) / (v.name + ".tsv")).string());
  outputs.push_back(truth_path.string());
  return {{"spec", to_json(spec)}};
}

json cmd_fit(const FitOptions& o, json& outputs, std::ostream& err) {
  if (o.chains < 1) throw ConfigError("--chains must be at least 1");
  if (o.threads < 1) throw ConfigError("--threads must be at least 1");
  ChainConfig config;
  config.burn_in = o.burnin;
  config.thinning = o.thin;
  config.n_samples = o.samples;
  config.hyper = parse_hyper(o.hyper);
  config.snr = o.snr;
  config.variant.kind = parse_model_kind(o.variant);
  Eigen::Index k = 0;
  if (o.k == "auto") {
    k = o.k_hint + 5;
  } else {
    try {
      std::size_t used = 0;
      k = std::stol(o.k, &used);
      if (used != o.k.size()) throw std::invalid_argument(o.k);
    } catch (const std::logic_error&) {
      throw ConfigError("--k must be 'auto' or an integer, got '" + o.k + "'");
    }
  }
  if (k < 1) throw ConfigError("--k must be positive");
  if (o.k2 && *o.k2 < 1) throw ConfigError("--k2 must be positive");
  config.k_init = {k, o.k2.value_or(k)};
  if (o.out.empty()) throw ConfigError("--out is required");

  const DataCollection data = read_collection(manifest_path(o.data));
  config.variant.two_mode = data.two_mode();
  if (!config.variant.two_mode) config.k_init.resize(1);
  if (config.variant.kind == ModelKind::FA_CONCAT && config.variant.two_mode) {
    throw ConfigError("the fa variant does not support mode-2 views");
  }
  config.validate();
  ensure_dir(o.out);

  std::vector<std::string> dirs(static_cast<std::size_t>(o.chains));
  std::vector<std::string> errors(static_cast<std::size_t>(o.chains));
  std::atomic<int> next{0};
  std::mutex mutex;
  auto worker = [&] {
    for (int i = next++; i < o.chains; i = next++) {
      ChainConfig c = config;
      c.seed = o.seed + static_cast<std::uint64_t>(i);
      const fs::path dir = fs::path(o.out) / ("chain_" + std::to_string(i));
      try {
        save_store(run_chain(data, c, i), dir);
        dirs[static_cast<std::size_t>(i)] = dir.string();
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        errors[static_cast<std::size_t>(i)] = e.what();
      }
    }
  };
  const int n_threads = std::min(o.threads, o.chains);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  json chains = json::array();
  std::string first_error;
  for (int i = 0; i < o.chains; ++i) {
    const auto& e = errors[static_cast<std::size_t>(i)];
    chains.push_back({{"chain", i}, {"seed", o.seed + static_cast<std::uint64_t>(i)}, {"ok", e.empty()}});
    if (!e.empty()) {
      chains.back()["error"] = e;
      err << "chain " << i << " failed: " << e << '\n';
      if (first_error.empty()) first_error = e;
    } else {
      outputs.push_back(dirs[static_cast<std::size_t>(i)]);
    }
  }
  if (!first_error.empty()) throw NumericalError(first_error);
  return {{"chain", to_json(config)}, {"chains", chains}, {"data", manifest_path(o.data).string()}};
}

json cmd_biclusters(const BiclusterOptions& o, json& outputs) {
  if (!(o.threshold > 0.0 && o.threshold <= 1.0)) throw ConfigError("--threshold must lie in (0, 1]");
  if (!(o.min_chains_fraction > 0.0 && o.min_chains_fraction <= 1.0)) {
    throw ConfigError("--min-chains-fraction must lie in (0, 1]");
  }
  if (!(o.majority >= 0.0 && o.majority < 1.0)) throw ConfigError("--majority must lie in [0, 1)");
  if (o.chains.empty()) throw ConfigError("at least one chain directory is required");
  ensure_dir(o.out);
  MatchOptions options;
  options.threshold = o.threshold;
  options.min_chains_fraction = o.min_chains_fraction;
  options.extract.majority = o.majority;
  options.extract.min_sample_members = o.min_sample_members;
  const std::vector<PosteriorStore> stores = load_stores(o.chains);
  json effective = json::array();
  for (std::size_t c = 0; c < stores.size(); ++c) {
    const BiclusterSet set = extract_biclusters(stores[c], options.extract);
    const std::string stem = stores.size() == 1 ? "biclusters" : "biclusters_chain" + std::to_string(c);
    write_bicluster_set(set, o.out, stem);
    outputs.push_back((fs::path(o.out) / (stem + ".json")).string());
    effective.push_back(set.effective_K);
  }
  json record = {{"threshold", o.threshold},
                 {"min_chains_fraction", o.min_chains_fraction},
                 {"majority", o.majority},
                 {"min_sample_members", o.min_sample_members},
                 {"chains", o.chains},
                 {"effective_K", effective}};
  if (stores.size() > 1) {
    const RobustComponentReport report = match_chains(stores, options);
    write_robust_report(report, o.out);
    outputs.push_back((fs::path(o.out) / "robust_components.json").string());
    record["robust_count"] = report.robust_count();
  }
  return record;
}

json cmd_predict(const PredictOptions& o, json& outputs, std::ostream& err) {
  if (o.chains.empty()) throw ConfigError("at least one chain directory is required");
  const DataCollection data = read_collection(manifest_path(o.data));
  ensure_dir(o.out);
  const std::vector<PosteriorStore> stores = load_stores(o.chains);
  std::vector<Matrix> mean;
  for (const PosteriorStore& store : stores) {
    if (!(store.layout == DataLayout::of(data))) {
      throw DataError("posterior store " + std::to_string(store.chain_id) + " does not match the data layout");
    }
    const std::vector<ViewPrediction> p = predict_missing(store, data);
    if (mean.empty()) {
      for (const ViewPrediction& v : p) mean.push_back(v.mean);
    } else {
      for (std::size_t v = 0; v < p.size(); ++v) mean[v] += p[v].mean;
    }
  }
  long long total = 0;
  json views = json::array();
  for (std::size_t v = 0; v < data.views.size(); ++v) {
    const View& view = data.views[v];
    mean[v] /= static_cast<double>(stores.size());
    const fs::path path = fs::path(o.out) / (view.name + "_predicted.tsv");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "row\tcolumn\tvalue\n";
    char buf[32];
    long long n = 0;
    for (Eigen::Index i = 0; i < view.rows(); ++i) {
      for (Eigen::Index j = 0; j < view.cols(); ++j) {
        if (!view.missing(i, j)) continue;
        std::snprintf(buf, sizeof buf, "%.17g", mean[v](i, j));
        out << view.row_names[static_cast<std::size_t>(i)] << '\t' << view.col_names[static_cast<std::size_t>(j)]
            << '\t' << buf << '\n';
        ++n;
      }
    }
    total += n;
    outputs.push_back(path.string());
    views.push_back({{"name", view.name}, {"predicted_cells", n}});
    if (o.ranking && n > 0) {
      const fs::path rpath = fs::path(o.out) / (view.name + "_ranking.tsv");
      std::ofstream rout(rpath);
      if (!rout) throw DataError("cannot write " + rpath.string());
      rout << "column\trank\trow\tvalue\n";
      for (Eigen::Index j = 0; j < view.cols(); ++j) {
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < view.rows(); ++i) {
          if (view.missing(i, j)) rows.push_back(i);
        }
        std::stable_sort(rows.begin(), rows.end(), [&](Eigen::Index a, Eigen::Index b) {
          return o.ascending ? mean[v](a, j) < mean[v](b, j) : mean[v](a, j) > mean[v](b, j);
        });
        for (std::size_t r = 0; r < rows.size(); ++r) {
          std::snprintf(buf, sizeof buf, "%.17g", mean[v](rows[r], j));
          rout << view.col_names[static_cast<std::size_t>(j)] << '\t' << r + 1 << '\t'
               << view.row_names[static_cast<std::size_t>(rows[r])] << '\t' << buf << '\n';
        }
      }
      outputs.push_back(rpath.string());
    }
  }
  if (total == 0) err << "warning: the data has no missing cells; nothing to predict\n";
  return {{"chains", o.chains}, {"data", manifest_path(o.data).string()}, {"views", views},
          {"ranking", o.ranking}, {"ascending", o.ascending}};
}

json cmd_evaluate(const EvaluateOptions& o, json& outputs, std::ostream& out) {
  std::vector<std::pair<std::string, std::string>> metrics;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  if (o.task == "bicluster") {
    const ScoreScope scope = parse_score_scope(o.scope);
    const BiclusterSet predicted = bicluster_set_from_json(read_json(o.predicted));
    DataLayout layout;
    const GroundTruth truth = read_truth(o.truth, layout);
    if (!(predicted.layout == layout)) throw DataError("predicted biclusters and truth have different layouts");
    std::vector<BoolMatrix> p = predicted.union_cells();
    std::vector<BoolMatrix> t = truth.cells;
    if (scope == ScoreScope::ViewOfInterest) {
      p.resize(1);
      t.resize(1);
    }
    const F1Counts c = f1_counts(p, t);
    metrics = {{"tp", std::to_string(c.tp)},
               {"fp", std::to_string(c.fp)},
               {"fn", std::to_string(c.fn)},
               {"f1", num(c.f1())},
               {"effective_K", std::to_string(predicted.total_effective_K())}};
  } else if (o.task == "regression") {
    const View truth = read_view_tsv(o.truth, "truth", 1);
    std::map<std::string, Eigen::Index> rows, cols;
    for (std::size_t i = 0; i < truth.row_names.size(); ++i) rows[truth.row_names[i]] = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < truth.col_names.size(); ++j) cols[truth.col_names[j]] = static_cast<Eigen::Index>(j);
    std::ifstream in(o.predicted);
    if (!in) throw DataError("cannot open " + o.predicted);
    std::string line;
    std::getline(in, line);
    std::vector<double> pred, actual;
    long line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::istringstream fields(line);
      std::string r, c, v;
      if (!std::getline(fields, r, '\t') || !std::getline(fields, c, '\t') || !std::getline(fields, v, '\t')) {
        throw DataError(o.predicted + ":" + std::to_string(line_no) + ": expected row, column and value");
      }
      const auto ri = rows.find(r);
      const auto ci = cols.find(c);
      if (ri == rows.end() || ci == cols.end()) {
        throw DataError(o.predicted + ":" + std::to_string(line_no) + ": cell (" + r + ", " + c +
                        ") not in the truth matrix");
      }
      if (truth.missing(ri->second, ci->second)) continue;
      try {
        pred.push_back(std::stod(v));
      } catch (const std::logic_error&) {
        throw DataError(o.predicted + ":" + std::to_string(line_no) + ": invalid number '" + v + "'");
      }
      actual.push_back(truth.values(ri->second, ci->second));
    }
    const RegressionMetrics m = regression_metrics(pred, actual);
    metrics = {{"n", std::to_string(m.n)},
               {"rmse", num(m.rmse)},
               {"pearson", num(m.pearson)},
               {"pearson_defined", m.pearson_defined ? "1" : "0"},
               {"spearman", num(m.spearman)},
               {"spearman_defined", m.spearman_defined ? "1" : "0"}};
  } else {
    throw ConfigError("unknown task '" + o.task + "' (expected bicluster or regression)");
  }
  std::ostringstream tsv;
  tsv << "metric\tvalue\n";
  for (const auto& [k, v] : metrics) tsv << k << '\t' << v << '\n';
  if (o.out.empty()) {
    out << tsv.str();
  } else {
    std::ofstream f(o.out);
    if (!f) throw DataError("cannot write " + o.out);
    f << tsv.str();
    outputs.push_back(o.out);
  }
  json j = {{"task", o.task}, {"predicted", o.predicted}, {"truth", o.truth}, {"scope", o.scope}};
  json values = json::object();
  for (const auto& [k, v] : metrics) values[k] = v;
  j["metrics"] = values;
  return j;
}

json cmd_preprocess(const PreprocessOptions& o, json& outputs) {
  if (o.top_variance < 1) throw ConfigError("--top-variance must be positive");
  DataCollection data = read_collection(manifest_path(o.data));
  std::vector<std::string> order;
  std::map<std::string, std::pair<double, int>> variance;
  for (const View& v : data.views) {
    if (v.mode != 1) continue;
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      double sum = 0.0, sq = 0.0;
      long n = 0;
      for (Eigen::Index i = 0; i < v.rows(); ++i) {
        if (v.missing(i, j)) continue;
        sum += v.values(i, j);
        ++n;
      }
      if (n < 2) continue;
      const double mean = sum / static_cast<double>(n);
      for (Eigen::Index i = 0; i < v.rows(); ++i) {
        if (!v.missing(i, j)) sq += (v.values(i, j) - mean) * (v.values(i, j) - mean);
      }
      const std::string& name = v.col_names[static_cast<std::size_t>(j)];
      auto [it, inserted] = variance.try_emplace(name, 0.0, 0);
      if (inserted) order.push_back(name);
      it->second.first += sq / static_cast<double>(n - 1);
      it->second.second += 1;
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    return variance[a].first / variance[a].second > variance[b].first / variance[b].second;
  });
  if (static_cast<Eigen::Index>(order.size()) > o.top_variance) order.resize(static_cast<std::size_t>(o.top_variance));
  const std::set<std::string> keep(order.begin(), order.end());

  auto select = [](const View& v, const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols) {
    View out;
    out.name = v.name;
    out.mode = v.mode;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    out.missing.resize(out.values.rows(), out.values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.row_names.push_back(v.row_names[static_cast<std::size_t>(rows[i])]);
      for (std::size_t j = 0; j < cols.size(); ++j) {
        out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v.values(rows[i], cols[j]);
        out.missing(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v.missing(rows[i], cols[j]);
      }
    }
    for (Eigen::Index c : cols) out.col_names.push_back(v.col_names[static_cast<std::size_t>(c)]);
    return out;
  };
  auto all = [](Eigen::Index n) {
    std::vector<Eigen::Index> out(static_cast<std::size_t>(n));
    std::iota(out.begin(), out.end(), 0);
    return out;
  };
  std::vector<Eigen::Index> first_kept;
  DataCollection result;
  json kept = json::object();
  for (std::size_t vi = 0; vi < data.views.size(); ++vi) {
    const View& v = data.views[vi];
    if (v.mode == 1) {
      std::vector<Eigen::Index> cols;
      for (Eigen::Index j = 0; j < v.cols(); ++j) {
        if (keep.count(v.col_names[static_cast<std::size_t>(j)])) cols.push_back(j);
      }
      if (cols.empty()) throw DataError("view '" + v.name + "' keeps no features");
      if (vi == 0) first_kept = cols;
      result.views.push_back(select(v, all(v.rows()), cols));
      kept[v.name] = cols.size();
    } else {
      result.views.push_back(select(v, first_kept, all(v.cols())));
    }
  }
  ensure_dir(o.out);
  outputs.push_back(write_collection(result, o.out).string());
  return {{"data", manifest_path(o.data).string()},
          {"top_variance", o.top_variance},
          {"selected", order.size()},
          {"kept_per_view", kept}};
}

json cmd_grid(const GridOptions& o, json& outputs, std::ostream& err) {
  GridConfig config;
  config.base = SimulationSpec::defaults(parse_experiment(o.experiment));
  if (o.n) config.base.N = *o.n;
  if (o.m) config.base.M = *o.m;
  if (o.activity) config.base.activity = *o.activity;
  config.values = o.values;
  config.reps = o.reps;
  config.methods.clear();
  for (const std::string& m : o.methods) config.methods.push_back(parse_method(m));
  config.chain.burn_in = o.burnin;
  config.chain.thinning = o.thin;
  config.chain.n_samples = o.samples;
  config.k_extra = o.k_extra;
  if (o.scope) config.scope = parse_score_scope(*o.scope);
  config.base_seed = o.seed;
  config.threads = o.threads;
  config.external_dir = o.external_dir;
  config.validate();
  ensure_dir(o.out);
  const GridResult result = run_experiment_grid(config, [&](const RunRecord& r) {
    if (!r.ok) err << "point " << r.point << " rep " << r.rep << " " << to_string(r.method) << " failed: " << r.error
                   << '\n';
  });
  const fs::path tsv = fs::path(o.out) / "grid.tsv";
  const fs::path js = fs::path(o.out) / "grid.json";
  write_grid_tsv(result, tsv);
  write_json(to_json(result), js);
  outputs.push_back(tsv.string());
  outputs.push_back(js.string());
  return to_json(result).at("config");
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"Sparse group factor analysis for multi-view biclustering", "gfa"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Generate a synthetic dataset with ground truth");
  s->add_option("--experiment", sim.experiment, "fig1, a, b, c, d, e or f")->capture_default_str();
  s->add_option("--seed", sim.seed)->capture_default_str();
  s->add_option("--out", sim.out, "Output directory")->required();
  s->add_option("--m", sim.m, "Number of views");
  s->add_option("--n", sim.n, "Number of samples");
  s->add_option("--d", sim.d, "Features per view (one value or one per view)");
  s->add_option("--k-true", sim.k_true, "Number of planted biclusters");
  s->add_option("--activity", sim.activity, "Active fraction of samples and features");
  s->add_option("--noise-components", sim.noise_components, "View-specific rank-1 noise components");
  s->add_option("--alpha", sim.alpha, "Auxiliary-view loading precision");
  s->add_option("--noise-variance", sim.noise_variance, "Noise variance of every view");

  FitOptions fit;
  auto* f = app.add_subcommand("fit", "Run Gibbs sampling chains");
  f->add_option("--data", fit.data, "Collection manifest or its directory")->required();
  f->add_option("--out", fit.out, "Output directory")->required();
  f->add_option("--chains", fit.chains)->capture_default_str();
  f->add_option("--k", fit.k, "Initial components per mode, or auto")->capture_default_str();
  f->add_option("--k-hint", fit.k_hint, "Expected component count used by --k auto")->capture_default_str();
  f->add_option("--k2", fit.k2, "Initial mode-2 components (default: --k)");
  f->add_option("--burnin", fit.burnin)->capture_default_str();
  f->add_option("--thin", fit.thin)->capture_default_str();
  f->add_option("--samples", fit.samples)->capture_default_str();
  f->add_option("--seed", fit.seed, "Seed of chain 0; chain i uses seed + i")->capture_default_str();
  f->add_option("--variant", fit.variant, "gfa or fa")->capture_default_str();
  f->add_option("--snr", fit.snr, "Signal-to-noise ratio for the noise prior");
  f->add_option("--hyper", fit.hyper, "Hyperparameters as key=value[,key=value]");
  f->add_option("--threads", fit.threads)->capture_default_str();

  BiclusterOptions bic;
  auto* b = app.add_subcommand("biclusters", "Extract biclusters and match components across chains");
  b->add_option("--chains", bic.chains, "Chain directories")->required();
  b->add_option("--out", bic.out, "Output directory")->required();
  b->add_option("--threshold", bic.threshold)->capture_default_str();
  b->add_option("--min-chains-fraction", bic.min_chains_fraction)->capture_default_str();
  b->add_option("--majority", bic.majority)->capture_default_str();
  b->add_option("--min-sample-members", bic.min_sample_members)->capture_default_str();

  PredictOptions pred;
  auto* p = app.add_subcommand("predict", "Predict missing cells from posterior means");
  p->add_option("--chains", pred.chains, "Chain directories")->required();
  p->add_option("--data", pred.data, "Collection manifest or its directory")->required();
  p->add_option("--out", pred.out, "Output directory")->required();
  p->add_flag("--ranking", pred.ranking, "Also rank rows of each column by predicted value");
  p->add_flag("--ascending", pred.ascending, "Rank from the smallest predicted value");

  EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "Score predictions against ground truth");
  e->add_option("--task", ev.task, "bicluster or regression")->required();
  e->add_option("--predicted", ev.predicted, "Bicluster JSON or prediction TSV")->required();
  e->add_option("--truth", ev.truth, "Truth JSON or truth matrix TSV")->required();
  e->add_option("--scope", ev.scope, "all or first (bicluster task)")->capture_default_str();
  e->add_option("--out", ev.out, "Metrics TSV (default: standard output)");

  PreprocessOptions pre;
  auto* r = app.add_subcommand("preprocess", "Keep the features with the highest average variance");
  r->add_option("--data", pre.data, "Collection manifest or its directory")->required();
  r->add_option("--out", pre.out, "Output directory")->required();
  r->add_option("--top-variance", pre.top_variance)->capture_default_str();

  GridOptions grid;
  auto* g = app.add_subcommand("grid", "Run a simulation experiment grid");
  g->add_option("--experiment", grid.experiment)->capture_default_str();
  g->add_option("--reps", grid.reps)->capture_default_str();
  g->add_option("--methods", grid.methods, "gfa, fa, external")->delimiter(',')->capture_default_str();
  g->add_option("--values", grid.values, "Grid values")->delimiter(',');
  g->add_option("--out", grid.out, "Output directory")->required();
  g->add_option("--seed", grid.seed)->capture_default_str();
  g->add_option("--burnin", grid.burnin)->capture_default_str();
  g->add_option("--thin", grid.thin)->capture_default_str();
  g->add_option("--samples", grid.samples)->capture_default_str();
  g->add_option("--k-extra", grid.k_extra)->capture_default_str();
  g->add_option("--scope", grid.scope, "all or first");
  g->add_option("--threads", grid.threads)->capture_default_str();
  g->add_option("--external-dir", grid.external_dir, "Directory of point<p>_rep<r>.json files");
  g->add_option("--n", grid.n);
  g->add_option("--m", grid.m);
  g->add_option("--activity", grid.activity);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? 0 : 2;
  }

  json outputs = json::array();
  json config;
  std::string command;
  std::uint64_t seed = 0;
  try {
    if (*s) {
      command = "simulate";
      seed = sim.seed;
      config = cmd_simulate(sim, outputs);
    } else if (*f) {
      command = "fit";
      seed = fit.seed;
      config = cmd_fit(fit, outputs, err);
    } else if (*b) {
      command = "biclusters";
      config = cmd_biclusters(bic, outputs);
    } else if (*p) {
      command = "predict";
      config = cmd_predict(pred, outputs, err);
    } else if (*e) {
      command = "evaluate";
      config = cmd_evaluate(ev, outputs, out);
    } else if (*r) {
      command = "preprocess";
      config = cmd_preprocess(pre, outputs);
    } else if (*g) {
      command = "grid";
      seed = grid.seed;
      config = cmd_grid(grid, outputs, err);
    }
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return 1;
  }

  json args = json::array();
  for (int i = 1; i < argc; ++i) args.push_back(argv[i]);
  const json record = {
      {"command", command},
      {"args", args},
      {"config", config},
      {"seed", seed},
      {"version", kVersion},
      {"versions", {{"gfa", kVersion}, {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                    std::to_string(EIGEN_MINOR_VERSION)},
                    {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                 std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                 std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                    {"cli11", CLI11_VERSION}}},
      {"outputs", outputs},
      {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  out << record.dump() << '\n';
  return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> copy = args;
  copy.insert(copy.begin(), "gfa");
  std::vector<char*> argv;
  for (std::string& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(copy.size()), argv.data(), out, err);
}

}  // namespace gfa::cli
