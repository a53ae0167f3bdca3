#include "gfa/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "gfa/rng.hpp"
#include "gfa/store.hpp"

namespace gfa {

using nlohmann::json;

double F1Counts::f1() const {
  const long long denom = 2 * tp + fn + fp;
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

F1Counts f1_counts(const std::vector<BoolMatrix>& predicted, const std::vector<BoolMatrix>& truth) {
  if (predicted.size() != truth.size()) {
    throw DataError("F1: predicted has " + std::to_string(predicted.size()) + " views, truth has " +
                    std::to_string(truth.size()));
  }
  F1Counts c;
  for (std::size_t v = 0; v < truth.size(); ++v) {
    const BoolMatrix& p = predicted[v];
    const BoolMatrix& t = truth[v];
    if (p.rows() != t.rows() || p.cols() != t.cols()) {
      throw DataError("F1: view " + std::to_string(v) + " shape mismatch");
    }
    c.tp += (p && t).count();
    c.fp += (p && !t).count();
    c.fn += (!p && t).count();
  }
  return c;
}

double f1_cells(const std::vector<BoolMatrix>& predicted, const std::vector<BoolMatrix>& truth) {
  return f1_counts(predicted, truth).f1();
}

double f1_cells(const BiclusterSet& predicted, const GroundTruth& truth) {
  return f1_cells(predicted.union_cells(), truth.cells);
}

std::string to_string(ScoreScope scope) { return scope == ScoreScope::AllViews ? "all" : "first"; }

ScoreScope parse_score_scope(const std::string& name) {
  if (name == "all") return ScoreScope::AllViews;
  if (name == "first") return ScoreScope::ViewOfInterest;
  throw ConfigError("unknown score scope '" + name + "' (expected all or first)");
}

double f1_cells(const BiclusterSet& predicted, const GroundTruth& truth, ScoreScope scope) {
  std::vector<BoolMatrix> p = predicted.union_cells();
  std::vector<BoolMatrix> t = truth.cells;
  if (scope == ScoreScope::ViewOfInterest && !p.empty() && !t.empty()) {
    p.resize(1);
    t.resize(1);
  }
  return f1_cells(p, t);
}

namespace {

std::pair<double, bool> correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n < 2) return {0.0, false};
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return {0.0, false};
  return {std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0), true};
}

double sample_sd(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

RegressionMetrics regression_metrics(const std::vector<double>& predicted, const std::vector<double>& truth) {
  if (predicted.size() != truth.size()) throw DataError("regression metrics: length mismatch");
  RegressionMetrics m;
  m.n = static_cast<long long>(truth.size());
  if (truth.empty()) return m;
  double ss = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) ss += (predicted[i] - truth[i]) * (predicted[i] - truth[i]);
  m.rmse = std::sqrt(ss / static_cast<double>(truth.size()));
  std::tie(m.pearson, m.pearson_defined) = correlation(predicted, truth);
  std::tie(m.spearman, m.spearman_defined) = correlation(average_ranks(predicted), average_ranks(truth));
  return m;
}

RegressionMetrics regression_metrics(const Matrix& predicted, const Matrix& truth, const BoolMatrix& mask) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols() || mask.rows() != truth.rows() ||
      mask.cols() != truth.cols()) {
    throw DataError("regression metrics: shape mismatch");
  }
  std::vector<double> p, t;
  for (Eigen::Index j = 0; j < truth.cols(); ++j) {
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
      if (!mask(i, j)) continue;
      p.push_back(predicted(i, j));
      t.push_back(truth(i, j));
    }
  }
  return regression_metrics(p, t);
}

std::vector<std::vector<Eigen::Index>> cv_splits(Eigen::Index n, int folds, std::uint64_t seed) {
  if (folds < 1 || n < folds) {
    throw ConfigError("cannot split " + std::to_string(n) + " items into " + std::to_string(folds) + " folds");
  }
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
  std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < perm.size(); ++i) out[i % out.size()].push_back(perm[i]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::GFA: return "gfa";
    case Method::FA_CONCAT: return "fa";
    case Method::External: return "external";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "gfa") return Method::GFA;
  if (name == "fa") return Method::FA_CONCAT;
  if (name == "external") return Method::External;
  throw ConfigError("unknown method '" + name + "' (expected gfa, fa or external)");
}

std::string grid_parameter(Experiment e) {
  switch (e) {
    case Experiment::A:
    case Experiment::B:
    case Experiment::C: return "M";
    case Experiment::D: return "noise";
    case Experiment::E: return "K";
    case Experiment::F: return "alpha";
    case Experiment::BlockFig1: return "none";
  }
  return "none";
}

std::vector<double> default_grid(Experiment e) {
  switch (e) {
    case Experiment::A:
    case Experiment::B:
    case Experiment::C: return {1, 3, 5, 7, 9};
    case Experiment::D: return {0, 2, 4, 6};
    case Experiment::E: return {1, 3, 5, 7};
    case Experiment::F: return {0.01, 0.1, 1, 10, 100};
    case Experiment::BlockFig1: return {0};
  }
  return {0};
}

SimulationSpec grid_spec(const SimulationSpec& base, double value) {
  SimulationSpec s = base;
  switch (base.experiment) {
    case Experiment::A:
    case Experiment::B:
    case Experiment::C:
      s.M = static_cast<int>(std::lround(value));
      if (!s.D.empty()) s.D.resize(static_cast<std::size_t>(std::max(s.M, 0)), s.D.front());
      if (!s.variances.empty()) s.variances.clear();
      break;
    case Experiment::D: s.n_noise_components = static_cast<int>(std::lround(value)); break;
    case Experiment::E: s.K_true = static_cast<int>(std::lround(value)); break;
    case Experiment::F: s.alpha_strength = value; break;
    case Experiment::BlockFig1: break;
  }
  return s;
}

void GridConfig::validate() const {
  if (reps < 1) throw ConfigError("at least one repetition is required");
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (threads < 1) throw ConfigError("thread count must be positive");
  if (k_extra < 0) throw ConfigError("extra component count must be non-negative");
  for (double v : resolved_values()) grid_spec(base, v).validate();
  ChainConfig c = chain;
  c.k_init = {1};
  c.validate();
  if (std::find(methods.begin(), methods.end(), Method::External) != methods.end() && external_dir.empty()) {
    throw ConfigError("the external method needs a directory of bicluster files");
  }
}

ScoreScope GridConfig::resolved_scope() const {
  if (scope) return *scope;
  return base.experiment == Experiment::BlockFig1 ? ScoreScope::AllViews : ScoreScope::ViewOfInterest;
}

std::vector<double> GridConfig::resolved_values() const {
  return values.empty() ? default_grid(base.experiment) : values;
}

std::uint64_t GridConfig::data_seed(int point, int rep) const {
  return base_seed * 1000003ULL + static_cast<std::uint64_t>(point) * 1000ULL + static_cast<std::uint64_t>(rep);
}

RunRecord run_single(const GridConfig& config, int point, int rep, Method method) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord r;
  r.point = point;
  r.value = config.resolved_values().at(static_cast<std::size_t>(point));
  r.rep = rep;
  r.method = method;
  r.data_seed = config.data_seed(point, rep);
  try {
    SimulationSpec spec = grid_spec(config.base, r.value);
    spec.seed = r.data_seed;
    auto [data, truth] = generate(spec);
    r.true_K = static_cast<Eigen::Index>(truth.biclusters.size());
    BiclusterSet set;
    if (method == Method::External) {
      const auto path = config.external_dir / ("point" + std::to_string(point) + "_rep" + std::to_string(rep) + ".json");
      std::ifstream in(path);
      if (!in) throw DataError("cannot open " + path.string());
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw DataError("malformed bicluster file " + path.string() + ": " + e.what());
      }
      set = bicluster_set_from_json(j);
      if (!(set.layout == DataLayout::of(data))) throw DataError(path.string() + " does not match the generated data");
    } else {
      ChainConfig c = config.chain;
      r.chain_seed = c.seed = r.data_seed + 1;
      c.variant = {method == Method::GFA ? ModelKind::GFA : ModelKind::FA_CONCAT, data.two_mode()};
      c.k_init = {static_cast<Eigen::Index>(truth.component_count()) + config.k_extra};
      set = extract_biclusters(run_chain(data, c), config.extract);
    }
    r.f1 = f1_cells(set, truth, config.resolved_scope());
    r.effective_K = set.total_effective_K();
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<GridRow> summarize(const std::vector<RunRecord>& runs) {
  std::map<std::pair<int, int>, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : runs) groups[{r.point, static_cast<int>(r.method)}].push_back(&r);
  std::vector<GridRow> rows;
  for (const auto& [key, members] : groups) {
    GridRow row;
    row.point = key.first;
    row.method = static_cast<Method>(key.second);
    row.value = members.front()->value;
    std::vector<double> f1;
    double seconds = 0.0;
    for (const RunRecord* r : members) {
      seconds += r->seconds;
      if (!r->ok) {
        ++row.n_failed;
        continue;
      }
      ++row.n_ok;
      f1.push_back(r->f1);
    }
    if (!f1.empty()) {
      row.mean_f1 = std::accumulate(f1.begin(), f1.end(), 0.0) / static_cast<double>(f1.size());
      row.std_f1 = sample_sd(f1);
      row.se_f1 = row.std_f1 / std::sqrt(static_cast<double>(f1.size()));
    }
    row.mean_seconds = seconds / static_cast<double>(members.size());
    rows.push_back(row);
  }
  return rows;
}

GridResult run_experiment_grid(const GridConfig& config, const std::function<void(const RunRecord&)>& on_run) {
  config.validate();
  struct Task {
    int point, rep;
    Method method;
  };
  std::vector<Task> tasks;
  const int n_points = static_cast<int>(config.resolved_values().size());
  for (int p = 0; p < n_points; ++p) {
    for (int r = 0; r < config.reps; ++r) {
      for (Method m : config.methods) tasks.push_back({p, r, m});
    }
  }
  GridResult result;
  result.config = config;
  result.runs.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      result.runs[i] = run_single(config, tasks[i].point, tasks[i].rep, tasks[i].method);
      if (on_run) {
        std::lock_guard lock(mutex);
        on_run(result.runs[i]);
      }
    }
  };
  const int n_threads = std::min<int>(config.threads, static_cast<int>(tasks.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  result.rows = summarize(result.runs);
  return result;
}

void write_grid_tsv(const GridResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  const std::string parameter = grid_parameter(result.config.base.experiment);
  out << "point\tparameter\tvalue\tmethod\tn_ok\tn_failed\tmean_f1\tstd_f1\tse_f1\tmean_seconds\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  for (const GridRow& row : result.rows) {
    out << row.point << '\t' << parameter << '\t' << num(row.value) << '\t' << to_string(row.method) << '\t'
        << row.n_ok << '\t' << row.n_failed << '\t' << num(row.mean_f1) << '\t' << num(row.std_f1) << '\t'
        << num(row.se_f1) << '\t' << num(row.mean_seconds) << '\n';
  }
}

json to_json(const RunRecord& r) {
  json j = {{"point", r.point},           {"value", r.value},       {"rep", r.rep},
            {"method", to_string(r.method)}, {"data_seed", r.data_seed}, {"chain_seed", r.chain_seed},
            {"ok", r.ok},                 {"f1", r.f1},             {"effective_K", r.effective_K},
            {"true_K", r.true_K},         {"seconds", r.seconds}};
  if (!r.ok) j["error"] = r.error;
  return j;
}

json to_json(const GridResult& result) {
  const GridConfig& c = result.config;
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.push_back(to_string(m));
  json runs = json::array();
  for (const RunRecord& r : result.runs) runs.push_back(to_json(r));
  json rows = json::array();
  for (const GridRow& row : result.rows) {
    rows.push_back({{"point", row.point},
                    {"value", row.value},
                    {"method", to_string(row.method)},
                    {"n_ok", row.n_ok},
                    {"n_failed", row.n_failed},
                    {"mean_f1", row.mean_f1},
                    {"std_f1", row.std_f1},
                    {"se_f1", row.se_f1},
                    {"mean_seconds", row.mean_seconds}});
  }
  return {{"config",
           {{"base", to_json(c.base)},
            {"parameter", grid_parameter(c.base.experiment)},
            {"values", c.resolved_values()},
            {"reps", c.reps},
            {"methods", methods},
            {"chain", to_json(c.chain)},
            {"k_extra", c.k_extra},
            {"scope", to_string(c.resolved_scope())},
            {"majority", c.extract.majority},
            {"min_sample_members", c.extract.min_sample_members},
            {"base_seed", c.base_seed},
            {"threads", c.threads},
            {"external_dir", c.external_dir.string()}}},
          {"rows", rows},
          {"runs", runs}};
}

}  // namespace gfa
