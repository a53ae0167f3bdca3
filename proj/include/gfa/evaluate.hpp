#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfa/biclusters.hpp"
#include "gfa/common.hpp"
#include "gfa/sampler.hpp"
#include "gfa/simulate.hpp"

namespace gfa {

struct F1Counts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;

  /// 2TP / (2TP + FN + FP); 1 when both sides have no positive cells.
  double f1() const;
};

/// Counts over every cell of every view. Throws DataError on shape mismatch.
F1Counts f1_counts(const std::vector<BoolMatrix>& predicted, const std::vector<BoolMatrix>& truth);
double f1_cells(const std::vector<BoolMatrix>& predicted, const std::vector<BoolMatrix>& truth);
double f1_cells(const BiclusterSet& predicted, const GroundTruth& truth);

/// Which views enter the F1 count.
enum class ScoreScope { AllViews, ViewOfInterest };

std::string to_string(ScoreScope scope);
ScoreScope parse_score_scope(const std::string& name);  // "all" or "first"
double f1_cells(const BiclusterSet& predicted, const GroundTruth& truth, ScoreScope scope);

struct RegressionMetrics {
  long long n = 0;
  double rmse = 0.0;
  double pearson = 0.0;
  double spearman = 0.0;
  bool pearson_defined = false;  // false when either side is constant; the value is then 0
  bool spearman_defined = false;
};

RegressionMetrics regression_metrics(const std::vector<double>& predicted, const std::vector<double>& truth);
/// Restricted to cells where `mask` is true.
RegressionMetrics regression_metrics(const Matrix& predicted, const Matrix& truth, const BoolMatrix& mask);

/// 1-based ranks with ties replaced by their average rank.
std::vector<double> average_ranks(const std::vector<double>& values);

/// Disjoint folds covering 0..n-1 with sizes differing by at most one.
std::vector<std::vector<Eigen::Index>> cv_splits(Eigen::Index n, int folds, std::uint64_t seed);

enum class Method { GFA, FA_CONCAT, External };

std::string to_string(Method m);
Method parse_method(const std::string& name);  // "gfa", "fa" or "external"

/// Name of the parameter varied by an experiment grid ("M", "noise",
/// "K", "alpha", or "none" for the block design).
std::string grid_parameter(Experiment e);
std::vector<double> default_grid(Experiment e);
/// Spec for one grid point; the value replaces the grid parameter.
SimulationSpec grid_spec(const SimulationSpec& base, double value);

struct GridConfig {
  SimulationSpec base = SimulationSpec::defaults(Experiment::B);
  std::vector<double> values;  // empty means default_grid(base.experiment)
  int reps = 10;
  std::vector<Method> methods{Method::GFA, Method::FA_CONCAT};
  ChainConfig chain;               // k_init is replaced by truth size + k_extra
  Eigen::Index k_extra = 5;
  std::optional<ScoreScope> scope;  // default: all views for the block design, first view otherwise
  ExtractOptions extract;
  std::uint64_t base_seed = 1;
  int threads = 1;
  std::filesystem::path external_dir;  // point<p>_rep<r>.json bicluster sets

  void validate() const;
  ScoreScope resolved_scope() const;
  std::vector<double> resolved_values() const;
  std::uint64_t data_seed(int point, int rep) const;
};

struct RunRecord {
  int point = 0;
  double value = 0.0;
  int rep = 0;
  Method method = Method::GFA;
  std::uint64_t data_seed = 0;
  std::uint64_t chain_seed = 0;
  bool ok = false;
  std::string error;
  double f1 = 0.0;
  Eigen::Index effective_K = 0;
  Eigen::Index true_K = 0;
  double seconds = 0.0;
};

struct GridRow {
  int point = 0;
  double value = 0.0;
  Method method = Method::GFA;
  int n_ok = 0;
  int n_failed = 0;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;  // sample standard deviation over repetitions
  double se_f1 = 0.0;   // standard error of the mean
  double mean_seconds = 0.0;
};

struct GridResult {
  GridConfig config;
  std::vector<RunRecord> runs;
  std::vector<GridRow> rows;
};

/// Fits, extracts and scores one repetition for one method.
RunRecord run_single(const GridConfig& config, int point, int rep, Method method);

/// Failures at single runs are recorded and the grid continues.
GridResult run_experiment_grid(const GridConfig& config,
                               const std::function<void(const RunRecord&)>& on_run = {});

std::vector<GridRow> summarize(const std::vector<RunRecord>& runs);

void write_grid_tsv(const GridResult& result, const std::filesystem::path& path);
nlohmann::json to_json(const RunRecord& run);
nlohmann::json to_json(const GridResult& result);

}  // namespace gfa
