#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gfa/common.hpp"
#include "gfa/data.hpp"

namespace gfa {

enum class Experiment { BlockFig1, A, B, C, D, E, F };

Experiment parse_experiment(const std::string& name);  // "fig1", "a" .. "f"
std::string to_string(Experiment e);

struct VarianceSetting {
  double bicluster = 1.0;
  double noise = 1.0;
};

/// Variances of the four auxiliary views in the heterogeneous setting,
/// cycled when there are more than four.
inline const std::vector<VarianceSetting> kHeterogeneousVariances = {{0.2, 0.2}, {5.0, 5.0}, {0.2, 5.0}, {5.0, 0.2}};

/// Synthetic single-mode experiment. View 0 is the view of interest.
///   A  homogeneous views, all (1, 1)
///   B  view of interest (1, 1), auxiliary views heterogeneous
///   C  B with the bicluster absent from every third view and dense over the
///      features of the views it is present in
///   D  B with view-specific dense rank-1 noise components in the auxiliary views
///   E  B with K_true partly overlapping biclusters
///   F  auxiliary-view loadings drawn with precision alpha_strength, unit noise
struct SimulationSpec {
  Experiment experiment = Experiment::B;
  int M = 5;
  Eigen::Index N = 50;
  std::vector<Eigen::Index> D;  // per view; empty means 100 each
  int K_true = 1;
  double activity = 0.7;
  std::vector<VarianceSetting> variances;  // per view; empty means the experiment default
  int n_noise_components = 0;
  double alpha_strength = 1.0;
  std::uint64_t seed = 1;

  static SimulationSpec defaults(Experiment e);
  void validate() const;
  std::vector<Eigen::Index> view_dims() const;
  std::vector<VarianceSetting> resolved_variances() const;
  /// Whether the planted biclusters are present in view `m`.
  bool bicluster_in_view(int m) const;
};

struct PlantedBicluster {
  int mode = 1;
  std::vector<Eigen::Index> samples;                // rows of the mode's factor matrix
  std::vector<std::vector<Eigen::Index>> features;  // per data view; empty where absent
};

struct PlantedLoading {
  int mode = 1;
  std::size_t view = 0;
  bool transposed = false;
  Matrix W;
};

struct GroundTruth {
  std::vector<PlantedBicluster> biclusters;
  std::vector<Matrix> X;                 // per mode
  std::vector<PlantedLoading> loadings;  // per (mode, view) block
  std::vector<BoolMatrix> cells;         // per data view: union of bicluster supports
  std::vector<Matrix> signal;            // per data view: everything except Gaussian noise
  int n_noise_components = 0;

  std::size_t component_count() const { return biclusters.size() + static_cast<std::size_t>(n_noise_components); }
};

std::pair<DataCollection, GroundTruth> generate(const SimulationSpec& spec);

/// Two-mode block design: views 200x100, 200x50, 200x60 in mode 1 and a
/// 100x70 mode-2 view paired with the features of the first, with four
/// non-overlapping biclusters and unit-variance noise.
std::pair<DataCollection, GroundTruth> generate_block_fig1(std::uint64_t seed);

/// Cell sets induced by the planted supports; equals `truth.cells`.
std::vector<BoolMatrix> truth_cells(const GroundTruth& truth, const DataLayout& layout);

nlohmann::json to_json(const SimulationSpec& spec);
SimulationSpec simulation_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GroundTruth& truth, const DataLayout& layout);
/// Rebuilds supports and cell sets from JSON (planted matrices are optional).
GroundTruth ground_truth_from_json(const nlohmann::json& j, DataLayout& layout);

}  // namespace gfa
