#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfa/common.hpp"
#include "gfa/data.hpp"
#include "gfa/sampler.hpp"

namespace gfa {

/// Cells of one data view assigned to one component. Rows and columns refer
/// to the stored view matrix, so for the doubly-paired view in mode 2 the
/// "samples" are mode-1 samples as well.
struct Bicluster {
  int mode = 1;
  Eigen::Index component = 0;
  std::size_t view = 0;
  std::string view_name;
  BoolMatrix cells;
  std::vector<Eigen::Index> sample_members;
  std::vector<Eigen::Index> feature_members;
  Matrix intensity;  // posterior mean of x w^T on sample_members x feature_members

  bool empty() const { return sample_members.empty(); }
};

struct BiclusterSet {
  DataLayout layout;  // original views
  std::vector<Bicluster> biclusters;
  std::vector<Eigen::Index> effective_K;  // per mode

  Eigen::Index total_effective_K() const;
  /// Per view: cells assigned to any bicluster.
  std::vector<BoolMatrix> union_cells() const;
};

struct ExtractOptions {
  double majority = 0.5;  // a cell is assigned when strictly more than this fraction votes for it
  Eigen::Index min_sample_members = 0;
};

/// Majority vote over snapshots: cell (i, j) of a view joins component k when
/// x_ik * w_jk is nonzero in strictly more than `majority` of the snapshots.
/// FA_CONCAT stores are reported on the original (split) views.
BiclusterSet extract_biclusters(const PosteriorStore& store, const ExtractOptions& options = {});

struct MatchMember {
  int chain = 0;
  Eigen::Index component = 0;
  double similarity = 1.0;  // |cos| against the group's reference component
  bool flipped = false;     // sign flipped relative to the reference
};

struct ComponentGroup {
  int mode = 1;
  std::vector<MatchMember> members;
  int chains_present = 0;
  bool robust = false;
  Vector consensus_x;
  std::vector<Vector> consensus_w;  // one per loading block of the mode
};

struct ChainSimilarity {
  int chain = 0;
  int mode = 1;
  std::vector<Eigen::Index> reference_components;
  std::vector<Eigen::Index> chain_components;
  Matrix values;  // |cos|, reference components x chain components
};

struct MatchOptions {
  double threshold = 0.80;
  double min_chains_fraction = 0.5;
  ExtractOptions extract;
};

struct RobustComponentReport {
  MatchOptions options;
  int n_chains = 0;
  std::vector<ComponentGroup> groups;
  std::vector<ChainSimilarity> similarities;
  // Per chain and mode-major component index: fraction of snapshots whose
  // |cos| to the chain's posterior-mean component is below 0.5.
  std::vector<std::vector<double>> instability;
  std::vector<Eigen::Index> effective_K;  // per chain, summed over modes

  Eigen::Index robust_count() const;
};

/// Greedy one-to-one matching of every chain against chain 0 by absolute
/// cosine similarity of the concatenated posterior-mean (x, w) vectors.
RobustComponentReport match_chains(const std::vector<PosteriorStore>& stores, const MatchOptions& options = {});

struct EffectiveKReport {
  std::vector<Eigen::Index> per_chain;
  std::vector<std::vector<Eigen::Index>> per_chain_mode;
  Eigen::Index consensus = 0;
};

/// Effective K per chain and the number of robust groups (for a single
/// chain, its own effective K).
EffectiveKReport report_effective_K(const std::vector<PosteriorStore>& stores, const MatchOptions& options = {});

nlohmann::json to_json(const BiclusterSet& set, const std::string& intensity_prefix = "");
BiclusterSet bicluster_set_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RobustComponentReport& report);

/// JSON plus one intensity matrix file per nonempty bicluster.
void write_bicluster_set(const BiclusterSet& set, const std::filesystem::path& dir, const std::string& stem);
void write_robust_report(const RobustComponentReport& report, const std::filesystem::path& dir);

}  // namespace gfa
