#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gfa/common.hpp"
#include "gfa/data.hpp"
#include "gfa/model.hpp"
#include "gfa/rng.hpp"

namespace gfa {

/// Full conditional of one (h, value) pair under a spike-and-slab prior.
/// `mean` and `variance` describe the slab branch.
struct SpikeSlabConditional {
  double log_odds = 0.0;
  double inclusion_probability = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;
  double mean() const { return shape / rate; }
  double variance() const { return shape / (rate * rate); }
};

struct BetaParams {
  double a = 1.0;
  double b = 1.0;
  double mean() const { return a / (a + b); }
  double variance() const { return a * b / ((a + b) * (a + b) * (a + b + 1.0)); }
};

/// Collapses the Gaussian likelihood of one scalar (precision contribution
/// `lik_precision` = sum tau x^2, linear term `lik_linear` = sum tau x r)
/// against a slab N(0, 1/alpha) and a point mass at zero with prior weight
/// pi for the slab.
SpikeSlabConditional spike_slab_conditional(double lik_precision, double lik_linear, double alpha, double pi);

/// Numerically stable logistic function.
double logistic(double x);

/// Single-chain Gibbs sampler. Holds the model view of the data (views
/// concatenated for FA_CONCAT), the latent state, and a residual cache
/// Y - E[Y] that is zero on every missing cell.
class GibbsSampler {
public:
  GibbsSampler(const DataCollection& data, ModelState state, HyperParams hyper, Rng rng);
  GibbsSampler(const DataCollection& data, ModelState state, HyperParams hyper, std::uint64_t seed)
      : GibbsSampler(data, std::move(state), std::move(hyper), Rng(seed)) {}

  const ModelState& state() const { return state_; }
  const DataCollection& data() const { return data_; }
  const DataLayout& layout() const { return layout_; }
  const HyperParams& hyper() const { return hyper_; }
  Rng& rng() { return rng_; }

  void set_state(ModelState state);
  /// Replaces observed values (same shapes and masks), e.g. for
  /// successive-conditional validation.
  void set_values(const std::vector<Matrix>& values);

  /// One full pass: per mode, factors, then per block loadings, alpha, pi and
  /// the block view's tau, then the factor-side alpha and pi.
  void sweep();
  long sweeps() const { return sweeps_; }

  void update_factors(std::size_t mode);
  void update_loadings(std::size_t mode, std::size_t block);
  void update_alpha(std::size_t mode, std::size_t block);
  void update_pi(std::size_t mode, std::size_t block);
  void update_alpha_x(std::size_t mode);
  void update_pi_x(std::size_t mode);
  void update_tau(std::size_t view);

  // Exact full conditionals at the current state; the update functions draw
  // from exactly these.
  SpikeSlabConditional loading_conditional(std::size_t mode, std::size_t block, Eigen::Index feature,
                                           Eigen::Index component) const;
  SpikeSlabConditional factor_conditional(std::size_t mode, Eigen::Index sample, Eigen::Index component) const;
  GammaParams alpha_conditional(std::size_t mode, std::size_t block, Eigen::Index component) const;
  BetaParams pi_conditional(std::size_t mode, std::size_t block, Eigen::Index component) const;
  GammaParams alpha_x_conditional(std::size_t mode, Eigen::Index component) const;
  BetaParams pi_x_conditional(std::size_t mode, Eigen::Index component) const;
  /// `feature` selects the column for per-feature precisions and is ignored
  /// otherwise.
  GammaParams tau_conditional(std::size_t view, Eigen::Index feature = 0) const;

  /// Recomputes the residual cache from scratch.
  void refresh_residuals();
  const Matrix& residual(std::size_t view) const { return residual_[view]; }

private:
  double tau_at(std::size_t view, Eigen::Index col) const;
  void check_precisions(std::size_t mode) const;

  DataCollection data_;
  DataLayout layout_;
  ModelState state_;
  HyperParams hyper_;
  Rng rng_;
  std::vector<Matrix> residual_;
  std::vector<Matrix> observed_;  // 1 on observed cells, 0 on missing
  std::vector<bool> has_missing_;
  long sweeps_ = 0;
};

struct ChainConfig {
  std::vector<Eigen::Index> k_init{9};  // per mode; one entry is broadcast
  long burn_in = 2000;
  long thinning = 20;
  long n_samples = 101;
  std::uint64_t seed = 1;
  ModelVariant variant;
  HyperParams hyper;
  std::optional<double> snr;  // when set, replaces the noise prior per view

  void validate() const;
  long total_sweeps() const { return burn_in + thinning * n_samples; }
};

/// Thinned post-burn-in snapshots of one chain. `layout` is the original
/// (unconcatenated) data layout; `config.hyper` holds the resolved priors.
struct PosteriorStore {
  int chain_id = 0;
  ChainConfig config;
  DataLayout layout;
  std::vector<ModelState> snapshots;
  long sweeps = 0;

  DataLayout model_layout() const { return gfa::model_layout(layout, config.variant); }
};

using ProgressCallback = std::function<void(long sweep, long total)>;

PosteriorStore run_chain(const DataCollection& data, const ChainConfig& config, int chain_id = 0,
                         const ProgressCallback& progress = {});

/// Draws Y from the likelihood given `state` for a model layout. No cells
/// are missing in the result.
DataCollection sample_observations(const ModelState& state, const DataLayout& layout, Rng& rng);

/// Top-down draw of all parameters from their priors followed by data from
/// the likelihood. `layout` is the model layout.
std::pair<ModelState, DataCollection> ancestral_sample(const DataLayout& layout,
                                                       const std::vector<Eigen::Index>& K,
                                                       const HyperParams& hyper, Rng& rng,
                                                       const ModelVariant& variant = {});

struct PredictedCell {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double value = 0.0;
};

struct ViewPrediction {
  std::string name;
  Matrix mean;  // posterior-mean reconstruction of the whole view
  std::vector<PredictedCell> cells;  // restricted to missing cells
};

/// Posterior-mean reconstruction averaged over snapshots, reported on the
/// original views and restricted to their missing cells.
std::vector<ViewPrediction> predict_missing(const PosteriorStore& store, const DataCollection& data);
ViewPrediction predict_missing(const PosteriorStore& store, const DataCollection& data, const std::string& view);

}  // namespace gfa
