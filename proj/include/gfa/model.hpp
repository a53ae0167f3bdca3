#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gfa/common.hpp"
#include "gfa/data.hpp"
#include "gfa/rng.hpp"

namespace gfa {

struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

/// Beta prior on inclusion probabilities, Gamma priors (shape, rate) on slab
/// and noise precisions.
struct HyperParams {
  double a_pi = 1.0, b_pi = 1.0;
  double a_alpha = 1.0, b_alpha = 1.0;
  double a_tau = 1.0, b_tau = 1.0;
  // Optional per-view override of (a_tau, b_tau), indexed by model view.
  std::vector<GammaPrior> tau_per_view;

  void validate() const;
  GammaPrior tau_prior(std::size_t view) const;
};

/// Pseudo-observation count used by the SNR-informed noise prior.
inline constexpr double kSnrPseudoObservations = 10.0;

/// Sets a_tau = c and b_tau = c * snr * var(Y_view) for every view of
/// `model_data`, with the variance taken over observed cells.
HyperParams with_snr_prior(HyperParams hyper, const DataCollection& model_data, double snr);

enum class ModelKind { GFA, FA_CONCAT };

struct ModelVariant {
  ModelKind kind = ModelKind::GFA;
  bool two_mode = false;

  bool operator==(const ModelVariant&) const = default;
};

const char* to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

/// Loadings of one data view inside one mode. For the doubly-paired view in
/// mode 2 the view enters through its transpose: its mode-2 "samples" are the
/// columns of the stored matrix.
struct LoadingBlock {
  std::size_t view = 0;
  bool transposed = false;
  Matrix W;        // features x K
  BinaryMatrix H;  // inclusion indicators matching W
  Vector alpha;    // per-component slab precision
  Vector pi;       // per-component inclusion probability
};

struct ModeState {
  Matrix X;        // samples x K
  BinaryMatrix H;  // inclusion indicators matching X
  Vector alpha;
  Vector pi;
  std::vector<LoadingBlock> blocks;

  Eigen::Index K() const { return X.cols(); }
};

/// Full latent state of one chain. `tau[v]` holds one precision per model
/// view (GFA) or one per feature (FA_CONCAT).
struct ModelState {
  ModelVariant variant;
  std::vector<ModeState> modes;
  std::vector<Vector> tau;
};

bool operator==(const ModelState& a, const ModelState& b);

/// The data the model actually sees: the concatenated view for FA_CONCAT,
/// the collection itself otherwise.
DataCollection model_data(const DataCollection& data, const ModelVariant& variant);
DataLayout model_layout(const DataLayout& layout, const ModelVariant& variant);

/// State with the right shapes for `layout` (model layout) and all latent
/// values zeroed; alpha = tau = 1, pi = 1/2.
ModelState empty_state(const DataLayout& layout, const ModelVariant& variant,
                       const std::vector<Eigen::Index>& K);

/// Draws every parameter from its prior; X and W are exact zeros wherever
/// the inclusion indicator is zero. `K` has one entry per mode (a single
/// entry is broadcast).
ModelState init_state(const DataCollection& data, const std::vector<Eigen::Index>& K,
                      const HyperParams& hyper, const ModelVariant& variant, std::uint64_t seed);
ModelState init_state(const DataCollection& data, const std::vector<Eigen::Index>& K,
                      const HyperParams& hyper, const ModelVariant& variant, Rng& rng);

/// Draws all latent variables from the prior for a given model layout.
ModelState sample_prior_state(const DataLayout& layout, const std::vector<Eigen::Index>& K,
                              const HyperParams& hyper, const ModelVariant& variant, Rng& rng);

/// Posterior-predictive mean of model view `view`.
Matrix view_mean(const ModelState& state, std::size_t view, const DataLayout& layout);

/// Gaussian log-likelihood of the observed cells only.
double log_likelihood(const ModelState& state, const DataCollection& data);

/// log p(Y_observed, state | hyper).
double log_joint(const ModelState& state, const DataCollection& data, const HyperParams& hyper);

/// Throws InvariantError if spike consistency, parameter ranges or shapes
/// against `layout` (model layout) are violated.
void check_invariants(const ModelState& state, const DataLayout& layout);

/// Throws NumericalError naming the first non-finite latent value.
void check_finite(const ModelState& state);

/// Clamp bound applied to pi inside log computations.
inline constexpr double kPiFloor = 1e-12;

}  // namespace gfa
