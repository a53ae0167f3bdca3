#include "gfa/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace gfa {

namespace {

// Residuals are rebuilt from scratch this often to stop rank-1 update drift.
constexpr long kResidualRefreshInterval = 100;

double clamp_pi(double p) { return std::clamp(p, kPiFloor, 1.0 - kPiFloor); }

double log_odds_prior(double pi) {
  const double p = clamp_pi(pi);
  return std::log(p) - std::log1p(-p);
}

}  // namespace

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

SpikeSlabConditional spike_slab_conditional(double lik_precision, double lik_linear, double alpha, double pi) {
  SpikeSlabConditional c;
  const double precision = alpha + lik_precision;
  c.mean = lik_linear / precision;
  c.variance = 1.0 / precision;
  // log Bayes factor of slab against spike, integrating the value out.
  c.log_odds = log_odds_prior(pi) + 0.5 * (std::log(alpha) - std::log(precision)) +
               0.5 * lik_linear * lik_linear / precision;
  c.inclusion_probability = logistic(c.log_odds);
  return c;
}

GibbsSampler::GibbsSampler(const DataCollection& data, ModelState state, HyperParams hyper, Rng rng)
    : data_(model_data(data, state.variant)),
      layout_(DataLayout::of(data_)),
      state_(std::move(state)),
      hyper_(std::move(hyper)),
      rng_(std::move(rng)) {
  hyper_.validate();
  check_invariants(state_, layout_);
  for (const View& view : data_.views) {
    observed_.push_back((!view.missing).cast<double>().matrix());
    has_missing_.push_back(view.missing.any());
  }
  refresh_residuals();
}

void GibbsSampler::set_state(ModelState state) {
  check_invariants(state, layout_);
  state_ = std::move(state);
  refresh_residuals();
}

void GibbsSampler::set_values(const std::vector<Matrix>& values) {
  if (values.size() != data_.views.size()) throw ConfigError("value count does not match the views");
  for (std::size_t v = 0; v < values.size(); ++v) {
    if (values[v].rows() != data_.views[v].rows() || values[v].cols() != data_.views[v].cols()) {
      throw ConfigError("replacement values have the wrong shape");
    }
    data_.views[v].values = values[v];
  }
  refresh_residuals();
}

void GibbsSampler::refresh_residuals() {
  residual_.resize(data_.views.size());
  for (std::size_t v = 0; v < data_.views.size(); ++v) {
    const View& view = data_.views[v];
    const Matrix mean = view_mean(state_, v, layout_);
    residual_[v] = view.missing.select(Matrix::Zero(view.rows(), view.cols()), view.values - mean);
  }
}

double GibbsSampler::tau_at(std::size_t view, Eigen::Index col) const {
  const Vector& tau = state_.tau[view];
  return tau.size() == 1 ? tau[0] : tau[col];
}

void GibbsSampler::check_precisions(std::size_t mode) const {
  const ModeState& m = state_.modes.at(mode);
  if ((m.alpha.array() <= 0.0).any()) throw InvariantError("non-positive factor precision alpha_x");
  for (const LoadingBlock& block : m.blocks) {
    if ((block.alpha.array() <= 0.0).any()) throw InvariantError("non-positive loading precision alpha");
    if ((state_.tau[block.view].array() <= 0.0).any()) throw InvariantError("non-positive noise precision tau");
  }
}

SpikeSlabConditional GibbsSampler::loading_conditional(std::size_t mode, std::size_t block, Eigen::Index d,
                                                       Eigen::Index k) const {
  const ModeState& m = state_.modes.at(mode);
  const LoadingBlock& b = m.blocks.at(block);
  const Matrix& E = residual_[b.view];
  const Matrix& O = observed_[b.view];
  const auto x = m.X.col(k);
  double s2, xe;
  double tau;
  if (b.transposed) {
    s2 = has_missing_[b.view] ? (x.array().square() * O.row(d).transpose().array()).sum() : x.squaredNorm();
    xe = x.dot(E.row(d).transpose());
    tau = tau_at(b.view, 0);
  } else {
    s2 = has_missing_[b.view] ? (x.array().square() * O.col(d).array()).sum() : x.squaredNorm();
    xe = x.dot(E.col(d));
    tau = tau_at(b.view, d);
  }
  const double w_old = b.W(d, k);
  return spike_slab_conditional(tau * s2, tau * (xe + w_old * s2), b.alpha[k], b.pi[k]);
}

SpikeSlabConditional GibbsSampler::factor_conditional(std::size_t mode, Eigen::Index n, Eigen::Index k) const {
  const ModeState& m = state_.modes.at(mode);
  double s2 = 0.0, xe = 0.0;
  for (const LoadingBlock& b : m.blocks) {
    const Matrix& E = residual_[b.view];
    const Matrix& O = observed_[b.view];
    const auto w = b.W.col(k);
    const Vector& tau = state_.tau[b.view];
    if (b.transposed) {
      const double t = tau_at(b.view, n);
      s2 += t * (has_missing_[b.view] ? (w.array().square() * O.col(n).array()).sum() : w.squaredNorm());
      xe += t * w.dot(E.col(n));
    } else if (tau.size() == 1) {
      const double t = tau[0];
      s2 += t * (has_missing_[b.view] ? (w.array().square() * O.row(n).transpose().array()).sum()
                                      : w.squaredNorm());
      xe += t * w.dot(E.row(n).transpose());
    } else {
      s2 += (w.array().square() * tau.array() * O.row(n).transpose().array()).sum();
      xe += (w.array() * tau.array() * E.row(n).transpose().array()).sum();
    }
  }
  const double x_old = m.X(n, k);
  return spike_slab_conditional(s2, xe + x_old * s2, m.alpha[k], m.pi[k]);
}

void GibbsSampler::update_loadings(std::size_t mode, std::size_t block) {
  check_precisions(mode);
  ModeState& m = state_.modes.at(mode);
  LoadingBlock& b = m.blocks.at(block);
  Matrix& E = residual_[b.view];
  const Matrix& O = observed_[b.view];
  const bool masked = has_missing_[b.view];
  for (Eigen::Index d = 0; d < b.W.rows(); ++d) {
    for (Eigen::Index k = 0; k < m.K(); ++k) {
      const SpikeSlabConditional c = loading_conditional(mode, block, d, k);
      const bool on = rng_.uniform() < c.inclusion_probability;
      const double w_new = on ? c.mean + std::sqrt(c.variance) * rng_.normal() : 0.0;
      const double delta = w_new - b.W(d, k);
      b.W(d, k) = w_new;
      b.H(d, k) = on ? 1 : 0;
      if (delta == 0.0) continue;
      const auto x = m.X.col(k);
      if (b.transposed) {
        if (masked) {
          E.row(d).array() -= delta * x.transpose().array() * O.row(d).array();
        } else {
          E.row(d).noalias() -= delta * x.transpose();
        }
      } else {
        if (masked) {
          E.col(d).array() -= delta * x.array() * O.col(d).array();
        } else {
          E.col(d).noalias() -= delta * x;
        }
      }
    }
  }
}

void GibbsSampler::update_factors(std::size_t mode) {
  check_precisions(mode);
  ModeState& m = state_.modes.at(mode);
  for (Eigen::Index n = 0; n < m.X.rows(); ++n) {
    for (Eigen::Index k = 0; k < m.K(); ++k) {
      const SpikeSlabConditional c = factor_conditional(mode, n, k);
      const bool on = rng_.uniform() < c.inclusion_probability;
      const double x_new = on ? c.mean + std::sqrt(c.variance) * rng_.normal() : 0.0;
      const double delta = x_new - m.X(n, k);
      m.X(n, k) = x_new;
      m.H(n, k) = on ? 1 : 0;
      if (delta == 0.0) continue;
      for (const LoadingBlock& b : m.blocks) {
        Matrix& E = residual_[b.view];
        const Matrix& O = observed_[b.view];
        const auto w = b.W.col(k);
        if (b.transposed) {
          if (has_missing_[b.view]) {
            E.col(n).array() -= delta * w.array() * O.col(n).array();
          } else {
            E.col(n).noalias() -= delta * w;
          }
        } else {
          if (has_missing_[b.view]) {
            E.row(n).array() -= delta * w.transpose().array() * O.row(n).array();
          } else {
            E.row(n).noalias() -= delta * w.transpose();
          }
        }
      }
    }
  }
}

GammaParams GibbsSampler::alpha_conditional(std::size_t mode, std::size_t block, Eigen::Index k) const {
  const LoadingBlock& b = state_.modes.at(mode).blocks.at(block);
  const double active = static_cast<double>(b.H.col(k).cast<int>().sum());
  return {hyper_.a_alpha + 0.5 * active, hyper_.b_alpha + 0.5 * b.W.col(k).squaredNorm()};
}

BetaParams GibbsSampler::pi_conditional(std::size_t mode, std::size_t block, Eigen::Index k) const {
  const LoadingBlock& b = state_.modes.at(mode).blocks.at(block);
  const double on = static_cast<double>(b.H.col(k).cast<int>().sum());
  const double n = static_cast<double>(b.H.rows());
  return {hyper_.a_pi + on, hyper_.b_pi + n - on};
}

GammaParams GibbsSampler::alpha_x_conditional(std::size_t mode, Eigen::Index k) const {
  const ModeState& m = state_.modes.at(mode);
  const double active = static_cast<double>(m.H.col(k).cast<int>().sum());
  return {hyper_.a_alpha + 0.5 * active, hyper_.b_alpha + 0.5 * m.X.col(k).squaredNorm()};
}

BetaParams GibbsSampler::pi_x_conditional(std::size_t mode, Eigen::Index k) const {
  const ModeState& m = state_.modes.at(mode);
  const double on = static_cast<double>(m.H.col(k).cast<int>().sum());
  const double n = static_cast<double>(m.H.rows());
  return {hyper_.a_pi + on, hyper_.b_pi + n - on};
}

GammaParams GibbsSampler::tau_conditional(std::size_t view, Eigen::Index feature) const {
  const GammaPrior prior = hyper_.tau_prior(view);
  const Matrix& E = residual_.at(view);
  const Matrix& O = observed_[view];
  if (state_.tau[view].size() == 1) {
    return {prior.shape + 0.5 * O.sum(), prior.rate + 0.5 * E.squaredNorm()};
  }
  return {prior.shape + 0.5 * O.col(feature).sum(), prior.rate + 0.5 * E.col(feature).squaredNorm()};
}

void GibbsSampler::update_alpha(std::size_t mode, std::size_t block) {
  LoadingBlock& b = state_.modes.at(mode).blocks.at(block);
  for (Eigen::Index k = 0; k < b.alpha.size(); ++k) {
    const GammaParams g = alpha_conditional(mode, block, k);
    b.alpha[k] = rng_.gamma(g.shape, g.rate);
  }
}

void GibbsSampler::update_pi(std::size_t mode, std::size_t block) {
  LoadingBlock& b = state_.modes.at(mode).blocks.at(block);
  for (Eigen::Index k = 0; k < b.pi.size(); ++k) {
    const BetaParams p = pi_conditional(mode, block, k);
    b.pi[k] = clamp_pi(rng_.beta(p.a, p.b));
  }
}

void GibbsSampler::update_alpha_x(std::size_t mode) {
  ModeState& m = state_.modes.at(mode);
  for (Eigen::Index k = 0; k < m.K(); ++k) {
    const GammaParams g = alpha_x_conditional(mode, k);
    m.alpha[k] = rng_.gamma(g.shape, g.rate);
  }
}

void GibbsSampler::update_pi_x(std::size_t mode) {
  ModeState& m = state_.modes.at(mode);
  for (Eigen::Index k = 0; k < m.K(); ++k) {
    const BetaParams p = pi_x_conditional(mode, k);
    m.pi[k] = clamp_pi(rng_.beta(p.a, p.b));
  }
}

void GibbsSampler::update_tau(std::size_t view) {
  Vector& tau = state_.tau.at(view);
  for (Eigen::Index d = 0; d < tau.size(); ++d) {
    const GammaParams g = tau_conditional(view, d);
    tau[d] = rng_.gamma(g.shape, g.rate);
  }
}

void GibbsSampler::sweep() {
  if (sweeps_ > 0 && sweeps_ % kResidualRefreshInterval == 0) refresh_residuals();
  for (std::size_t r = 0; r < state_.modes.size(); ++r) {
    update_factors(r);
    for (std::size_t b = 0; b < state_.modes[r].blocks.size(); ++b) {
      update_loadings(r, b);
      update_alpha(r, b);
      update_pi(r, b);
      update_tau(state_.modes[r].blocks[b].view);
    }
    update_alpha_x(r);
    update_pi_x(r);
  }
  ++sweeps_;
}

void ChainConfig::validate() const {
  if (k_init.empty()) throw ConfigError("number of components not given");
  for (Eigen::Index k : k_init) {
    if (k < 1) throw ConfigError("number of components must be at least 1");
  }
  if (burn_in < 0) throw ConfigError("burn-in must be non-negative");
  if (thinning < 1) throw ConfigError("thinning must be at least 1");
  if (n_samples < 1) throw ConfigError("at least one posterior sample is required");
  if (snr && !(*snr > 0.0)) throw ConfigError("snr must be positive");
  hyper.validate();
}

PosteriorStore run_chain(const DataCollection& data, const ChainConfig& config, int chain_id,
                         const ProgressCallback& progress) {
  config.validate();
  const DataCollection md = model_data(data, config.variant);
  PosteriorStore store;
  store.chain_id = chain_id;
  store.config = config;
  store.layout = DataLayout::of(data);
  if (config.snr) store.config.hyper = with_snr_prior(config.hyper, md, *config.snr);

  Rng rng(config.seed);
  ModelState initial = init_state(md, config.k_init, store.config.hyper, config.variant, rng);
  GibbsSampler sampler(md, std::move(initial), store.config.hyper, std::move(rng));

  const long total = config.total_sweeps();
  auto step = [&] {
    sampler.sweep();
    try {
      check_finite(sampler.state());
    } catch (const NumericalError& e) {
      throw NumericalError("chain " + std::to_string(chain_id) + " diverged at sweep " +
                           std::to_string(sampler.sweeps()) + ": " + e.what());
    }
    if (progress) progress(sampler.sweeps(), total);
  };
  for (long s = 0; s < config.burn_in; ++s) step();
  store.snapshots.reserve(static_cast<std::size_t>(config.n_samples));
  for (long i = 0; i < config.n_samples; ++i) {
    for (long t = 0; t < config.thinning; ++t) step();
    store.snapshots.push_back(sampler.state());
  }
  store.sweeps = sampler.sweeps();
  return store;
}

DataCollection sample_observations(const ModelState& state, const DataLayout& layout, Rng& rng) {
  DataCollection data;
  for (std::size_t v = 0; v < layout.views.size(); ++v) {
    const ViewShape& shape = layout.views[v];
    Matrix values = view_mean(state, v, layout);
    const Vector& tau = state.tau.at(v);
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const double sd = 1.0 / std::sqrt(tau.size() == 1 ? tau[0] : tau[j]);
      for (Eigen::Index i = 0; i < values.rows(); ++i) values(i, j) += sd * rng.normal();
    }
    View view;
    view.name = shape.name;
    view.mode = shape.mode;
    view.missing = BoolMatrix::Constant(values.rows(), values.cols(), false);
    view.values = std::move(values);
    data.views.push_back(std::move(view));
  }
  return data;
}

std::pair<ModelState, DataCollection> ancestral_sample(const DataLayout& layout,
                                                       const std::vector<Eigen::Index>& K,
                                                       const HyperParams& hyper, Rng& rng,
                                                       const ModelVariant& variant) {
  ModelState state = sample_prior_state(layout, K, hyper, variant, rng);
  DataCollection data = sample_observations(state, layout, rng);
  return {std::move(state), std::move(data)};
}

std::vector<ViewPrediction> predict_missing(const PosteriorStore& store, const DataCollection& data) {
  if (store.snapshots.empty()) throw ConfigError("posterior store is empty");
  data.validate();
  const DataLayout layout = DataLayout::of(data);
  if (!(layout == store.layout)) throw ConfigError("data layout does not match the posterior store");
  const DataLayout ml = store.model_layout();

  std::vector<Matrix> sums;
  for (const ViewShape& v : ml.views) sums.push_back(Matrix::Zero(v.rows, v.cols));
  for (const ModelState& snapshot : store.snapshots) {
    for (std::size_t v = 0; v < ml.views.size(); ++v) sums[v] += view_mean(snapshot, v, ml);
  }
  const double n = static_cast<double>(store.snapshots.size());
  for (Matrix& s : sums) s /= n;

  std::vector<Matrix> means;
  if (store.config.variant.kind == ModelKind::FA_CONCAT && layout.views.size() > 1) {
    const std::vector<Eigen::Index> offsets = concatenation_offsets(layout);
    for (std::size_t v = 0; v < layout.views.size(); ++v) {
      means.push_back(sums.front().middleCols(offsets[v], layout.views[v].cols));
    }
  } else {
    means = std::move(sums);
  }

  std::vector<ViewPrediction> out;
  for (std::size_t v = 0; v < data.views.size(); ++v) {
    ViewPrediction p;
    p.name = data.views[v].name;
    p.mean = std::move(means[v]);
    const BoolMatrix& missing = data.views[v].missing;
    for (Eigen::Index i = 0; i < missing.rows(); ++i) {
      for (Eigen::Index j = 0; j < missing.cols(); ++j) {
        if (missing(i, j)) p.cells.push_back({i, j, p.mean(i, j)});
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

ViewPrediction predict_missing(const PosteriorStore& store, const DataCollection& data, const std::string& view) {
  bool known = false;
  for (const ViewShape& v : store.layout.views) known = known || v.name == view;
  if (!known) throw LookupError("view '" + view + "' is not part of the model");
  std::vector<ViewPrediction> all = predict_missing(store, data);
  for (ViewPrediction& p : all) {
    if (p.name == view) return std::move(p);
  }
  throw LookupError("view '" + view + "' is not part of the data");
}

}  // namespace gfa
