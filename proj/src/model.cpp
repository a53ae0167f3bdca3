#include "gfa/model.hpp"

#include <algorithm>
#include <cmath>

namespace gfa {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

struct BlockShape {
  std::size_t view;
  bool transposed;
  Eigen::Index features;
};

struct ModeShape {
  Eigen::Index samples;
  std::vector<BlockShape> blocks;
};

void check_variant(const DataLayout& layout, const ModelVariant& variant) {
  if (layout.views.empty()) throw ConfigError("data collection has no views");
  if (variant.kind == ModelKind::FA_CONCAT && variant.two_mode) {
    throw ConfigError("the FA_CONCAT variant does not support two-mode data");
  }
  if (variant.two_mode != layout.two_mode()) {
    throw ConfigError(variant.two_mode ? "two-mode variant requested but the data has no mode-2 views"
                                       : "data has mode-2 views but the variant is single-mode");
  }
  if (variant.kind == ModelKind::FA_CONCAT && layout.views.size() != 1) {
    throw ConfigError("FA_CONCAT expects the concatenated single-view layout");
  }
}

std::vector<ModeShape> mode_shapes(const DataLayout& layout, const ModelVariant& variant) {
  check_variant(layout, variant);
  const ViewShape& first = layout.views.front();
  std::vector<ModeShape> shapes(variant.two_mode ? 2 : 1);
  shapes[0].samples = first.rows;
  for (std::size_t v = 0; v < layout.views.size(); ++v) {
    if (layout.views[v].mode == 1) shapes[0].blocks.push_back({v, false, layout.views[v].cols});
  }
  if (variant.two_mode) {
    shapes[1].samples = first.cols;
    shapes[1].blocks.push_back({0, true, first.rows});
    for (std::size_t v = 0; v < layout.views.size(); ++v) {
      if (layout.views[v].mode == 2) shapes[1].blocks.push_back({v, false, layout.views[v].cols});
    }
  }
  return shapes;
}

std::vector<Eigen::Index> broadcast_k(const std::vector<Eigen::Index>& K, std::size_t n_modes) {
  if (K.empty()) throw ConfigError("number of components not given");
  if (K.size() != 1 && K.size() != n_modes) {
    throw ConfigError("expected " + std::to_string(n_modes) + " component counts, got " +
                      std::to_string(K.size()));
  }
  std::vector<Eigen::Index> out(n_modes, K.front());
  if (K.size() == n_modes) out = K;
  for (Eigen::Index k : out) {
    if (k < 1) throw ConfigError("number of components must be at least 1");
  }
  return out;
}

double clamp_pi(double p) { return std::clamp(p, kPiFloor, 1.0 - kPiFloor); }

double log_gamma_density(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_beta_density(double p, double a, double b) {
  const double q = clamp_pi(p);
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(q) +
         (b - 1.0) * std::log1p(-q);
}

// Spike-and-slab prior of one matrix given its indicators.
double log_spike_slab(const Matrix& values, const BinaryMatrix& H, const Vector& alpha,
                      const Vector& pi, const char* what) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < values.cols(); ++k) {
    const double log_on = std::log(clamp_pi(pi[k]));
    const double log_off = std::log1p(-clamp_pi(pi[k]));
    const double slab_const = 0.5 * std::log(alpha[k]) - 0.5 * kLog2Pi;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      const double v = values(i, k);
      if (H(i, k)) {
        total += log_on + slab_const - 0.5 * alpha[k] * v * v;
      } else {
        if (v != 0.0) {
          throw InvariantError(std::string(what) + " entry (" + std::to_string(i) + ", " +
                               std::to_string(k) + ") is nonzero with inclusion indicator 0");
        }
        total += log_off;
      }
    }
  }
  return total;
}

const DataCollection& resolve(const DataCollection& data, const ModelVariant& variant,
                              DataCollection& scratch) {
  if (variant.kind == ModelKind::FA_CONCAT && data.views.size() > 1) {
    scratch = concatenate_views(data);
    return scratch;
  }
  return data;
}

void fill_from_prior(ModelState& state, const HyperParams& hyper, Rng& rng) {
  auto draw_block = [&](Matrix& values, BinaryMatrix& H, Vector& alpha, Vector& pi) {
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
      alpha[k] = rng.gamma(hyper.a_alpha, hyper.b_alpha);
      pi[k] = clamp_pi(rng.beta(hyper.a_pi, hyper.b_pi));
      const double sd = 1.0 / std::sqrt(alpha[k]);
      for (Eigen::Index i = 0; i < values.rows(); ++i) {
        const bool on = rng.bernoulli(pi[k]);
        H(i, k) = on ? 1 : 0;
        values(i, k) = on ? rng.normal(0.0, sd) : 0.0;
      }
    }
  };
  for (ModeState& mode : state.modes) {
    draw_block(mode.X, mode.H, mode.alpha, mode.pi);
    for (LoadingBlock& block : mode.blocks) draw_block(block.W, block.H, block.alpha, block.pi);
  }
  for (std::size_t v = 0; v < state.tau.size(); ++v) {
    const GammaPrior prior = hyper.tau_prior(v);
    for (Eigen::Index d = 0; d < state.tau[v].size(); ++d) state.tau[v][d] = rng.gamma(prior.shape, prior.rate);
  }
}

}  // namespace

void HyperParams::validate() const {
  const double values[] = {a_pi, b_pi, a_alpha, b_alpha, a_tau, b_tau};
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("hyperparameters must be positive and finite");
  }
  for (const GammaPrior& p : tau_per_view) {
    if (!(p.shape > 0.0) || !(p.rate > 0.0) || !std::isfinite(p.shape) || !std::isfinite(p.rate)) {
      throw ConfigError("per-view noise prior must be positive and finite");
    }
  }
}

GammaPrior HyperParams::tau_prior(std::size_t view) const {
  if (view < tau_per_view.size()) return tau_per_view[view];
  return {a_tau, b_tau};
}

HyperParams with_snr_prior(HyperParams hyper, const DataCollection& model_data, double snr) {
  if (!(snr > 0.0)) throw ConfigError("snr must be positive");
  hyper.tau_per_view.clear();
  for (const View& view : model_data.views) {
    double sum = 0.0, sum_sq = 0.0;
    Eigen::Index n = 0;
    for (Eigen::Index j = 0; j < view.cols(); ++j) {
      for (Eigen::Index i = 0; i < view.rows(); ++i) {
        if (view.missing(i, j)) continue;
        sum += view.values(i, j);
        sum_sq += view.values(i, j) * view.values(i, j);
        ++n;
      }
    }
    if (n < 2) throw ConfigError("view '" + view.name + "' has too few observed cells for an SNR prior");
    const double mean = sum / static_cast<double>(n);
    const double var = (sum_sq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
    if (!(var > 0.0)) throw ConfigError("view '" + view.name + "' has zero variance");
    hyper.tau_per_view.push_back({kSnrPseudoObservations, kSnrPseudoObservations * snr * var});
  }
  return hyper;
}

const char* to_string(ModelKind kind) { return kind == ModelKind::GFA ? "gfa" : "fa"; }

ModelKind parse_model_kind(const std::string& text) {
  if (text == "gfa" || text == "GFA") return ModelKind::GFA;
  if (text == "fa" || text == "FA" || text == "FA_CONCAT") return ModelKind::FA_CONCAT;
  throw ConfigError("unknown model variant '" + text + "'");
}

bool operator==(const ModelState& a, const ModelState& b) {
  if (!(a.variant == b.variant) || a.modes.size() != b.modes.size() || a.tau.size() != b.tau.size()) return false;
  for (std::size_t r = 0; r < a.modes.size(); ++r) {
    const ModeState& ma = a.modes[r];
    const ModeState& mb = b.modes[r];
    if (ma.X != mb.X || ma.H != mb.H || ma.alpha != mb.alpha || ma.pi != mb.pi) return false;
    if (ma.blocks.size() != mb.blocks.size()) return false;
    for (std::size_t i = 0; i < ma.blocks.size(); ++i) {
      const LoadingBlock& ba = ma.blocks[i];
      const LoadingBlock& bb = mb.blocks[i];
      if (ba.view != bb.view || ba.transposed != bb.transposed || ba.W != bb.W || ba.H != bb.H ||
          ba.alpha != bb.alpha || ba.pi != bb.pi) {
        return false;
      }
    }
  }
  for (std::size_t v = 0; v < a.tau.size(); ++v) {
    if (a.tau[v] != b.tau[v]) return false;
  }
  return true;
}

DataCollection model_data(const DataCollection& data, const ModelVariant& variant) {
  data.validate();
  if (variant.kind == ModelKind::FA_CONCAT) return concatenate_views(data);
  return data;
}

DataLayout model_layout(const DataLayout& layout, const ModelVariant& variant) {
  if (variant.kind == ModelKind::FA_CONCAT) return concatenate_layout(layout);
  return layout;
}

ModelState empty_state(const DataLayout& layout, const ModelVariant& variant,
                       const std::vector<Eigen::Index>& K) {
  const std::vector<ModeShape> shapes = mode_shapes(layout, variant);
  const std::vector<Eigen::Index> ks = broadcast_k(K, shapes.size());
  ModelState state;
  state.variant = variant;
  for (std::size_t r = 0; r < shapes.size(); ++r) {
    const Eigen::Index k = ks[r];
    ModeState mode;
    mode.X = Matrix::Zero(shapes[r].samples, k);
    mode.H = BinaryMatrix::Zero(shapes[r].samples, k);
    mode.alpha = Vector::Ones(k);
    mode.pi = Vector::Constant(k, 0.5);
    for (const BlockShape& b : shapes[r].blocks) {
      LoadingBlock block;
      block.view = b.view;
      block.transposed = b.transposed;
      block.W = Matrix::Zero(b.features, k);
      block.H = BinaryMatrix::Zero(b.features, k);
      block.alpha = Vector::Ones(k);
      block.pi = Vector::Constant(k, 0.5);
      mode.blocks.push_back(std::move(block));
    }
    state.modes.push_back(std::move(mode));
  }
  for (const ViewShape& v : layout.views) {
    state.tau.push_back(Vector::Ones(variant.kind == ModelKind::FA_CONCAT ? v.cols : 1));
  }
  return state;
}

ModelState sample_prior_state(const DataLayout& layout, const std::vector<Eigen::Index>& K,
                              const HyperParams& hyper, const ModelVariant& variant, Rng& rng) {
  hyper.validate();
  ModelState state = empty_state(layout, variant, K);
  fill_from_prior(state, hyper, rng);
  return state;
}

ModelState init_state(const DataCollection& data, const std::vector<Eigen::Index>& K,
                      const HyperParams& hyper, const ModelVariant& variant, Rng& rng) {
  data.validate();
  const DataLayout layout = model_layout(DataLayout::of(data), variant);
  return sample_prior_state(layout, K, hyper, variant, rng);
}

ModelState init_state(const DataCollection& data, const std::vector<Eigen::Index>& K,
                      const HyperParams& hyper, const ModelVariant& variant, std::uint64_t seed) {
  Rng rng(seed);
  return init_state(data, K, hyper, variant, rng);
}

Matrix view_mean(const ModelState& state, std::size_t view, const DataLayout& layout) {
  const ViewShape& shape = layout.views.at(view);
  Matrix mean = Matrix::Zero(shape.rows, shape.cols);
  for (const ModeState& mode : state.modes) {
    for (const LoadingBlock& block : mode.blocks) {
      if (block.view != view) continue;
      if (block.transposed) {
        mean.noalias() += block.W * mode.X.transpose();
      } else {
        mean.noalias() += mode.X * block.W.transpose();
      }
    }
  }
  return mean;
}

double log_likelihood(const ModelState& state, const DataCollection& data) {
  DataCollection scratch;
  const DataCollection& md = resolve(data, state.variant, scratch);
  const DataLayout layout = DataLayout::of(md);
  check_finite(state);
  if (state.tau.size() != md.views.size()) throw InvariantError("state does not match the data views");
  double total = 0.0;
  for (std::size_t v = 0; v < md.views.size(); ++v) {
    const View& view = md.views[v];
    const Matrix mean = view_mean(state, v, layout);
    const Vector& tau = state.tau[v];
    for (Eigen::Index j = 0; j < view.cols(); ++j) {
      const double t = tau.size() == 1 ? tau[0] : tau[j];
      const double norm = 0.5 * std::log(t) - 0.5 * kLog2Pi;
      for (Eigen::Index i = 0; i < view.rows(); ++i) {
        if (view.missing(i, j)) continue;
        const double y = view.values(i, j);
        if (!std::isfinite(y)) {
          throw NumericalError("view '" + view.name + "' cell (" + std::to_string(i) + ", " +
                               std::to_string(j) + ") is not finite");
        }
        const double r = y - mean(i, j);
        total += norm - 0.5 * t * r * r;
      }
    }
  }
  return total;
}

double log_joint(const ModelState& state, const DataCollection& data, const HyperParams& hyper) {
  double total = log_likelihood(state, data);
  for (std::size_t r = 0; r < state.modes.size(); ++r) {
    const ModeState& mode = state.modes[r];
    total += log_spike_slab(mode.X, mode.H, mode.alpha, mode.pi, "X");
    for (Eigen::Index k = 0; k < mode.K(); ++k) {
      total += log_gamma_density(mode.alpha[k], hyper.a_alpha, hyper.b_alpha);
      total += log_beta_density(mode.pi[k], hyper.a_pi, hyper.b_pi);
    }
    for (const LoadingBlock& block : mode.blocks) {
      total += log_spike_slab(block.W, block.H, block.alpha, block.pi, "W");
      for (Eigen::Index k = 0; k < mode.K(); ++k) {
        total += log_gamma_density(block.alpha[k], hyper.a_alpha, hyper.b_alpha);
        total += log_beta_density(block.pi[k], hyper.a_pi, hyper.b_pi);
      }
    }
  }
  for (std::size_t v = 0; v < state.tau.size(); ++v) {
    const GammaPrior prior = hyper.tau_prior(v);
    for (Eigen::Index d = 0; d < state.tau[v].size(); ++d) {
      total += log_gamma_density(state.tau[v][d], prior.shape, prior.rate);
    }
  }
  return total;
}

void check_invariants(const ModelState& state, const DataLayout& layout) {
  const std::vector<ModeShape> shapes = mode_shapes(layout, state.variant);
  if (state.modes.size() != shapes.size()) throw InvariantError("wrong number of modes");
  auto check_block = [](const Matrix& values, const BinaryMatrix& H, const Vector& alpha, const Vector& pi,
                        Eigen::Index rows, Eigen::Index K, const std::string& what) {
    if (values.rows() != rows || values.cols() != K || H.rows() != rows || H.cols() != K ||
        alpha.size() != K || pi.size() != K) {
      throw InvariantError(what + " has inconsistent dimensions");
    }
    for (Eigen::Index k = 0; k < K; ++k) {
      if (!(alpha[k] > 0.0) || !std::isfinite(alpha[k])) throw InvariantError(what + " alpha not positive");
      if (!(pi[k] > 0.0 && pi[k] < 1.0)) throw InvariantError(what + " pi outside (0, 1)");
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (H(i, k) > 1) throw InvariantError(what + " indicator not binary");
        if (H(i, k) == 0 && values(i, k) != 0.0) throw InvariantError(what + " violates spike consistency");
      }
    }
  };
  for (std::size_t r = 0; r < shapes.size(); ++r) {
    const ModeState& mode = state.modes[r];
    const std::string tag = "mode " + std::to_string(r + 1);
    check_block(mode.X, mode.H, mode.alpha, mode.pi, shapes[r].samples, mode.K(), tag + " X");
    if (mode.blocks.size() != shapes[r].blocks.size()) throw InvariantError(tag + " has wrong block count");
    for (std::size_t b = 0; b < mode.blocks.size(); ++b) {
      const LoadingBlock& block = mode.blocks[b];
      if (block.view != shapes[r].blocks[b].view || block.transposed != shapes[r].blocks[b].transposed) {
        throw InvariantError(tag + " block " + std::to_string(b) + " is attached to the wrong view");
      }
      check_block(block.W, block.H, block.alpha, block.pi, shapes[r].blocks[b].features, mode.K(),
                  tag + " W[" + std::to_string(b) + "]");
    }
  }
  if (state.tau.size() != layout.views.size()) throw InvariantError("wrong number of noise precisions");
  for (std::size_t v = 0; v < layout.views.size(); ++v) {
    const Eigen::Index expected = state.variant.kind == ModelKind::FA_CONCAT ? layout.views[v].cols : 1;
    if (state.tau[v].size() != expected) throw InvariantError("noise precision vector has wrong length");
    for (Eigen::Index d = 0; d < expected; ++d) {
      if (!(state.tau[v][d] > 0.0) || !std::isfinite(state.tau[v][d])) {
        throw InvariantError("noise precision not positive");
      }
    }
  }
}

void check_finite(const ModelState& state) {
  auto check = [](const auto& m, const std::string& what) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (!std::isfinite(m(i, j))) {
          throw NumericalError(what + " entry (" + std::to_string(i) + ", " + std::to_string(j) +
                               ") is not finite");
        }
      }
    }
  };
  for (std::size_t r = 0; r < state.modes.size(); ++r) {
    const ModeState& mode = state.modes[r];
    const std::string tag = "mode " + std::to_string(r + 1) + " ";
    check(mode.X, tag + "X");
    check(mode.alpha, tag + "alpha_x");
    check(mode.pi, tag + "pi_x");
    for (std::size_t b = 0; b < mode.blocks.size(); ++b) {
      const std::string bt = tag + "block " + std::to_string(b) + " ";
      check(mode.blocks[b].W, bt + "W");
      check(mode.blocks[b].alpha, bt + "alpha");
      check(mode.blocks[b].pi, bt + "pi");
    }
  }
  for (std::size_t v = 0; v < state.tau.size(); ++v) check(state.tau[v], "view " + std::to_string(v) + " tau");
}

}  // namespace gfa
