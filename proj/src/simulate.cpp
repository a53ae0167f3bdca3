#include "gfa/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "gfa/rng.hpp"
#include "gfa/store.hpp"

namespace gfa {

using nlohmann::json;

namespace {

std::vector<Eigen::Index> contiguous_block(Eigen::Index n, double fraction, Rng& rng) {
  const Eigen::Index len = std::clamp<Eigen::Index>(std::llround(fraction * static_cast<double>(n)), 1, n);
  const auto start = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n - len + 1)));
  std::vector<Eigen::Index> out(static_cast<std::size_t>(len));
  for (Eigen::Index i = 0; i < len; ++i) out[static_cast<std::size_t>(i)] = start + i;
  return out;
}

std::vector<Eigen::Index> range(Eigen::Index begin, Eigen::Index end) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = begin; i < end; ++i) out.push_back(i);
  return out;
}

double truncated_normal(Rng& rng) {
  for (;;) {
    const double v = rng.normal();
    if (std::abs(v) >= 1.0 && std::abs(v) <= 2.0) return v;
  }
}

std::vector<std::string> names(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

void add_noise(Matrix& values, double variance, Rng& rng) {
  if (variance == 0.0) return;
  const double sd = std::sqrt(variance);
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) values(i, j) += sd * rng.normal();
  }
}

View named_view(std::string name, int mode, Matrix values, std::vector<std::string> rows,
                std::vector<std::string> cols) {
  View v = make_view(std::move(name), mode, std::move(values));
  v.row_names = std::move(rows);
  v.col_names = std::move(cols);
  return v;
}

}  // namespace

Experiment parse_experiment(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (n == "fig1" || n == "block") return Experiment::BlockFig1;
  if (n == "a") return Experiment::A;
  if (n == "b") return Experiment::B;
  if (n == "c") return Experiment::C;
  if (n == "d") return Experiment::D;
  if (n == "e") return Experiment::E;
  if (n == "f") return Experiment::F;
  throw ConfigError("unknown experiment '" + name + "' (expected fig1, a, b, c, d, e or f)");
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::BlockFig1: return "fig1";
    case Experiment::A: return "a";
    case Experiment::B: return "b";
    case Experiment::C: return "c";
    case Experiment::D: return "d";
    case Experiment::E: return "e";
    case Experiment::F: return "f";
  }
  return "?";
}

SimulationSpec SimulationSpec::defaults(Experiment e) {
  SimulationSpec spec;
  spec.experiment = e;
  if (e == Experiment::D) spec.n_noise_components = 4;
  if (e == Experiment::E) spec.K_true = 3;
  return spec;
}

void SimulationSpec::validate() const {
  if (experiment == Experiment::BlockFig1) return;
  if (M < 1) throw ConfigError("at least one view is required");
  if (N < 1) throw ConfigError("at least one sample is required");
  if (!D.empty() && static_cast<int>(D.size()) != M) throw ConfigError("view dimension list must have M entries");
  for (Eigen::Index d : D) {
    if (d < 1) throw ConfigError("view dimensions must be positive");
  }
  if (K_true < 0) throw ConfigError("number of biclusters must be non-negative");
  if (!(activity > 0.0 && activity <= 1.0)) throw ConfigError("activity fraction must lie in (0, 1]");
  if (!variances.empty() && static_cast<int>(variances.size()) != M) {
    throw ConfigError("variance list must have M entries");
  }
  for (const VarianceSetting& v : resolved_variances()) {
    if (!(v.bicluster > 0.0) || !(v.noise >= 0.0)) throw ConfigError("variances must be positive");
  }
  if (n_noise_components < 0) throw ConfigError("noise component count must be non-negative");
  if (!(alpha_strength > 0.0)) throw ConfigError("alpha strength must be positive");
}

std::vector<Eigen::Index> SimulationSpec::view_dims() const {
  if (!D.empty()) return D;
  return std::vector<Eigen::Index>(static_cast<std::size_t>(M), 100);
}

std::vector<VarianceSetting> SimulationSpec::resolved_variances() const {
  if (!variances.empty()) return variances;
  std::vector<VarianceSetting> out(static_cast<std::size_t>(M), VarianceSetting{1.0, 1.0});
  for (int m = 1; m < M; ++m) {
    auto& v = out[static_cast<std::size_t>(m)];
    switch (experiment) {
      case Experiment::A:
      case Experiment::BlockFig1: break;
      case Experiment::F: v = {1.0 / alpha_strength, 1.0}; break;
      default: v = kHeterogeneousVariances[static_cast<std::size_t>(m - 1) % kHeterogeneousVariances.size()];
    }
  }
  return out;
}

bool SimulationSpec::bicluster_in_view(int m) const { return experiment != Experiment::C || (m + 1) % 3 != 0; }

std::vector<BoolMatrix> truth_cells(const GroundTruth& truth, const DataLayout& layout) {
  std::vector<BoolMatrix> cells;
  for (const ViewShape& v : layout.views) cells.push_back(BoolMatrix::Constant(v.rows, v.cols, false));
  for (const PlantedBicluster& b : truth.biclusters) {
    for (std::size_t v = 0; v < layout.views.size() && v < b.features.size(); ++v) {
      const bool transposed = b.mode == 2 && layout.views[v].mode == 1;
      const auto& rows = transposed ? b.features[v] : b.samples;
      const auto& cols = transposed ? b.samples : b.features[v];
      if (b.features[v].empty()) continue;
      for (Eigen::Index i : rows) {
        for (Eigen::Index j : cols) cells[v](i, j) = true;
      }
    }
  }
  return cells;
}

std::pair<DataCollection, GroundTruth> generate(const SimulationSpec& spec) {
  if (spec.experiment == Experiment::BlockFig1) return generate_block_fig1(spec.seed);
  spec.validate();
  const std::vector<Eigen::Index> dims = spec.view_dims();
  const std::vector<VarianceSetting> vars = spec.resolved_variances();
  Rng rng(spec.seed);
  GroundTruth truth;
  truth.n_noise_components = spec.n_noise_components;

  Matrix X = Matrix::Zero(spec.N, spec.K_true);
  for (int k = 0; k < spec.K_true; ++k) {
    PlantedBicluster b;
    b.samples = contiguous_block(spec.N, spec.activity, rng);
    for (Eigen::Index i : b.samples) X(i, k) = rng.normal();
    b.features.resize(static_cast<std::size_t>(spec.M));
    truth.biclusters.push_back(std::move(b));
  }

  const double feature_activity = spec.experiment == Experiment::C ? 1.0 : spec.activity;
  DataCollection data;
  for (int m = 0; m < spec.M; ++m) {
    const Eigen::Index D = dims[static_cast<std::size_t>(m)];
    Matrix W = Matrix::Zero(D, spec.K_true);
    const double sd = std::sqrt(vars[static_cast<std::size_t>(m)].bicluster);
    for (int k = 0; k < spec.K_true; ++k) {
      if (!spec.bicluster_in_view(m)) continue;
      auto features = contiguous_block(D, feature_activity, rng);
      for (Eigen::Index d : features) W(d, k) = sd * rng.normal();
      truth.biclusters[static_cast<std::size_t>(k)].features[static_cast<std::size_t>(m)] = std::move(features);
    }
    truth.signal.push_back(X * W.transpose());
    truth.loadings.push_back({1, static_cast<std::size_t>(m), false, std::move(W)});
  }
  for (int j = 0; j < spec.n_noise_components; ++j) {
    const std::size_t v = spec.M > 1 ? 1 + static_cast<std::size_t>(j % (spec.M - 1)) : 0;
    Vector x(spec.N), w(dims[v]);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.normal();
    truth.signal[v].noalias() += x * w.transpose();
  }
  for (int m = 0; m < spec.M; ++m) {
    Matrix values = truth.signal[static_cast<std::size_t>(m)];
    add_noise(values, vars[static_cast<std::size_t>(m)].noise, rng);
    const std::string name = "view" + std::to_string(m + 1);
    data.views.push_back(named_view(name, 1, std::move(values), names("s", spec.N),
                                    names(name + "_f", dims[static_cast<std::size_t>(m)])));
  }
  truth.X.push_back(std::move(X));
  truth.cells = truth_cells(truth, DataLayout::of(data));
  return {std::move(data), std::move(truth)};
}

std::pair<DataCollection, GroundTruth> generate_block_fig1(std::uint64_t seed) {
  constexpr Eigen::Index N1 = 200, N2 = 70;
  const Eigen::Index dims[3] = {100, 50, 60};
  Rng rng(seed);
  GroundTruth truth;

  // Mode-1 biclusters: sample range, then feature ranges in Y11, Y21, Y31.
  struct Block {
    Eigen::Index s0, s1;
    Eigen::Index f[3][2];
  };
  const Block mode1[3] = {
      {0, 60, {{0, 40}, {0, 25}, {0, 0}}},
      {60, 120, {{0, 0}, {25, 50}, {0, 30}}},
      {120, 170, {{40, 70}, {0, 0}, {30, 60}}},
  };
  Matrix X1 = Matrix::Zero(N1, 3);
  std::vector<Matrix> W1 = {Matrix::Zero(dims[0], 3), Matrix::Zero(dims[1], 3), Matrix::Zero(dims[2], 3)};
  for (int k = 0; k < 3; ++k) {
    PlantedBicluster b;
    b.mode = 1;
    b.samples = range(mode1[k].s0, mode1[k].s1);
    for (Eigen::Index i : b.samples) X1(i, k) = truncated_normal(rng);
    b.features.resize(4);
    for (int v = 0; v < 3; ++v) {
      b.features[static_cast<std::size_t>(v)] = range(mode1[k].f[v][0], mode1[k].f[v][1]);
      for (Eigen::Index d : b.features[static_cast<std::size_t>(v)]) W1[static_cast<std::size_t>(v)](d, k) = truncated_normal(rng);
    }
    truth.biclusters.push_back(std::move(b));
  }

  // Mode-2 bicluster: features 70..99 of Y11 are its samples; it loads on
  // rows 170..199 of Y11 and columns 0..39 of the mode-2 view.
  Matrix X2 = Matrix::Zero(dims[0], 1);
  Matrix V0 = Matrix::Zero(N1, 1);
  Matrix V1 = Matrix::Zero(N2, 1);
  {
    PlantedBicluster b;
    b.mode = 2;
    b.samples = range(70, 100);
    for (Eigen::Index j : b.samples) X2(j, 0) = truncated_normal(rng);
    b.features.resize(4);
    b.features[0] = range(170, 200);
    b.features[3] = range(0, 40);
    for (Eigen::Index i : b.features[0]) V0(i, 0) = truncated_normal(rng);
    for (Eigen::Index i : b.features[3]) V1(i, 0) = truncated_normal(rng);
    truth.biclusters.push_back(std::move(b));
  }

  truth.signal = {X1 * W1[0].transpose() + V0 * X2.transpose(), X1 * W1[1].transpose(), X1 * W1[2].transpose(),
                  X2 * V1.transpose()};
  DataCollection data;
  const char* view_names[4] = {"Y11", "Y21", "Y31", "Y12"};
  const std::vector<std::string> samples = names("s", N1);
  const std::vector<std::string> y11_features = names("Y11_f", dims[0]);
  for (int v = 0; v < 4; ++v) {
    Matrix values = truth.signal[static_cast<std::size_t>(v)];
    add_noise(values, 1.0, rng);
    if (v < 3) {
      data.views.push_back(named_view(view_names[v], 1, std::move(values), samples,
                                      names(std::string(view_names[v]) + "_f", dims[v])));
    } else {
      data.views.push_back(named_view(view_names[v], 2, std::move(values), y11_features, names("Y12_f", N2)));
    }
  }
  truth.X = {std::move(X1), std::move(X2)};
  for (int v = 0; v < 3; ++v) truth.loadings.push_back({1, static_cast<std::size_t>(v), false, W1[static_cast<std::size_t>(v)]});
  truth.loadings.push_back({2, 0, true, std::move(V0)});
  truth.loadings.push_back({2, 3, false, std::move(V1)});
  truth.cells = truth_cells(truth, DataLayout::of(data));
  return {std::move(data), std::move(truth)};
}

json to_json(const SimulationSpec& spec) {
  json variances = json::array();
  for (const VarianceSetting& v : spec.variances) variances.push_back({v.bicluster, v.noise});
  return {{"experiment", to_string(spec.experiment)},
          {"M", spec.M},
          {"N", spec.N},
          {"D", spec.D},
          {"K_true", spec.K_true},
          {"activity", spec.activity},
          {"variances", variances},
          {"n_noise_components", spec.n_noise_components},
          {"alpha_strength", spec.alpha_strength},
          {"seed", spec.seed}};
}

SimulationSpec simulation_spec_from_json(const json& j) {
  try {
    SimulationSpec spec = SimulationSpec::defaults(parse_experiment(j.at("experiment").get<std::string>()));
    spec.M = j.value("M", spec.M);
    spec.N = j.value("N", spec.N);
    spec.D = j.value("D", spec.D);
    spec.K_true = j.value("K_true", spec.K_true);
    spec.activity = j.value("activity", spec.activity);
    if (j.contains("variances")) {
      for (const json& v : j.at("variances")) spec.variances.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    }
    spec.n_noise_components = j.value("n_noise_components", spec.n_noise_components);
    spec.alpha_strength = j.value("alpha_strength", spec.alpha_strength);
    spec.seed = j.value("seed", spec.seed);
    return spec;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed simulation spec: ") + e.what());
  }
}

json to_json(const GroundTruth& truth, const DataLayout& layout) {
  auto matrix_json = [](const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  json biclusters = json::array();
  for (const PlantedBicluster& b : truth.biclusters) {
    json features = json::object();
    for (std::size_t v = 0; v < b.features.size(); ++v) {
      if (!b.features[v].empty()) features[layout.views[v].name] = b.features[v];
    }
    biclusters.push_back({{"mode", b.mode}, {"samples", b.samples}, {"features", features}});
  }
  json X = json::array();
  for (const Matrix& m : truth.X) X.push_back(matrix_json(m));
  json loadings = json::array();
  for (const PlantedLoading& l : truth.loadings) {
    loadings.push_back({{"mode", l.mode},
                        {"view", layout.views[l.view].name},
                        {"transposed", l.transposed},
                        {"W", matrix_json(l.W)}});
  }
  return {{"layout", to_json(layout)},
          {"n_biclusters", truth.biclusters.size()},
          {"n_noise_components", truth.n_noise_components},
          {"biclusters", biclusters},
          {"X", X},
          {"loadings", loadings}};
}

GroundTruth ground_truth_from_json(const json& j, DataLayout& layout) {
  GroundTruth truth;
  try {
    layout = layout_from_json(j.at("layout"));
    truth.n_noise_components = j.value("n_noise_components", 0);
    for (const json& b : j.at("biclusters")) {
      PlantedBicluster p;
      p.mode = b.at("mode").get<int>();
      p.samples = b.at("samples").get<std::vector<Eigen::Index>>();
      p.features.resize(layout.views.size());
      for (const auto& [name, idx] : b.at("features").items()) {
        bool found = false;
        for (std::size_t v = 0; v < layout.views.size(); ++v) {
          if (layout.views[v].name == name) {
            p.features[v] = idx.get<std::vector<Eigen::Index>>();
            found = true;
          }
        }
        if (!found) throw DataError("ground truth refers to unknown view '" + name + "'");
      }
      truth.biclusters.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed ground truth: ") + e.what());
  }
  for (const PlantedBicluster& b : truth.biclusters) {
    for (std::size_t v = 0; v < layout.views.size(); ++v) {
      if (b.features[v].empty()) continue;
      const bool transposed = b.mode == 2 && layout.views[v].mode == 1;
      const auto& rows = transposed ? b.features[v] : b.samples;
      const auto& cols = transposed ? b.samples : b.features[v];
      for (Eigen::Index i : rows) {
        if (i < 0 || i >= layout.views[v].rows) throw DataError("ground truth index out of range");
      }
      for (Eigen::Index c : cols) {
        if (c < 0 || c >= layout.views[v].cols) throw DataError("ground truth index out of range");
      }
    }
  }
  truth.cells = truth_cells(truth, layout);
  return truth;
}

}  // namespace gfa
