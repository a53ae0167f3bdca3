#include "gfa/biclusters.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <tuple>

#include "gfa/store.hpp"

namespace gfa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Bicluster make_bicluster(int mode, Eigen::Index k, std::size_t view, const std::string& name, BoolMatrix cells,
                         const Matrix& mean, Eigen::Index min_samples) {
  Bicluster b;
  b.mode = mode;
  b.component = k;
  b.view = view;
  b.view_name = name;
  for (Eigen::Index i = 0; i < cells.rows(); ++i) {
    if (cells.row(i).any()) b.sample_members.push_back(i);
  }
  for (Eigen::Index j = 0; j < cells.cols(); ++j) {
    if (cells.col(j).any()) b.feature_members.push_back(j);
  }
  if (static_cast<Eigen::Index>(b.sample_members.size()) < min_samples) {
    b.sample_members.clear();
    b.feature_members.clear();
    cells.setConstant(false);
  }
  b.cells = std::move(cells);
  b.intensity.resize(static_cast<Eigen::Index>(b.sample_members.size()),
                     static_cast<Eigen::Index>(b.feature_members.size()));
  for (std::size_t a = 0; a < b.sample_members.size(); ++a) {
    for (std::size_t c = 0; c < b.feature_members.size(); ++c) {
      b.intensity(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) =
          mean(b.sample_members[a], b.feature_members[c]);
    }
  }
  return b;
}

// Posterior-mean summary of one component: x followed by every block's w.
Vector component_vector(const ModelState& s, std::size_t mode, Eigen::Index k) {
  const ModeState& m = s.modes[mode];
  Eigen::Index length = m.X.rows();
  for (const LoadingBlock& b : m.blocks) length += b.W.rows();
  Vector v(length);
  Eigen::Index offset = 0;
  v.segment(offset, m.X.rows()) = m.X.col(k);
  offset += m.X.rows();
  for (const LoadingBlock& b : m.blocks) {
    v.segment(offset, b.W.rows()) = b.W.col(k);
    offset += b.W.rows();
  }
  return v;
}

double cosine(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

struct ChainSummary {
  // [mode][component]
  std::vector<std::vector<Vector>> means;
  std::vector<std::vector<bool>> eligible;
  std::vector<double> instability;
  Eigen::Index effective = 0;
};

ChainSummary summarize(const PosteriorStore& store, const ExtractOptions& extract) {
  ChainSummary out;
  const BiclusterSet set = extract_biclusters(store, extract);
  out.effective = set.total_effective_K();
  const ModelState& first = store.snapshots.front();
  const double n = static_cast<double>(store.snapshots.size());
  out.means.resize(first.modes.size());
  out.eligible.resize(first.modes.size());
  for (std::size_t r = 0; r < first.modes.size(); ++r) {
    const Eigen::Index K = first.modes[r].K();
    for (Eigen::Index k = 0; k < K; ++k) {
      Vector mean = Vector::Zero(component_vector(first, r, k).size());
      for (const ModelState& s : store.snapshots) mean += component_vector(s, r, k);
      mean /= n;
      bool nonempty = false;
      for (const Bicluster& b : set.biclusters) {
        if (b.mode == static_cast<int>(r + 1) && b.component == k && !b.empty()) nonempty = true;
      }
      double unstable = 0.0;
      for (const ModelState& s : store.snapshots) {
        if (std::abs(cosine(component_vector(s, r, k), mean)) < 0.5) unstable += 1.0;
      }
      out.instability.push_back(unstable / n);
      out.eligible[r].push_back(nonempty && mean.norm() > 0.0);
      out.means[r].push_back(std::move(mean));
    }
  }
  return out;
}

void check_compatible(const std::vector<PosteriorStore>& stores) {
  for (const PosteriorStore& s : stores) {
    if (s.snapshots.empty()) throw ConfigError("posterior store of chain " + std::to_string(s.chain_id) + " is empty");
  }
  const PosteriorStore& ref = stores.front();
  for (const PosteriorStore& s : stores) {
    if (!(s.layout == ref.layout) || !(s.config.variant == ref.config.variant)) {
      throw ConfigError("chains were fitted on different data layouts or variants");
    }
    const ModelState& a = s.snapshots.front();
    const ModelState& b = ref.snapshots.front();
    for (std::size_t r = 0; r < a.modes.size(); ++r) {
      if (a.modes[r].X.rows() != b.modes[r].X.rows()) throw ConfigError("chain dimensions differ");
    }
  }
}

}  // namespace

Eigen::Index BiclusterSet::total_effective_K() const {
  return std::accumulate(effective_K.begin(), effective_K.end(), Eigen::Index{0});
}

std::vector<BoolMatrix> BiclusterSet::union_cells() const {
  std::vector<BoolMatrix> out;
  for (const ViewShape& v : layout.views) out.push_back(BoolMatrix::Constant(v.rows, v.cols, false));
  for (const Bicluster& b : biclusters) out.at(b.view) = out.at(b.view) || b.cells;
  return out;
}

BiclusterSet extract_biclusters(const PosteriorStore& store, const ExtractOptions& options) {
  if (store.snapshots.empty()) throw ConfigError("posterior store is empty");
  BiclusterSet set;
  set.layout = store.layout;
  const bool split = store.config.variant.kind == ModelKind::FA_CONCAT && store.layout.views.size() > 1;
  const std::vector<Eigen::Index> offsets = concatenation_offsets(store.layout);
  const ModelState& first = store.snapshots.front();
  const double n = static_cast<double>(store.snapshots.size());
  const double votes_needed = options.majority * n;

  for (std::size_t r = 0; r < first.modes.size(); ++r) {
    const ModeState& mode = first.modes[r];
    std::vector<bool> active(static_cast<std::size_t>(mode.K()), false);
    for (std::size_t b = 0; b < mode.blocks.size(); ++b) {
      const LoadingBlock& block = mode.blocks[b];
      const Eigen::Index rows = block.transposed ? block.W.rows() : mode.X.rows();
      const Eigen::Index cols = block.transposed ? mode.X.rows() : block.W.rows();
      for (Eigen::Index k = 0; k < mode.K(); ++k) {
        Matrix votes = Matrix::Zero(rows, cols);
        Matrix sum = Matrix::Zero(rows, cols);
        for (const ModelState& s : store.snapshots) {
          const auto x = s.modes[r].X.col(k);
          const auto w = s.modes[r].blocks[b].W.col(k);
          const Vector nx = (x.array() != 0.0).cast<double>().matrix();
          const Vector nw = (w.array() != 0.0).cast<double>().matrix();
          if (block.transposed) {
            votes.noalias() += nw * nx.transpose();
            sum.noalias() += w * x.transpose();
          } else {
            votes.noalias() += nx * nw.transpose();
            sum.noalias() += x * w.transpose();
          }
        }
        const BoolMatrix cells = votes.array() > votes_needed;
        const Matrix mean = sum / n;
        if (split) {
          for (std::size_t v = 0; v < store.layout.views.size(); ++v) {
            const Eigen::Index width = store.layout.views[v].cols;
            set.biclusters.push_back(make_bicluster(static_cast<int>(r + 1), k, v, store.layout.views[v].name,
                                                    cells.middleCols(offsets[v], width),
                                                    mean.middleCols(offsets[v], width), options.min_sample_members));
          }
        } else {
          set.biclusters.push_back(make_bicluster(static_cast<int>(r + 1), k, block.view,
                                                  store.layout.views[block.view].name, cells, mean,
                                                  options.min_sample_members));
        }
      }
    }
    for (const Bicluster& bc : set.biclusters) {
      if (bc.mode == static_cast<int>(r + 1) && !bc.empty()) active[static_cast<std::size_t>(bc.component)] = true;
    }
    set.effective_K.push_back(static_cast<Eigen::Index>(std::count(active.begin(), active.end(), true)));
  }
  return set;
}

Eigen::Index RobustComponentReport::robust_count() const {
  return static_cast<Eigen::Index>(
      std::count_if(groups.begin(), groups.end(), [](const ComponentGroup& g) { return g.robust; }));
}

RobustComponentReport match_chains(const std::vector<PosteriorStore>& stores, const MatchOptions& options) {
  if (stores.size() < 2) throw ConfigError("matching needs at least two chains");
  if (!(options.threshold > 0.0 && options.threshold <= 1.0)) throw ConfigError("threshold must lie in (0, 1]");
  if (!(options.min_chains_fraction > 0.0 && options.min_chains_fraction <= 1.0)) {
    throw ConfigError("min chains fraction must lie in (0, 1]");
  }
  check_compatible(stores);

  RobustComponentReport report;
  report.options = options;
  report.n_chains = static_cast<int>(stores.size());
  std::vector<ChainSummary> summaries;
  for (const PosteriorStore& s : stores) {
    summaries.push_back(summarize(s, options.extract));
    report.instability.push_back(summaries.back().instability);
    report.effective_K.push_back(summaries.back().effective);
  }
  const std::size_t n_modes = summaries.front().means.size();
  const int needed = static_cast<int>(std::ceil(options.min_chains_fraction * report.n_chains - 1e-12));
  const ModelState& shape = stores.front().snapshots.front();

  for (std::size_t r = 0; r < n_modes; ++r) {
    const ChainSummary& ref = summaries.front();
    const auto K = static_cast<Eigen::Index>(ref.means[r].size());
    // Group index for each eligible reference component.
    std::vector<std::ptrdiff_t> ref_group(static_cast<std::size_t>(K), -1);
    std::vector<Eigen::Index> ref_components;
    for (Eigen::Index k = 0; k < K; ++k) {
      if (!ref.eligible[r][static_cast<std::size_t>(k)]) continue;
      ref_components.push_back(k);
      ComponentGroup g;
      g.mode = static_cast<int>(r + 1);
      g.members.push_back({0, k, 1.0, false});
      ref_group[static_cast<std::size_t>(k)] = static_cast<std::ptrdiff_t>(report.groups.size());
      report.groups.push_back(std::move(g));
    }

    for (std::size_t c = 1; c < summaries.size(); ++c) {
      const ChainSummary& other = summaries[c];
      std::vector<Eigen::Index> chain_components;
      for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(other.means[r].size()); ++k) {
        if (other.eligible[r][static_cast<std::size_t>(k)]) chain_components.push_back(k);
      }
      ChainSimilarity sim;
      sim.chain = static_cast<int>(c);
      sim.mode = static_cast<int>(r + 1);
      sim.reference_components = ref_components;
      sim.chain_components = chain_components;
      sim.values.resize(static_cast<Eigen::Index>(ref_components.size()),
                        static_cast<Eigen::Index>(chain_components.size()));
      std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
      for (std::size_t i = 0; i < ref_components.size(); ++i) {
        for (std::size_t j = 0; j < chain_components.size(); ++j) {
          const double s = std::abs(cosine(ref.means[r][static_cast<std::size_t>(ref_components[i])],
                                           other.means[r][static_cast<std::size_t>(chain_components[j])]));
          sim.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
          pairs.emplace_back(s, i, j);
        }
      }
      std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
        return std::get<2>(a) < std::get<2>(b);
      });
      std::vector<bool> ref_used(ref_components.size(), false), chain_used(chain_components.size(), false);
      for (const auto& [s, i, j] : pairs) {
        if (s < options.threshold || ref_used[i] || chain_used[j]) continue;
        ref_used[i] = chain_used[j] = true;
        const Eigen::Index rk = ref_components[i];
        const Eigen::Index ck = chain_components[j];
        const double signed_cos = cosine(ref.means[r][static_cast<std::size_t>(rk)],
                                         other.means[r][static_cast<std::size_t>(ck)]);
        report.groups[static_cast<std::size_t>(ref_group[static_cast<std::size_t>(rk)])].members.push_back(
            {static_cast<int>(c), ck, s, signed_cos < 0.0});
      }
      for (std::size_t j = 0; j < chain_components.size(); ++j) {
        if (chain_used[j]) continue;
        ComponentGroup g;
        g.mode = static_cast<int>(r + 1);
        g.members.push_back({static_cast<int>(c), chain_components[j], 1.0, false});
        report.groups.push_back(std::move(g));
      }
      report.similarities.push_back(std::move(sim));
    }
  }

  // Consensus: sign-aligned mean of the members' posterior means.
  for (ComponentGroup& g : report.groups) {
    const std::size_t r = static_cast<std::size_t>(g.mode - 1);
    Vector sum = Vector::Zero(summaries.front().means[r].front().size());
    for (const MatchMember& m : g.members) {
      const Vector& v = summaries[static_cast<std::size_t>(m.chain)].means[r][static_cast<std::size_t>(m.component)];
      sum += m.flipped ? Vector(-v) : v;
    }
    sum /= static_cast<double>(g.members.size());
    const ModeState& ms = shape.modes[r];
    Eigen::Index offset = 0;
    g.consensus_x = sum.segment(offset, ms.X.rows());
    offset += ms.X.rows();
    for (const LoadingBlock& b : ms.blocks) {
      g.consensus_w.push_back(sum.segment(offset, b.W.rows()));
      offset += b.W.rows();
    }
    g.chains_present = static_cast<int>(g.members.size());
    g.robust = g.chains_present >= needed;
  }
  return report;
}

EffectiveKReport report_effective_K(const std::vector<PosteriorStore>& stores, const MatchOptions& options) {
  if (stores.empty()) throw ConfigError("no posterior stores given");
  EffectiveKReport out;
  for (const PosteriorStore& s : stores) {
    const BiclusterSet set = extract_biclusters(s, options.extract);
    out.per_chain.push_back(set.total_effective_K());
    out.per_chain_mode.push_back(set.effective_K);
  }
  out.consensus = stores.size() == 1 ? out.per_chain.front() : match_chains(stores, options).robust_count();
  return out;
}

json to_json(const BiclusterSet& set, const std::string& intensity_prefix) {
  json list = json::array();
  for (const Bicluster& b : set.biclusters) {
    if (b.empty()) continue;
    json cells = json::array();
    for (Eigen::Index i = 0; i < b.cells.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.cells.cols(); ++j) {
        if (b.cells(i, j)) cells.push_back({i, j});
      }
    }
    json entry = {{"mode", b.mode},
                  {"component", b.component},
                  {"view", b.view},
                  {"view_name", b.view_name},
                  {"sample_members", b.sample_members},
                  {"feature_members", b.feature_members},
                  {"cells", cells}};
    if (!intensity_prefix.empty()) {
      entry["intensity_file"] = intensity_prefix + "_m" + std::to_string(b.mode) + "_k" +
                                std::to_string(b.component) + "_v" + std::to_string(b.view) + ".bin";
      entry["intensity_shape"] = {b.intensity.rows(), b.intensity.cols()};
    }
    list.push_back(std::move(entry));
  }
  return {{"layout", to_json(set.layout)}, {"effective_K", set.effective_K}, {"biclusters", list}};
}

BiclusterSet bicluster_set_from_json(const json& j) {
  BiclusterSet set;
  try {
    set.layout = layout_from_json(j.at("layout"));
    if (j.contains("effective_K")) set.effective_K = j.at("effective_K").get<std::vector<Eigen::Index>>();
    for (const json& e : j.at("biclusters")) {
      Bicluster b;
      b.mode = e.value("mode", 1);
      b.component = e.value("component", Eigen::Index{0});
      if (e.contains("view")) {
        b.view = e.at("view").get<std::size_t>();
      } else {
        const std::string name = e.at("view_name").get<std::string>();
        bool found = false;
        for (std::size_t v = 0; v < set.layout.views.size(); ++v) {
          if (set.layout.views[v].name == name) {
            b.view = v;
            found = true;
          }
        }
        if (!found) throw DataError("bicluster refers to unknown view '" + name + "'");
      }
      if (b.view >= set.layout.views.size()) throw DataError("bicluster view index out of range");
      const ViewShape& shape = set.layout.views[b.view];
      b.view_name = shape.name;
      b.sample_members = e.at("sample_members").get<std::vector<Eigen::Index>>();
      b.feature_members = e.at("feature_members").get<std::vector<Eigen::Index>>();
      b.cells = BoolMatrix::Constant(shape.rows, shape.cols, false);
      auto in_range = [&](Eigen::Index i, Eigen::Index jj) {
        if (i < 0 || i >= shape.rows || jj < 0 || jj >= shape.cols) throw DataError("bicluster cell out of range");
      };
      if (e.contains("cells")) {
        for (const json& c : e.at("cells")) {
          const auto i = c.at(0).get<Eigen::Index>();
          const auto jj = c.at(1).get<Eigen::Index>();
          in_range(i, jj);
          b.cells(i, jj) = true;
        }
      } else {
        for (Eigen::Index i : b.sample_members) {
          for (Eigen::Index jj : b.feature_members) {
            in_range(i, jj);
            b.cells(i, jj) = true;
          }
        }
      }
      set.biclusters.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed bicluster file: ") + e.what());
  }
  return set;
}

json to_json(const RobustComponentReport& report) {
  json groups = json::array();
  for (std::size_t g = 0; g < report.groups.size(); ++g) {
    const ComponentGroup& group = report.groups[g];
    json members = json::array();
    for (const MatchMember& m : group.members) {
      members.push_back({{"chain", m.chain}, {"component", m.component}, {"similarity", m.similarity},
                         {"flipped", m.flipped}});
    }
    groups.push_back({{"id", g},
                      {"mode", group.mode},
                      {"chains_present", group.chains_present},
                      {"robust", group.robust},
                      {"members", members}});
  }
  json sims = json::array();
  for (const ChainSimilarity& s : report.similarities) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < s.values.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index jj = 0; jj < s.values.cols(); ++jj) row.push_back(s.values(i, jj));
      rows.push_back(row);
    }
    sims.push_back({{"chain", s.chain},
                    {"mode", s.mode},
                    {"reference_components", s.reference_components},
                    {"chain_components", s.chain_components},
                    {"values", rows}});
  }
  return {{"threshold", report.options.threshold},
          {"min_chains_fraction", report.options.min_chains_fraction},
          {"n_chains", report.n_chains},
          {"robust_count", report.robust_count()},
          {"effective_K", report.effective_K},
          {"instability", report.instability},
          {"groups", groups},
          {"similarities", sims}};
}

void write_bicluster_set(const BiclusterSet& set, const fs::path& dir, const std::string& stem) {
  fs::create_directories(dir);
  const json j = to_json(set, stem);
  for (const Bicluster& b : set.biclusters) {
    if (b.empty()) continue;
    write_matrix(dir / (stem + "_m" + std::to_string(b.mode) + "_k" + std::to_string(b.component) + "_v" +
                        std::to_string(b.view) + ".bin"),
                 b.intensity);
  }
  std::ofstream out(dir / (stem + ".json"), std::ios::trunc);
  if (!out) throw DataError("cannot write " + (dir / (stem + ".json")).string());
  out << j.dump(1) << '\n';
}

void write_robust_report(const RobustComponentReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t g = 0; g < report.groups.size(); ++g) {
    const ComponentGroup& group = report.groups[g];
    write_matrix(dir / ("group_" + std::to_string(g) + "_x.bin"), group.consensus_x);
    for (std::size_t b = 0; b < group.consensus_w.size(); ++b) {
      write_matrix(dir / ("group_" + std::to_string(g) + "_w" + std::to_string(b) + ".bin"), group.consensus_w[b]);
    }
  }
  std::ofstream out(dir / "robust_components.json", std::ios::trunc);
  if (!out) throw DataError("cannot write " + (dir / "robust_components.json").string());
  out << to_json(report).dump(1) << '\n';
}

}  // namespace gfa
