#include "gfa/store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace gfa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kStoreFormat = "gfa-posterior-store";
constexpr int kStoreVersion = 1;

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFFu) << (8 * (7 - i));
    return r;
  } else {
    return v;
  }
}

std::vector<char> read_file(const fs::path& path, std::size_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<char> bytes(expected);
  in.read(bytes.data(), static_cast<std::streamsize>(expected));
  if (static_cast<std::size_t>(in.gcount()) != expected || in.peek() != std::char_traits<char>::eof()) {
    throw DataError(path.string() + " does not hold " + std::to_string(expected) + " bytes");
  }
  return bytes;
}

std::string snapshot_file(std::size_t i, const std::string& param) {
  return "snapshot_" + std::to_string(i) + "_" + param + ".bin";
}

std::string mode_tag(std::size_t r) { return std::to_string(r + 1); }
std::string block_tag(std::size_t r, std::size_t b) { return mode_tag(r) + "_" + std::to_string(b); }

}  // namespace

void write_matrix(const fs::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(m(i, j)));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

void write_binary(const fs::path& path, const BinaryMatrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.put(static_cast<char>(m(i, j)));
  }
  if (!out) throw DataError("failed writing " + path.string());
}

Matrix read_matrix(const fs::path& path, Eigen::Index rows, Eigen::Index cols) {
  const std::vector<char> bytes = read_file(path, static_cast<std::size_t>(rows * cols) * 8);
  Matrix m(rows, cols);
  std::size_t offset = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::uint64_t bits;
      std::memcpy(&bits, bytes.data() + offset, sizeof bits);
      offset += sizeof bits;
      m(i, j) = std::bit_cast<double>(to_little_endian(bits));
    }
  }
  return m;
}

BinaryMatrix read_binary(const fs::path& path, Eigen::Index rows, Eigen::Index cols) {
  const std::vector<char> bytes = read_file(path, static_cast<std::size_t>(rows * cols));
  BinaryMatrix m(rows, cols);
  std::size_t offset = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = static_cast<std::uint8_t>(bytes[offset++]);
  }
  return m;
}

json to_json(const HyperParams& hyper) {
  json j = {{"a_pi", hyper.a_pi},       {"b_pi", hyper.b_pi}, {"a_alpha", hyper.a_alpha},
            {"b_alpha", hyper.b_alpha}, {"a_tau", hyper.a_tau}, {"b_tau", hyper.b_tau}};
  json per_view = json::array();
  for (const GammaPrior& p : hyper.tau_per_view) per_view.push_back({{"shape", p.shape}, {"rate", p.rate}});
  j["tau_per_view"] = per_view;
  return j;
}

HyperParams hyper_from_json(const json& j) {
  HyperParams h;
  h.a_pi = j.at("a_pi").get<double>();
  h.b_pi = j.at("b_pi").get<double>();
  h.a_alpha = j.at("a_alpha").get<double>();
  h.b_alpha = j.at("b_alpha").get<double>();
  h.a_tau = j.at("a_tau").get<double>();
  h.b_tau = j.at("b_tau").get<double>();
  if (j.contains("tau_per_view")) {
    for (const json& p : j.at("tau_per_view")) {
      h.tau_per_view.push_back({p.at("shape").get<double>(), p.at("rate").get<double>()});
    }
  }
  return h;
}

json to_json(const ChainConfig& c) {
  json j = {{"k_init", c.k_init},
            {"burn_in", c.burn_in},
            {"thinning", c.thinning},
            {"n_samples", c.n_samples},
            {"seed", c.seed},
            {"variant", {{"kind", to_string(c.variant.kind)}, {"two_mode", c.variant.two_mode}}},
            {"hyper", to_json(c.hyper)}};
  j["snr"] = c.snr ? json(*c.snr) : json(nullptr);
  return j;
}

ChainConfig chain_config_from_json(const json& j) {
  ChainConfig c;
  c.k_init = j.at("k_init").get<std::vector<Eigen::Index>>();
  c.burn_in = j.at("burn_in").get<long>();
  c.thinning = j.at("thinning").get<long>();
  c.n_samples = j.at("n_samples").get<long>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.variant.kind = parse_model_kind(j.at("variant").at("kind").get<std::string>());
  c.variant.two_mode = j.at("variant").at("two_mode").get<bool>();
  c.hyper = hyper_from_json(j.at("hyper"));
  if (j.contains("snr") && !j.at("snr").is_null()) c.snr = j.at("snr").get<double>();
  return c;
}

json to_json(const DataLayout& layout) {
  json views = json::array();
  for (const ViewShape& v : layout.views) {
    views.push_back({{"name", v.name}, {"mode", v.mode}, {"rows", v.rows}, {"cols", v.cols}});
  }
  return {{"views", views}};
}

DataLayout layout_from_json(const json& j) {
  DataLayout layout;
  for (const json& v : j.at("views")) {
    layout.views.push_back({v.at("name").get<std::string>(), v.at("mode").get<int>(),
                            v.at("rows").get<Eigen::Index>(), v.at("cols").get<Eigen::Index>()});
  }
  return layout;
}

std::vector<std::string> snapshot_parameter_names(const ModelState& state) {
  std::vector<std::string> names;
  for (std::size_t r = 0; r < state.modes.size(); ++r) {
    for (const char* p : {"X", "Hx", "alphax", "pix"}) names.push_back(p + mode_tag(r));
    for (std::size_t b = 0; b < state.modes[r].blocks.size(); ++b) {
      for (const char* p : {"W", "H", "alpha", "pi"}) names.push_back(p + block_tag(r, b));
    }
  }
  for (std::size_t v = 0; v < state.tau.size(); ++v) names.push_back("tau_" + std::to_string(v));
  return names;
}

void save_store(const PosteriorStore& store, const fs::path& dir) {
  if (store.snapshots.empty()) throw ConfigError("cannot save an empty posterior store");
  fs::create_directories(dir);
  const ModelState& first = store.snapshots.front();

  json params = json::array();
  auto describe = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols, const char* dtype) {
    params.push_back({{"name", name}, {"rows", rows}, {"cols", cols}, {"dtype", dtype}});
  };
  json blocks = json::array();
  std::vector<Eigen::Index> K;
  for (std::size_t r = 0; r < first.modes.size(); ++r) {
    const ModeState& m = first.modes[r];
    K.push_back(m.K());
    describe("X" + mode_tag(r), m.X.rows(), m.X.cols(), "f64");
    describe("Hx" + mode_tag(r), m.H.rows(), m.H.cols(), "u8");
    describe("alphax" + mode_tag(r), m.K(), 1, "f64");
    describe("pix" + mode_tag(r), m.K(), 1, "f64");
    for (std::size_t b = 0; b < m.blocks.size(); ++b) {
      const LoadingBlock& blk = m.blocks[b];
      blocks.push_back({{"mode", r + 1}, {"block", b}, {"view", blk.view}, {"transposed", blk.transposed}});
      describe("W" + block_tag(r, b), blk.W.rows(), blk.W.cols(), "f64");
      describe("H" + block_tag(r, b), blk.H.rows(), blk.H.cols(), "u8");
      describe("alpha" + block_tag(r, b), m.K(), 1, "f64");
      describe("pi" + block_tag(r, b), m.K(), 1, "f64");
    }
  }
  for (std::size_t v = 0; v < first.tau.size(); ++v) {
    describe("tau_" + std::to_string(v), first.tau[v].size(), 1, "f64");
  }

  const json manifest = {{"format", kStoreFormat},
                         {"version", kStoreVersion},
                         {"chain_id", store.chain_id},
                         {"seed", store.config.seed},
                         {"config", to_json(store.config)},
                         {"layout", to_json(store.layout)},
                         {"model_layout", to_json(store.model_layout())},
                         {"K", K},
                         {"blocks", blocks},
                         {"parameters", params},
                         {"n_snapshots", store.snapshots.size()},
                         {"sweeps", store.sweeps},
                         {"byte_order", "little-endian"},
                         {"matrix_order", "row-major"}};
  {
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
  }

  for (std::size_t i = 0; i < store.snapshots.size(); ++i) {
    const ModelState& s = store.snapshots[i];
    for (std::size_t r = 0; r < s.modes.size(); ++r) {
      const ModeState& m = s.modes[r];
      write_matrix(dir / snapshot_file(i, "X" + mode_tag(r)), m.X);
      write_binary(dir / snapshot_file(i, "Hx" + mode_tag(r)), m.H);
      write_matrix(dir / snapshot_file(i, "alphax" + mode_tag(r)), m.alpha);
      write_matrix(dir / snapshot_file(i, "pix" + mode_tag(r)), m.pi);
      for (std::size_t b = 0; b < m.blocks.size(); ++b) {
        const LoadingBlock& blk = m.blocks[b];
        write_matrix(dir / snapshot_file(i, "W" + block_tag(r, b)), blk.W);
        write_binary(dir / snapshot_file(i, "H" + block_tag(r, b)), blk.H);
        write_matrix(dir / snapshot_file(i, "alpha" + block_tag(r, b)), blk.alpha);
        write_matrix(dir / snapshot_file(i, "pi" + block_tag(r, b)), blk.pi);
      }
    }
    for (std::size_t v = 0; v < s.tau.size(); ++v) {
      write_matrix(dir / snapshot_file(i, "tau_" + std::to_string(v)), s.tau[v]);
    }
  }
}

PosteriorStore load_store(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open " + manifest_path.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  if (manifest.value("format", "") != kStoreFormat) {
    throw DataError(manifest_path.string() + " is not a posterior store manifest");
  }

  PosteriorStore store;
  try {
    store.chain_id = manifest.at("chain_id").get<int>();
    store.config = chain_config_from_json(manifest.at("config"));
    store.layout = layout_from_json(manifest.at("layout"));
    store.sweeps = manifest.at("sweeps").get<long>();
    const auto n = manifest.at("n_snapshots").get<std::size_t>();
    const auto K = manifest.at("K").get<std::vector<Eigen::Index>>();
    const ModelState skeleton = empty_state(store.model_layout(), store.config.variant, K);
    for (std::size_t i = 0; i < n; ++i) {
      ModelState s = skeleton;
      for (std::size_t r = 0; r < s.modes.size(); ++r) {
        ModeState& m = s.modes[r];
        m.X = read_matrix(dir / snapshot_file(i, "X" + mode_tag(r)), m.X.rows(), m.X.cols());
        m.H = read_binary(dir / snapshot_file(i, "Hx" + mode_tag(r)), m.H.rows(), m.H.cols());
        m.alpha = read_matrix(dir / snapshot_file(i, "alphax" + mode_tag(r)), m.K(), 1);
        m.pi = read_matrix(dir / snapshot_file(i, "pix" + mode_tag(r)), m.K(), 1);
        for (std::size_t b = 0; b < m.blocks.size(); ++b) {
          LoadingBlock& blk = m.blocks[b];
          blk.W = read_matrix(dir / snapshot_file(i, "W" + block_tag(r, b)), blk.W.rows(), blk.W.cols());
          blk.H = read_binary(dir / snapshot_file(i, "H" + block_tag(r, b)), blk.H.rows(), blk.H.cols());
          blk.alpha = read_matrix(dir / snapshot_file(i, "alpha" + block_tag(r, b)), m.K(), 1);
          blk.pi = read_matrix(dir / snapshot_file(i, "pi" + block_tag(r, b)), m.K(), 1);
        }
      }
      for (std::size_t v = 0; v < s.tau.size(); ++v) {
        s.tau[v] = read_matrix(dir / snapshot_file(i, "tau_" + std::to_string(v)), s.tau[v].size(), 1);
      }
      store.snapshots.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  return store;
}

}  // namespace gfa
