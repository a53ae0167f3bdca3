#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gfa/common.hpp"
#include "gfa/sampler.hpp"

namespace gfa {

// Flat binary matrices: row-major, 64-bit little-endian floats, or one byte
// per entry for indicator matrices.
void write_matrix(const std::filesystem::path& path, const Matrix& m);
void write_binary(const std::filesystem::path& path, const BinaryMatrix& m);
Matrix read_matrix(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols);
BinaryMatrix read_binary(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols);

nlohmann::json to_json(const HyperParams& hyper);
HyperParams hyper_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ChainConfig& config);
ChainConfig chain_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DataLayout& layout);
DataLayout layout_from_json(const nlohmann::json& j);

/// Writes `manifest.json` and one `snapshot_<i>_<param>.bin` per parameter
/// and snapshot into `dir` (created if needed).
void save_store(const PosteriorStore& store, const std::filesystem::path& dir);
PosteriorStore load_store(const std::filesystem::path& dir);

/// Parameter file stems of one snapshot, in write order.
std::vector<std::string> snapshot_parameter_names(const ModelState& state);

}  // namespace gfa
