#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gfa/data.hpp"
#include "gfa/simulate.hpp"

namespace gfa {

/// Tab-separated matrix with a header row of column names, a first column
/// of row names and "NA" for missing cells.
View read_view_tsv(const std::filesystem::path& path, const std::string& name, int mode);
void write_view_tsv(const View& view, const std::filesystem::path& path);

/// Collection manifest: {"views": [{"name", "file", "mode", "paired_to"}]}.
/// Files are resolved relative to the manifest. Mode-2 views must list the
/// column names of the first view as their row names, in order.
DataCollection read_collection(const std::filesystem::path& manifest);
/// Writes one <name>.tsv per view plus `collection.json`; returns the manifest path.
std::filesystem::path write_collection(const DataCollection& data, const std::filesystem::path& dir);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

GroundTruth read_truth(const std::filesystem::path& path, DataLayout& layout);
void write_truth(const GroundTruth& truth, const DataLayout& layout, const std::filesystem::path& path);

}  // namespace gfa
