#include "gfa/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace gfa {

using nlohmann::json;

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

View read_view_tsv(const std::filesystem::path& path, const std::string& name, int mode) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  strip_cr(line);
  std::vector<std::string> header = split_tabs(line);
  if (header.size() < 2) throw DataError(path.string() + ": header has no columns");
  std::vector<std::string> col_names(header.begin() + 1, header.end());
  std::vector<std::string> row_names;
  std::vector<double> values;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    row_names.push_back(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const std::string& f = fields[c];
      if (f == "NA" || f.empty()) {
        values.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(f.c_str(), &end);
      if (end != f.c_str() + f.size() || errno == ERANGE || !std::isfinite(v)) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": invalid number '" + f + "'");
      }
      values.push_back(v);
    }
  }
  if (row_names.empty()) throw DataError(path.string() + ": no data rows");
  const auto rows = static_cast<Eigen::Index>(row_names.size());
  const auto cols = static_cast<Eigen::Index>(col_names.size());
  Matrix m = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), rows, cols);
  View view = make_view(name, mode, std::move(m));
  view.row_names = std::move(row_names);
  view.col_names = std::move(col_names);
  return view;
}

void write_view_tsv(const View& view, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  auto row_name = [&](Eigen::Index i) {
    return static_cast<std::size_t>(i) < view.row_names.size() ? view.row_names[static_cast<std::size_t>(i)]
                                                                : "r" + std::to_string(i + 1);
  };
  auto col_name = [&](Eigen::Index j) {
    return static_cast<std::size_t>(j) < view.col_names.size() ? view.col_names[static_cast<std::size_t>(j)]
                                                                : "c" + std::to_string(j + 1);
  };
  out << "id";
  for (Eigen::Index j = 0; j < view.cols(); ++j) out << '\t' << col_name(j);
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < view.rows(); ++i) {
    out << row_name(i);
    for (Eigen::Index j = 0; j < view.cols(); ++j) {
      const bool missing = view.missing.size() > 0 && view.missing(i, j);
      if (missing || std::isnan(view.values(i, j))) {
        out << "\tNA";
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", view.values(i, j));
        out << '\t' << buf;
      }
    }
    out << '\n';
  }
  if (!out) throw DataError("error writing " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

DataCollection read_collection(const std::filesystem::path& manifest) {
  const json j = read_json(manifest);
  const std::filesystem::path base = manifest.parent_path();
  DataCollection data;
  try {
    for (const json& v : j.at("views")) {
      const std::string name = v.at("name").get<std::string>();
      const int mode = v.value("mode", 1);
      std::filesystem::path file = v.at("file").get<std::string>();
      if (file.is_relative()) file = base / file;
      data.views.push_back(read_view_tsv(file, name, mode));
      if (mode == 2 && v.contains("paired_to") && !v.at("paired_to").is_null()) {
        const std::string partner = v.at("paired_to").get<std::string>();
        if (data.views.front().name != partner) {
          throw DataError("mode-2 view '" + name + "' is paired to '" + partner +
                          "' but only the first view can be paired");
        }
      }
    }
  } catch (const json::exception& e) {
    throw DataError(manifest.string() + ": " + e.what());
  }
  try {
    data.validate();
  } catch (const ConfigError& e) {
    throw DataError(manifest.string() + ": " + e.what());
  }
  for (const View& v : data.views) {
    if (v.mode == 2 && v.row_names != data.views.front().col_names) {
      throw DataError("row names of mode-2 view '" + v.name + "' differ from the column names of '" +
                      data.views.front().name + "'");
    }
    if (v.mode == 1 && v.row_names != data.views.front().row_names) {
      throw DataError("sample names of view '" + v.name + "' differ from those of '" + data.views.front().name +
                      "'");
    }
  }
  return data;
}

std::filesystem::path write_collection(const DataCollection& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json views = json::array();
  for (const View& v : data.views) {
    const std::string file = v.name + ".tsv";
    write_view_tsv(v, dir / file);
    json entry = {{"name", v.name}, {"file", file}, {"mode", v.mode}};
    entry["paired_to"] = v.mode == 2 ? json(data.views.front().name) : json(nullptr);
    views.push_back(std::move(entry));
  }
  const auto path = dir / "collection.json";
  write_json({{"views", views}}, path);
  return path;
}

GroundTruth read_truth(const std::filesystem::path& path, DataLayout& layout) {
  return ground_truth_from_json(read_json(path), layout);
}

void write_truth(const GroundTruth& truth, const DataLayout& layout, const std::filesystem::path& path) {
  write_json(to_json(truth, layout), path);
}

}  // namespace gfa
