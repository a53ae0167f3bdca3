#include "gfa/data.hpp"

#include <set>

namespace gfa {

View make_view(std::string name, int mode, Matrix values) {
  View view;
  view.name = std::move(name);
  view.mode = mode;
  view.missing = values.array().isNaN();
  view.values = std::move(values);
  return view;
}

void DataCollection::validate() const {
  if (views.empty()) throw ConfigError("data collection has no views");
  const View& first = views.front();
  if (first.mode != 1) throw ConfigError("the first view must be a mode-1 view");
  std::set<std::string> names;
  for (const View& v : views) {
    if (v.mode != 1 && v.mode != 2) {
      throw ConfigError("view '" + v.name + "' has invalid mode " + std::to_string(v.mode));
    }
    if (!names.insert(v.name).second) throw ConfigError("duplicate view name '" + v.name + "'");
    if (v.values.rows() == 0 || v.values.cols() == 0) {
      throw ConfigError("view '" + v.name + "' is empty");
    }
    if (v.missing.rows() != v.values.rows() || v.missing.cols() != v.values.cols()) {
      throw ConfigError("missing mask of view '" + v.name + "' does not match its dimensions");
    }
    const Eigen::Index expected_rows = v.mode == 1 ? first.rows() : first.cols();
    if (v.rows() != expected_rows) {
      throw ConfigError("view '" + v.name + "' has " + std::to_string(v.rows()) + " rows, expected " +
                        std::to_string(expected_rows));
    }
  }
}

bool DataCollection::two_mode() const {
  for (const View& v : views) {
    if (v.mode == 2) return true;
  }
  return false;
}

std::vector<std::size_t> DataCollection::views_in_mode(int mode) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (views[i].mode == mode) out.push_back(i);
  }
  return out;
}

std::size_t DataCollection::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (views[i].name == name) return i;
  }
  throw LookupError("no view named '" + name + "'");
}

DataLayout DataLayout::of(const DataCollection& data) {
  DataLayout layout;
  for (const View& v : data.views) layout.views.push_back({v.name, v.mode, v.rows(), v.cols()});
  return layout;
}

bool DataLayout::two_mode() const {
  for (const ViewShape& v : views) {
    if (v.mode == 2) return true;
  }
  return false;
}

DataCollection concatenate_views(const DataCollection& data) {
  data.validate();
  if (data.two_mode()) throw ConfigError("view concatenation requires single-mode data");
  if (data.views.size() == 1) return data;
  Eigen::Index total = 0;
  for (const View& v : data.views) total += v.cols();
  View joined;
  joined.mode = 1;
  joined.values.resize(data.n_samples(), total);
  joined.missing.resize(data.n_samples(), total);
  joined.row_names = data.views.front().row_names;
  Eigen::Index offset = 0;
  for (const View& v : data.views) {
    joined.name += (joined.name.empty() ? "" : "+") + v.name;
    joined.values.middleCols(offset, v.cols()) = v.values;
    joined.missing.middleCols(offset, v.cols()) = v.missing;
    joined.col_names.insert(joined.col_names.end(), v.col_names.begin(), v.col_names.end());
    offset += v.cols();
  }
  DataCollection out;
  out.views.push_back(std::move(joined));
  return out;
}

DataLayout concatenate_layout(const DataLayout& layout) {
  if (layout.views.size() == 1) return layout;
  ViewShape joined;
  joined.rows = layout.views.front().rows;
  for (const ViewShape& v : layout.views) {
    joined.name += (joined.name.empty() ? "" : "+") + v.name;
    joined.cols += v.cols;
  }
  return DataLayout{{joined}};
}

std::vector<Eigen::Index> concatenation_offsets(const DataLayout& layout) {
  std::vector<Eigen::Index> offsets;
  Eigen::Index offset = 0;
  for (const ViewShape& v : layout.views) {
    offsets.push_back(offset);
    offset += v.cols;
  }
  return offsets;
}

}  // namespace gfa
