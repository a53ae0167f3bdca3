#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gfa/common.hpp"

namespace gfa {

/// One observed matrix. Mode-1 views are samples x features; mode-2 views are
/// (features of the first view) x (mode-2 features).
struct View {
  std::string name;
  int mode = 1;
  Matrix values;
  BoolMatrix missing;  // true marks an unobserved cell
  std::vector<std::string> row_names;
  std::vector<std::string> col_names;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  Eigen::Index observed_count() const { return values.size() - missing.count(); }
};

/// Builds a view with no missing cells except where `values` holds NaN.
View make_view(std::string name, int mode, Matrix values);

/// Multi-view collection. The first view is always a mode-1 view; when
/// mode-2 views are present they pair with its features (columns).
struct DataCollection {
  std::vector<View> views;

  /// Throws ConfigError on any shape inconsistency.
  void validate() const;

  bool two_mode() const;
  std::vector<std::size_t> views_in_mode(int mode) const;
  Eigen::Index n_samples() const { return views.empty() ? 0 : views.front().rows(); }
  std::size_t index_of(const std::string& name) const;  // throws LookupError
};

/// Shape echo of a collection, carried by posterior stores.
struct ViewShape {
  std::string name;
  int mode = 1;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  bool operator==(const ViewShape&) const = default;
};

struct DataLayout {
  std::vector<ViewShape> views;

  static DataLayout of(const DataCollection& data);
  bool two_mode() const;
  bool operator==(const DataLayout&) const = default;
};

/// Joins all mode-1 views column-wise into one view (the FA baseline input).
DataCollection concatenate_views(const DataCollection& data);
DataLayout concatenate_layout(const DataLayout& layout);

/// Column offsets of each original view inside the concatenated view.
std::vector<Eigen::Index> concatenation_offsets(const DataLayout& layout);

}  // namespace gfa
