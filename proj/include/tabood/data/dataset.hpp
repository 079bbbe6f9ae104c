#pragma once

#include "tabood/data/schema.hpp"
#include "tabood/numerics/types.hpp"

#include <string>
#include <vector>

namespace tabood::data {

/// Raw values of a split variable (age, gender, ...) kept for predicates,
/// independent of whether the variable is also a model feature.
struct SplitColumn {
  std::string name;
  std::vector<std::string> values;
};

/// Feature matrix + binary labels + schema. Immutable by convention: every
/// transformation returns a new Dataset.
struct Dataset {
  Schema schema;
  Matrix features;
  std::vector<int> labels;
  std::vector<SplitColumn> split_columns;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }

  /// Checks row-count consistency, label values, finiteness and category codes.
  void validate() const;

  const SplitColumn* split_column(const std::string& name) const;

  Dataset select_rows(const std::vector<std::size_t>& rows) const;
  /// Removes the named model features (absent names are ignored).
  Dataset drop_features(const std::vector<std::string>& names) const;
  /// Number of distinct label values present.
  std::size_t class_count() const;
  int max_label() const;
};

/// Drops every row that contains a non-finite feature.
Dataset drop_incomplete_rows(const Dataset& ds);

/// Concatenates rows of datasets with identical schemas.
Dataset concat_rows(const Dataset& a, const Dataset& b);

}  // namespace tabood::data
