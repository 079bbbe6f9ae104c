#pragma once

#include "tabood/data/dataset.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tabood::data {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

/// RFC-4180-ish reader: comma separated, optional double quotes.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

struct TableOptions {
  std::string label_column = "label";
  /// Joins static rows with the time-series file; excluded from features.
  std::string id_column;
  std::vector<std::string> split_columns;
  /// Columns forced categorical; non-numeric columns are categorical anyway.
  std::vector<std::string> categorical_columns;
  std::vector<std::string> drop_columns;
};

struct TimeSeriesOptions {
  std::string id_column = "patient_id";
  std::string variable_column = "variable";
  std::string time_column = "time";
  std::string value_column = "value";
  /// Observations with time offset above this are ignored (first-48h rule).
  double max_time = 48.0;
  /// Empty: every variable seen in the file, sorted.
  std::vector<std::string> variables;
};

/// Static table -> Dataset. Values "", "NA", "NaN" are missing; rows with missing
/// features are dropped.
Dataset load_table(const CsvTable& table, const TableOptions& options);
Dataset load_csv_dataset(const std::filesystem::path& path, const TableOptions& options);

/// Long-format time series (patient, variable, time, value) aggregated to 42
/// features per variable and joined with the static table on `id_column`.
Dataset load_timeseries_dataset(const CsvTable& series, const CsvTable& statics,
                                const TableOptions& table_options,
                                const TimeSeriesOptions& series_options);

/// Binary container: magic, version, JSON schema header, raw doubles, labels.
void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace tabood::data
