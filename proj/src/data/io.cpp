#include "tabood/data/io.hpp"

#include "tabood/data/aggregate.hpp"
#include "tabood/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace tabood::data {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'T', 'A', 'B', 'O', 'O', 'D', 'D', 'S'};
constexpr std::uint32_t kFormatVersion = 1;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& raw) {
  const std::string s = trim(raw);
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null" || s == "None";
}

bool parse_number(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (*b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e && std::isfinite(out);
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

int parse_label(const std::string& raw, std::size_t row) {
  double v;
  if (!parse_number(raw, v) || v < 0 || v != std::floor(v))
    throw InvalidArgument("label in row " + std::to_string(row) + " is not a non-negative integer: '" +
                          raw + "'");
  return static_cast<int>(v);
}

struct Table {
  Dataset ds;  // rows not yet filtered for completeness
  std::vector<std::string> ids;
};

Table build_table(const CsvTable& table, const TableOptions& o) {
  const std::size_t label_col = table.column(o.label_column);
  std::optional<std::size_t> id_col;
  if (!o.id_column.empty()) id_col = table.column(o.id_column);

  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    const std::string& name = table.header[j];
    if (j == label_col || (id_col && j == *id_col) || contains(o.drop_columns, name)) continue;
    feature_cols.push_back(j);
  }

  std::vector<FeatureDesc> features;
  for (std::size_t j : feature_cols) {
    FeatureDesc f;
    f.name = table.header[j];
    bool categorical = contains(o.categorical_columns, f.name);
    std::set<std::string> cats;
    for (const auto& row : table.rows) {
      if (is_missing(row[j])) continue;
      double v;
      if (!parse_number(row[j], v)) categorical = true;
      cats.insert(trim(row[j]));
    }
    if (categorical) {
      f.kind = FeatureKind::categorical;
      f.categories.assign(cats.begin(), cats.end());
      if (f.categories.empty()) f.categories.push_back("<missing>");
    }
    features.push_back(std::move(f));
  }

  Table out;
  out.ds.schema = Schema(features);
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  out.ds.features.resize(n, static_cast<Eigen::Index>(feature_cols.size()));
  out.ds.labels.resize(table.rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    out.ds.labels[static_cast<std::size_t>(i)] = parse_label(row[label_col], static_cast<std::size_t>(i));
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const std::string& cell = row[feature_cols[k]];
      const FeatureDesc& f = features[k];
      double value = std::numeric_limits<double>::quiet_NaN();
      if (!is_missing(cell)) {
        if (f.is_numeric()) {
          parse_number(cell, value);
        } else {
          const auto pos = std::lower_bound(f.categories.begin(), f.categories.end(), trim(cell));
          value = static_cast<double>(pos - f.categories.begin());
        }
      }
      out.ds.features(i, static_cast<Eigen::Index>(k)) = value;
    }
    if (id_col) out.ids.push_back(trim(row[*id_col]));
  }
  for (const std::string& name : o.split_columns) {
    const std::size_t j = table.column(name);
    SplitColumn c{name, {}};
    for (const auto& row : table.rows) c.values.push_back(trim(row[j]));
    out.ds.split_columns.push_back(std::move(c));
  }
  return out;
}

json schema_to_json(const Schema& schema) {
  json arr = json::array();
  for (const FeatureDesc& f : schema.features()) {
    arr.push_back({{"name", f.name},
                   {"kind", f.is_numeric() ? "numeric" : "categorical"},
                   {"categories", f.categories},
                   {"provenance", f.provenance == Provenance::time_dependent ? "time_dependent"
                                                                              : "time_independent"},
                   {"variable", f.variable},
                   {"window", f.window},
                   {"statistic", f.statistic}});
  }
  return arr;
}

Schema schema_from_json(const json& arr) {
  std::vector<FeatureDesc> features;
  for (const json& j : arr) {
    FeatureDesc f;
    f.name = j.at("name").get<std::string>();
    f.kind = j.at("kind").get<std::string>() == "numeric" ? FeatureKind::numeric : FeatureKind::categorical;
    f.categories = j.at("categories").get<std::vector<std::string>>();
    f.provenance = j.at("provenance").get<std::string>() == "time_dependent" ? Provenance::time_dependent
                                                                               : Provenance::time_independent;
    f.variable = j.at("variable").get<std::string>();
    f.window = j.at("window").get<std::string>();
    f.statistic = j.at("statistic").get<std::string>();
    features.push_back(std::move(f));
  }
  return Schema(std::move(features));
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return j;
  throw InvalidArgument("csv: no column named '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      any = false;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (quoted) throw InvalidArgument("csv: unterminated quoted field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  if (records.empty()) throw InvalidArgument("csv: missing header row");
  CsvTable table;
  table.header = std::move(records.front());
  for (std::string& h : table.header) h = trim(h);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      throw InvalidArgument("csv: row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                            " fields, header has " + std::to_string(table.header.size()));
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

Dataset load_table(const CsvTable& table, const TableOptions& options) {
  Dataset ds = drop_incomplete_rows(build_table(table, options).ds);
  ds.validate();
  return ds;
}

Dataset load_csv_dataset(const std::filesystem::path& path, const TableOptions& options) {
  return load_table(read_csv(path), options);
}

Dataset load_timeseries_dataset(const CsvTable& series, const CsvTable& statics,
                                const TableOptions& table_options, const TimeSeriesOptions& so) {
  if (table_options.id_column.empty())
    throw InvalidArgument("timeseries: the static table needs an id column to join on");
  const std::size_t c_id = series.column(so.id_column);
  const std::size_t c_var = series.column(so.variable_column);
  const std::size_t c_time = series.column(so.time_column);
  const std::size_t c_val = series.column(so.value_column);

  using Observations = std::vector<std::pair<double, double>>;
  std::map<std::string, std::map<std::string, Observations>> by_patient;
  std::set<std::string> seen;
  for (const auto& row : series.rows) {
    double t, v;
    if (!parse_number(row[c_time], t) || !parse_number(row[c_val], v)) continue;
    if (t > so.max_time) continue;
    const std::string var = trim(row[c_var]);
    seen.insert(var);
    by_patient[trim(row[c_id])][var].emplace_back(t, v);
  }
  const std::vector<std::string> variables =
      so.variables.empty() ? std::vector<std::string>(seen.begin(), seen.end()) : so.variables;

  Table base = build_table(statics, table_options);
  const std::size_t n = base.ds.rows();
  const std::size_t agg = variables.size() * kFeaturesPerVariable;
  Matrix agg_features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(agg));
  for (std::size_t i = 0; i < n; ++i) {
    std::map<std::string, std::vector<double>> values;
    const auto it = by_patient.find(base.ids[i]);
    if (it != by_patient.end()) {
      for (auto [var, obs] : it->second) {
        std::stable_sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        auto& dst = values[var];
        for (const auto& o : obs) dst.push_back(o.second);
      }
    }
    const std::vector<double> row = aggregate_time_series(values, variables);
    for (std::size_t j = 0; j < agg; ++j)
      agg_features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }

  std::vector<FeatureDesc> features;
  for (const std::string& var : variables)
    for (std::string_view w : kWindowNames)
      for (std::string_view s : kStatisticNames) {
        FeatureDesc f;
        f.variable = var;
        f.window = std::string(w);
        f.statistic = std::string(s);
        f.name = aggregate_feature_name(f.variable, f.window, f.statistic);
        f.provenance = Provenance::time_dependent;
        features.push_back(std::move(f));
      }
  for (const FeatureDesc& f : base.ds.schema.features()) features.push_back(f);

  Dataset ds;
  ds.schema = Schema(std::move(features));
  ds.features.resize(static_cast<Eigen::Index>(n), ds.schema.size());
  ds.features << agg_features, base.ds.features;
  ds.labels = std::move(base.ds.labels);
  ds.split_columns = std::move(base.ds.split_columns);
  ds = drop_incomplete_rows(ds);
  ds.validate();
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little, "binary container assumes little-endian");
  ds.validate();
  json header = {{"schema", schema_to_json(ds.schema)},
                 {"rows", ds.rows()},
                 {"cols", ds.cols()},
                 {"split_columns", json::array()}};
  for (const SplitColumn& c : ds.split_columns)
    header["split_columns"].push_back({{"name", c.name}, {"values", c.values}});
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t version = kFormatVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(ds.features.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(ds.features.size())));
  std::vector<std::int32_t> labels(ds.labels.begin(), ds.labels.end());
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(sizeof(std::int32_t) * labels.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("'" + path.string() + "' is not a dataset container");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kFormatVersion) throw IoError("unsupported dataset container version " + std::to_string(version));
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  const json header = json::parse(text);

  Dataset ds;
  ds.schema = schema_from_json(header.at("schema"));
  const auto rows = header.at("rows").get<Eigen::Index>();
  const auto cols = header.at("cols").get<Eigen::Index>();
  ds.features.resize(rows, cols);
  in.read(reinterpret_cast<char*>(ds.features.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rows * cols)));
  std::vector<std::int32_t> labels(static_cast<std::size_t>(rows));
  in.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(sizeof(std::int32_t) * labels.size()));
  if (!in) throw IoError("truncated dataset container '" + path.string() + "'");
  ds.labels.assign(labels.begin(), labels.end());
  for (const json& c : header.at("split_columns"))
    ds.split_columns.push_back(SplitColumn{c.at("name").get<std::string>(), c.at("values").get<std::vector<std::string>>()});
  ds.validate();
  return ds;
}

}  // namespace tabood::data
