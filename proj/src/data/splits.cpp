#include "tabood/data/splits.hpp"

#include "tabood/data/variables.hpp"
#include "tabood/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace tabood::data {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Predicate Predicate::parse(const std::string& text) {
  static const std::vector<std::pair<std::string, Op>> ops = {
      {">=", Op::ge}, {"<=", Op::le}, {"==", Op::eq}, {"!=", Op::ne}, {">", Op::gt}, {"<", Op::lt}};
  Predicate p;
  const auto in_pos = text.find(" in ");
  if (in_pos != std::string::npos) {
    p.column = trim(text.substr(0, in_pos));
    p.op = Op::in;
    std::stringstream ss(text.substr(in_pos + 4));
    std::string item;
    while (std::getline(ss, item, '|')) p.values.push_back(trim(item));
  } else {
    for (const auto& [token, op] : ops) {
      const auto pos = text.find(token);
      if (pos == std::string::npos) continue;
      p.column = trim(text.substr(0, pos));
      p.op = op;
      p.values = {trim(text.substr(pos + token.size()))};
      break;
    }
  }
  if (p.column.empty() || p.values.empty() || p.values.front().empty())
    throw InvalidArgument("predicate: cannot parse '" + text + "'");
  if (p.op == Op::gt || p.op == Op::ge || p.op == Op::lt || p.op == Op::le) {
    double v;
    if (!parse_double(p.values.front(), v))
      throw InvalidArgument("predicate: ordering comparison needs a numeric operand in '" + text + "'");
  }
  return p;
}

bool Predicate::matches(const std::string& raw) const {
  const std::string value = trim(raw);
  switch (op) {
    case Op::eq: return value == values.front();
    case Op::ne: return value != values.front();
    case Op::in: return std::find(values.begin(), values.end(), value) != values.end();
    default: break;
  }
  double x, threshold;
  parse_double(values.front(), threshold);
  if (!parse_double(value, x)) {
    // Ages such as "> 89" are recorded as text in eICU.
    std::string digits;
    for (char c : value)
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') digits.push_back(c);
    if (!parse_double(digits, x)) return false;
  }
  switch (op) {
    case Op::gt: return x > threshold;
    case Op::ge: return x >= threshold;
    case Op::lt: return x < threshold;
    case Op::le: return x <= threshold;
    default: return false;
  }
}

std::string Predicate::to_string() const {
  switch (op) {
    case Op::gt: return column + " > " + values.front();
    case Op::ge: return column + " >= " + values.front();
    case Op::lt: return column + " < " + values.front();
    case Op::le: return column + " <= " + values.front();
    case Op::eq: return column + " == " + values.front();
    case Op::ne: return column + " != " + values.front();
    case Op::in: {
      std::string s = column + " in ";
      for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "|" : "") + values[i];
      return s;
    }
  }
  return column;
}

const std::vector<NearSplitPreset>& near_split_presets() {
  static const std::vector<NearSplitPreset> presets = {
      {"eicu_age", "eicu", "age > 70"},
      {"eicu_gender", "eicu", "gender in Female|F"},
      {"eicu_ethnicity", "eicu", "ethnicity in Caucasian|African American"},
      {"mimic_age", "mimic", "age > 70"},
      {"mimic_gender", "mimic", "gender in Female|F"},
      {"mimic_admission_type", "mimic", "admission_type == SURGICAL SAME DAY ADMISSION"},
      {"mimic_first_careunit", "mimic",
       "first_careunit in Cardiac Vascular Intensive Care Unit (CVICU)|CVICU"},
  };
  return presets;
}

std::pair<Dataset, Dataset> near_ood_split(const Dataset& ds, const Predicate& predicate) {
  const SplitColumn* col = ds.split_column(predicate.column);
  if (col == nullptr)
    throw InvalidArgument("near_ood_split: split column '" + predicate.column + "' not retained");
  std::vector<std::size_t> id_rows, ood_rows;
  for (std::size_t i = 0; i < col->values.size(); ++i)
    (predicate.matches(col->values[i]) ? id_rows : ood_rows).push_back(i);
  if (id_rows.empty() || ood_rows.empty())
    throw DegenerateSplit("near_ood_split: predicate '" + predicate.to_string() + "' leaves " +
                          (id_rows.empty() ? "ID" : "OOD") + " empty");
  const Dataset pruned = ds.drop_features({predicate.column});
  return {pruned.select_rows(id_rows), pruned.select_rows(ood_rows)};
}

std::pair<Dataset, Dataset> far_ood_align(const Dataset& a, const Dataset& b) {
  std::map<std::string, std::size_t> b_keys;
  for (std::size_t j = 0; j < b.schema.size(); ++j) b_keys.emplace(canonical_feature_key(b.schema[j]), j);

  std::vector<FeatureDesc> shared;
  std::vector<std::size_t> cols_a, cols_b;
  for (std::size_t j = 0; j < a.schema.size(); ++j) {
    const auto it = b_keys.find(canonical_feature_key(a.schema[j]));
    if (it == b_keys.end() || a.schema[j].kind != b.schema[it->second].kind) continue;
    FeatureDesc f = a.schema[j];
    if (!f.is_numeric()) {
      std::set<std::string> cats(f.categories.begin(), f.categories.end());
      cats.insert(b.schema[it->second].categories.begin(), b.schema[it->second].categories.end());
      f.categories.assign(cats.begin(), cats.end());
    }
    shared.push_back(std::move(f));
    cols_a.push_back(j);
    cols_b.push_back(it->second);
  }
  if (shared.empty()) throw InvalidArgument("far_ood_align: datasets share no features");

  auto project = [&shared](const Dataset& src, const std::vector<std::size_t>& cols) {
    Dataset out;
    out.schema = Schema(shared);
    out.features.resize(src.features.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      out.features.col(kk) = src.features.col(static_cast<Eigen::Index>(cols[k]));
      const FeatureDesc& from = src.schema[cols[k]];
      if (from.is_numeric()) continue;
      const auto& merged = shared[k].categories;
      for (Eigen::Index i = 0; i < out.features.rows(); ++i) {
        const auto code = static_cast<std::size_t>(out.features(i, kk));
        const auto pos = std::lower_bound(merged.begin(), merged.end(), from.categories[code]);
        out.features(i, kk) = static_cast<double>(pos - merged.begin());
      }
    }
    out.labels = src.labels;
    out.split_columns = src.split_columns;
    return out;
  };
  return {project(a, cols_a), project(b, cols_b)};
}

Dataset synthesize_ood(const Dataset& id_test, std::size_t feature_index, double factor) {
  if (feature_index >= id_test.schema.size())
    throw InvalidArgument("synthesize_ood: feature index out of range");
  if (!id_test.schema[feature_index].is_numeric())
    throw InvalidArgument("synthesize_ood: feature '" + id_test.schema[feature_index].name +
                          "' is categorical");
  if (!(factor > 0)) throw InvalidArgument("synthesize_ood: factor must be positive");
  Dataset out = id_test;
  out.features.col(static_cast<Eigen::Index>(feature_index)) *= factor;
  return out;
}

std::vector<std::size_t> sample_corruption_features(const Dataset& ds, std::size_t count, Rng& rng) {
  const std::vector<std::size_t> numeric = ds.schema.numeric_indices();
  if (numeric.empty()) throw InvalidArgument("sample_corruption_features: no numeric features");
  std::vector<std::size_t> out;
  out.reserve(count);
  while (out.size() < count) {
    const auto perm = rng.permutation(numeric.size());
    for (std::size_t p : perm) {
      if (out.size() == count) break;
      out.push_back(numeric[p]);
    }
  }
  return out;
}

RowSplit split_rows(std::size_t n, double val_fraction, double test_fraction, Rng& rng) {
  if (val_fraction < 0 || test_fraction <= 0 || val_fraction + test_fraction >= 1)
    throw InvalidArgument("split_rows: fractions must satisfy val >= 0, test > 0, val + test < 1");
  const auto perm = rng.permutation(n);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test + n_val >= n) throw InvalidArgument("split_rows: too few rows to split");
  RowSplit s;
  s.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test),
               perm.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  s.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), perm.end());
  return s;
}

}  // namespace tabood::data
