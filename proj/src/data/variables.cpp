#include "tabood/data/variables.hpp"

#include "tabood/data/schema.hpp"

#include <cctype>
#include <map>

namespace tabood::data {

namespace {

std::string normalize(const std::string& name) {
  std::string out;
  bool pending_sep = false;
  for (char ch : name) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      if (pending_sep && !out.empty()) out.push_back('_');
      out.push_back(static_cast<char>(std::tolower(c)));
      pending_sep = false;
    } else {
      pending_sep = true;
    }
  }
  return out;
}

// eICU and MIMIC-IV spellings of the shared clinical variables, keyed by
// their normalized form.
const std::map<std::string, std::string>& alias_table() {
  static const std::map<std::string, std::string> table = {
      {"ph", "ph"},
      {"temperature_c", "temperature"},
      {"temperature", "temperature"},
      {"respiratory_rate", "respiratory_rate"},
      {"o2_saturation", "oxygen_saturation"},
      {"oxygen_saturation", "oxygen_saturation"},
      {"map_mmhg", "mean_blood_pressure"},
      {"mean_blood_pressure", "mean_blood_pressure"},
      {"heart_rate", "heart_rate"},
      {"glucose", "glucose"},
      {"invasive_bp_diastolic", "diastolic_blood_pressure"},
      {"diastolic_blood_pressure", "diastolic_blood_pressure"},
      {"invasive_bp_systolic", "systolic_blood_pressure"},
      {"systolic_blood_pressure", "systolic_blood_pressure"},
      {"gender", "gender"},
      {"age", "age"},
  };
  return table;
}

}  // namespace

std::string canonical_variable(const std::string& name) {
  const std::string key = normalize(name);
  const auto& table = alias_table();
  const auto it = table.find(key);
  return it == table.end() ? key : it->second;
}

std::string canonical_feature_key(const FeatureDesc& f) {
  if (f.provenance == Provenance::time_dependent)
    return canonical_variable(f.variable) + "|" + f.window + "|" + f.statistic;
  return canonical_variable(f.name);
}

}  // namespace tabood::data
