#pragma once

#include <string>

namespace tabood::data {

/// Canonical key for a clinical variable so that the same measurement named
/// differently in two sources ("Temperature (c)" vs "Temperature") matches.
std::string canonical_variable(const std::string& name);

/// Canonical key for a feature: canonical variable plus window/statistic for
/// aggregates.
struct FeatureDesc;
std::string canonical_feature_key(const FeatureDesc& f);

}  // namespace tabood::data
