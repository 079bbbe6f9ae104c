#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tabood::data {

/// Seven windows: the full series, and the first/last 10, 25 and 50 percent.
inline constexpr std::array<std::string_view, 7> kWindowNames = {
    "full", "first10", "first25", "first50", "last10", "last25", "last50"};
inline constexpr std::array<std::string_view, 6> kStatisticNames = {
    "mean", "std", "min", "max", "skewness", "count"};
inline constexpr std::size_t kFeaturesPerVariable = kWindowNames.size() * kStatisticNames.size();

/// Number of elements a window keeps from a series of length n:
/// ceil(fraction * n), at least 1 (0 for an empty series).
std::size_t window_length(std::size_t n, double fraction);

/// The 42 window statistics of one time-ordered series, window-major.
/// Population std (0 below two samples), skewness m3 / m2^1.5 (0 below three
/// samples or for a constant window). An empty series yields 42 NaNs.
std::array<double, kFeaturesPerVariable> aggregate_series(std::span<const double> series);

/// Concatenates aggregate_series over `variables` in order; variables absent
/// from `series` produce NaN blocks.
std::vector<double> aggregate_time_series(const std::map<std::string, std::vector<double>>& series,
                                          const std::vector<std::string>& variables);

}  // namespace tabood::data
