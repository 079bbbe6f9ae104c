#include "tabood/data/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tabood::data {

namespace {

constexpr std::array<double, 3> kFractions = {0.10, 0.25, 0.50};

void window_stats(std::span<const double> w, double* out) {
  const auto n = static_cast<double>(w.size());
  double mean = 0.0;
  for (double v : w) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : w) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  out[0] = mean;
  out[1] = w.size() < 2 ? 0.0 : std::sqrt(m2);
  out[2] = *std::min_element(w.begin(), w.end());
  out[3] = *std::max_element(w.begin(), w.end());
  out[4] = (w.size() < 3 || m2 <= 0.0) ? 0.0 : m3 / std::pow(m2, 1.5);
  out[5] = n;
}

}  // namespace

std::size_t window_length(std::size_t n, double fraction) {
  if (n == 0) return 0;
  // Guard against 0.1 * 10 landing a hair above 1.
  const double raw = fraction * static_cast<double>(n);
  auto len = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::clamp<std::size_t>(len, 1, n);
}

std::array<double, kFeaturesPerVariable> aggregate_series(std::span<const double> series) {
  std::array<double, kFeaturesPerVariable> out;
  if (series.empty()) {
    out.fill(std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  const std::size_t n = series.size();
  constexpr std::size_t k = kStatisticNames.size();
  window_stats(series, out.data());
  for (std::size_t f = 0; f < kFractions.size(); ++f) {
    const std::size_t len = window_length(n, kFractions[f]);
    window_stats(series.first(len), out.data() + (1 + f) * k);
    window_stats(series.last(len), out.data() + (4 + f) * k);
  }
  return out;
}

std::vector<double> aggregate_time_series(const std::map<std::string, std::vector<double>>& series,
                                          const std::vector<std::string>& variables) {
  std::vector<double> out;
  out.reserve(variables.size() * kFeaturesPerVariable);
  for (const std::string& v : variables) {
    const auto it = series.find(v);
    const auto block = it == series.end() ? aggregate_series({}) : aggregate_series(it->second);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

}  // namespace tabood::data
