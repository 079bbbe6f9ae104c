#include "tabood/numerics/ops.hpp"

#include <algorithm>

namespace tabood {

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile: empty input");
  if (!(q >= 0.0 && q <= 100.0)) throw InvalidArgument("percentile: q outside [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

std::vector<Eigen::Index> argmax_rows(const Matrix& m) {
  std::vector<Eigen::Index> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < m.cols(); ++j)
      if (m(i, j) > m(i, best)) best = j;
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace tabood
