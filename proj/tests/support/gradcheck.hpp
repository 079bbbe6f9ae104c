#pragma once

// Finite-difference oracle for tape gradients. Test-only.

#include "tabood/numerics/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace tabood::testing {

using ScalarGraph = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_input = 0;
  std::vector<double> errors;  // one per input
};

inline double evaluate(const ScalarGraph& f, const std::vector<Matrix>& inputs) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const Matrix& m : inputs) vars.push_back(tape.constant(m));
  return f(tape, vars).value()(0, 0);
}

/// Compares tape gradients with central differences, one relative error per
/// input tensor: |g_tape - g_fd|_2 / max(|g_tape|_2 + |g_fd|_2, floor).
inline GradCheckResult check_gradients(const ScalarGraph& f, std::vector<Matrix> inputs,
                                       double step = 1e-3, double floor = 1e-12) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const Matrix& m : inputs) vars.push_back(tape.variable(m));
  ad::Var out = f(tape, vars);
  tape.backward(out);

  GradCheckResult result;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Matrix analytic = tape.gradient(vars[k]);
    Matrix numeric(inputs[k].rows(), inputs[k].cols());
    for (Eigen::Index i = 0; i < inputs[k].size(); ++i) {
      const double saved = inputs[k].data()[i];
      inputs[k].data()[i] = saved + step;
      const double up = evaluate(f, inputs);
      inputs[k].data()[i] = saved - step;
      const double down = evaluate(f, inputs);
      inputs[k].data()[i] = saved;
      numeric.data()[i] = (up - down) / (2.0 * step);
    }
    const double denom = std::max(analytic.norm() + numeric.norm(), floor);
    const double rel = (analytic - numeric).norm() / denom;
    result.errors.push_back(rel);
    if (rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_input = k;
    }
  }
  return result;
}

}  // namespace tabood::testing
