#pragma once

#include "tabood/bench/config.hpp"
#include "tabood/bench/report.hpp"

#include <functional>
#include <optional>

namespace tabood::bench {

struct RunOptions {
  /// 0 = TABOOD_THREADS, falling back to 1.
  std::size_t threads = 0;
  bool keep_raw = false;
  std::optional<std::uint64_t> seed;
  /// Progress lines ("repeat 1/5 split age model mlp"), may be empty.
  std::function<void(const std::string&)> log;
};

std::size_t threads_from_env();

/// Loads every configured dataset once.
std::map<std::string, data::Dataset> load_datasets(const BenchConfig& cfg);

BenchReport run_benchmark(const BenchConfig& cfg, const RunOptions& options = {});
BenchReport run_benchmark(const BenchConfig& cfg, const std::map<std::string, data::Dataset>& datasets,
                          const RunOptions& options = {});

/// Runs `count` independent jobs on up to `threads` workers. Job i writes only
/// its own outputs, so results do not depend on the thread count.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job);

/// Numeric columns then one-hot blocks for categorical columns.
Matrix density_inputs(const data::Dataset& ds);

}  // namespace tabood::bench
