#include "tabood/bench/entropy_grid.hpp"
#include "tabood/bench/runner.hpp"
#include "tabood/data/io.hpp"
#include "tabood/data/standardizer.hpp"
#include "tabood/data/synthetic.hpp"
#include "tabood/error.hpp"
#include "tabood/models/checkpoint.hpp"

#include <CLI11.hpp>

#include <fstream>
#ifdef __GLIBC__
#include <malloc.h>
#endif
#include <iostream>

using namespace tabood;

namespace {

std::pair<double, double> parse_bounds(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw InvalidArgument("--bounds expects a,b");
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw InvalidArgument("--bounds expects two numbers, got '" + text + "'");
  }
}

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed, bool keep_raw, bool quiet,
            const std::string& out) {
  bench::BenchConfig cfg = bench::load_config(config);
  if (!out.empty()) cfg.output = out;
  bench::RunOptions opt;
  opt.seed = seed;
  opt.keep_raw = keep_raw;
  if (!quiet) opt.log = [](const std::string& line) { std::cerr << line << '\n'; };
  const bench::BenchReport report = bench::run_benchmark(cfg, opt);
  bench::write_report(report, cfg.output);
  std::size_t errors = 0;
  for (const auto& row : report.rows) errors += row.ok() ? 0 : 1;
  std::cout << "wrote " << (cfg.output / "report.md").string() << " (" << report.rows.size() << " rows, " << errors
            << " errors)\n";
  return 0;
}

int cmd_entropy_map(const std::string& model_path, const std::string& bounds, int resolution, const std::string& out) {
  const models::TrainedClassifier model = models::load_checkpoint(model_path);
  const auto [lo, hi] = parse_bounds(bounds);
  const models::GridSpec grid{lo, hi, lo, hi, resolution};
  const models::EntropyMap map = models::entropy_map(model, grid);
  bench::write_entropy_map(map, grid, out);
  std::cout << "wrote " << out << " (" << map.cells.size() << " cells, ln C = " << map.max_entropy << ")\n";
  return 0;
}

int cmd_report(const std::string& in, const std::string& format, const std::string& out) {
  const bench::BenchReport report = bench::read_raw(in);
  const std::string text = bench::emit(report, format);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw IoError("cannot write " + out);
    f << text;
  }
  return 0;
}

struct TrainArgs {
  std::string arch = "mlp";
  std::string out;
  std::string csv;
  std::string label = "label";
  std::size_t toy_n = 2000;
  std::size_t toy_classes = 3;
  std::uint64_t data_seed = 0;
  models::TrainConfig train;
  int width = 0;
  int depth = 0;
};

int cmd_train(const TrainArgs& a) {
  data::Dataset ds;
  if (!a.csv.empty()) {
    data::TableOptions opt;
    opt.label_column = a.label;
    ds = data::load_csv_dataset(a.csv, opt);
  } else {
    ds = data::make_toy2d(a.toy_n, a.toy_classes, a.data_seed);
  }
  const data::Standardizer st = data::Standardizer::fit(ds);
  models::ArchitectureConfig arch = models::ArchitectureConfig::defaults(models::parse_arch(a.arch));
  if (a.width > 0) arch.width = a.width;
  if (a.depth > 0) arch.depth = a.depth;
  const models::TrainedClassifier model = models::train_classifier(st.transform(ds), arch, a.train, st);
  models::save_checkpoint(model, a.out);
  std::cout << "wrote " << a.out << " (final loss " << model.epoch_losses().back() << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // keep large tape buffers on the heap instead of mmap/munmap per step
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  CLI::App app{"Out-of-distribution detection benchmark for tabular classifiers"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a benchmark config and write reports");
  std::string config;
  std::uint64_t seed = 0;
  std::string run_out;
  bool keep_raw = false, quiet = false;
  run->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", seed, "Override the base seed");
  run->add_option("--out", run_out, "Output directory (overrides [general] output)");
  run->add_flag("--keep-raw", keep_raw, "Also persist every detector score");
  run->add_flag("-q,--quiet", quiet, "No progress output");

  auto* emap = app.add_subcommand("entropy-map", "Softmax entropy of a 2D classifier over a grid");
  std::string model_path, bounds, out;
  int resolution = 100;
  emap->add_option("--model", model_path, "Checkpoint")->required()->check(CLI::ExistingFile);
  emap->add_option("--bounds", bounds, "a,b for both axes")->required();
  emap->add_option("--resolution", resolution, "Points per axis")->required();
  emap->add_option("--out", out, "Output CSV")->required();

  auto* report = app.add_subcommand("report", "Rebuild a report from a raw directory");
  std::string in, format = "markdown", report_out;
  report->add_option("--in", in, "Raw directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--format", format, "csv or markdown")->check(CLI::IsMember({"csv", "markdown", "md"}));
  report->add_option("--out", report_out, "Output file (default stdout)");

  auto* train = app.add_subcommand("train", "Train a classifier and save a checkpoint");
  TrainArgs ta;
  train->add_option("--arch", ta.arch, "mlp, resnet or ft_transformer");
  train->add_option("--out", ta.out, "Checkpoint path")->required();
  train->add_option("--csv", ta.csv, "Training table (default: 2D toy task)")->check(CLI::ExistingFile);
  train->add_option("--label", ta.label, "Label column for --csv");
  train->add_option("--toy-n", ta.toy_n, "Toy task rows");
  train->add_option("--toy-classes", ta.toy_classes, "Toy task classes");
  train->add_option("--data-seed", ta.data_seed, "Toy task seed");
  train->add_option("--epochs", ta.train.epochs);
  train->add_option("--batch-size", ta.train.batch_size);
  train->add_option("--lr", ta.train.lr);
  train->add_option("--seed", ta.train.seed);
  train->add_option("--width", ta.width);
  train->add_option("--depth", ta.depth);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt, keep_raw, quiet, run_out);
    if (*emap) return cmd_entropy_map(model_path, bounds, resolution, out);
    if (*report) return cmd_report(in, format, report_out);
    if (*train) return cmd_train(ta);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
