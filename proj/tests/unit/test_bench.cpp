#include <doctest.h>

#include "support/oracles.hpp"
#include "tabood/bench/entropy_grid.hpp"
#include "tabood/bench/runner.hpp"
#include "tabood/data/synthetic.hpp"
#include "tabood/error.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace tabood;
using namespace tabood::bench;

namespace {

const char* kFarConfig = R"(
[general]
repeats = 1
seed = 3
metrics = auroc

[data.id]
type = blobs
n = 400
d = 4
separation = 4
seed = 1

[data.shifted]
type = blobs
n = 200
d = 4
separation = 4
offset = 100
seed = 2

[models]
architectures = mlp
epochs = 2
width = 16
depth = 1

[detectors]
methods = MDS, PPCA

[split.far]
type = far
dataset = id
ood = shifted
)";

std::string synth_config(const std::string& extra = "") {
  return std::string(R"(
[general]
repeats = 2
seed = 11

[data.id]
type = blobs
n = 300
d = 5
separation = 4
seed = 4

[models]
architectures = mlp
epochs = 2
width = 16
depth = 1

[detectors]
methods = MSP, KNN, OpenMax, LOF
openmax_tail = 1000

[split.scaled]
type = synthesized
dataset = id
factors = 10, 1000
features = 3
)") + extra;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("tabood_bench_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("ini sections keep order and reject malformed lines") {
  const IniFile ini = IniFile::parse("# top\n[a]\nx = 1 ; trailing\ny=two words\n\n[b]\nz = 3\n");
  REQUIRE(ini.sections.size() == 2);
  CHECK(ini.sections[0].name == "a");
  CHECK(ini.sections[0].get("x") == "1");
  CHECK(ini.sections[0].get("y") == "two words");
  CHECK(ini.sections[0].get("missing", "fallback") == "fallback");
  CHECK(ini.find("b")->get("z") == "3");
  CHECK_THROWS_AS(IniFile::parse("x = 1\n"), InvalidArgument);
  CHECK_THROWS_AS(IniFile::parse("[a]\nx = 1\nx = 2\n"), InvalidArgument);
  CHECK_THROWS_AS(IniFile::parse("[a]\nnot a pair\n"), InvalidArgument);
  CHECK_THROWS_AS(IniFile::parse("[a\n"), InvalidArgument);
  CHECK_THROWS_AS(IniFile::parse("[a]\n[a]\n"), InvalidArgument);
}

TEST_CASE("config defaults, expansion and seeds") {
  const BenchConfig cfg = parse_config(R"(
[data.d]
type = blobs
[models]
architectures = mlp, resnet
[detectors]
methods = msp, odin, ae, lof
[split.s]
type = synthesized
dataset = d
[split.n]
type = far
dataset = d
ood = d
)");
  CHECK(cfg.repeats == 5);
  CHECK(cfg.train.epochs == 10);
  CHECK(cfg.train.batch_size == 64);
  CHECK(cfg.train.lr == 1e-3);
  CHECK(cfg.posthoc == std::vector<posthoc::Method>{posthoc::Method::msp, posthoc::Method::odin});
  CHECK(cfg.density == std::vector<density::Method>{density::Method::ae, density::Method::lof});
  REQUIRE(cfg.splits.size() == 4);
  CHECK(cfg.splits[0].name == "s_x10");
  CHECK(cfg.splits[1].name == "s_x100");
  CHECK(cfg.splits[2].name == "s_x1000");
  CHECK(cfg.splits[2].factor == 1000.0);
  CHECK(cfg.splits[0].features == 100);
  CHECK(cfg.splits[0].group == "s");
  CHECK(cfg.splits[3].name == "n");
  CHECK(cfg.repeat_seed(0) == 0);
  CHECK(cfg.repeat_seed(4) == 4);
  CHECK(cfg.arch_configs.at(models::ArchKind::mlp).width == 256);
}

TEST_CASE("config overrides and presets") {
  const BenchConfig cfg = parse_config(R"(
[general]
seed = 40
[data.d]
type = blobs
[models]
architectures = mlp, ft
width = 32
[models.ft_transformer]
token_dim = 8
heads = 2
[detectors]
methods = MDS
[split.age]
type = near
dataset = d
preset = eicu_age
)");
  CHECK(cfg.repeat_seed(2) == 42);
  CHECK(cfg.arch_configs.at(models::ArchKind::mlp).width == 32);
  CHECK(cfg.arch_configs.at(models::ArchKind::ft_transformer).token_dim == 8);
  CHECK(cfg.splits[0].predicate == "age > 70");
}

TEST_CASE("config errors") {
  const std::string base = "[data.d]\ntype = blobs\n[detectors]\nmethods = LOF\n";
  const std::string split = "[split.f]\ntype = far\ndataset = d\nood = d\n";
  CHECK_NOTHROW(parse_config(base + split));
  CHECK_THROWS_AS(parse_config(base + split + "[general]\nrepeats = 0\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config(base + split + "[general]\nbogus = 1\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config(base + "[split.f]\ntype = far\ndataset = nope\nood = d\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config(base + "[split.f]\ntype = sideways\ndataset = d\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config(base + "[split.f]\ntype = near\ndataset = d\npredicate = age ~ 3\n"),
                  InvalidArgument);
  CHECK_THROWS_AS(parse_config(base), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[data.d]\ntype = blobs\n[detectors]\nmethods = NotAMethod\n" + split),
                  InvalidArgument);
  CHECK_THROWS_AS(parse_config("[data.d]\ntype = blobs\n[detectors]\nmethods = MSP\n" + split), InvalidArgument);
  CHECK_THROWS_AS(parse_config(base + split + "[mystery]\n"), InvalidArgument);
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), IoError);
}

TEST_CASE("config hash tracks substance") {
  const BenchConfig a = parse_config(kFarConfig);
  const BenchConfig b = parse_config(std::string(kFarConfig) + "\n# a comment\n");
  BenchConfig c = a;
  c.seed = 4;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("report cells and formats") {
  BenchReport r;
  CHECK_THROWS_AS(emit_csv(r), InvalidArgument);
  CHECK_THROWS_AS(emit_markdown(r), InvalidArgument);
  r.layout = {{"mlp", {"MSP"}}};
  r.splits = {"zeta", "alpha"};
  r.metrics = {"auroc"};
  ReportRow a{"mlp", "MSP", "zeta", "auroc", {0.496, 0.504}, eval::summarize(std::vector<double>{0.496, 0.504}), {}};
  ReportRow b{"mlp", "MSP", "alpha", "auroc", {}, {}, "fit failed: x, \"y\""};
  r.rows = {a, b};
  CHECK(eval::format_percent(eval::MetricSummary{"", 0.5, 0.004, 2}) == "50.0±0.4");
  const std::string md = emit_markdown(r);
  CHECK(md.find("| Detector | zeta | alpha |") != std::string::npos);
  CHECK(md.find("| MSP | 50.0±0.4 | error |") != std::string::npos);
  const std::string csv = emit_csv(r);
  CHECK(csv ==
        "model,detector,split,metric,mean,std,n,status,message\n"
        "mlp,MSP,zeta,auroc,50.0,0.4,2,ok,\n"
        "mlp,MSP,alpha,auroc,,,0,error,\"fit failed: x, \"\"y\"\"\"\n");
  CHECK_THROWS_AS(emit(r, "xml"), InvalidArgument);
  CHECK_THROWS_AS(write_report(r, "/proc/definitely/not/writable"), IoError);
}

TEST_CASE("perfectly separated far split reports 100.0±0.0") {
  const BenchConfig cfg = parse_config(kFarConfig);
  const BenchReport r = run_benchmark(cfg);
  REQUIRE(r.rows.size() == 2);
  for (const auto& row : r.rows) {
    CAPTURE(row.detector);
    CHECK(row.ok());
    CHECK(eval::format_percent(row.summary) == "100.0±0.0");
  }
  CHECK(r.rows[0].model == "mlp");
  CHECK(r.rows[1].model == "density");
  CHECK(r.provenance["repeat_seeds"] == nlohmann::json::array({"3"}));
}

TEST_CASE("runs are deterministic across invocations and thread counts") {
  const BenchConfig cfg = parse_config(synth_config());
  RunOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const BenchReport a = run_benchmark(cfg, one);
  const BenchReport b = run_benchmark(cfg, one);
  const BenchReport c = run_benchmark(cfg, four);
  CHECK(emit_csv(a) == emit_csv(b));
  CHECK(emit_csv(a) == emit_csv(c));
  CHECK(emit_markdown(a) == emit_markdown(c));
  CHECK(a.provenance.dump() == c.provenance.dump());
  REQUIRE(a.rows.size() == c.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].values == c.rows[i].values);
}

TEST_CASE("every cell is reported and failures become error rows") {
  const BenchConfig cfg = parse_config(synth_config());
  const BenchReport r = run_benchmark(cfg);
  // (1 model x 3 post-hoc + 1 density) x 2 splits x 2 metrics
  CHECK(r.rows.size() == (1 * 3 + 1) * 2 * 2);
  std::size_t errors = 0;
  for (const auto& row : r.rows) {
    if (row.detector == "OpenMax") {
      CHECK_FALSE(row.ok());
      CHECK(row.error.find("tail") != std::string::npos);
      ++errors;
    } else {
      CHECK(row.ok());
      CHECK(row.values.size() == 2);
    }
  }
  CHECK(errors == 4);
  CHECK(emit_markdown(r).find("### Errors") != std::string::npos);
}

TEST_CASE("degenerate near split is captured per cell") {
  auto cfg = parse_config(R"(
[general]
repeats = 1
[data.d]
type = blobs
n = 100
[models]
architectures = mlp
epochs = 1
width = 8
depth = 1
[detectors]
methods = MSP, PPCA
[split.bad]
type = near
dataset = d
predicate = age > 70
)");
  const BenchReport r = run_benchmark(cfg);
  CHECK(r.rows.size() == 4);
  for (const auto& row : r.rows) CHECK(row.error.find("split failed") != std::string::npos);
}

TEST_CASE("synthesized values average the per-feature values") {
  const BenchConfig cfg = parse_config(synth_config());
  RunOptions opt;
  opt.keep_raw = true;
  const BenchReport r = run_benchmark(cfg, opt);
  for (const auto& row : r.rows) {
    if (!row.ok()) continue;
    for (std::size_t rep = 0; rep < row.values.size(); ++rep) {
      std::vector<double> per;
      for (const auto& f : r.per_feature)
        if (f.model == row.model && f.detector == row.detector && f.split == row.split && f.metric == row.metric &&
            f.repeat == rep)
          per.push_back(f.value);
      REQUIRE(per.size() == 3);
      double total = 0.0;
      for (double v : per) total += v;
      CHECK(row.values[rep] == doctest::Approx(total / 3.0).epsilon(1e-15));
    }
  }
  // recompute per-feature AUROC from the persisted scores
  std::map<std::string, std::vector<double>> by_set;
  for (const auto& d : r.scores)
    if (d.model == "density" && d.detector == "LOF" && d.split == "scaled_x1000" && d.repeat == 1) by_set[d.set] = d.scores;
  REQUIRE(by_set.count("id"));
  for (const auto& f : r.per_feature) {
    if (f.model != "density" || f.detector != "LOF" || f.split != "scaled_x1000" || f.repeat != 1 || f.metric != "auroc")
      continue;
    const auto& ood = by_set.at("ood." + std::to_string(f.slot));
    CHECK(testing::brute_force_auroc(by_set.at("id"), ood) == doctest::Approx(f.value).epsilon(1e-12));
  }
}

TEST_CASE("raw directory round trip") {
  const BenchConfig cfg = parse_config(synth_config());
  RunOptions opt;
  opt.keep_raw = true;
  const BenchReport r = run_benchmark(cfg, opt);
  const auto dir = temp_dir("raw");
  write_report(r, dir);
  CHECK(std::filesystem::exists(dir / "report.csv"));
  CHECK(std::filesystem::exists(dir / "report.md"));
  CHECK(std::filesystem::exists(dir / "provenance.json"));
  CHECK(std::filesystem::exists(dir / "raw" / "scores.csv"));
  const BenchReport back = read_raw(dir / "raw");
  CHECK(emit_csv(back) == emit_csv(r));
  CHECK(emit_markdown(back) == emit_markdown(r));
  CHECK(back.per_feature.size() == r.per_feature.size());
  CHECK_THROWS_AS(read_raw(dir / "nothing_here"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("parallel_for runs every job once and propagates failures") {
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, 6, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw InvalidArgument("boom");
                  }),
                  InvalidArgument);
}

TEST_CASE("density inputs one-hot encode categorical columns") {
  data::Dataset ds;
  data::FeatureDesc num;
  num.name = "a";
  data::FeatureDesc cat;
  cat.name = "c";
  cat.kind = data::FeatureKind::categorical;
  cat.categories = {"x", "y", "z"};
  ds.schema = data::Schema({cat, num});
  ds.features.resize(2, 2);
  ds.features << 2, 0.5, 0, -1.5;
  ds.labels = {0, 1};
  const Matrix m = density_inputs(ds);
  Matrix want(2, 4);
  want << 0.5, 0, 0, 1, -1.5, 1, 0, 0;
  CHECK(m == want);
}

TEST_CASE("entropy map grid file") {
  const data::Dataset ds = data::make_toy2d(600, 3, 1);
  auto arch = models::ArchitectureConfig::defaults(models::ArchKind::mlp);
  arch.width = 32;
  arch.depth = 2;
  arch.dropout = 0.0;
  models::TrainConfig tc;
  tc.epochs = 10;
  const auto model = models::train_classifier(ds, arch, tc);

  const models::GridSpec grid{-2, 2, -2, 2, 3};
  const models::EntropyMap map = models::entropy_map(model, grid);
  const auto dir = temp_dir("emap");
  std::filesystem::create_directories(dir);
  write_entropy_map(map, grid, dir / "grid.csv");
  std::ifstream in(dir / "grid.csv");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 10);
  std::ifstream meta_in(dir / "grid.csv.meta.json");
  const auto meta = nlohmann::json::parse(meta_in);
  CHECK(meta["classes"] == 3);
  const double ln_c = meta["ln_c"].get<double>();
  CHECK(ln_c == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  for (const auto& c : map.cells) {
    CHECK(c.entropy >= 0.0);
    CHECK(c.entropy <= std::log(3.0));
  }
  std::filesystem::remove_all(dir);

  // confidence far from the data: ring of radius 100
  Matrix ring(360, 2);
  for (int a = 0; a < 360; ++a) ring.row(a) << 100 * std::cos(a * M_PI / 180), 100 * std::sin(a * M_PI / 180);
  const Matrix p = models::predict_proba(model, ring);
  double lowest = std::log(3.0);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double h = 0.0;
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      if (p(i, j) > 0) h -= p(i, j) * std::log(p(i, j));
    lowest = std::min(lowest, h);
  }
  CHECK(lowest < 0.1 * std::log(3.0));

  const auto wide = models::train_classifier(data::make_blobs(200, 3, 4.0, 1), arch, tc);
  CHECK_THROWS_AS(models::entropy_map(wide, grid), InvalidArgument);
}
