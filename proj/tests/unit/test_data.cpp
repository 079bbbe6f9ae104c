#include <doctest.h>

#include "support/oracles.hpp"
#include "tabood/data/aggregate.hpp"
#include "tabood/data/io.hpp"
#include "tabood/data/splits.hpp"
#include "tabood/data/standardizer.hpp"
#include "tabood/data/synthetic.hpp"
#include "tabood/data/variables.hpp"
#include "tabood/error.hpp"

#include <cmath>
#include <filesystem>

using namespace tabood;
using namespace tabood::data;

namespace {

std::size_t idx(std::size_t window, std::size_t stat) { return window * kStatisticNames.size() + stat; }

Dataset small_table() {
  const CsvTable t = parse_csv(
      "id,age,gender,hr,label\n"
      "1,80,Female,70,1\n"
      "2,65,Male,80,0\n"
      "3,72,Female,90,0\n"
      "4,30,Male,100,1\n");
  TableOptions o;
  o.label_column = "label";
  o.id_column = "id";
  o.split_columns = {"age", "gender"};
  return load_table(t, o);
}

}  // namespace

TEST_CASE("window statistics") {
  std::vector<double> ten(10);
  for (int i = 0; i < 10; ++i) ten[i] = i + 1;
  const auto a = aggregate_series(ten);
  CHECK(a[idx(0, 0)] == doctest::Approx(5.5));
  CHECK(a[idx(0, 2)] == 1.0);
  CHECK(a[idx(0, 3)] == 10.0);
  CHECK(a[idx(0, 5)] == 10.0);
  // first10 of 10 elements keeps exactly one.
  CHECK(a[idx(1, 5)] == 1.0);
  CHECK(a[idx(1, 0)] == 1.0);
  // last25: ceil(2.5) = 3 -> [8, 9, 10]
  CHECK(a[idx(5, 5)] == 3.0);
  CHECK(a[idx(5, 0)] == doctest::Approx(9.0));

  const std::vector<double> four = {1, 2, 3, 4};
  const auto b = aggregate_series(four);
  CHECK(b[idx(3, 0)] == doctest::Approx(1.5));
  CHECK(b[idx(3, 5)] == 2.0);

  const std::vector<double> sym = {1, 2, 3};
  CHECK(aggregate_series(sym)[idx(0, 4)] == doctest::Approx(0.0));
  // population std of {1,2,3} = sqrt(2/3)
  CHECK(aggregate_series(sym)[idx(0, 1)] == doctest::Approx(std::sqrt(2.0 / 3.0)));

  const std::vector<double> skewed = {0, 0, 0, 10};
  const double m = 2.5, m2 = (3 * m * m + 7.5 * 7.5) / 4, m3 = (3 * -m * m * m + 7.5 * 7.5 * 7.5) / 4;
  CHECK(aggregate_series(skewed)[idx(0, 4)] == doctest::Approx(m3 / std::pow(m2, 1.5)));

  const std::vector<double> one = {4};
  const auto c = aggregate_series(one);
  CHECK(c[idx(0, 1)] == 0.0);
  CHECK(c[idx(0, 4)] == 0.0);
  CHECK(c[idx(6, 5)] == 1.0);

  const auto empty = aggregate_series({});
  for (double v : empty) CHECK(std::isnan(v));
}

TEST_CASE("window length rounds up with minimum one") {
  CHECK(window_length(10, 0.1) == 1);
  CHECK(window_length(3, 0.1) == 1);
  CHECK(window_length(4, 0.25) == 1);
  CHECK(window_length(5, 0.25) == 2);
  CHECK(window_length(7, 0.5) == 4);
  CHECK(window_length(0, 0.5) == 0);
}

TEST_CASE("aggregate_time_series ordering and missing variables") {
  std::map<std::string, std::vector<double>> series = {{"hr", {1, 2, 3}}, {"ph", {7.4}}};
  const auto v = aggregate_time_series(series, {"ph", "hr", "temp"});
  REQUIRE(v.size() == 3 * kFeaturesPerVariable);
  CHECK(v[0] == doctest::Approx(7.4));
  CHECK(v[kFeaturesPerVariable] == doctest::Approx(2.0));
  CHECK(std::isnan(v[2 * kFeaturesPerVariable]));
}

TEST_CASE("timeseries ingestion feature count and cutoff") {
  const CsvTable series = parse_csv(
      "patient_id,variable,time,value\n"
      "1,Heart Rate,0,80\n1,Heart Rate,2,90\n1,Heart Rate,60,500\n1,pH,1,7.3\n"
      "2,Heart Rate,1,70\n2,pH,5,7.4\n2,pH,3,7.2\n"
      "3,Heart Rate,1,75\n");
  const CsvTable statics = parse_csv(
      "id,age,gender,label\n1,71,Female,1\n2,50,Male,0\n3,40,Male,0\n");
  TableOptions to;
  to.id_column = "id";
  to.split_columns = {"age"};
  TimeSeriesOptions so;
  const Dataset ds = load_timeseries_dataset(series, statics, to, so);
  // Patient 3 has no pH and is dropped.
  CHECK(ds.rows() == 2);
  CHECK(ds.cols() == 2 * kFeaturesPerVariable + 2);
  const auto hr_max = ds.schema.index_of(aggregate_feature_name("Heart Rate", "full", "max"));
  REQUIRE(hr_max.has_value());
  CHECK(ds.features(0, static_cast<Eigen::Index>(*hr_max)) == 90.0);  // the t=60 reading is cut off
  // pH for patient 2 is time-sorted: [7.2, 7.4] -> first10 = 7.2
  const auto ph_first = ds.schema.index_of(aggregate_feature_name("pH", "first10", "mean"));
  CHECK(ds.features(1, static_cast<Eigen::Index>(*ph_first)) == doctest::Approx(7.2));
  CHECK(ds.schema[*hr_max].provenance == Provenance::time_dependent);
  CHECK(ds.schema[*hr_max].statistic == "max");
}

TEST_CASE("static csv ingestion") {
  const Dataset ds = small_table();
  CHECK(ds.rows() == 4);
  CHECK(ds.cols() == 3);  // age, gender, hr
  const auto g = ds.schema.index_of("gender");
  REQUIRE(g.has_value());
  CHECK(ds.schema[*g].kind == FeatureKind::categorical);
  CHECK(ds.schema[*g].categories == std::vector<std::string>{"Female", "Male"});
  CHECK(ds.features(1, static_cast<Eigen::Index>(*g)) == 1.0);

  const CsvTable missing = parse_csv("a,label\n1,0\nNA,1\n,1\n3,1\n");
  TableOptions o;
  CHECK(load_table(missing, o).rows() == 2);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), InvalidArgument);
}

TEST_CASE("binary dataset container round trip") {
  const Dataset ds = small_table();
  const auto path = std::filesystem::temp_directory_path() / "tabood_ds_roundtrip.bin";
  write_dataset(ds, path);
  const Dataset back = read_dataset(path);
  CHECK(back.schema == ds.schema);
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
  REQUIRE(back.split_columns.size() == 2);
  CHECK(back.split_columns[1].values == ds.split_columns[1].values);
  std::filesystem::remove(path);
}

TEST_CASE("standardizer") {
  const Dataset ds = make_blobs(500, 4, 2.0, 3);
  Dataset shifted = ds;
  shifted.features = (ds.features * 3.0).array() + 5.0;
  const Standardizer s = Standardizer::fit(shifted);
  const Matrix z = s.transform(shifted.features);
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    CHECK(std::abs(z.col(j).mean()) < 1e-10);
    CHECK(std::abs(std::sqrt((z.col(j).array() - z.col(j).mean()).square().mean()) - 1.0) < 1e-8);
  }
  Matrix mu = s.mean().transpose();
  CHECK(s.transform(mu).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s.inverse_transform(z) - shifted.features).cwiseAbs().maxCoeff() < 1e-10);

  Matrix constant = Matrix::Ones(10, 1);
  const Standardizer c = Standardizer::fit(constant, {true});
  CHECK(c.stddev()(0) == Standardizer::kStdFloor);

  const Dataset table = small_table();
  const Standardizer t = Standardizer::fit(table);
  const auto g = static_cast<Eigen::Index>(*table.schema.index_of("gender"));
  CHECK(t.transform(table.features).col(g) == table.features.col(g));
}

TEST_CASE("predicates") {
  CHECK(Predicate::parse("age > 70").matches("80"));
  CHECK_FALSE(Predicate::parse("age > 70").matches("65"));
  CHECK(Predicate::parse("age > 70").matches("> 89"));
  CHECK(Predicate::parse("gender == Female").matches("Female"));
  CHECK(Predicate::parse("ethnicity in Caucasian|African American").matches("African American"));
  CHECK(Predicate::parse("x <= 1").matches("1"));
  CHECK_THROWS_AS(Predicate::parse("age"), InvalidArgument);
  CHECK_THROWS_AS(Predicate::parse("age > old"), InvalidArgument);
}

TEST_CASE("near_ood_split") {
  const Dataset ds = small_table();
  const auto [id, ood] = near_ood_split(ds, Predicate::parse("age > 70"));
  CHECK(id.rows() == 2);
  CHECK(ood.rows() == 2);
  CHECK(id.rows() + ood.rows() == ds.rows());
  CHECK_FALSE(id.schema.index_of("age").has_value());
  CHECK(id.split_column("age")->values == std::vector<std::string>{"80", "72"});

  SUBCASE("two-row example") {
    const Dataset two = ds.select_rows({0, 1});
    const auto [a, b] = near_ood_split(two, Predicate::parse("age > 70"));
    CHECK(a.split_column("age")->values.front() == "80");
    CHECK(b.split_column("age")->values.front() == "65");
  }
  CHECK_THROWS_AS(near_ood_split(ds, Predicate::parse("age > 0")), DegenerateSplit);
  CHECK_THROWS_AS(near_ood_split(ds, Predicate::parse("weight > 0")), InvalidArgument);

  bool has_cvicu = false, has_eicu_eth = false;
  for (const auto& p : near_split_presets()) {
    has_cvicu = has_cvicu || p.name == "mimic_first_careunit";
    has_eicu_eth = has_eicu_eth || p.name == "eicu_ethnicity";
    CHECK_NOTHROW(Predicate::parse(p.predicate));
  }
  CHECK(has_cvicu);
  CHECK(has_eicu_eth);
  CHECK(near_split_presets().size() == 7);
}

TEST_CASE("near_ood_split partitions random data") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Dataset ds = make_blobs(100, 3, 1.0, static_cast<std::uint64_t>(trial));
    SplitColumn age{"age", {}};
    for (std::size_t i = 0; i < ds.rows(); ++i) age.values.push_back(std::to_string(rng.uniform_index(100)));
    ds.split_columns.push_back(age);
    const auto [id, ood] = near_ood_split(ds, Predicate::parse("age > 50"));
    CHECK(id.rows() + ood.rows() == ds.rows());
    for (const auto& v : id.split_column("age")->values) CHECK(std::stoi(v) > 50);
    for (const auto& v : ood.split_column("age")->values) CHECK(std::stoi(v) <= 50);
  }
}

TEST_CASE("far_ood_align") {
  auto make = [](std::vector<std::string> names) {
    std::vector<FeatureDesc> f;
    for (auto& n : names) {
      FeatureDesc d;
      d.name = n;
      f.push_back(d);
    }
    Dataset ds;
    ds.schema = Schema(f);
    ds.features = Matrix::Random(3, static_cast<Eigen::Index>(f.size()));
    ds.labels = {0, 1, 0};
    return ds;
  };
  const Dataset a = make({"a", "b", "c"});
  const Dataset b = make({"b", "c", "d"});
  const auto [a2, b2] = far_ood_align(a, b);
  CHECK(a2.schema.names() == std::vector<std::string>{"b", "c"});
  CHECK(b2.schema.names() == std::vector<std::string>{"b", "c"});
  CHECK(a2.features.col(0) == a.features.col(1));
  CHECK(b2.features.col(1) == b.features.col(1));

  CHECK(canonical_variable("Temperature (c)") == canonical_variable("Temperature"));
  CHECK(canonical_variable("MAP (mmHg)") == canonical_variable("Mean blood pressure"));
  CHECK(canonical_variable("Invasive BP Systolic") == canonical_variable("Systolic blood pressure"));
  CHECK(canonical_variable("O2 Saturation") == canonical_variable("Oxygen saturation"));
  const auto [t1, t2] = far_ood_align(make({"Temperature (c)", "x"}), make({"Temperature", "y"}));
  CHECK(t1.cols() == 1);
  CHECK(t2.cols() == 1);

  CHECK_THROWS_AS(far_ood_align(make({"a"}), make({"z"})), InvalidArgument);
}

TEST_CASE("far_ood_align unions categories") {
  auto make = [](std::vector<std::string> cats, std::vector<double> codes) {
    FeatureDesc f;
    f.name = "gender";
    f.kind = FeatureKind::categorical;
    f.categories = cats;
    Dataset ds;
    ds.schema = Schema({f});
    ds.features = Eigen::Map<Matrix>(codes.data(), static_cast<Eigen::Index>(codes.size()), 1);
    ds.labels.assign(codes.size(), 0);
    return ds;
  };
  const auto [a, b] = far_ood_align(make({"F", "M"}, {0, 1}), make({"Female", "M"}, {0, 1}));
  CHECK(a.schema[0].categories == std::vector<std::string>{"F", "Female", "M"});
  CHECK(a.features(1, 0) == 2.0);
  CHECK(b.features(0, 0) == 1.0);
  CHECK(b.features(1, 0) == 2.0);
  CHECK_NOTHROW(b.validate());
}

TEST_CASE("synthesize_ood") {
  Dataset ds;
  FeatureDesc f0, f1;
  f0.name = "a";
  f1.name = "b";
  ds.schema = Schema({f0, f1});
  ds.features = Matrix(1, 2);
  ds.features << 0.5, -1.0;
  ds.labels = {0};
  const Dataset out = synthesize_ood(ds, 1, 10.0);
  CHECK(out.features(0, 0) == 0.5);
  CHECK(out.features(0, 1) == -10.0);
  CHECK(synthesize_ood(ds, 0, 1.0).features == ds.features);

  const Dataset blobs = make_blobs(50, 6, 1.0, 9);
  for (std::size_t j = 0; j < 6; ++j) {
    const Dataset s = synthesize_ood(blobs, j, 100.0);
    const Dataset back = synthesize_ood(s, j, 1.0 / 100.0);
    CHECK((back.features - blobs.features).cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index c = 0; c < 6; ++c)
      if (c != static_cast<Eigen::Index>(j)) CHECK(s.features.col(c) == blobs.features.col(c));
  }
  const Dataset table = small_table();
  CHECK_THROWS_AS(synthesize_ood(table, *table.schema.index_of("gender"), 10.0), InvalidArgument);
}

TEST_CASE("corruption feature sampling") {
  const Dataset wide = make_blobs(10, 150, 1.0, 1);
  Rng rng(3);
  auto picks = sample_corruption_features(wide, 100, rng);
  CHECK(picks.size() == 100);
  std::sort(picks.begin(), picks.end());
  CHECK(std::adjacent_find(picks.begin(), picks.end()) == picks.end());

  const Dataset narrow = make_blobs(10, 20, 1.0, 1);
  const auto cyc = sample_corruption_features(narrow, 100, rng);
  CHECK(cyc.size() == 100);
  std::vector<int> counts(20, 0);
  for (auto j : cyc) counts[j]++;
  for (int c : counts) CHECK(c == 5);
}

TEST_CASE("blobs and toy generators") {
  CHECK(make_blobs(200, 5, 2.0, 7).features == make_blobs(200, 5, 2.0, 7).features);
  CHECK(make_toy2d(90, 3, 1).features == make_toy2d(90, 3, 1).features);
  CHECK(make_toy2d(90, 3, 1).class_count() == 3);
  CHECK_THROWS_AS(make_toy2d(2, 3, 1), InvalidArgument);

  BlobOptions o;
  o.n = 1000;
  o.positive_fraction = 0.1;
  const Dataset imb = make_blobs(o);
  CHECK(std::count(imb.labels.begin(), imb.labels.end(), 1) == 100);

  SUBCASE("separation 10 is logistic-separable") {
    const Dataset ds = make_blobs(2000, 10, 10.0, 11);
    const auto oracle = testing::LogisticOracle::fit(ds.features, ds.labels);
    CHECK(oracle.accuracy(ds.features, ds.labels) >= 0.99);
  }
  SUBCASE("separation 0 is indistinguishable") {
    const Dataset ds = make_blobs(10000, 2, 0.0, 12);
    const Dataset train = ds.select_rows([] { std::vector<std::size_t> v; for (std::size_t i = 0; i < 5000; ++i) v.push_back(i); return v; }());
    const auto oracle = testing::LogisticOracle::fit(train.features, train.labels);
    std::vector<double> s0, s1;
    for (std::size_t i = 5000; i < 10000; ++i) {
      const double z = ds.features.row(static_cast<Eigen::Index>(i)).dot(oracle.weights.head(2));
      (ds.labels[i] ? s1 : s0).push_back(z);
    }
    CHECK(std::abs(testing::brute_force_auroc(s0, s1) - 0.5) < 0.05);
  }
}

TEST_CASE("split_rows partitions") {
  Rng rng(1);
  const RowSplit s = split_rows(100, 0.1, 0.2, rng);
  CHECK(s.test.size() == 20);
  CHECK(s.val.size() == 10);
  CHECK(s.train.size() == 70);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.val.begin(), s.val.end());
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 100; ++i) CHECK(all[i] == i);
}
