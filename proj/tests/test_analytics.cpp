#include <cmath>
#include <sstream>

#include "doctest.h"
#include "emx/analytics.hpp"
#include "emx/rng.hpp"
#include "support.hpp"

using namespace emx;
using namespace emx::analytics;

namespace {

Observation obs(Fleet fleet, double co2, std::string region = "R1", FuelType fuel = FuelType::DIE) {
  Observation o;
  o.vehicle_id = "v";
  o.fleet = fleet;
  o.date = make_date(2010, 1, 1);
  o.region = std::move(region);
  o.fuel_type = fuel;
  o.values.fill(std::nan(""));
  o.values[index_of(Metric::co2)] = co2;
  return o;
}

}  // namespace

TEST_CASE("summary of a small sample") {
  const std::vector<double> v = {1, 2, 3, 4, 100};
  const auto s = summarize(v);
  CHECK(s.n == 5);
  CHECK(s.mean == 22.0);
  CHECK(s.median == 3.0);
  CHECK(s.q1 == 2.0);
  CHECK(s.q3 == 4.0);
  CHECK(s.whisker_low == 1.0);
  CHECK(s.whisker_high == 4.0);
  CHECK(quantile_sorted(std::vector<double>{1, 2}, 0.25) == 1.25);
  CHECK_THROWS_AS(summarize(std::vector<double>{}), Error);
  CHECK_THROWS_AS(summarize(std::vector<double>{1, NAN}), Error);
}

TEST_CASE("summary agrees with the direct computation") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(1 + rng.below(300));
    const bool ties = trial % 3 == 0;
    for (double& x : v) x = ties ? static_cast<double>(rng.below(5)) : 100.0 * rng.normal();
    const auto got = summarize(v);
    const auto want = emx::testing::oracle_summary(v);
    CHECK(got.n == want.n);
    CHECK(got.mean == want.mean);
    CHECK(got.median == doctest::Approx(want.median).epsilon(1e-12));
    CHECK(got.q1 == doctest::Approx(want.q1).epsilon(1e-12));
    CHECK(got.q3 == doctest::Approx(want.q3).epsilon(1e-12));
    CHECK(got.whisker_low == want.whisker_low);
    CHECK(got.whisker_high == want.whisker_high);
  }
}

TEST_CASE("exact sums") {
  CHECK(exact_sum(std::vector<double>{1e100, 1.0, -1e100}) == 1.0);
  CHECK(exact_sum(std::vector<double>{0.1, 0.2, 0.3}) == 0.6);
  CHECK(exact_sum(std::vector<double>{}) == 0.0);
  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(rng.below(200));
    const int spread = static_cast<int>(rng.below(60));
    for (double& x : v) x = std::ldexp(rng.normal(), static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * spread + 1))) - spread);
    CHECK(exact_sum(v) == emx::testing::oracle_exact_sum(v));
  }
}

TEST_CASE("fleet gaps") {
  std::vector<Observation> o;
  for (double v : {110.0, 120.0, 130.0}) o.push_back(obs(Fleet::exported, v));
  for (double v : {100.0, 100.0, 100.0, 120.0}) o.push_back(obs(Fleet::scrapped, v));
  const std::vector<Metric> metrics = {Metric::co2, Metric::nox};
  const auto rows = fleet_summary(o, metrics);
  REQUIRE(rows.size() == 2);
  const auto* e = find(rows, Fleet::exported, Metric::co2);
  REQUIRE(e);
  REQUIRE(e->vs_scrapped);
  CHECK(e->vs_scrapped->mean == 15.0);
  CHECK(e->vs_scrapped->mean_rel == doctest::Approx(15.0 / 105.0));
  CHECK(e->vs_scrapped->median == 20.0);
  CHECK_FALSE(e->vs_on_road);
  CHECK_FALSE(find(rows, Fleet::scrapped, Metric::co2)->vs_scrapped);
  CHECK_FALSE(find(rows, Fleet::exported, Metric::nox));
  CHECK_THROWS_AS(fleet_gap(MetricStats{Metric::co2, {}}, MetricStats{Metric::nox, {}}), Error);
  std::ostringstream out;
  write_fleet_summary(out, rows);
  CHECK(out.str().find("exported,co2,3,120,120,115,125,110,130,15,14.28") != std::string::npos);
}

TEST_CASE("lowess reproduces lines and matches the direct form") {
  std::vector<double> x, y;
  for (int i = 0; i < 50; ++i) {
    x.push_back(i * 0.7);
    y.push_back(3.0 - 2.5 * x.back());
  }
  for (int it : {0, 2}) {
    const auto f = lowess(x, y, 0.3, it);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(f[i] - y[i]) < 1e-9);
  }
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 5 + rng.below(80);
    std::vector<double> xs(n), ys(n);
    double at = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      at += 0.1 + rng.uniform();
      xs[i] = at;
      ys[i] = std::sin(at) + 0.3 * rng.normal();
    }
    const double span = 0.2 + 0.8 * rng.uniform();
    const int iterations = static_cast<int>(rng.below(3));
    const auto got = lowess(xs, ys, span, iterations);
    const auto want = emx::testing::oracle_lowess(xs, ys, span, iterations);
    for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9));
  }
  CHECK_THROWS_AS(lowess(std::vector<double>{2, 1}, std::vector<double>{1, 1}, 0.5), Error);
  CHECK_THROWS_AS(lowess(std::vector<double>{1, 2}, std::vector<double>{1, 1}, 0.0), Error);
  CHECK_THROWS_AS(lowess(std::vector<double>{1, 1}, std::vector<double>{1, 1}, 0.5), Error);
}

TEST_CASE("daily series") {
  std::vector<Observation> o;
  for (int d = 0; d < 10; d += 2) {
    auto a = obs(Fleet::exported, 100.0 + d);
    a.date = make_date(2020, 1, 1 + d);
    o.push_back(a);
    a.values[0] += 2.0;
    o.push_back(a);
  }
  auto single = obs(Fleet::scrapped, 50.0);
  single.date = make_date(2020, 1, 3);
  o.push_back(single);
  const fleet::Window window{make_date(2020, 1, 1), make_date(2020, 1, 10)};
  const auto points = daily_series(o, Metric::co2, window, SmoothingOptions{0.8, 0});
  REQUIRE(points.size() == 30);
  CHECK(points[0].count == 2);
  CHECK(points[0].mean == 101.0);
  CHECK(points[0].smoothed == doctest::Approx(101.0));
  CHECK(points[1].count == 0);
  CHECK(std::isnan(points[1].mean));
  CHECK(points[8].smoothed == doctest::Approx(109.0));
  CHECK(points[12].smoothed == 50.0);
  std::ostringstream out;
  write_daily_series(out, Metric::co2, points, false);
  CHECK(out.str().rfind("2020-01-01,exported,co2,2,101,", 0) == 0);
}

TEST_CASE("regional gaps respect the minimum count") {
  std::vector<Observation> o;
  for (int i = 0; i < 30; ++i) {
    o.push_back(obs(Fleet::exported, 110, "A"));
    o.push_back(obs(Fleet::scrapped, 100, "A"));
    o.push_back(obs(Fleet::exported, 90, "B"));
    o.push_back(obs(Fleet::scrapped, 100, "B"));
    o.push_back(obs(Fleet::on_road, 1000, "C"));
    if (i < 29) o.push_back(obs(Fleet::exported, 200, "D"));
    o.push_back(obs(Fleet::scrapped, 100, "D"));
    o.push_back(obs(Fleet::exported, 200, ""));
  }
  const auto report = region_gap_report(o, Metric::co2, 30);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.sufficient == 2);
  CHECK(report.positive == 1);
  CHECK(report.fraction == 0.5);
  CHECK(report.rows[0].status == RegionStatus::positive);
  CHECK(report.rows[1].status == RegionStatus::non_positive);
  CHECK(report.rows[2].status == RegionStatus::insufficient);
  CHECK(region_gap_report(o, Metric::co2, 29).positive == 2);
  CHECK(std::isnan(region_gap_report(o, Metric::co2, 100).fraction));
}

TEST_CASE("standards and compliance") {
  const auto standards = default_standards();
  REQUIRE(standards.size() == 2);
  CHECK(standards[0].name == "EURO4");
  CHECK(standards[0].limit(FuelType::DIE, Pollutant::nox) == 250.0);
  CHECK(standards[1].limit(FuelType::DIE, Pollutant::nox) == 80.0);
  CHECK_FALSE(standards[0].limit(FuelType::PET, Pollutant::mpg));
  CHECK(parse_standards(default_standards_json()).size() == 2);
  CHECK_THROWS_AS(parse_standards("{"), Error);
  CHECK_THROWS_AS(parse_standards(R"({"X": {"XXX": {}}})"), Error);
  CHECK_THROWS_AS(parse_standards(R"({"X": {"DIE": {"sox_mg_km": 1}}})"), Error);

  std::vector<Observation> o;
  for (int i = 0; i < 100; ++i) {
    auto a = obs(Fleet::exported, 100);
    a.values[index_of(Metric::nox)] = i < 42 ? 260.0 : 250.0;
    a.values[index_of(Metric::co)] = i == 99 ? 600.0 : 100.0;
    o.push_back(a);
  }
  const auto rows = compliance_rates(o, standards[0]);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].pollutant == "nox");
  CHECK(rows[0].rate() == 0.42);
  CHECK(rows[1].pollutant == "co");
  CHECK(rows[1].failures == 1);
  CHECK(rows[2].pollutant == "joint");
  CHECK(rows[2].failures == 43);
  EuroStandard empty;
  empty.name = "none";
  CHECK_THROWS_AS(compliance_rates(o, empty), Error);
}

TEST_CASE("correlation") {
  const std::vector<double> x = {1, 2, 3, 4}, y = {2, 4, 6, 8.5};
  CHECK(pearson_r(x, x) == doctest::Approx(1.0));
  CHECK(pearson_r(x, y) > 0.99);
  CHECK(ols_r_squared(x, y) == doctest::Approx(pearson_r(x, y) * pearson_r(x, y)));
  CHECK(std::isnan(pearson_r(x, std::vector<double>{1, 1, 1, 1})));
  CHECK_THROWS_AS(pearson_r(x, std::vector<double>{1}), Error);
}

TEST_CASE("holdout split is group-disjoint and seeded") {
  Rng rng(9);
  const auto table = emx::testing::random_table(rng, 400);
  const auto [train, hold] = split_holdout(table, 0.2, 11);
  CHECK(train.rows.size() + hold.rows.size() == table.rows.size());
  std::set<std::uint64_t> tg, hg;
  for (const auto& r : train.rows) tg.insert(r.group);
  for (const auto& r : hold.rows) hg.insert(r.group);
  for (auto g : hg) CHECK_FALSE(tg.count(g));
  CHECK(hg.size() == 8);
  const auto [train2, hold2] = split_holdout(table, 0.2, 11);
  CHECK(hold2.rows.size() == hold.rows.size());
  CHECK_THROWS_AS(split_holdout(table, 1.0, 1), Error);

  const auto tree = cart::fit(train, emx::testing::params(0.001, 20, 7));
  const auto report = holdout_accuracy(tree, train, hold);
  CHECK(report.holdout_groups == 8);
  CHECK(report.curve.size() == tree.cp_table.size());
  CHECK(report.curve.back().nsplit == tree.cp_table.back().nsplit);
  CHECK_THROWS_AS(holdout_accuracy(tree, table, hold), Error);
  std::ostringstream out;
  write_accuracy_tables(out, tree, report);
  CHECK(out.str().rfind("pollutant,CP,nsplit,", 0) == 0);
}
