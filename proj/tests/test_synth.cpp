#include <cmath>

#include "doctest.h"
#include "emx/synth.hpp"
#include "support.hpp"

using namespace emx;
using namespace emx::synth;

namespace {

GeneratorSpec small_spec(std::uint64_t seed = 3) {
  GeneratorSpec s;
  s.seed = seed;
  s.vehicles = 4000;
  s.regions.count = 20;
  s.regions.sparse = 2;
  return s;
}

std::optional<ErrorCode> code_of(const GeneratorSpec& spec) {
  try {
    generate(spec);
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("noise calibration") {
  CHECK(calibrate_noise(1.0, 50.0) == 0.0);
  CHECK(calibrate_noise(0.9, 100.0) == doctest::Approx(3.3333333333));
  CHECK(calibrate_noise(0.5, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(calibrate_noise(0.0, 1.0), Error);
  CHECK_THROWS_AS(calibrate_noise(1.1, 1.0), Error);
  CHECK_THROWS_AS(calibrate_noise(0.9, 0.0), Error);
}

TEST_CASE("truth is piecewise constant on the documented bands") {
  CHECK(fuel_group(FuelType::ELD) == FuelGroup::hybrid);
  CHECK(fuel_group(FuelType::LPG) == FuelGroup::petrol);
  for (Pollutant p : kAllPollutants) {
    CHECK(truth(p, 2001, 1000, FuelType::PET) == truth(p, 2005, 1399, FuelType::CNG));
    CHECK(truth(p, 2006, 1400, FuelType::DIE) == truth(p, 2012, 1999, FuelType::DIE));
    CHECK(truth(p, 2013, 2000, FuelType::HYB) == truth(p, 2020, 5000, FuelType::ELD));
    CHECK(truth(p, 2013, 2000, FuelType::PET) > 0.0);
  }
  CHECK(truth(Pollutant::nox, 2010, 1600, FuelType::DIE) > truth(Pollutant::nox, 2010, 1600, FuelType::PET));
}

TEST_CASE("catalog") {
  const auto catalog = build_catalog(5, 40);
  double prior = 0.0;
  for (const auto& e : catalog) {
    prior += e.prior;
    CHECK(e.truth[index_of(Pollutant::co2)] ==
          truth(Pollutant::co2, e.model_year, e.engine_cc, e.fuel_type));
  }
  CHECK(prior == doctest::Approx(1.0));
  CHECK(truth_variance(catalog, Pollutant::co2) > 0.0);
  CHECK(build_catalog(5, 40).size() == catalog.size());
}

TEST_CASE("generation is deterministic per seed") {
  const auto a = generate(small_spec());
  const auto b = generate(small_spec());
  const auto dir = emx::testing::temp_dir("synth_det");
  write_corpus(a, dir / "a");
  write_corpus(b, dir / "b");
  write_corpus(generate(small_spec(4)), dir / "c");
  for (const char* f : {"inspections.csv", "certifications.csv", "manifest.json"}) {
    CHECK(emx::testing::read_file(dir / "a" / f) == emx::testing::read_file(dir / "b" / f));
    CHECK(emx::testing::read_file(dir / "a" / f) != emx::testing::read_file(dir / "c" / f));
  }
  CHECK(a.inspections.size() == 4000 + a.truth.qc.total());
  CHECK(a.truth.injected_records == a.truth.qc.total());
}

TEST_CASE("quality control finds exactly the injected records") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto corpus = generate(small_spec(seed));
    const auto result = ingest::qc_filter(corpus.inspections);
    CHECK(result.report.reconciles());
    const auto& q = corpus.truth.qc;
    CHECK(result.report.count(ingest::QcRule::missing_required_field) == q.missing_required_field);
    CHECK(result.report.count(ingest::QcRule::dual_disposition) == q.dual_disposition);
    CHECK(result.report.count(ingest::QcRule::impossible_dates) == q.impossible_dates);
    CHECK(result.report.count(ingest::QcRule::over_110_years) == q.over_110_years);
    CHECK(result.report.retained == corpus.truth.vehicles);
  }
}

TEST_CASE("fleet means land on their targets") {
  auto spec = small_spec(11);
  spec.vehicles = 30000;
  const auto corpus = generate(spec);
  for (Fleet f : kAllFleets) {
    const auto& t = corpus.truth.fleets[static_cast<std::size_t>(f)];
    REQUIRE(t.vehicles > 100);
    const double se = t.realized_sd / std::sqrt(static_cast<double>(t.vehicles));
    CHECK(std::abs(t.realized_co2 - t.target_co2) < 3.0 * se + 1e-9);
  }
  const auto& exported = corpus.truth.fleets[static_cast<std::size_t>(Fleet::exported)];
  const auto& scrapped = corpus.truth.fleets[static_cast<std::size_t>(Fleet::scrapped)];
  CHECK(exported.target_co2 - scrapped.target_co2 == doctest::Approx(22.6));
  CHECK(corpus.truth.positive_regions == 19);
}

TEST_CASE("noise-free corpora carry exact truth") {
  auto spec = small_spec();
  spec.retest_r.reset();
  spec.sigma = {};
  const auto t = generate_training_table(spec, Pollutant::co2, 3000);
  REQUIRE(t.rows.size() == 3000);
  for (const auto& row : t.rows) {
    CHECK(row.target == truth(Pollutant::co2, row.x.model_year, row.x.engine_cc, row.x.fuel_type));
  }
  GroundTruth gt;
  const auto obs = generate_observations(spec, &gt);
  CHECK(obs.size() == spec.vehicles);
  const auto corpus = generate(spec);
  for (Fleet f : kAllFleets) {
    const auto i = static_cast<std::size_t>(f);
    CHECK(gt.fleets[i].vehicles == corpus.truth.fleets[i].vehicles);
    CHECK(gt.fleets[i].realized_co2 == corpus.truth.fleets[i].realized_co2);
    CHECK(gt.fleets[i].target_co2 == corpus.truth.fleets[i].target_co2);
  }
  for (const auto& o : obs) CHECK(std::isfinite(o.value(analytics::Metric::co2)));
}

TEST_CASE("calibrated noise reproduces the retest correlation") {
  GeneratorSpec spec;
  spec.seed = 2;
  for (Pollutant p : {Pollutant::co2, Pollutant::nox}) {
    const auto pairs = retest_pairs(spec, p, 100000);
    std::vector<double> a, b;
    for (const auto& [x, y] : pairs) {
      a.push_back(x);
      b.push_back(y);
    }
    CHECK(std::abs(analytics::pearson_r(a, b) - 0.9) < 0.01);
  }
}

TEST_CASE("unreachable targets are infeasible") {
  auto spec = small_spec();
  spec.scrapped_co2 = 5000.0;
  CHECK(code_of(spec) == ErrorCode::infeasible);
  spec = small_spec();
  spec.regions.positive_fraction = 0.0;
  CHECK(code_of(spec) == ErrorCode::infeasible);
  spec = small_spec();
  spec.regions.count = 0;
  CHECK(code_of(spec) == ErrorCode::infeasible);
  spec = small_spec();
  spec.vehicles = 0;
  CHECK(code_of(spec) == ErrorCode::invalid_argument);
  spec = small_spec();
  spec.regions.positive_fraction = 1.5;
  CHECK(code_of(spec) == ErrorCode::invalid_argument);
}

TEST_CASE("manifest") {
  const auto corpus = generate(small_spec());
  const auto text = manifest_json(corpus.truth);
  CHECK(text.find("\"dual_disposition\": 11") != std::string::npos);
  CHECK(text.find("\"seed\": 3") != std::string::npos);
}
