#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "emx/analytics.hpp"
#include "emx/cart.hpp"
#include "emx/common.hpp"
#include "emx/fleet.hpp"
#include "emx/ingest.hpp"

// Synthetic inspection and certification corpora with known ground truth.
//
// Every vehicle belongs to a model-line variant (make, model, fuel, model
// year, engine size) whose true emissions come from a piecewise-constant
// function of (model year band, engine size band, fuel group), so a
// regression tree can represent the truth exactly. Fleet and regional CO2
// means are hit by exponentially tilting the variant mix of each
// (region, fleet) cell.

namespace emx::synth {

// Band boundaries of the truth function.
inline constexpr int kYearBandEdges[2] = {2005, 2012};     // <=2005, 2006-2012, >=2013
inline constexpr double kCcBandEdges[2] = {1400.0, 2000.0};  // <1400, 1400-1999, >=2000

enum class FuelGroup : std::uint8_t { diesel, petrol, hybrid };
FuelGroup fuel_group(FuelType fuel);

double truth(Pollutant p, int model_year, double engine_cc, FuelType fuel);

struct CatalogEntry {
  std::string make;
  std::string model;
  FuelType fuel_type = FuelType::PET;
  int model_year = 0;
  double engine_cc = 0.0;
  double prior = 0.0;  // popularity weight, sums to 1 over the catalog
  std::array<double, kPollutantCount> truth{};
};

std::vector<CatalogEntry> build_catalog(std::uint64_t seed, std::size_t model_lines);

// Prior-weighted variance of the true values over the catalog.
double truth_variance(const std::vector<CatalogEntry>& catalog, Pollutant p);

// sigma = sqrt(V (1 - r) / r): two noisy draws of one true value then
// correlate at r. r = 1 gives 0. Throws for r outside (0, 1] or V <= 0.
double calibrate_noise(double target_retest_r, double variance);

struct RegionSpec {
  std::size_t count = 120;
  double positive_fraction = 0.95;  // exact share of regions with exported > scrapped
  double negative_scale = 0.5;      // negative regions get -scale * exported offset
  std::size_t sparse = 4;           // regions with too few vehicles to report
  double base_sd = 4.0;             // regional CO2 level variation, g/km
};

struct QcInjection {
  std::size_t missing_required_field = 5;
  std::size_t dual_disposition = 11;
  std::size_t impossible_dates = 13;
  std::size_t over_110_years = 7;

  std::size_t total() const {
    return missing_required_field + dual_disposition + impossible_dates + over_110_years;
  }
};

struct GeneratorSpec {
  std::uint64_t seed = 1;
  std::size_t vehicles = 20000;
  fleet::Window window;
  std::size_t model_lines = 80;

  // CO2 targets (g/km): scrapped mean, and exported / on-road offsets from it.
  double scrapped_co2 = 174.4;
  double exported_offset = 22.6;
  double on_road_offset = -5.8;
  std::array<double, kFleetCount> fleet_shares{0.35, 0.45, 0.20};

  RegionSpec regions;
  double non_class4_fraction = 0.03;
  double missing_cc_fraction = 0.005;
  QcInjection qc;

  double certification_coverage = 0.9;  // variants with a certification row
  double name_mismatch = 0.08;          // certified under an unmatchable name
  double name_variation = 0.3;          // case/spacing variants of the make
  double retest_duplicates = 0.3;       // variants certified twice
  // Measurement noise: calibrated from a test-retest correlation, or given
  // per pollutant when retest_r is unset.
  std::optional<double> retest_r = 0.9;
  std::array<double, kPollutantCount> sigma{};
};

void validate(const GeneratorSpec& spec);

struct RegionTruth {
  std::string code;
  double weight = 0.0;  // share of vehicles
  double base = 0.0;    // CO2 level shift shared by both fleets
  double gap = 0.0;     // exported minus scrapped target
  bool sparse = false;
};

struct FleetTruth {
  double target_co2 = 0.0;         // expected true mean
  double realized_co2 = 0.0;       // true mean of the generated vehicles
  double realized_sd = 0.0;
  std::size_t vehicles = 0;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::size_t vehicles = 0;
  std::size_t injected_records = 0;
  QcInjection qc;
  std::array<FleetTruth, kFleetCount> fleets{};
  std::vector<RegionTruth> regions;
  std::size_t positive_regions = 0;
  double positive_gap = 0.0;
  std::array<double, kPollutantCount> sigma{};
  std::array<double, kPollutantCount> truth_variance{};
  std::size_t catalog_size = 0;
  std::size_t certification_rows = 0;
  std::size_t non_class4 = 0;
  std::size_t missing_cc = 0;
};

std::string manifest_json(const GroundTruth& truth);

struct Corpus {
  std::vector<ingest::VehicleRecord> inspections;
  std::vector<ingest::EmissionsMeasurement> certifications;
  GroundTruth truth;
};

// Throws Error(infeasible) when a regional target lies outside the range of
// catalog truth values, or when regional gaps are requested with no regions.
Corpus generate(const GeneratorSpec& spec);

// inspections.csv, certifications.csv, manifest.json
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

// One disposition or on-road observation per generated vehicle, carrying
// true emissions; skips inspections and imputation entirely.
std::vector<analytics::Observation> generate_observations(const GeneratorSpec& spec,
                                                          GroundTruth* truth = nullptr);

// Rows drawn from the catalog prior; each target is the noisy certified value
// of its variant (shared by all rows of that variant), grouped by variant.
cart::TrainingTable generate_training_table(const GeneratorSpec& spec, Pollutant p,
                                            std::size_t rows);

// Pairs of independent noisy measurements of catalog variants.
std::vector<std::pair<double, double>> retest_pairs(const GeneratorSpec& spec, Pollutant p,
                                                    std::size_t n);

}  // namespace emx::synth
