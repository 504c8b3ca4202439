#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "emx/analytics.hpp"
#include "emx/cart.hpp"
#include "emx/fleet.hpp"
#include "emx/impute.hpp"
#include "emx/ingest.hpp"
#include "emx/match.hpp"

// File-level pipeline stages. Each stage reads only documented files and
// writes its outputs into a directory, so stages can run separately.
//
//   qc         inspections.csv            -> clean_inspections.csv, qc_report.csv
//   train      clean + certifications     -> <p>_tree.json, <p>_cp_table.csv, match_stats.csv
//   validate   clean + certifications + models -> accuracy_tables.csv
//   impute     clean (+ certifications) + models -> imputed.csv, impute_report.csv
//   aggregate  clean + imputed.csv        -> fleet_observations.csv, fleet_counts.csv,
//                                            fleet_summary.csv, daily_series.csv,
//                                            region_gaps.csv, compliance.csv
//   report     analytics CSV set          -> one concatenated text stream

namespace emx::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kCleanInspections = "clean_inspections.csv";
inline constexpr const char* kQcReport = "qc_report.csv";
inline constexpr const char* kMatchStats = "match_stats.csv";
inline constexpr const char* kAccuracyTables = "accuracy_tables.csv";
inline constexpr const char* kImputed = "imputed.csv";
inline constexpr const char* kImputeReport = "impute_report.csv";
inline constexpr const char* kObservations = "fleet_observations.csv";
inline constexpr const char* kFleetCounts = "fleet_counts.csv";
inline constexpr const char* kFleetSummary = "fleet_summary.csv";
inline constexpr const char* kDailySeries = "daily_series.csv";
inline constexpr const char* kRegionGaps = "region_gaps.csv";
inline constexpr const char* kCompliance = "compliance.csv";
inline constexpr const char* kReport = "report.txt";

std::string tree_file(Pollutant p);      // "co2_tree.json"
std::string cp_table_file(Pollutant p);  // "co2_cp_table.csv"

struct RunConfig {
  std::uint64_t seed = 1;
  fleet::Window window;
  std::array<cart::FitParams, kPollutantCount> fit{};
  double holdout_fraction = 0.2;  // share of make/model groups held out of training
  analytics::SmoothingOptions smoothing;
  std::size_t region_min_n = 30;
  std::optional<fs::path> euro_standards;  // built-in EU limits when unset
  impute::Policy policy = impute::Policy::tree_only;
  ingest::QcOptions qc;
  unsigned threads = 0;
};

ingest::QcReport run_qc(const fs::path& inspections, const fs::path& out_dir,
                        const RunConfig& config);

// Fits one tree per pollutant on the training side of the holdout split.
impute::TreeSet run_train(const fs::path& clean_inspections, const fs::path& certifications,
                          const fs::path& out_dir, const RunConfig& config);

std::vector<analytics::AccuracyReport> run_validate(const fs::path& clean_inspections,
                                                    const fs::path& certifications,
                                                    const fs::path& models_dir,
                                                    const fs::path& out_dir,
                                                    const RunConfig& config);

// Certifications are only read under the prefer-measured policy.
impute::ImputeResult run_impute(const fs::path& clean_inspections,
                                const std::optional<fs::path>& certifications,
                                const fs::path& models_dir, const fs::path& out_dir,
                                const RunConfig& config);

void run_aggregate(const fs::path& clean_inspections, const fs::path& imputed,
                   const fs::path& out_dir, const RunConfig& config);

// Analytics CSVs of `dir`, each preceded by a "# <file name>" line.
// accuracy_tables.csv is included when present.
void run_report(const fs::path& dir, std::ostream& out);

// qc, train, validate, impute, aggregate and report into one directory.
void run_all(const fs::path& inspections, const fs::path& certifications,
             const fs::path& out_dir, const RunConfig& config);

impute::TreeSet load_trees(const fs::path& models_dir);

// One training table per pollutant from matched class-4 records.
std::array<cart::TrainingTable, kPollutantCount> training_tables(
    const std::vector<ingest::VehicleRecord>& records,
    const std::vector<ingest::EmissionsMeasurement>& certifications);

inline constexpr std::array<std::string_view, 9> kImputedColumns = {
    "vehicle_id", "fuel_type", "engine_cc", "co2_g_km", "nox_mg_km",
    "thc_mg_km",  "co_mg_km",  "mpg",       "source"};

void write_imputed(std::ostream& out, const std::vector<impute::ImputedEmissions>& imputed);
std::vector<impute::ImputedEmissions> read_imputed(std::istream& in);

// Fleet observations with the imputed values of their vehicle; pollutant
// values are NaN for vehicles without imputation.
std::vector<analytics::Observation> join(const std::vector<fleet::FleetObservation>& observations,
                                         const std::vector<impute::ImputedEmissions>& imputed);

}  // namespace emx::pipeline
