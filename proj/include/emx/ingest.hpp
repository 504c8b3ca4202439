#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emx/common.hpp"

// Inspection and certification datasets: parsing, quality control, ages.

namespace emx::ingest {

enum class Outcome : std::uint8_t { pass, fail };

std::string_view to_string(Outcome outcome);

struct TestEvent {
  Date test_date;
  Outcome outcome = Outcome::pass;
  std::optional<std::int64_t> odometer;
};

// Dates are stored as read. A date shaped like YYYY-MM-DD that does not
// exist on the calendar is kept (with !ok()) so quality control can count it.
struct VehicleRecord {
  std::string vehicle_id;
  std::string make;
  std::string model;
  std::optional<FuelType> fuel_type;
  std::optional<double> engine_cc;
  std::optional<int> test_class;
  std::optional<Date> first_use_date;
  std::vector<TestEvent> tests;
  std::optional<Date> export_date;
  std::optional<Date> scrap_date;
  std::string postcode_region;  // empty when unknown

  // Year of first use; nullopt when that date is missing or invalid.
  std::optional<int> model_year() const;
};

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

struct InspectionParse {
  std::vector<VehicleRecord> records;  // in order of first appearance
  std::vector<Diagnostic> diagnostics;
};

inline constexpr std::array<std::string_view, 13> kInspectionColumns = {
    "vehicle_id", "make",        "model",           "fuel_type",   "engine_cc",
    "test_class", "first_use_date", "test_date",    "outcome",     "odometer",
    "postcode_region", "export_date", "scrap_date"};

// One record per vehicle_id; rows of the same vehicle contribute one test
// each (a row with an empty test_date carries no test). Malformed rows are
// skipped and reported; a missing or wrong header throws schema_mismatch.
InspectionParse parse_inspections(std::istream& in);
InspectionParse parse_inspections(const std::filesystem::path& path);

// One row per test, or a single test-less row for vehicles without tests.
void write_inspections(std::ostream& out, const std::vector<VehicleRecord>& records);

struct EmissionsMeasurement {
  std::string make;
  std::string model;
  FuelType fuel_type = FuelType::PET;
  int model_year = 0;
  std::array<std::optional<double>, kPollutantCount> values;

  std::optional<double> value(Pollutant p) const { return values[index_of(p)]; }
};

struct CertificationParse {
  std::vector<EmissionsMeasurement> measurements;
  std::vector<Diagnostic> diagnostics;
};

inline constexpr std::array<std::string_view, 9> kCertificationColumns = {
    "make",     "model",     "model_year", "fuel_type", "co2_g_km",
    "nox_mg_km", "thc_mg_km", "co_mg_km",  "mpg"};

// Rows with no pollutant, a negative value, or a non-positive mpg are
// skipped with a diagnostic.
CertificationParse parse_certifications(std::istream& in);
CertificationParse parse_certifications(const std::filesystem::path& path);

void write_certifications(std::ostream& out,
                          const std::vector<EmissionsMeasurement>& measurements);

enum class QcRule : std::uint8_t {
  missing_required_field = 0,
  dual_disposition,
  impossible_dates,
  over_110_years,
};

inline constexpr std::size_t kQcRuleCount = 4;
inline constexpr std::array<QcRule, kQcRuleCount> kAllQcRules{
    QcRule::missing_required_field, QcRule::dual_disposition, QcRule::impossible_dates,
    QcRule::over_110_years};

std::string_view to_string(QcRule rule);

struct QcOptions {
  // Export/scrap dated more than this many days before the last test is
  // impossible; nullopt disables the check.
  std::optional<int> backdating_window_days = 0;
  double max_age_years = 110.0;  // strictly older is rejected
};

struct QcReport {
  std::size_t input = 0;
  std::size_t retained = 0;
  std::array<std::size_t, kQcRuleCount> rejected{};

  std::size_t count(QcRule rule) const { return rejected[static_cast<std::size_t>(rule)]; }
  std::size_t total_rejected() const;
  bool reconciles() const { return input == retained + total_rejected(); }
};

struct QcResult {
  std::vector<VehicleRecord> clean;
  QcReport report;
};

// First failing rule in the order missing_required_field, dual_disposition,
// impossible_dates, over_110_years; nullopt when the record is clean.
std::optional<QcRule> qc_check(const VehicleRecord& record, const QcOptions& options = {});

QcResult qc_filter(std::vector<VehicleRecord> records, const QcOptions& options = {});

void write_qc_report(std::ostream& out, const QcReport& report);

// Days elapsed / 365.25. Throws invalid_argument when a date is invalid or
// the event precedes first use.
double age_years(Date first_use, Date event);
double age_at(const VehicleRecord& record, Date event);

}  // namespace emx::ingest
