#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emx/cart.hpp"
#include "emx/common.hpp"
#include "emx/fleet.hpp"

// Fleet-level aggregates: box statistics, gaps, daily series, regional
// gaps, standard compliance, and holdout accuracy of the trees.

namespace emx::analytics {

enum class Metric : std::uint8_t { co2 = 0, nox, thc, co, mpg, age_years, engine_cc };

inline constexpr std::size_t kMetricCount = 7;
inline constexpr std::array<Metric, kMetricCount> kAllMetrics{
    Metric::co2, Metric::nox, Metric::thc, Metric::co,
    Metric::mpg, Metric::age_years, Metric::engine_cc};

std::string_view to_string(Metric m);
std::optional<Metric> parse_metric(std::string_view text);
constexpr Metric metric_of(Pollutant p) { return static_cast<Metric>(index_of(p)); }
constexpr std::size_t index_of(Metric m) { return static_cast<std::size_t>(m); }

// One dated fleet observation with its imputed emissions. Missing values are NaN.
struct Observation {
  std::string vehicle_id;
  Fleet fleet = Fleet::on_road;
  Date date;
  std::string region;
  std::optional<FuelType> fuel_type;
  std::array<double, kMetricCount> values{};

  double value(Metric m) const { return values[index_of(m)]; }
};

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;   // smallest value >= q1 - 1.5 IQR
  double whisker_high = 0.0;  // largest value <= q3 + 1.5 IQR
};

// Linear interpolation between order statistics (type 7); sorted non-empty input.
double quantile_sorted(std::span<const double> sorted, double p);

// Correctly rounded sum of finite values (Shewchuk partials).
double exact_sum(std::span<const double> values);

// Throws invalid_argument on empty or non-finite input. The mean is the
// correctly rounded sum divided by n.
SummaryStats summarize(std::span<const double> values);

struct MetricStats {
  Metric metric = Metric::co2;
  SummaryStats stats;
};

struct Gap {
  double mean = 0.0;         // a.mean - b.mean
  double mean_rel = 0.0;     // gap / b.mean (fraction)
  double median = 0.0;
  double median_rel = 0.0;
};

// Throws invalid_argument when the two statistics describe different metrics.
Gap fleet_gap(const MetricStats& a, const MetricStats& b);

struct FleetSummaryRow {
  Fleet fleet = Fleet::exported;
  Metric metric = Metric::co2;
  SummaryStats stats;
  std::optional<Gap> vs_scrapped;
  std::optional<Gap> vs_on_road;
};

// Rows for every fleet with data, in fleet then metric order.
std::vector<FleetSummaryRow> fleet_summary(std::span<const Observation> observations,
                                           std::span<const Metric> metrics);
const FleetSummaryRow* find(const std::vector<FleetSummaryRow>& rows, Fleet fleet, Metric metric);
void write_fleet_summary(std::ostream& out, const std::vector<FleetSummaryRow>& rows);

// Locally weighted linear regression with tricube weights over the
// ceil(span * n) nearest neighbours. x must be sorted ascending.
// `iterations` bisquare robustness passes follow the initial fit.
std::vector<double> lowess(std::span<const double> x, std::span<const double> y, double span,
                           int iterations = 0);

struct DailyPoint {
  Date date;
  Fleet fleet = Fleet::exported;
  std::size_t count = 0;
  double mean = 0.0;      // NaN when count is 0
  double smoothed = 0.0;  // NaN when count is 0
};

struct SmoothingOptions {
  double span = 0.25;
  int iterations = 0;
};

// One point per day of the window for each fleet, fleet-major; days without
// observations have count 0. Each fleet's non-empty days are smoothed by
// lowess on the day index; a fleet with a single non-empty day is left as is.
std::vector<DailyPoint> daily_series(std::span<const Observation> observations, Metric metric,
                                     const fleet::Window& window,
                                     const SmoothingOptions& smoothing = {});
void write_daily_series(std::ostream& out, Metric metric, const std::vector<DailyPoint>& points,
                        bool write_header = true);

enum class RegionStatus : std::uint8_t { positive, non_positive, insufficient };
std::string_view to_string(RegionStatus status);

struct RegionGapRow {
  std::string region;
  std::size_t n_exported = 0;
  std::size_t n_scrapped = 0;
  double mean_exported = 0.0;  // NaN without observations
  double mean_scrapped = 0.0;
  double gap = 0.0;
  RegionStatus status = RegionStatus::insufficient;
};

struct RegionGapReport {
  std::vector<RegionGapRow> rows;  // sorted by region
  std::size_t sufficient = 0;
  std::size_t positive = 0;
  double fraction = 0.0;  // positive / sufficient; NaN when none sufficient
};

// Regions need at least min_n observations in both fleets to count.
RegionGapReport region_gap_report(std::span<const Observation> observations, Metric metric,
                                  std::size_t min_n = 30);
void write_region_gaps(std::ostream& out, const RegionGapReport& report);

// Per-fuel pollutant limits; mpg is never limited.
struct EuroStandard {
  std::string name;
  std::array<std::array<std::optional<double>, kPollutantCount>, kFuelTypeCount> limits{};

  std::optional<double> limit(FuelType f, Pollutant p) const {
    return limits[static_cast<std::size_t>(f)][index_of(p)];
  }
  bool has_thresholds() const;
};

// {"EURO4": {"DIE": {"nox_mg_km": 250, ...}, ...}, ...}; standards in name order.
std::vector<EuroStandard> parse_standards(std::string_view json_text);
std::vector<EuroStandard> load_standards(const std::filesystem::path& path);
// Published EU type-approval limits for EURO4 and EURO6 passenger cars.
std::vector<EuroStandard> default_standards();
std::string default_standards_json();

struct ComplianceRow {
  std::string standard;
  Fleet fleet = Fleet::exported;
  FuelType fuel_type = FuelType::PET;
  std::string pollutant;  // pollutant name or "joint"
  std::optional<double> threshold;
  std::size_t n = 0;
  std::size_t failures = 0;

  double rate() const {
    return n == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(n);
  }
};

// A value fails when strictly above its limit; "joint" fails when any limited
// pollutant does. Throws invalid_argument if the standard has no limits.
std::vector<ComplianceRow> compliance_rates(std::span<const Observation> observations,
                                            const EuroStandard& standard);
void write_compliance(std::ostream& out, const std::vector<ComplianceRow>& rows,
                      bool write_header = true);

// Pearson correlation; NaN when either side has zero variance.
double pearson_r(std::span<const double> x, std::span<const double> y);
// R^2 of the least-squares line of y on x, 1 - SSE/SST; NaN when degenerate.
double ols_r_squared(std::span<const double> x, std::span<const double> y);

struct AccuracyPoint {
  double cp = 0.0;
  int nsplit = 0;
  double r = 0.0;
  double r_squared = 0.0;
};

struct AccuracyReport {
  Pollutant pollutant = Pollutant::co2;
  double pearson_r = 0.0;
  double r_squared = 0.0;
  std::size_t holdout_n = 0;
  std::size_t holdout_groups = 0;
  std::vector<AccuracyPoint> curve;  // one point per CP-table row
  std::vector<std::string> diagnostics;
};

// Group-disjoint split: a seeded `fraction` of the distinct groups go to the
// holdout side. Returns (training, holdout).
std::pair<cart::TrainingTable, cart::TrainingTable> split_holdout(const cart::TrainingTable& table,
                                                                  double fraction,
                                                                  std::uint64_t seed);

// Throws invalid_argument when a holdout group also appears in `training`.
AccuracyReport holdout_accuracy(const cart::FittedTree& tree,
                                const cart::TrainingTable& training,
                                const cart::TrainingTable& holdout);

void write_accuracy_tables(std::ostream& out, const cart::FittedTree& tree,
                           const AccuracyReport& report, bool write_header = true);

}  // namespace emx::analytics
