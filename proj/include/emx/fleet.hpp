#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emx/common.hpp"
#include "emx/ingest.hpp"

// Fleet membership and the dated observation sets built from it.

namespace emx::fleet {

struct Window {
  Date start = make_date(2005, 1, 1);
  Date end = make_date(2021, 12, 31);

  bool contains(Date d) const { return start <= d && d <= end; }
  std::int64_t days() const { return days_between(start, end) + 1; }
};

void validate(const Window& window);

struct FleetOptions {
  Window window;
  std::uint64_t seed = 1;
  // Count only used vehicles: at least one inspection before the observation
  // (on or before the disposition date for exported and scrapped vehicles).
  bool require_prior_inspection = true;
  // Exported and scrapped vehicles also yield on-road observations from
  // tests dated before their disposition.
  bool on_road_before_disposition = true;
};

struct FleetObservation {
  std::string vehicle_id;
  Fleet fleet = Fleet::on_road;
  Date observation_date;
  double age_years = 0.0;
  std::string postcode_region;
  std::optional<FuelType> fuel_type;
  std::optional<double> engine_cc;
  std::size_t record_index = 0;  // into the classified records; not serialized
};

struct FleetCounts {
  std::size_t vehicles = 0;
  std::size_t tests_in_window = 0;
  std::size_t on_road_vehicle_years = 0;
  std::array<std::size_t, kFleetCount> observations{};
  std::size_t first_inspections_excluded = 0;
};

struct FleetResult {
  // Sorted by (fleet, observation_date, vehicle_id).
  std::vector<FleetObservation> observations;
  FleetCounts counts;
};

struct SampledTest {
  std::size_t record_index = 0;
  std::size_t test_index = 0;
  int year = 0;
};

// One test per vehicle per calendar year, drawn uniformly from that year's
// eligible tests with a sub-seed derived from (seed, vehicle_id, year).
// Eligible: inside the window, not the vehicle's first-ever test when
// require_prior_inspection, and before any disposition (or never, for
// disposed vehicles, when on_road_before_disposition is false).
std::vector<SampledTest> sample_on_road(std::span<const ingest::VehicleRecord> records,
                                        const FleetOptions& options);

FleetResult classify(std::span<const ingest::VehicleRecord> records,
                     const FleetOptions& options = {});

inline constexpr std::array<std::string_view, 7> kObservationColumns = {
    "vehicle_id", "fleet", "observation_date", "age_years", "postcode_region",
    "fuel_type", "engine_cc"};

void write_observations(std::ostream& out, std::span<const FleetObservation> observations);
std::vector<FleetObservation> read_observations(std::istream& in);
std::vector<FleetObservation> read_observations(const std::filesystem::path& path);

void write_counts(std::ostream& out, const FleetCounts& counts);

}  // namespace emx::fleet
