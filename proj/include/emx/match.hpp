#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "emx/cart.hpp"
#include "emx/common.hpp"
#include "emx/ingest.hpp"

// Exact linkage of inspection records to certification measurements.

namespace emx::match {

// Lowercase, drop ASCII punctuation, collapse whitespace runs to one space, trim.
std::string normalize(std::string_view text);

struct MatchKey {
  std::string make;   // normalized
  std::string model;  // normalized
  FuelType fuel_type = FuelType::PET;
  int model_year = 0;

  friend bool operator==(const MatchKey&, const MatchKey&) = default;
};

struct MatchKeyHash {
  std::size_t operator()(const MatchKey& key) const;
};

MatchKey key_of(const ingest::EmissionsMeasurement& m);
// nullopt when the record lacks a fuel type or a valid first-use year.
std::optional<MatchKey> key_of(const ingest::VehicleRecord& r);

// Stable identifier of a key, used to keep make/model groups whole when
// splitting data for holdout validation.
std::uint64_t group_of(const MatchKey& key);

struct IndexedMeasurement {
  MatchKey key;
  std::array<std::optional<double>, kPollutantCount> values;  // mean over rows
  std::size_t rows = 0;

  std::optional<double> value(Pollutant p) const { return values[index_of(p)]; }
};

class Index {
 public:
  // Duplicate keys collapse to the per-pollutant mean of the rows carrying it.
  static Index build(std::span<const ingest::EmissionsMeasurement> measurements);

  const IndexedMeasurement* find(const MatchKey& key) const;
  std::size_t size() const { return entries_.size(); }
  // In order of first appearance.
  const std::vector<IndexedMeasurement>& entries() const { return entries_; }

 private:
  std::vector<IndexedMeasurement> entries_;
  std::unordered_map<MatchKey, std::size_t, MatchKeyHash> lookup_;
};

// Fleet label from the disposition alone: exported, scrapped, or on_road.
Fleet disposition_fleet(const ingest::VehicleRecord& r);

struct MatchStatsRow {
  std::string fleet;  // fleet name or "all"
  std::string test_class;  // class number, "unknown", or "all"
  std::size_t total = 0;
  std::size_t matched = 0;

  double rate() const {
    return total == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(total);
  }
};

struct MatchStats {
  std::size_t total = 0;
  std::size_t matched = 0;
  std::vector<MatchStatsRow> rows;

  double rate() const {
    return total == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(total);
  }
  const MatchStatsRow* find(std::string_view fleet, std::string_view test_class) const;
};

struct MatchResult {
  // Parallel to the input records: entry index in the Index, or nullopt.
  std::vector<std::optional<std::size_t>> entry;
  MatchStats stats;

  std::size_t matched() const { return stats.matched; }
  std::size_t unmatched() const { return stats.total - stats.matched; }
};

MatchResult match_records(std::span<const ingest::VehicleRecord> records, const Index& index);

void write_match_stats(std::ostream& out, const MatchStats& stats);

// Training rows for one pollutant: one row per matched class-4 record with
// its observed engine_cc, targeting the indexed measurement of its key.
cart::TrainingTable build_training_table(std::span<const ingest::VehicleRecord> records,
                                         const Index& index, const MatchResult& matches,
                                         Pollutant pollutant);

}  // namespace emx::match
