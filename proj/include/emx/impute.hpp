#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emx/cart.hpp"
#include "emx/ingest.hpp"
#include "emx/match.hpp"

// Per-vehicle emissions for class-4 records from the five pollutant trees.

namespace emx::impute {

enum class Policy : std::uint8_t { tree_only, prefer_measured };

std::string_view to_string(Policy policy);
// Accepts "tree-only"/"tree_only" and "prefer-measured"/"prefer_measured".
std::optional<Policy> parse_policy(std::string_view text);

enum class Source : std::uint8_t { tree_imputed, exact_match };

enum class SkipReason : std::uint8_t {
  non_class4 = 0,
  missing_engine_cc,
  missing_fuel_type,
  missing_model_year,
};

inline constexpr std::size_t kSkipReasonCount = 4;

std::string_view to_string(SkipReason reason);

struct ImputedEmissions {
  std::string vehicle_id;
  FuelType fuel_type = FuelType::PET;
  double engine_cc = 0.0;
  std::array<double, kPollutantCount> values{};
  std::array<Source, kPollutantCount> source{};
  bool unmatched_category = false;

  double value(Pollutant p) const { return values[index_of(p)]; }
};

// "co2:t;nox:t;thc:t;co:t;mpg:t" with m for exact-match values, plus
// ";unmatched-category" when a tree met an unseen fuel code.
std::string source_flags(const ImputedEmissions& e);

using TreeSet = std::array<cart::FittedTree, kPollutantCount>;

struct ImputeOptions {
  Policy policy = Policy::tree_only;
  cart::UnseenCategory unseen = cart::UnseenCategory::go_right;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct ImputeResult {
  std::vector<ImputedEmissions> imputed;   // input order
  std::vector<std::size_t> record_index;   // parallel to imputed
  std::array<std::size_t, kSkipReasonCount> skipped{};

  std::size_t count(SkipReason reason) const {
    return skipped[static_cast<std::size_t>(reason)];
  }
  std::size_t total_skipped() const;
};

std::optional<SkipReason> skip_reason(const ingest::VehicleRecord& record);

// `index` may be null, in which case every value is tree-imputed.
ImputeResult impute_fleet(std::span<const ingest::VehicleRecord> records, const TreeSet& trees,
                          const match::Index* index, const ImputeOptions& options = {});

}  // namespace emx::impute
