#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace emx {

enum class ErrorCode {
  invalid_argument,
  parse,
  schema_mismatch,
  version_mismatch,
  io,
  infeasible,
  not_found,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library carries a stable code so the CLI can
// emit a machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Fuel type codes used by the inspection data.
enum class FuelType : std::uint8_t { DIE = 0, PET, CNG, ELD, HYB, LPG };

inline constexpr std::size_t kFuelTypeCount = 6;
inline constexpr std::array<FuelType, kFuelTypeCount> kAllFuelTypes{
    FuelType::DIE, FuelType::PET, FuelType::CNG,
    FuelType::ELD, FuelType::HYB, FuelType::LPG};

std::string_view to_string(FuelType fuel);
std::optional<FuelType> parse_fuel_type(std::string_view text);

inline constexpr std::uint8_t fuel_bit(FuelType fuel) {
  return static_cast<std::uint8_t>(1u << static_cast<unsigned>(fuel));
}

// Imputed quantities, in the units fixed by the certification schema:
// CO2 g/km, NOx/THC/CO mg/km, fuel efficiency in miles per gallon.
enum class Pollutant : std::uint8_t { co2 = 0, nox, thc, co, mpg };

inline constexpr std::size_t kPollutantCount = 5;
inline constexpr std::array<Pollutant, kPollutantCount> kAllPollutants{
    Pollutant::co2, Pollutant::nox, Pollutant::thc, Pollutant::co,
    Pollutant::mpg};

inline constexpr std::size_t index_of(Pollutant p) {
  return static_cast<std::size_t>(p);
}

std::string_view to_string(Pollutant p);   // "co2"
std::string_view column_name(Pollutant p); // "co2_g_km"
std::string_view unit_of(Pollutant p);     // "g/km"
std::optional<Pollutant> parse_pollutant(std::string_view text);

enum class Fleet : std::uint8_t { exported = 0, scrapped, on_road };

inline constexpr std::size_t kFleetCount = 3;
inline constexpr std::array<Fleet, kFleetCount> kAllFleets{
    Fleet::exported, Fleet::scrapped, Fleet::on_road};

std::string_view to_string(Fleet fleet);
std::optional<Fleet> parse_fleet(std::string_view text);

using Date = std::chrono::year_month_day;

// ISO-8601 "YYYY-MM-DD". Returns nullopt when the text is not shaped like a
// date; returns a value with !ok() when it is shaped like one but names a day
// that does not exist (2019-02-30).
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date date);
Date make_date(int y, unsigned m, unsigned d);

// Both dates must be ok().
std::int64_t days_between(Date from, Date to);
Date add_days(Date date, std::int64_t days);

// Shortest text that parses back to the same double.
std::string format_number(double value);

std::string_view trim(std::string_view text);

// Whole-field numeric parses (surrounding whitespace allowed); nullopt on
// anything else, including non-finite values.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

}  // namespace emx
