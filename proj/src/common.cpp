#include "emx/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace emx {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse: return "parse_error";
    case ErrorCode::schema_mismatch: return "schema_mismatch";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::io: return "io_error";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::not_found: return "not_found";
  }
  return "unknown";
}

std::string_view to_string(FuelType fuel) {
  switch (fuel) {
    case FuelType::DIE: return "DIE";
    case FuelType::PET: return "PET";
    case FuelType::CNG: return "CNG";
    case FuelType::ELD: return "ELD";
    case FuelType::HYB: return "HYB";
    case FuelType::LPG: return "LPG";
  }
  return "?";
}

std::optional<FuelType> parse_fuel_type(std::string_view text) {
  text = trim(text);
  for (FuelType f : kAllFuelTypes) {
    if (text == to_string(f)) return f;
  }
  return std::nullopt;
}

std::string_view to_string(Pollutant p) {
  switch (p) {
    case Pollutant::co2: return "co2";
    case Pollutant::nox: return "nox";
    case Pollutant::thc: return "thc";
    case Pollutant::co: return "co";
    case Pollutant::mpg: return "mpg";
  }
  return "?";
}

std::string_view column_name(Pollutant p) {
  switch (p) {
    case Pollutant::co2: return "co2_g_km";
    case Pollutant::nox: return "nox_mg_km";
    case Pollutant::thc: return "thc_mg_km";
    case Pollutant::co: return "co_mg_km";
    case Pollutant::mpg: return "mpg";
  }
  return "?";
}

std::string_view unit_of(Pollutant p) {
  switch (p) {
    case Pollutant::co2: return "g/km";
    case Pollutant::nox:
    case Pollutant::thc:
    case Pollutant::co: return "mg/km";
    case Pollutant::mpg: return "mpg";
  }
  return "?";
}

std::optional<Pollutant> parse_pollutant(std::string_view text) {
  text = trim(text);
  for (Pollutant p : kAllPollutants) {
    if (text == to_string(p) || text == column_name(p)) return p;
  }
  return std::nullopt;
}

std::string_view to_string(Fleet fleet) {
  switch (fleet) {
    case Fleet::exported: return "exported";
    case Fleet::scrapped: return "scrapped";
    case Fleet::on_road: return "on_road";
  }
  return "?";
}

std::optional<Fleet> parse_fleet(std::string_view text) {
  text = trim(text);
  for (Fleet f : kAllFleets) {
    if (text == to_string(f)) return f;
  }
  return std::nullopt;
}

namespace {

bool parse_digits(std::string_view text, int& out) {
  if (text.empty()) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_digits(text.substr(0, 4), y) || !parse_digits(text.substr(5, 2), m) ||
      !parse_digits(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  return Date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
              std::chrono::day{static_cast<unsigned>(d)}};
}

std::string format_date(Date date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

Date make_date(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

std::int64_t days_between(Date from, Date to) {
  return (std::chrono::sys_days{to} - std::chrono::sys_days{from}).count();
}

Date add_days(Date date, std::int64_t days) {
  return Date{std::chrono::sys_days{date} + std::chrono::days{days}};
}

std::string format_number(double value) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string_view trim(std::string_view text) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<long long> parse_int(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace emx
