#include "emx/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <unordered_map>

#include "emx/csv.hpp"

namespace emx::ingest {

std::string_view to_string(Outcome outcome) {
  return outcome == Outcome::pass ? "pass" : "fail";
}

std::string_view to_string(QcRule rule) {
  switch (rule) {
    case QcRule::missing_required_field: return "missing_required_field";
    case QcRule::dual_disposition: return "dual_disposition";
    case QcRule::impossible_dates: return "impossible_dates";
    case QcRule::over_110_years: return "over_110_years";
  }
  return "?";
}

std::optional<int> VehicleRecord::model_year() const {
  if (!first_use_date || !first_use_date->ok()) return std::nullopt;
  return static_cast<int>(first_use_date->year());
}

namespace {

enum Col {
  kVehicleId, kMake, kModel, kFuel, kCc, kClass, kFirstUse, kTestDate, kOutcome,
  kOdometer, kRegion, kExport, kScrap, kColumnCount
};

struct RowError {
  std::string message;
};

std::optional<Date> optional_date(std::string_view text, std::string_view column) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  auto date = parse_date(text);
  if (!date) throw RowError{"unparseable " + std::string(column) + " '" + std::string(text) + "'"};
  return date;
}

std::string date_text(const std::optional<Date>& date) {
  return date ? format_date(*date) : std::string();
}

bool blank_line(const std::vector<std::string>& fields) {
  return fields.size() == 1 && trim(fields[0]).empty();
}

// Attributes repeated on every row of a vehicle: first non-empty value wins.
template <class T>
void merge_field(std::optional<T>& into, const std::optional<T>& value) {
  if (!into && value) into = value;
}

void merge_text(std::string& into, const std::string& value) {
  if (into.empty()) into = value;
}

}  // namespace

InspectionParse parse_inspections(std::istream& in) {
  csv::Reader reader(in);
  csv::expect_header(reader, kInspectionColumns, "inspections");

  InspectionParse out;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (blank_line(f)) continue;
    const auto line = reader.line();
    if (f.size() != kColumnCount) {
      out.diagnostics.push_back({line, "expected " + std::to_string(kColumnCount) +
                                           " fields, found " + std::to_string(f.size())});
      continue;
    }
    try {
      VehicleRecord row;
      row.vehicle_id = std::string(trim(f[kVehicleId]));
      if (row.vehicle_id.empty()) throw RowError{"empty vehicle_id"};
      row.make = std::string(trim(f[kMake]));
      row.model = std::string(trim(f[kModel]));
      if (!trim(f[kFuel]).empty()) {
        row.fuel_type = parse_fuel_type(f[kFuel]);
        if (!row.fuel_type) throw RowError{"unknown fuel_type '" + f[kFuel] + "'"};
      }
      if (!trim(f[kCc]).empty()) {
        row.engine_cc = parse_double(f[kCc]);
        if (!row.engine_cc || *row.engine_cc <= 0.0) {
          throw RowError{"engine_cc must be a positive number"};
        }
      }
      if (!trim(f[kClass]).empty()) {
        const auto cls = parse_int(f[kClass]);
        if (!cls || *cls < 1 || *cls > 7) throw RowError{"test_class must be 1-7"};
        row.test_class = static_cast<int>(*cls);
      }
      row.first_use_date = optional_date(f[kFirstUse], "first_use_date");
      if (auto test_date = optional_date(f[kTestDate], "test_date")) {
        TestEvent test;
        test.test_date = *test_date;
        const auto outcome = trim(f[kOutcome]);
        if (outcome == "pass" || outcome == "P") {
          test.outcome = Outcome::pass;
        } else if (outcome == "fail" || outcome == "F") {
          test.outcome = Outcome::fail;
        } else {
          throw RowError{"outcome must be pass or fail"};
        }
        if (!trim(f[kOdometer]).empty()) {
          test.odometer = parse_int(f[kOdometer]);
          if (!test.odometer || *test.odometer < 0) {
            throw RowError{"odometer must be a non-negative integer"};
          }
        }
        row.tests.push_back(test);
      }
      row.postcode_region = std::string(trim(f[kRegion]));
      row.export_date = optional_date(f[kExport], "export_date");
      row.scrap_date = optional_date(f[kScrap], "scrap_date");

      auto [it, inserted] = index.emplace(row.vehicle_id, out.records.size());
      if (inserted) {
        out.records.push_back(std::move(row));
        continue;
      }
      VehicleRecord& rec = out.records[it->second];
      merge_text(rec.make, row.make);
      merge_text(rec.model, row.model);
      merge_field(rec.fuel_type, row.fuel_type);
      merge_field(rec.engine_cc, row.engine_cc);
      merge_field(rec.test_class, row.test_class);
      merge_field(rec.first_use_date, row.first_use_date);
      merge_field(rec.export_date, row.export_date);
      merge_field(rec.scrap_date, row.scrap_date);
      merge_text(rec.postcode_region, row.postcode_region);
      for (const auto& t : row.tests) rec.tests.push_back(t);
    } catch (const RowError& e) {
      out.diagnostics.push_back({line, e.message});
    }
  }
  for (auto& rec : out.records) {
    std::stable_sort(rec.tests.begin(), rec.tests.end(), [](const TestEvent& a, const TestEvent& b) {
      return a.test_date < b.test_date;
    });
  }
  return out;
}

InspectionParse parse_inspections(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_inspections(in);
}

void write_inspections(std::ostream& out, const std::vector<VehicleRecord>& records) {
  csv::write_row(out, kInspectionColumns);
  for (const auto& r : records) {
    std::vector<std::string> row(kColumnCount);
    row[kVehicleId] = r.vehicle_id;
    row[kMake] = r.make;
    row[kModel] = r.model;
    row[kFuel] = r.fuel_type ? std::string(to_string(*r.fuel_type)) : "";
    row[kCc] = r.engine_cc ? format_number(*r.engine_cc) : "";
    row[kClass] = r.test_class ? std::to_string(*r.test_class) : "";
    row[kFirstUse] = date_text(r.first_use_date);
    row[kRegion] = r.postcode_region;
    row[kExport] = date_text(r.export_date);
    row[kScrap] = date_text(r.scrap_date);
    if (r.tests.empty()) {
      csv::write_row(out, row);
      continue;
    }
    for (const auto& t : r.tests) {
      row[kTestDate] = format_date(t.test_date);
      row[kOutcome] = std::string(to_string(t.outcome));
      row[kOdometer] = t.odometer ? std::to_string(*t.odometer) : "";
      csv::write_row(out, row);
    }
  }
}

CertificationParse parse_certifications(std::istream& in) {
  csv::Reader reader(in);
  csv::expect_header(reader, kCertificationColumns, "certifications");

  CertificationParse out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (blank_line(f)) continue;
    const auto line = reader.line();
    if (f.size() != kCertificationColumns.size()) {
      out.diagnostics.push_back({line, "expected 9 fields, found " + std::to_string(f.size())});
      continue;
    }
    try {
      EmissionsMeasurement m;
      m.make = std::string(trim(f[0]));
      m.model = std::string(trim(f[1]));
      const auto year = parse_int(f[2]);
      if (!year) throw RowError{"model_year must be an integer"};
      m.model_year = static_cast<int>(*year);
      const auto fuel = parse_fuel_type(f[3]);
      if (!fuel) throw RowError{"unknown fuel_type '" + f[3] + "'"};
      m.fuel_type = *fuel;
      bool any = false;
      for (Pollutant p : kAllPollutants) {
        const auto& text = f[4 + index_of(p)];
        if (trim(text).empty()) continue;
        const auto v = parse_double(text);
        if (!v) throw RowError{std::string(column_name(p)) + " is not a number"};
        if (p == Pollutant::mpg ? *v <= 0.0 : *v < 0.0) {
          throw RowError{std::string(column_name(p)) + " out of range"};
        }
        m.values[index_of(p)] = *v;
        any = true;
      }
      if (!any) throw RowError{"no pollutant values"};
      out.measurements.push_back(std::move(m));
    } catch (const RowError& e) {
      out.diagnostics.push_back({line, e.message});
    }
  }
  return out;
}

CertificationParse parse_certifications(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_certifications(in);
}

void write_certifications(std::ostream& out,
                          const std::vector<EmissionsMeasurement>& measurements) {
  csv::write_row(out, kCertificationColumns);
  for (const auto& m : measurements) {
    std::vector<std::string> row{m.make, m.model, std::to_string(m.model_year),
                                 std::string(to_string(m.fuel_type))};
    for (const auto& v : m.values) row.push_back(v ? format_number(*v) : "");
    csv::write_row(out, row);
  }
}

std::size_t QcReport::total_rejected() const {
  std::size_t total = 0;
  for (auto n : rejected) total += n;
  return total;
}

std::optional<QcRule> qc_check(const VehicleRecord& r, const QcOptions& options) {
  if (r.vehicle_id.empty() || !r.first_use_date || !r.test_class) {
    return QcRule::missing_required_field;
  }
  if (r.export_date && r.scrap_date) return QcRule::dual_disposition;

  const Date first_use = *r.first_use_date;
  std::vector<Date> events;
  for (const auto& t : r.tests) events.push_back(t.test_date);
  std::optional<Date> disposition = r.export_date ? r.export_date : r.scrap_date;
  if (disposition) events.push_back(*disposition);

  if (!first_use.ok()) return QcRule::impossible_dates;
  for (const Date& d : events) {
    if (!d.ok() || d < first_use) return QcRule::impossible_dates;
  }
  if (disposition && options.backdating_window_days && !r.tests.empty()) {
    const Date last_test = std::max_element(r.tests.begin(), r.tests.end(),
                                            [](const TestEvent& a, const TestEvent& b) {
                                              return a.test_date < b.test_date;
                                            })->test_date;
    if (days_between(*disposition, last_test) > *options.backdating_window_days) {
      return QcRule::impossible_dates;
    }
  }
  for (const Date& d : events) {
    if (age_years(first_use, d) > options.max_age_years) return QcRule::over_110_years;
  }
  return std::nullopt;
}

QcResult qc_filter(std::vector<VehicleRecord> records, const QcOptions& options) {
  QcResult out;
  out.report.input = records.size();
  out.clean.reserve(records.size());
  for (auto& r : records) {
    if (const auto rule = qc_check(r, options)) {
      ++out.report.rejected[static_cast<std::size_t>(*rule)];
    } else {
      out.clean.push_back(std::move(r));
    }
  }
  out.report.retained = out.clean.size();
  return out;
}

void write_qc_report(std::ostream& out, const QcReport& report) {
  csv::write_row(out, {"rule", "count"});
  csv::write_row(out, {"input", std::to_string(report.input)});
  for (QcRule rule : kAllQcRules) {
    csv::write_row(out, {to_string(rule), std::to_string(report.count(rule))});
  }
  csv::write_row(out, {"retained", std::to_string(report.retained)});
}

double age_years(Date first_use, Date event) {
  if (!first_use.ok() || !event.ok()) {
    throw Error(ErrorCode::invalid_argument, "age of an invalid date");
  }
  if (event < first_use) {
    throw Error(ErrorCode::invalid_argument,
                "event " + format_date(event) + " precedes first use " + format_date(first_use));
  }
  return static_cast<double>(days_between(first_use, event)) / 365.25;
}

double age_at(const VehicleRecord& record, Date event) {
  if (!record.first_use_date) {
    throw Error(ErrorCode::invalid_argument, "record has no first_use_date");
  }
  return age_years(*record.first_use_date, event);
}

}  // namespace emx::ingest
