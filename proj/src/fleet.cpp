#include "emx/fleet.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "emx/csv.hpp"
#include "emx/rng.hpp"

namespace emx::fleet {

void validate(const Window& window) {
  if (!window.start.ok() || !window.end.ok()) {
    throw Error(ErrorCode::invalid_argument, "window dates must be valid");
  }
  if (window.end < window.start) {
    throw Error(ErrorCode::invalid_argument, "window end precedes window start");
  }
}

namespace {

std::optional<Date> disposition_of(const ingest::VehicleRecord& r) {
  if (r.export_date) return r.export_date;
  return r.scrap_date;
}

// Index of the earliest test, or npos.
std::size_t first_test(const ingest::VehicleRecord& r) {
  std::size_t best = static_cast<std::size_t>(-1);
  for (std::size_t i = 0; i < r.tests.size(); ++i) {
    if (best == static_cast<std::size_t>(-1) || r.tests[i].test_date < r.tests[best].test_date) {
      best = i;
    }
  }
  return best;
}

bool eligible_on_road(const ingest::VehicleRecord& r, std::size_t t, std::size_t first,
                      const FleetOptions& options) {
  const Date d = r.tests[t].test_date;
  if (!d.ok() || !options.window.contains(d)) return false;
  if (options.require_prior_inspection && t == first) return false;
  if (const auto disposition = disposition_of(r)) {
    if (!options.on_road_before_disposition || !(d < *disposition)) return false;
  }
  return true;
}

FleetObservation observe(const ingest::VehicleRecord& r, std::size_t index, Fleet fleet,
                         Date date) {
  FleetObservation o;
  o.vehicle_id = r.vehicle_id;
  o.fleet = fleet;
  o.observation_date = date;
  o.age_years = r.first_use_date ? ingest::age_years(*r.first_use_date, date) : 0.0;
  o.postcode_region = r.postcode_region;
  o.fuel_type = r.fuel_type;
  o.engine_cc = r.engine_cc;
  o.record_index = index;
  return o;
}

}  // namespace

std::vector<SampledTest> sample_on_road(std::span<const ingest::VehicleRecord> records,
                                        const FleetOptions& options) {
  std::vector<SampledTest> out;
  std::map<int, std::vector<std::size_t>> by_year;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::size_t first = first_test(r);
    by_year.clear();
    for (std::size_t t = 0; t < r.tests.size(); ++t) {
      if (eligible_on_road(r, t, first, options)) {
        by_year[static_cast<int>(r.tests[t].test_date.year())].push_back(t);
      }
    }
    for (auto& [year, tests] : by_year) {
      // Order candidates by date so the draw ignores input row order.
      std::stable_sort(tests.begin(), tests.end(), [&](std::size_t a, std::size_t b) {
        return r.tests[a].test_date < r.tests[b].test_date;
      });
      std::size_t pick = 0;
      if (tests.size() > 1) {
        Rng rng(derive_seed(options.seed, r.vehicle_id + "/" + std::to_string(year)));
        pick = static_cast<std::size_t>(rng.below(tests.size()));
      }
      out.push_back(SampledTest{i, tests[pick], year});
    }
  }
  return out;
}

FleetResult classify(std::span<const ingest::VehicleRecord> records, const FleetOptions& options) {
  validate(options.window);
  FleetResult out;
  out.counts.vehicles = records.size();

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::size_t first = first_test(r);
    for (std::size_t t = 0; t < r.tests.size(); ++t) {
      const Date d = r.tests[t].test_date;
      if (!d.ok() || !options.window.contains(d)) continue;
      ++out.counts.tests_in_window;
      if (options.require_prior_inspection && t == first) ++out.counts.first_inspections_excluded;
    }

    const auto disposition = disposition_of(r);
    if (!disposition || !disposition->ok() || !options.window.contains(*disposition)) continue;
    if (options.require_prior_inspection &&
        (first == static_cast<std::size_t>(-1) || *disposition < r.tests[first].test_date)) {
      continue;
    }
    const Fleet fleet = r.export_date ? Fleet::exported : Fleet::scrapped;
    out.observations.push_back(observe(r, i, fleet, *disposition));
  }

  for (const auto& s : sample_on_road(records, options)) {
    const auto& r = records[s.record_index];
    out.observations.push_back(
        observe(r, s.record_index, Fleet::on_road, r.tests[s.test_index].test_date));
  }
  out.counts.on_road_vehicle_years =
      static_cast<std::size_t>(std::count_if(out.observations.begin(), out.observations.end(),
                                             [](const FleetObservation& o) {
                                               return o.fleet == Fleet::on_road;
                                             }));

  std::sort(out.observations.begin(), out.observations.end(),
            [](const FleetObservation& a, const FleetObservation& b) {
              if (a.fleet != b.fleet) return a.fleet < b.fleet;
              if (a.observation_date != b.observation_date) {
                return a.observation_date < b.observation_date;
              }
              return a.vehicle_id < b.vehicle_id;
            });
  for (const auto& o : out.observations) {
    ++out.counts.observations[static_cast<std::size_t>(o.fleet)];
  }
  return out;
}

void write_observations(std::ostream& out, std::span<const FleetObservation> observations) {
  csv::write_row(out, kObservationColumns);
  for (const auto& o : observations) {
    csv::write_row(out, {o.vehicle_id, to_string(o.fleet), format_date(o.observation_date),
                         format_number(o.age_years), o.postcode_region,
                         o.fuel_type ? to_string(*o.fuel_type) : std::string_view(),
                         o.engine_cc ? format_number(*o.engine_cc) : std::string()});
  }
}

std::vector<FleetObservation> read_observations(std::istream& in) {
  csv::Reader reader(in);
  csv::expect_header(reader, kObservationColumns, "fleet observations");
  std::vector<FleetObservation> out;
  std::vector<std::string> f;
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::parse,
                "fleet observations line " + std::to_string(reader.line()) + ": " + what);
  };
  while (reader.next(f)) {
    if (f.size() == 1 && trim(f[0]).empty()) continue;
    if (f.size() != kObservationColumns.size()) fail("wrong field count");
    FleetObservation o;
    o.vehicle_id = f[0];
    const auto fleet = parse_fleet(f[1]);
    if (!fleet) fail("unknown fleet '" + f[1] + "'");
    o.fleet = *fleet;
    const auto date = parse_date(f[2]);
    if (!date || !date->ok()) fail("bad observation_date");
    o.observation_date = *date;
    const auto age = parse_double(f[3]);
    if (!age) fail("bad age_years");
    o.age_years = *age;
    o.postcode_region = f[4];
    if (!trim(f[5]).empty()) {
      o.fuel_type = parse_fuel_type(f[5]);
      if (!o.fuel_type) fail("unknown fuel_type");
    }
    if (!trim(f[6]).empty()) {
      o.engine_cc = parse_double(f[6]);
      if (!o.engine_cc) fail("bad engine_cc");
    }
    o.record_index = out.size();
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<FleetObservation> read_observations(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return read_observations(in);
}

void write_counts(std::ostream& out, const FleetCounts& counts) {
  csv::write_row(out, {"count", "value"});
  csv::write_row(out, {"vehicles", std::to_string(counts.vehicles)});
  csv::write_row(out, {"tests_in_window", std::to_string(counts.tests_in_window)});
  csv::write_row(out, {"first_inspections_excluded",
                       std::to_string(counts.first_inspections_excluded)});
  csv::write_row(out, {"on_road_vehicle_years", std::to_string(counts.on_road_vehicle_years)});
  for (Fleet f : kAllFleets) {
    csv::write_row(out, {std::string("observations_") + std::string(to_string(f)),
                         std::to_string(counts.observations[static_cast<std::size_t>(f)])});
  }
}

}  // namespace emx::fleet
