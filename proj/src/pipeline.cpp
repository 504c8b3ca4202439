#include "emx/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "emx/csv.hpp"
#include "emx/model_io.hpp"

namespace emx::pipeline {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_file(const fs::path& path, std::string_view what) {
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::not_found, std::string(what) + " not found: " + path.string());
  }
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  auto out = csv::open_output(path);
  fn(out);
  out.flush();
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
}

std::vector<ingest::VehicleRecord> read_records(const fs::path& path) {
  require_file(path, "inspections");
  return ingest::parse_inspections(path).records;
}

std::vector<ingest::EmissionsMeasurement> read_certifications(const fs::path& path) {
  require_file(path, "certifications");
  return ingest::parse_certifications(path).measurements;
}

cart::FitParams fit_params(const RunConfig& config, Pollutant p) {
  auto params = config.fit[index_of(p)];
  cart::validate(params);
  return params;
}

std::vector<analytics::EuroStandard> standards(const RunConfig& config) {
  if (!config.euro_standards) return analytics::default_standards();
  require_file(*config.euro_standards, "EURO standards file");
  return analytics::load_standards(*config.euro_standards);
}

}  // namespace

std::string tree_file(Pollutant p) { return std::string(to_string(p)) + "_tree.json"; }
std::string cp_table_file(Pollutant p) { return std::string(to_string(p)) + "_cp_table.csv"; }

std::array<cart::TrainingTable, kPollutantCount> training_tables(
    const std::vector<ingest::VehicleRecord>& records,
    const std::vector<ingest::EmissionsMeasurement>& certifications) {
  const auto index = match::Index::build(certifications);
  const auto matches = match::match_records(records, index);
  std::array<cart::TrainingTable, kPollutantCount> tables;
  for (Pollutant p : kAllPollutants) {
    tables[index_of(p)] = match::build_training_table(records, index, matches, p);
  }
  return tables;
}

ingest::QcReport run_qc(const fs::path& inspections, const fs::path& out_dir,
                        const RunConfig& config) {
  auto records = read_records(inspections);
  prepare_dir(out_dir);
  auto result = ingest::qc_filter(std::move(records), config.qc);
  write_file(out_dir / kCleanInspections,
             [&](std::ostream& out) { ingest::write_inspections(out, result.clean); });
  write_file(out_dir / kQcReport,
             [&](std::ostream& out) { ingest::write_qc_report(out, result.report); });
  return result.report;
}

impute::TreeSet run_train(const fs::path& clean_inspections, const fs::path& certifications,
                          const fs::path& out_dir, const RunConfig& config) {
  const auto records = read_records(clean_inspections);
  const auto certs = read_certifications(certifications);
  prepare_dir(out_dir);

  const auto index = match::Index::build(certs);
  const auto matches = match::match_records(records, index);
  write_file(out_dir / kMatchStats,
             [&](std::ostream& out) { match::write_match_stats(out, matches.stats); });

  impute::TreeSet trees;
  for (Pollutant p : kAllPollutants) {
    auto table = match::build_training_table(records, index, matches, p);
    if (table.rows.empty()) {
      throw Error(ErrorCode::infeasible,
                  "no matched class-4 records carry " + std::string(to_string(p)));
    }
    if (config.holdout_fraction > 0.0) {
      table = analytics::split_holdout(table, config.holdout_fraction, config.seed).first;
    }
    auto& tree = trees[index_of(p)];
    tree = cart::fit(table, fit_params(config, p));
    model_io::save(tree, out_dir / tree_file(p));
    write_file(out_dir / cp_table_file(p),
               [&](std::ostream& out) { model_io::write_cp_table(out, tree); });
  }
  return trees;
}

impute::TreeSet load_trees(const fs::path& models_dir) {
  impute::TreeSet trees;
  for (Pollutant p : kAllPollutants) {
    const auto path = models_dir / tree_file(p);
    require_file(path, "model file");
    trees[index_of(p)] = model_io::load(path);
    if (trees[index_of(p)].target_kind != p) {
      throw Error(ErrorCode::schema_mismatch, path.string() + " holds a tree for another target");
    }
  }
  return trees;
}

std::vector<analytics::AccuracyReport> run_validate(const fs::path& clean_inspections,
                                                    const fs::path& certifications,
                                                    const fs::path& models_dir,
                                                    const fs::path& out_dir,
                                                    const RunConfig& config) {
  if (!(config.holdout_fraction > 0.0 && config.holdout_fraction < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "validation needs a holdout fraction in (0, 1)");
  }
  const auto trees = load_trees(models_dir);
  const auto tables = training_tables(read_records(clean_inspections),
                                      read_certifications(certifications));
  prepare_dir(out_dir);
  std::vector<analytics::AccuracyReport> reports;
  std::ostringstream text;
  for (Pollutant p : kAllPollutants) {
    const auto [training, holdout] =
        analytics::split_holdout(tables[index_of(p)], config.holdout_fraction, config.seed);
    if (holdout.rows.empty()) {
      throw Error(ErrorCode::infeasible, "holdout for " + std::string(to_string(p)) + " is empty");
    }
    reports.push_back(analytics::holdout_accuracy(trees[index_of(p)], training, holdout));
    analytics::write_accuracy_tables(text, trees[index_of(p)], reports.back(), reports.size() == 1);
  }
  write_file(out_dir / kAccuracyTables, [&](std::ostream& out) { out << text.str(); });
  return reports;
}

void write_imputed(std::ostream& out, const std::vector<impute::ImputedEmissions>& imputed) {
  csv::write_row(out, std::span<const std::string_view>(kImputedColumns));
  std::vector<std::string> row(kImputedColumns.size());
  for (const auto& e : imputed) {
    row[0] = e.vehicle_id;
    row[1] = std::string(to_string(e.fuel_type));
    row[2] = format_number(e.engine_cc);
    for (Pollutant p : kAllPollutants) row[3 + index_of(p)] = format_number(e.value(p));
    row[8] = impute::source_flags(e);
    csv::write_row(out, row);
  }
}

std::vector<impute::ImputedEmissions> read_imputed(std::istream& in) {
  csv::Reader reader(in);
  csv::expect_header(reader, std::span<const std::string_view>(kImputedColumns), "imputed");
  std::vector<impute::ImputedEmissions> out;
  std::vector<std::string> f;
  const auto bad = [&](const std::string& what) {
    return Error(ErrorCode::parse, "imputed line " + std::to_string(reader.line()) + ": " + what);
  };
  while (reader.next(f)) {
    if (f.size() == 1 && trim(f[0]).empty()) continue;
    if (f.size() != kImputedColumns.size()) throw bad("expected 9 fields");
    impute::ImputedEmissions e;
    e.vehicle_id = f[0];
    const auto fuel = parse_fuel_type(f[1]);
    const auto cc = parse_double(f[2]);
    if (!fuel || !cc) throw bad("bad fuel_type or engine_cc");
    e.fuel_type = *fuel;
    e.engine_cc = *cc;
    for (Pollutant p : kAllPollutants) {
      const auto v = parse_double(f[3 + index_of(p)]);
      if (!v) throw bad("bad " + std::string(column_name(p)));
      e.values[index_of(p)] = *v;
    }
    std::string_view flags = f[8];
    while (!flags.empty()) {
      const auto cut = flags.find(';');
      const auto token = flags.substr(0, cut);
      flags = cut == std::string_view::npos ? std::string_view() : flags.substr(cut + 1);
      if (token == "unmatched-category") {
        e.unmatched_category = true;
        continue;
      }
      const auto colon = token.find(':');
      const auto p = colon == std::string_view::npos ? std::nullopt
                                                     : parse_pollutant(token.substr(0, colon));
      const auto kind = colon == std::string_view::npos ? std::string_view() : token.substr(colon + 1);
      if (!p || (kind != "m" && kind != "t")) throw bad("bad source flag");
      e.source[index_of(*p)] = kind == "m" ? impute::Source::exact_match : impute::Source::tree_imputed;
    }
    out.push_back(std::move(e));
  }
  return out;
}

impute::ImputeResult run_impute(const fs::path& clean_inspections,
                                const std::optional<fs::path>& certifications,
                                const fs::path& models_dir, const fs::path& out_dir,
                                const RunConfig& config) {
  const auto trees = load_trees(models_dir);
  const auto records = read_records(clean_inspections);
  std::optional<match::Index> index;
  if (config.policy == impute::Policy::prefer_measured) {
    if (!certifications) {
      throw Error(ErrorCode::invalid_argument, "prefer-measured policy needs certifications");
    }
    index = match::Index::build(read_certifications(*certifications));
  }
  prepare_dir(out_dir);
  impute::ImputeOptions options;
  options.policy = config.policy;
  options.threads = config.threads;
  auto result = impute::impute_fleet(records, trees, index ? &*index : nullptr, options);
  write_file(out_dir / kImputed, [&](std::ostream& out) { write_imputed(out, result.imputed); });
  write_file(out_dir / kImputeReport, [&](std::ostream& out) {
    csv::write_row(out, {"count", "value"});
    csv::write_row(out, {"records", std::to_string(records.size())});
    csv::write_row(out, {"imputed", std::to_string(result.imputed.size())});
    for (std::size_t r = 0; r < impute::kSkipReasonCount; ++r) {
      const auto reason = static_cast<impute::SkipReason>(r);
      csv::write_row(out, {std::string("skipped_") + std::string(impute::to_string(reason)),
                           std::to_string(result.count(reason))});
    }
  });
  return result;
}

std::vector<analytics::Observation> join(const std::vector<fleet::FleetObservation>& observations,
                                         const std::vector<impute::ImputedEmissions>& imputed) {
  std::unordered_map<std::string_view, const impute::ImputedEmissions*> by_id;
  by_id.reserve(imputed.size());
  for (const auto& e : imputed) by_id.emplace(e.vehicle_id, &e);
  std::vector<analytics::Observation> out;
  out.reserve(observations.size());
  for (const auto& o : observations) {
    analytics::Observation a;
    a.vehicle_id = o.vehicle_id;
    a.fleet = o.fleet;
    a.date = o.observation_date;
    a.region = o.postcode_region;
    a.fuel_type = o.fuel_type;
    a.values.fill(kNaN);
    const auto it = by_id.find(o.vehicle_id);
    if (it != by_id.end()) {
      for (Pollutant p : kAllPollutants) {
        a.values[analytics::index_of(analytics::metric_of(p))] = it->second->value(p);
      }
    }
    a.values[analytics::index_of(analytics::Metric::age_years)] = o.age_years;
    a.values[analytics::index_of(analytics::Metric::engine_cc)] = o.engine_cc.value_or(kNaN);
    out.push_back(std::move(a));
  }
  return out;
}

void run_aggregate(const fs::path& clean_inspections, const fs::path& imputed,
                   const fs::path& out_dir, const RunConfig& config) {
  fleet::validate(config.window);
  const auto euro = standards(config);
  const auto records = read_records(clean_inspections);
  require_file(imputed, "imputed emissions");
  auto imputed_in = csv::open_input(imputed);
  const auto values = read_imputed(imputed_in);
  prepare_dir(out_dir);

  fleet::FleetOptions options;
  options.window = config.window;
  options.seed = config.seed;
  const auto fleets = fleet::classify(records, options);
  write_file(out_dir / kObservations, [&](std::ostream& out) {
    fleet::write_observations(out, fleets.observations);
  });
  write_file(out_dir / kFleetCounts,
             [&](std::ostream& out) { fleet::write_counts(out, fleets.counts); });

  const auto observations = join(fleets.observations, values);
  write_file(out_dir / kFleetSummary, [&](std::ostream& out) {
    analytics::write_fleet_summary(
        out, analytics::fleet_summary(observations, analytics::kAllMetrics));
  });
  write_file(out_dir / kDailySeries, [&](std::ostream& out) {
    for (Pollutant p : kAllPollutants) {
      const auto m = analytics::metric_of(p);
      analytics::write_daily_series(
          out, m, analytics::daily_series(observations, m, config.window, config.smoothing),
          p == Pollutant::co2);
    }
  });
  write_file(out_dir / kRegionGaps, [&](std::ostream& out) {
    analytics::write_region_gaps(
        out, analytics::region_gap_report(observations, analytics::Metric::co2,
                                          config.region_min_n));
  });
  write_file(out_dir / kCompliance, [&](std::ostream& out) {
    bool header = true;
    for (const auto& standard : euro) {
      analytics::write_compliance(out, analytics::compliance_rates(observations, standard), header);
      header = false;
    }
  });
}

void run_report(const fs::path& dir, std::ostream& out) {
  for (const char* name : {kFleetSummary, kDailySeries, kRegionGaps, kCompliance, kAccuracyTables}) {
    const auto path = dir / name;
    if (name == std::string_view(kAccuracyTables) && !fs::exists(path)) continue;
    require_file(path, "analytics table");
    auto in = csv::open_input(path);
    out << "# " << name << '\n' << in.rdbuf();
  }
  if (!out) throw Error(ErrorCode::io, "failed writing report");
}

void run_all(const fs::path& inspections, const fs::path& certifications,
             const fs::path& out_dir, const RunConfig& config) {
  run_qc(inspections, out_dir, config);
  const auto clean = out_dir / kCleanInspections;
  run_train(clean, certifications, out_dir, config);
  if (config.holdout_fraction > 0.0) {
    run_validate(clean, certifications, out_dir, out_dir, config);
  }
  run_impute(clean, certifications, out_dir, out_dir, config);
  run_aggregate(clean, out_dir / kImputed, out_dir, config);
  write_file(out_dir / kReport, [&](std::ostream& out) { run_report(out_dir, out); });
}

}  // namespace emx::pipeline
