#include "emx/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "emx/csv.hpp"
#include "emx/kernels.hpp"
#include "emx/rng.hpp"
#include "json.hpp"

namespace emx::analytics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string number_or_empty(double v) { return std::isnan(v) ? std::string() : format_number(v); }

}  // namespace

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::co2: return "co2";
    case Metric::nox: return "nox";
    case Metric::thc: return "thc";
    case Metric::co: return "co";
    case Metric::mpg: return "mpg";
    case Metric::age_years: return "age_years";
    case Metric::engine_cc: return "engine_cc";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view text) {
  text = trim(text);
  for (Metric m : kAllMetrics) {
    if (text == to_string(m)) return m;
  }
  if (auto p = parse_pollutant(text)) return metric_of(*p);
  return std::nullopt;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::invalid_argument, "quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double exact_sum(std::span<const double> values) {
  std::vector<double> partials;
  for (double x : values) {
    std::size_t i = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  std::size_t n = partials.size();
  if (n == 0) return 0.0;
  double hi = partials[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials[--n];
    hi = x + y;
    lo = y - (hi - x);
    if (lo != 0.0) break;
  }
  // Round half-even across the remaining partials.
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::invalid_argument, "summarize needs values");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "summarize: non-finite value");
  }
  std::sort(sorted.begin(), sorted.end());

  SummaryStats s;
  s.n = sorted.size();
  s.mean = exact_sum(sorted) / static_cast<double>(s.n);
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  const double iqr = s.q3 - s.q1;
  const double low_fence = s.q1 - 1.5 * iqr;
  const double high_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = *std::lower_bound(sorted.begin(), sorted.end(), low_fence);
  s.whisker_high = *(std::upper_bound(sorted.begin(), sorted.end(), high_fence) - 1);
  return s;
}

Gap fleet_gap(const MetricStats& a, const MetricStats& b) {
  if (a.metric != b.metric) {
    throw Error(ErrorCode::invalid_argument, "fleet_gap: comparing " +
                                                 std::string(to_string(a.metric)) + " with " +
                                                 std::string(to_string(b.metric)));
  }
  Gap g;
  g.mean = a.stats.mean - b.stats.mean;
  g.median = a.stats.median - b.stats.median;
  g.mean_rel = b.stats.mean == 0.0 ? kNaN : g.mean / b.stats.mean;
  g.median_rel = b.stats.median == 0.0 ? kNaN : g.median / b.stats.median;
  return g;
}

std::vector<FleetSummaryRow> fleet_summary(std::span<const Observation> observations,
                                           std::span<const Metric> metrics) {
  std::array<std::vector<std::optional<SummaryStats>>, kFleetCount> stats;
  std::vector<double> values;
  for (Fleet f : kAllFleets) {
    for (Metric m : metrics) {
      values.clear();
      for (const auto& o : observations) {
        if (o.fleet == f && std::isfinite(o.value(m))) values.push_back(o.value(m));
      }
      stats[static_cast<std::size_t>(f)].push_back(values.empty() ? std::nullopt
                                                                  : std::optional(summarize(values)));
    }
  }

  std::vector<FleetSummaryRow> rows;
  for (Fleet f : kAllFleets) {
    for (std::size_t k = 0; k < metrics.size(); ++k) {
      const auto& s = stats[static_cast<std::size_t>(f)][k];
      if (!s) continue;
      FleetSummaryRow row{f, metrics[k], *s, std::nullopt, std::nullopt};
      const auto gap_to = [&](Fleet base) -> std::optional<Gap> {
        const auto& b = stats[static_cast<std::size_t>(base)][k];
        if (base == f || !b) return std::nullopt;
        return fleet_gap(MetricStats{metrics[k], *s}, MetricStats{metrics[k], *b});
      };
      row.vs_scrapped = gap_to(Fleet::scrapped);
      row.vs_on_road = gap_to(Fleet::on_road);
      rows.push_back(row);
    }
  }
  return rows;
}

const FleetSummaryRow* find(const std::vector<FleetSummaryRow>& rows, Fleet fleet, Metric metric) {
  for (const auto& r : rows) {
    if (r.fleet == fleet && r.metric == metric) return &r;
  }
  return nullptr;
}

void write_fleet_summary(std::ostream& out, const std::vector<FleetSummaryRow>& rows) {
  csv::write_row(out, {"fleet", "metric", "n", "mean", "median", "q1", "q3", "whisker_low",
                       "whisker_high", "mean_gap_vs_scrapped", "mean_gap_pct_vs_scrapped",
                       "mean_gap_vs_on_road", "mean_gap_pct_vs_on_road"});
  const auto gap_fields = [](const std::optional<Gap>& g) {
    if (!g) return std::pair<std::string, std::string>{};
    return std::pair{format_number(g->mean), number_or_empty(g->mean_rel * 100.0)};
  };
  for (const auto& r : rows) {
    const auto [scrap_gap, scrap_pct] = gap_fields(r.vs_scrapped);
    const auto [road_gap, road_pct] = gap_fields(r.vs_on_road);
    csv::write_row(out, {std::string(to_string(r.fleet)), std::string(to_string(r.metric)),
                         std::to_string(r.stats.n), format_number(r.stats.mean),
                         format_number(r.stats.median), format_number(r.stats.q1),
                         format_number(r.stats.q3), format_number(r.stats.whisker_low),
                         format_number(r.stats.whisker_high), scrap_gap, scrap_pct, road_gap,
                         road_pct});
  }
}

std::vector<double> lowess(std::span<const double> x, std::span<const double> y, double span,
                           int iterations) {
  const std::size_t n = x.size();
  if (y.size() != n) throw Error(ErrorCode::invalid_argument, "lowess: x and y differ in length");
  if (n < 2) throw Error(ErrorCode::invalid_argument, "lowess needs at least two points");
  if (!(span > 0.0 && span <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "lowess span must lie in (0, 1]");
  }
  if (iterations < 0) throw Error(ErrorCode::invalid_argument, "lowess iterations must be >= 0");
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] < x[i - 1]) throw Error(ErrorCode::invalid_argument, "lowess: x must be sorted");
  }
  const double range = x[n - 1] - x[0];
  if (!(range > 0.0)) throw Error(ErrorCode::invalid_argument, "lowess: degenerate x range");

  const auto k = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(span * static_cast<double>(n))), 2, n);
  std::vector<double> fitted(n);
  std::vector<double> robust(n, 1.0);
  std::vector<double> w(k);

  for (int pass = 0; pass <= iterations; ++pass) {
    std::size_t lo = 0;
    for (std::size_t i = 0; i < n; ++i) {
      while (lo + k < n && x[i] - x[lo] > x[lo + k] - x[i]) ++lo;
      const double h = std::max(x[i] - x[lo], x[lo + k - 1] - x[i]);
      for (std::size_t j = 0; j < k; ++j) {
        double weight = 1.0;
        if (h > 0.0) {
          const double u = std::abs(x[lo + j] - x[i]) / h;
          const double t = u < 1.0 ? 1.0 - u * u * u : 0.0;
          weight = t * t * t;
        }
        w[j] = weight * robust[lo + j];
      }
      const auto xs = x.subspan(lo, k);
      const auto ys = y.subspan(lo, k);
      const auto sums = kernels::weighted_sums(xs, ys, w);
      if (!(sums.sw > 0.0)) {
        fitted[i] = y[i];
        continue;
      }
      const double cx = sums.swx / sums.sw;
      const double cy = sums.swy / sums.sw;
      const auto cross = kernels::weighted_cross(xs, ys, w, cx, cy);
      // Local x spread too small for a slope: fall back to the weighted mean.
      if (cross.swxx <= 1e-12 * sums.sw * std::max(h * h, range * range * 1e-12)) {
        fitted[i] = cy;
      } else {
        fitted[i] = cy + cross.swxy / cross.swxx * (x[i] - cx);
      }
    }
    if (pass == iterations) break;

    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = std::abs(y[i] - fitted[i]);
    std::vector<double> sorted = residual;
    std::sort(sorted.begin(), sorted.end());
    const double s = quantile_sorted(sorted, 0.5);
    if (!(s > 0.0)) break;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = residual[i] / (6.0 * s);
      robust[i] = u < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
    }
  }
  return fitted;
}

std::vector<DailyPoint> daily_series(std::span<const Observation> observations, Metric metric,
                                     const fleet::Window& window,
                                     const SmoothingOptions& smoothing) {
  fleet::validate(window);
  const auto days = static_cast<std::size_t>(window.days());
  std::vector<DailyPoint> points(kFleetCount * days);
  std::vector<double> sums(points.size(), 0.0);
  for (std::size_t f = 0; f < kFleetCount; ++f) {
    for (std::size_t d = 0; d < days; ++d) {
      auto& p = points[f * days + d];
      p.fleet = kAllFleets[f];
      p.date = add_days(window.start, static_cast<std::int64_t>(d));
    }
  }
  for (const auto& o : observations) {
    const double v = o.value(metric);
    if (!std::isfinite(v) || !o.date.ok() || !window.contains(o.date)) continue;
    const auto slot = static_cast<std::size_t>(o.fleet) * days +
                      static_cast<std::size_t>(days_between(window.start, o.date));
    ++points[slot].count;
    sums[slot] += v;
  }

  std::vector<double> xs, ys;
  for (std::size_t f = 0; f < kFleetCount; ++f) {
    xs.clear();
    ys.clear();
    for (std::size_t d = 0; d < days; ++d) {
      auto& p = points[f * days + d];
      if (p.count == 0) {
        p.mean = p.smoothed = kNaN;
        continue;
      }
      p.mean = sums[f * days + d] / static_cast<double>(p.count);
      p.smoothed = p.mean;
      xs.push_back(static_cast<double>(d));
      ys.push_back(p.mean);
    }
    if (xs.size() < 2) continue;
    const auto fitted = lowess(xs, ys, smoothing.span, smoothing.iterations);
    for (std::size_t j = 0; j < xs.size(); ++j) {
      points[f * days + static_cast<std::size_t>(xs[j])].smoothed = fitted[j];
    }
  }
  return points;
}

void write_daily_series(std::ostream& out, Metric metric, const std::vector<DailyPoint>& points,
                        bool write_header) {
  if (write_header) csv::write_row(out, {"date", "fleet", "metric", "count", "mean", "smoothed"});
  for (const auto& p : points) {
    csv::write_row(out, {format_date(p.date), std::string(to_string(p.fleet)),
                         std::string(to_string(metric)), std::to_string(p.count),
                         number_or_empty(p.mean), number_or_empty(p.smoothed)});
  }
}

std::string_view to_string(RegionStatus status) {
  switch (status) {
    case RegionStatus::positive: return "positive";
    case RegionStatus::non_positive: return "non_positive";
    case RegionStatus::insufficient: return "insufficient";
  }
  return "?";
}

RegionGapReport region_gap_report(std::span<const Observation> observations, Metric metric,
                                  std::size_t min_n) {
  struct Acc {
    std::vector<double> exported, scrapped;
  };
  std::map<std::string, Acc> regions;
  for (const auto& o : observations) {
    if (o.region.empty() || o.fleet == Fleet::on_road) continue;
    const double v = o.value(metric);
    if (!std::isfinite(v)) continue;
    auto& acc = regions[o.region];
    (o.fleet == Fleet::exported ? acc.exported : acc.scrapped).push_back(v);
  }

  RegionGapReport report;
  for (const auto& [region, acc] : regions) {
    RegionGapRow row;
    row.region = region;
    row.n_exported = acc.exported.size();
    row.n_scrapped = acc.scrapped.size();
    row.mean_exported = acc.exported.empty()
                            ? kNaN
                            : kernels::sum(acc.exported) / static_cast<double>(row.n_exported);
    row.mean_scrapped = acc.scrapped.empty()
                            ? kNaN
                            : kernels::sum(acc.scrapped) / static_cast<double>(row.n_scrapped);
    row.gap = row.mean_exported - row.mean_scrapped;
    if (row.n_exported < std::max<std::size_t>(min_n, 1) ||
        row.n_scrapped < std::max<std::size_t>(min_n, 1)) {
      row.status = RegionStatus::insufficient;
    } else {
      ++report.sufficient;
      row.status = row.gap > 0.0 ? RegionStatus::positive : RegionStatus::non_positive;
      if (row.gap > 0.0) ++report.positive;
    }
    report.rows.push_back(std::move(row));
  }
  report.fraction = report.sufficient == 0
                        ? kNaN
                        : static_cast<double>(report.positive) /
                              static_cast<double>(report.sufficient);
  return report;
}

void write_region_gaps(std::ostream& out, const RegionGapReport& report) {
  csv::write_row(out, {"region", "n_exported", "n_scrapped", "mean_exported", "mean_scrapped",
                       "gap", "status"});
  for (const auto& r : report.rows) {
    csv::write_row(out, {r.region, std::to_string(r.n_exported), std::to_string(r.n_scrapped),
                         number_or_empty(r.mean_exported), number_or_empty(r.mean_scrapped),
                         number_or_empty(r.gap), std::string(to_string(r.status))});
  }
}

bool EuroStandard::has_thresholds() const {
  for (const auto& fuel : limits) {
    for (const auto& v : fuel) {
      if (v) return true;
    }
  }
  return false;
}

std::vector<EuroStandard> parse_standards(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("standards: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::schema_mismatch, "standards: expected an object");
  std::vector<EuroStandard> out;
  for (const auto& [name, fuels] : doc.items()) {
    if (!fuels.is_object()) {
      throw Error(ErrorCode::schema_mismatch, "standards: " + name + " must map fuel codes");
    }
    EuroStandard s;
    s.name = name;
    for (const auto& [fuel_code, limits] : fuels.items()) {
      const auto fuel = parse_fuel_type(fuel_code);
      if (!fuel) throw Error(ErrorCode::schema_mismatch, "standards: unknown fuel " + fuel_code);
      if (!limits.is_object()) {
        throw Error(ErrorCode::schema_mismatch, "standards: " + name + "/" + fuel_code +
                                                    " must map pollutants");
      }
      for (const auto& [column, value] : limits.items()) {
        const auto p = parse_pollutant(column);
        if (!p || *p == Pollutant::mpg) {
          throw Error(ErrorCode::schema_mismatch, "standards: unknown pollutant " + column);
        }
        if (!value.is_number() || !(value.get<double>() > 0.0)) {
          throw Error(ErrorCode::schema_mismatch,
                      "standards: " + name + "/" + fuel_code + "/" + column + " must be positive");
        }
        s.limits[static_cast<std::size_t>(*fuel)][index_of(*p)] = value.get<double>();
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<EuroStandard> load_standards(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open standards file: " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_standards(text.str());
}

std::string default_standards_json() {
  nlohmann::ordered_json doc;
  const auto fill = [&](const char* name, double pet_co, double pet_thc, double pet_nox,
                        double die_co, double die_nox) {
    for (FuelType f : kAllFuelTypes) {
      const bool diesel = f == FuelType::DIE || f == FuelType::ELD;
      auto& entry = doc[name][std::string(to_string(f))];
      if (diesel) {
        entry["co_mg_km"] = die_co;
        entry["nox_mg_km"] = die_nox;
      } else {
        entry["co_mg_km"] = pet_co;
        entry["thc_mg_km"] = pet_thc;
        entry["nox_mg_km"] = pet_nox;
      }
    }
  };
  fill("EURO4", 1000, 100, 80, 500, 250);
  fill("EURO6", 1000, 100, 60, 500, 80);
  return doc.dump(2) + "\n";
}

std::vector<EuroStandard> default_standards() { return parse_standards(default_standards_json()); }

std::vector<ComplianceRow> compliance_rates(std::span<const Observation> observations,
                                            const EuroStandard& standard) {
  if (!standard.has_thresholds()) {
    throw Error(ErrorCode::invalid_argument, "standard " + standard.name + " has no thresholds");
  }
  std::vector<ComplianceRow> rows;
  std::vector<double> values;
  for (Fleet fleet : kAllFleets) {
    for (FuelType fuel : kAllFuelTypes) {
      std::vector<const Observation*> group;
      for (const auto& o : observations) {
        if (o.fleet == fleet && o.fuel_type == fuel) group.push_back(&o);
      }
      bool limited = false;
      for (Pollutant p : kAllPollutants) limited = limited || standard.limit(fuel, p).has_value();
      if (group.empty() || !limited) continue;

      std::vector<char> any_fail(group.size(), 0);
      std::vector<char> any_value(group.size(), 0);
      for (Pollutant p : kAllPollutants) {
        const auto limit = standard.limit(fuel, p);
        if (!limit) continue;
        values.clear();
        for (std::size_t i = 0; i < group.size(); ++i) {
          const double v = group[i]->value(metric_of(p));
          if (!std::isfinite(v)) continue;
          values.push_back(v);
          any_value[i] = 1;
          if (v > *limit) any_fail[i] = 1;
        }
        rows.push_back(ComplianceRow{standard.name, fleet, fuel, std::string(to_string(p)), limit,
                                     values.size(), kernels::count_above(values, *limit)});
      }
      ComplianceRow joint{standard.name, fleet, fuel, "joint", std::nullopt, 0, 0};
      for (std::size_t i = 0; i < group.size(); ++i) {
        joint.n += any_value[i] ? 1 : 0;
        joint.failures += any_fail[i] ? 1 : 0;
      }
      rows.push_back(std::move(joint));
    }
  }
  return rows;
}

void write_compliance(std::ostream& out, const std::vector<ComplianceRow>& rows,
                      bool write_header) {
  if (write_header) {
    csv::write_row(out, {"standard", "fleet", "fuel_type", "pollutant", "threshold", "n",
                         "failures", "rate"});
  }
  for (const auto& r : rows) {
    csv::write_row(out, {r.standard, std::string(to_string(r.fleet)),
                         std::string(to_string(r.fuel_type)), r.pollutant,
                         r.threshold ? format_number(*r.threshold) : std::string(),
                         std::to_string(r.n), std::to_string(r.failures),
                         format_number(r.rate())});
  }
}

namespace {

struct Moments {
  double cx = 0.0, cy = 0.0;
  kernels::CrossDev dev;
};

Moments cross_moments(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "correlation needs two equal-length series of n >= 2");
  }
  Moments m;
  const auto n = static_cast<double>(x.size());
  m.cx = kernels::sum(x) / n;
  m.cy = kernels::sum(y) / n;
  m.dev = kernels::cross_dev(x, y, m.cx, m.cy);
  return m;
}

}  // namespace

double pearson_r(std::span<const double> x, std::span<const double> y) {
  const auto m = cross_moments(x, y);
  if (!(m.dev.sxx > 0.0) || !(m.dev.syy > 0.0)) return kNaN;
  return std::clamp(m.dev.sxy / std::sqrt(m.dev.sxx * m.dev.syy), -1.0, 1.0);
}

double ols_r_squared(std::span<const double> x, std::span<const double> y) {
  const auto m = cross_moments(x, y);
  if (!(m.dev.sxx > 0.0) || !(m.dev.syy > 0.0)) return kNaN;
  const double slope = m.dev.sxy / m.dev.sxx;
  std::vector<double> line(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) line[i] = m.cy + slope * (x[i] - m.cx);
  return 1.0 - kernels::squared_error(y, line) / m.dev.syy;
}

std::pair<cart::TrainingTable, cart::TrainingTable> split_holdout(const cart::TrainingTable& table,
                                                                  double fraction,
                                                                  std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "holdout fraction must lie in (0, 1)");
  }
  std::vector<std::uint64_t> groups;
  std::unordered_set<std::uint64_t> seen;
  for (const auto& row : table.rows) {
    if (seen.insert(row.group).second) groups.push_back(row.group);
  }
  if (groups.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "holdout split needs at least two groups");
  }
  Rng rng(seed);
  rng.shuffle(groups.begin(), groups.end());
  auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(groups.size())));
  take = std::clamp<std::size_t>(take, 1, groups.size() - 1);
  const std::unordered_set<std::uint64_t> held(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(take));

  cart::TrainingTable train{table.target_kind, {}}, holdout{table.target_kind, {}};
  for (const auto& row : table.rows) {
    (held.count(row.group) ? holdout : train).rows.push_back(row);
  }
  return {std::move(train), std::move(holdout)};
}

AccuracyReport holdout_accuracy(const cart::FittedTree& tree, const cart::TrainingTable& training,
                                const cart::TrainingTable& holdout) {
  if (holdout.rows.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "holdout needs at least two rows");
  }
  std::unordered_set<std::uint64_t> train_groups;
  for (const auto& row : training.rows) train_groups.insert(row.group);
  std::unordered_set<std::uint64_t> held_groups;
  for (const auto& row : holdout.rows) {
    if (train_groups.count(row.group)) {
      throw Error(ErrorCode::invalid_argument, "holdout shares groups with the training data");
    }
    held_groups.insert(row.group);
  }

  AccuracyReport report;
  report.pollutant = tree.target_kind;
  report.holdout_n = holdout.rows.size();
  report.holdout_groups = held_groups.size();

  std::vector<double> target(holdout.rows.size()), pred(holdout.rows.size());
  for (std::size_t i = 0; i < holdout.rows.size(); ++i) {
    target[i] = holdout.rows[i].target;
    pred[i] = cart::predict(tree, holdout.rows[i].x).value;
  }
  report.pearson_r = pearson_r(pred, target);
  report.r_squared = ols_r_squared(pred, target);
  if (std::isnan(report.pearson_r)) {
    report.diagnostics.push_back("correlation undefined: predictions or targets are constant");
  }

  const auto alphas = cart::evaluation_points(tree.cp_table);
  for (std::size_t k = 0; k < tree.cp_table.size(); ++k) {
    for (std::size_t i = 0; i < holdout.rows.size(); ++i) {
      pred[i] = cart::predict_pruned(tree, holdout.rows[i].x, alphas[k]).value;
    }
    report.curve.push_back(AccuracyPoint{tree.cp_table[k].cp, tree.cp_table[k].nsplit,
                                         pearson_r(pred, target), ols_r_squared(pred, target)});
  }
  return report;
}

void write_accuracy_tables(std::ostream& out, const cart::FittedTree& tree,
                           const AccuracyReport& report, bool write_header) {
  if (write_header) {
    csv::write_row(out, {"pollutant", "CP", "nsplit", "rel_error", "xerror", "xstd", "holdout_r",
                         "holdout_r2", "holdout_groups", "holdout_n"});
  }
  for (std::size_t k = 0; k < tree.cp_table.size(); ++k) {
    const auto& row = tree.cp_table[k];
    const double r = k < report.curve.size() ? report.curve[k].r : kNaN;
    const double r2 = k < report.curve.size() ? report.curve[k].r_squared : kNaN;
    csv::write_row(out, {std::string(to_string(report.pollutant)), format_number(row.cp),
                         std::to_string(row.nsplit), format_number(row.rel_error),
                         row.xerror ? format_number(*row.xerror) : std::string(),
                         row.xstd ? format_number(*row.xstd) : std::string(), format_number(r),
                         format_number(r2), std::to_string(report.holdout_groups),
                         std::to_string(report.holdout_n)});
  }
}

}  // namespace emx::analytics
