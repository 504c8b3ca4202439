#include "emx/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "emx/csv.hpp"
#include "emx/match.hpp"
#include "emx/rng.hpp"
#include "json.hpp"

namespace emx::synth {

namespace {

struct Factors {
  double base;
  std::array<double, 3> year;  // by year band
  std::array<double, 3> cc;    // by engine band
  std::array<double, 3> fuel;  // diesel, petrol, hybrid
};

constexpr std::array<Factors, kPollutantCount> kTruth = {{
    {175.0, {1.15, 1.0, 0.85}, {0.8, 1.0, 1.35}, {0.92, 1.0, 0.7}},  // co2 g/km
    {60.0, {2.0, 1.2, 0.6}, {0.9, 1.0, 1.2}, {4.0, 1.0, 0.4}},       // nox mg/km
    {50.0, {1.6, 1.1, 0.7}, {0.9, 1.0, 1.15}, {0.5, 1.0, 0.6}},      // thc mg/km
    {400.0, {1.8, 1.2, 0.8}, {0.9, 1.0, 1.1}, {0.6, 1.0, 0.5}},      // co mg/km
    {45.0, {0.85, 1.0, 1.15}, {1.2, 1.0, 0.75}, {1.15, 1.0, 1.4}},   // mpg
}};

// DIE, PET, CNG, ELD, HYB, LPG
constexpr std::array<double, kFuelTypeCount> kFuelShare = {0.38, 0.55, 0.01, 0.01, 0.03, 0.02};

constexpr double kEngineSizes[] = {998,  1199, 1242, 1368, 1395, 1461, 1560, 1598,
                                   1796, 1968, 1995, 2179, 2497, 2993, 3891};

constexpr const char* kMakes[] = {"Ford",  "Vauxhall", "Volkswagen", "BMW",   "Audi",
                                  "Toyota", "Nissan",  "Peugeot",    "Renault", "Mercedes-Benz",
                                  "Honda", "Kia",      "Skoda",      "Citroen", "Hyundai"};

constexpr const char* kModels[] = {"Astra",  "Focus",  "Golf",    "Polo",   "Corsa",  "Fiesta",
                                   "Civic",  "Yaris",  "Micra",   "Clio",   "Octavia", "Fabia",
                                   "Picanto", "Tucson", "Qashqai", "Mondeo", "Passat", "Berlingo",
                                   "Auris",  "Jazz",   "Insignia", "Megane", "Rio",    "i30"};

constexpr int kFirstModelYear = 2000;
constexpr int kLastModelYear = 2016;

int year_band(int year) { return year <= kYearBandEdges[0] ? 0 : year <= kYearBandEdges[1] ? 1 : 2; }
int cc_band(double cc) { return cc < kCcBandEdges[0] ? 0 : cc < kCcBandEdges[1] ? 1 : 2; }

std::size_t sample_cdf(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
  return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::vector<double> cumulative(const std::vector<double>& weights) {
  std::vector<double> cdf(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cdf.begin());
  return cdf;
}

// Reweights `prior` by exp(theta * f) so the weighted mean of f equals target.
std::vector<double> tilt(const std::vector<double>& prior, const std::vector<double>& f,
                         double target) {
  double lo_f = INFINITY, hi_f = -INFINITY, mean = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (prior[i] <= 0.0) continue;
    lo_f = std::min(lo_f, f[i]);
    hi_f = std::max(hi_f, f[i]);
    mean += prior[i] * f[i];
  }
  if (!(target > lo_f && target < hi_f)) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "target mean %.3f outside attainable range (%.3f, %.3f)", target,
                  lo_f, hi_f);
    throw Error(ErrorCode::infeasible, msg);
  }
  double var = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) var += prior[i] * (f[i] - mean) * (f[i] - mean);
  const double scale = std::sqrt(var);
  std::vector<double> z(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) z[i] = (f[i] - mean) / scale;
  const double tz = (target - mean) / scale;

  std::vector<double> w(f.size());
  const auto moments = [&](double theta) {
    double zmax = -INFINITY;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (prior[i] > 0.0) zmax = std::max(zmax, theta * z[i]);
    }
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      w[i] = prior[i] > 0.0 ? prior[i] * std::exp(theta * z[i] - zmax) : 0.0;
      s0 += w[i];
      s1 += w[i] * z[i];
      s2 += w[i] * z[i] * z[i];
    }
    const double m = s1 / s0;
    return std::pair{m - tz, s2 / s0 - m * m};
  };

  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 200 && moments(lo).first > 0.0; ++i) lo *= 2.0;
  for (int i = 0; i < 200 && moments(hi).first < 0.0; ++i) hi *= 2.0;
  double theta = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const auto [g, slope] = moments(theta);
    if (std::abs(g) < 1e-13) break;
    if (g > 0.0) hi = theta; else lo = theta;
    double next = slope > 0.0 ? theta - g / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    theta = next;
  }
  moments(theta);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= total;
  return w;
}

struct Plan {
  std::vector<CatalogEntry> catalog;
  std::vector<RegionTruth> regions;
  std::vector<double> region_cdf;
  std::vector<double> role_cdf;
  // variant CDF per (region, fleet), region-major
  std::vector<std::vector<double>> variant_cdf;
  std::array<double, kPollutantCount> sigma{};
  std::array<double, kPollutantCount> variance{};
  std::size_t positive_regions = 0;
  double positive_gap = 0.0;
};

Plan make_plan(const GeneratorSpec& spec) {
  validate(spec);
  Plan plan;
  plan.catalog = build_catalog(spec.seed, spec.model_lines);
  for (Pollutant p : kAllPollutants) {
    const auto i = index_of(p);
    plan.variance[i] = truth_variance(plan.catalog, p);
    plan.sigma[i] = spec.retest_r ? calibrate_noise(*spec.retest_r, plan.variance[i]) : spec.sigma[i];
  }

  Rng rng(derive_seed(spec.seed, "regions"));
  const auto& rs = spec.regions;
  const double offset = spec.exported_offset;
  if (rs.count == 0) {
    if (rs.positive_fraction != 1.0 || rs.base_sd != 0.0) {
      throw Error(ErrorCode::infeasible, "regional gaps requested but region count is 0");
    }
    plan.regions.push_back(RegionTruth{"", 1.0, 0.0, offset, false});
    plan.positive_regions = offset > 0.0 ? 1 : 0;
    plan.positive_gap = offset;
  } else {
    const std::size_t R = rs.count;
    std::vector<std::size_t> order(R);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());
    std::vector<bool> sparse(R, false);
    for (std::size_t k = 0; k < rs.sparse; ++k) sparse[order[k]] = true;

    plan.regions.resize(R);
    double dense_total = 0.0;
    std::size_t dense = 0;
    for (std::size_t r = 0; r < R; ++r) {
      char code[32];
      std::snprintf(code, sizeof code, "R%04zu", r + 1);
      plan.regions[r].code = code;
      plan.regions[r].sparse = sparse[r];
      plan.regions[r].weight = 0.5 + rng.uniform();
      if (!sparse[r]) {
        dense_total += plan.regions[r].weight;
        ++dense;
      }
    }
    const double sparse_weight = 0.01 * dense_total / static_cast<double>(std::max<std::size_t>(dense, 1));
    double total = 0.0;
    for (auto& region : plan.regions) {
      if (region.sparse) region.weight = sparse_weight;
      total += region.weight;
    }
    for (auto& region : plan.regions) region.weight /= total;

    rng.shuffle(order.begin(), order.end());
    const auto positives =
        static_cast<std::size_t>(std::llround(rs.positive_fraction * static_cast<double>(R)));
    double w_pos = 0.0;
    for (std::size_t k = 0; k < positives; ++k) w_pos += plan.regions[order[k]].weight;
    const double negative_gap = -rs.negative_scale * std::abs(offset);
    double positive_gap = offset;
    if (positives > 0 && positives < R) {
      positive_gap = (offset - (1.0 - w_pos) * negative_gap) / w_pos;
    }
    if ((positives > 0 && !(positive_gap > 0.0)) || (positives == 0 && offset > 0.0)) {
      throw Error(ErrorCode::infeasible,
                  "exported offset incompatible with the requested share of positive regions");
    }
    for (std::size_t k = 0; k < R; ++k) {
      plan.regions[order[k]].gap =
          k < positives ? positive_gap : (positives == 0 ? offset : negative_gap);
    }
    plan.positive_regions = positives;
    plan.positive_gap = positive_gap;

    double base_mean = 0.0;
    for (auto& region : plan.regions) {
      region.base = rs.base_sd * rng.normal();
      base_mean += region.weight * region.base;
    }
    for (auto& region : plan.regions) region.base -= base_mean;
  }

  std::vector<double> weights;
  for (const auto& region : plan.regions) weights.push_back(region.weight);
  plan.region_cdf = cumulative(weights);
  plan.role_cdf = cumulative(std::vector<double>(spec.fleet_shares.begin(), spec.fleet_shares.end()));

  std::vector<double> prior, co2;
  for (const auto& e : plan.catalog) {
    prior.push_back(e.prior);
    co2.push_back(e.truth[index_of(Pollutant::co2)]);
  }
  for (const auto& region : plan.regions) {
    const double scrapped = spec.scrapped_co2 + region.base;
    const std::array<double, kFleetCount> targets{scrapped + region.gap, scrapped,
                                                  scrapped + spec.on_road_offset};
    for (double target : targets) plan.variant_cdf.push_back(cumulative(tilt(prior, co2, target)));
  }
  return plan;
}

struct Draw {
  std::size_t index = 0;
  Fleet role = Fleet::on_road;
  std::size_t region = 0;
  std::size_t variant = 0;
  bool class7 = false;
  bool missing_cc = false;
};

ingest::VehicleRecord build_record(const Plan& plan, const GeneratorSpec& spec, std::size_t index,
                                   Draw& draw) {
  Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(index)));
  draw.index = index;
  draw.role = kAllFleets[sample_cdf(plan.role_cdf, rng.uniform())];
  draw.region = sample_cdf(plan.region_cdf, rng.uniform());
  draw.variant = sample_cdf(
      plan.variant_cdf[draw.region * kFleetCount + static_cast<std::size_t>(draw.role)],
      rng.uniform());
  draw.class7 = rng.uniform() < spec.non_class4_fraction;
  draw.missing_cc = rng.uniform() < spec.missing_cc_fraction;
  const auto& entry = plan.catalog[draw.variant];

  ingest::VehicleRecord r;
  char id[24];
  std::snprintf(id, sizeof id, "V%07zu", index + 1);
  r.vehicle_id = id;
  r.make = entry.make;
  r.model = entry.model;
  r.fuel_type = entry.fuel_type;
  if (!draw.missing_cc) r.engine_cc = entry.engine_cc;
  r.test_class = draw.class7 ? 7 : 4;
  const Date jan1 = make_date(entry.model_year, 1, 1);
  const auto year_days = days_between(jan1, make_date(entry.model_year + 1, 1, 1));
  const Date first_use = add_days(jan1, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(year_days))));
  r.first_use_date = first_use;
  r.postcode_region = plan.regions[draw.region].code;

  const Date end = spec.window.end;
  const Date first_test = add_days(first_use, 3 * 365 + 1 + static_cast<std::int64_t>(rng.below(61)) - 30);
  std::optional<Date> disposition;
  if (draw.role != Fleet::on_road) {
    const Date lo = std::max(add_days(first_test, 1), spec.window.start);
    if (lo <= end) {
      disposition = add_days(lo, static_cast<std::int64_t>(
                                     rng.below(static_cast<std::uint64_t>(days_between(lo, end) + 1))));
    } else {
      draw.role = Fleet::on_road;
    }
  }
  const Date limit = disposition ? add_days(*disposition, -1) : end;
  std::int64_t odometer = 20000 + static_cast<std::int64_t>(rng.below(20000));
  for (Date t = first_test; t <= limit;) {
    const bool fail = rng.uniform() < 0.12;
    r.tests.push_back({t, fail ? ingest::Outcome::fail : ingest::Outcome::pass, odometer});
    if (fail) {
      const Date retest = add_days(t, 1 + static_cast<std::int64_t>(rng.below(20)));
      if (retest <= limit) r.tests.push_back({retest, ingest::Outcome::pass, odometer + 20});
    }
    odometer += 6000 + static_cast<std::int64_t>(rng.below(10000));
    t = add_days(t, 350 + static_cast<std::int64_t>(rng.below(31)));
  }
  if (disposition) {
    (draw.role == Fleet::exported ? r.export_date : r.scrap_date) = disposition;
  }
  return r;
}

// Gives a clean record exactly one quality-control defect.
void inject(ingest::QcRule rule, std::size_t k, ingest::VehicleRecord& r, const GeneratorSpec& spec) {
  switch (rule) {
    case ingest::QcRule::missing_required_field:
      if (k % 2 == 0) r.first_use_date.reset(); else r.test_class.reset();
      break;
    case ingest::QcRule::dual_disposition: {
      const Date d = r.tests.empty() ? spec.window.end : add_days(r.tests.back().test_date, 10);
      if (!r.export_date) r.export_date = d;
      if (!r.scrap_date) r.scrap_date = d;
      break;
    }
    case ingest::QcRule::impossible_dates:
      if (k % 2 == 0 || r.tests.empty()) {
        r.tests.insert(r.tests.begin(), {add_days(*r.first_use_date, -40), ingest::Outcome::pass, 0});
      } else {
        const int year = static_cast<int>(r.tests.back().test_date.year());
        r.tests.back().test_date = make_date(year, 2, 30);
      }
      break;
    case ingest::QcRule::over_110_years:
      r.first_use_date = make_date(1894, 6, 1);
      break;
  }
}

double clip(Pollutant p, double v) { return p == Pollutant::mpg ? std::max(v, 0.1) : std::max(v, 0.0); }

}  // namespace

FuelGroup fuel_group(FuelType fuel) {
  switch (fuel) {
    case FuelType::DIE: return FuelGroup::diesel;
    case FuelType::HYB:
    case FuelType::ELD: return FuelGroup::hybrid;
    default: return FuelGroup::petrol;
  }
}

double truth(Pollutant p, int model_year, double engine_cc, FuelType fuel) {
  const auto& f = kTruth[index_of(p)];
  return f.base * f.year[static_cast<std::size_t>(year_band(model_year))] *
         f.cc[static_cast<std::size_t>(cc_band(engine_cc))] *
         f.fuel[static_cast<std::size_t>(fuel_group(fuel))];
}

std::vector<CatalogEntry> build_catalog(std::uint64_t seed, std::size_t model_lines) {
  if (model_lines == 0) throw Error(ErrorCode::invalid_argument, "catalog needs model lines");
  Rng rng(derive_seed(seed, "catalog"));
  const auto fuel_cdf = cumulative(std::vector<double>(kFuelShare.begin(), kFuelShare.end()));
  std::set<std::pair<std::string, std::string>> used;
  std::vector<CatalogEntry> out;
  for (std::size_t l = 0; l < model_lines; ++l) {
    const std::string make = kMakes[rng.below(std::size(kMakes))];
    const std::string base = kModels[rng.below(std::size(kModels))];
    std::string model = base;
    for (int k = 2; used.count({make, model}); ++k) model = base + " " + std::to_string(k);
    used.insert({make, model});
    const FuelType fuel = kAllFuelTypes[sample_cdf(fuel_cdf, rng.uniform())];
    const double cc = kEngineSizes[rng.below(std::size(kEngineSizes))];
    const int span = 3 + static_cast<int>(rng.below(5));
    const int start = kFirstModelYear +
                      static_cast<int>(rng.below(static_cast<std::uint64_t>(kLastModelYear - kFirstModelYear + 1)));
    const int stop = std::min(kLastModelYear, start + span - 1);
    const double popularity = std::exp(0.7 * rng.normal());
    for (int y = start; y <= stop; ++y) {
      CatalogEntry e;
      e.make = make;
      e.model = model;
      e.fuel_type = fuel;
      e.model_year = y;
      e.engine_cc = cc;
      e.prior = popularity / static_cast<double>(stop - start + 1);
      for (Pollutant p : kAllPollutants) e.truth[index_of(p)] = truth(p, y, cc, fuel);
      out.push_back(std::move(e));
    }
  }
  double total = 0.0;
  for (const auto& e : out) total += e.prior;
  for (auto& e : out) e.prior /= total;
  return out;
}

double truth_variance(const std::vector<CatalogEntry>& catalog, Pollutant p) {
  double mean = 0.0;
  for (const auto& e : catalog) mean += e.prior * e.truth[index_of(p)];
  double var = 0.0;
  for (const auto& e : catalog) {
    const double d = e.truth[index_of(p)] - mean;
    var += e.prior * d * d;
  }
  return var;
}

double calibrate_noise(double target_retest_r, double variance) {
  if (!(target_retest_r > 0.0 && target_retest_r <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "retest correlation must lie in (0, 1]");
  }
  if (!(variance > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "true-value variance must be positive");
  }
  return std::sqrt(variance * (1.0 - target_retest_r) / target_retest_r);
}

void validate(const GeneratorSpec& spec) {
  const auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, std::string(what) + " must lie in [0, 1]");
    }
  };
  if (spec.vehicles == 0) throw Error(ErrorCode::invalid_argument, "vehicle count must be positive");
  if (spec.model_lines == 0) throw Error(ErrorCode::invalid_argument, "model_lines must be positive");
  fleet::validate(spec.window);
  double share_total = 0.0;
  for (double s : spec.fleet_shares) {
    if (!(s >= 0.0)) throw Error(ErrorCode::invalid_argument, "fleet shares must be >= 0");
    share_total += s;
  }
  if (!(share_total > 0.0)) throw Error(ErrorCode::invalid_argument, "fleet shares sum to 0");
  prob(spec.regions.positive_fraction, "regions.positive_fraction");
  prob(spec.non_class4_fraction, "non_class4_fraction");
  prob(spec.missing_cc_fraction, "missing_cc_fraction");
  prob(spec.certification_coverage, "certification_coverage");
  prob(spec.name_mismatch, "name_mismatch");
  prob(spec.name_variation, "name_variation");
  prob(spec.retest_duplicates, "retest_duplicates");
  if (spec.regions.count > 0 && spec.regions.sparse >= spec.regions.count) {
    throw Error(ErrorCode::invalid_argument, "sparse regions must be fewer than regions");
  }
  if (!(spec.regions.negative_scale >= 0.0) || !(spec.regions.base_sd >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "region scales must be >= 0");
  }
  if (spec.retest_r && !(*spec.retest_r > 0.0 && *spec.retest_r <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "retest_r must lie in (0, 1]");
  }
  for (double s : spec.sigma) {
    if (!(s >= 0.0)) throw Error(ErrorCode::invalid_argument, "sigma must be >= 0");
  }
}

namespace {

void fleet_truth(const Plan& plan, const GeneratorSpec& spec, const std::array<double, kFleetCount>& sum,
                 const std::array<double, kFleetCount>& sum_sq, GroundTruth& truth) {
  for (Fleet f : kAllFleets) {
    auto& ft = truth.fleets[static_cast<std::size_t>(f)];
    double target = 0.0;
    for (const auto& region : plan.regions) {
      const double scrapped = spec.scrapped_co2 + region.base;
      target += region.weight * (f == Fleet::exported   ? scrapped + region.gap
                                 : f == Fleet::scrapped ? scrapped
                                                        : scrapped + spec.on_road_offset);
    }
    ft.target_co2 = target;
    if (ft.vehicles > 0) {
      const auto n = static_cast<double>(ft.vehicles);
      ft.realized_co2 = sum[static_cast<std::size_t>(f)] / n;
      ft.realized_sd = std::sqrt(std::max(0.0, sum_sq[static_cast<std::size_t>(f)] / n -
                                                   ft.realized_co2 * ft.realized_co2));
    }
  }
}

}  // namespace

Corpus generate(const GeneratorSpec& spec) {
  const Plan plan = make_plan(spec);
  Corpus corpus;
  auto& truth = corpus.truth;
  truth.seed = spec.seed;
  truth.vehicles = spec.vehicles;
  truth.qc = spec.qc;
  truth.sigma = plan.sigma;
  truth.truth_variance = plan.variance;
  truth.catalog_size = plan.catalog.size();
  truth.regions = plan.regions;
  truth.positive_regions = plan.positive_regions;
  truth.positive_gap = plan.positive_gap;

  std::array<double, kFleetCount> sum{}, sum_sq{};
  corpus.inspections.reserve(spec.vehicles + spec.qc.total());
  for (std::size_t i = 0; i < spec.vehicles; ++i) {
    Draw draw;
    corpus.inspections.push_back(build_record(plan, spec, i, draw));
    const double co2 = plan.catalog[draw.variant].truth[index_of(Pollutant::co2)];
    const auto f = static_cast<std::size_t>(draw.role);
    sum[f] += co2;
    sum_sq[f] += co2 * co2;
    ++truth.fleets[f].vehicles;
    truth.non_class4 += draw.class7 ? 1 : 0;
    truth.missing_cc += draw.missing_cc ? 1 : 0;
  }
  fleet_truth(plan, spec, sum, sum_sq, truth);

  // Records carrying exactly one quality-control defect each.
  std::size_t next = spec.vehicles;
  const std::array<std::pair<ingest::QcRule, std::size_t>, ingest::kQcRuleCount> injections{{
      {ingest::QcRule::missing_required_field, spec.qc.missing_required_field},
      {ingest::QcRule::dual_disposition, spec.qc.dual_disposition},
      {ingest::QcRule::impossible_dates, spec.qc.impossible_dates},
      {ingest::QcRule::over_110_years, spec.qc.over_110_years},
  }};
  for (const auto& [rule, count] : injections) {
    for (std::size_t k = 0; k < count; ++k) {
      Draw draw;
      auto r = build_record(plan, spec, next++, draw);
      inject(rule, k, r, spec);
      corpus.inspections.push_back(std::move(r));
    }
  }
  truth.injected_records = spec.qc.total();

  Rng rng(derive_seed(spec.seed, "certifications"));
  for (const auto& e : plan.catalog) {
    const double u_cover = rng.uniform();
    const double u_case = rng.uniform();
    const double u_name = rng.uniform();
    const double u_dup = rng.uniform();
    if (u_cover >= spec.certification_coverage) continue;
    ingest::EmissionsMeasurement m;
    m.make = e.make;
    if (u_case < spec.name_variation) {
      std::string upper = e.make;
      for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      m.make = u_case < 0.5 * spec.name_variation ? upper : " " + e.make + "  ";
    }
    m.model = u_name < spec.name_mismatch ? e.model + " (facelift)" : e.model;
    m.fuel_type = e.fuel_type;
    m.model_year = e.model_year;
    const int copies = u_dup < spec.retest_duplicates ? 2 : 1;
    for (int c = 0; c < copies; ++c) {
      for (Pollutant p : kAllPollutants) {
        const auto i = index_of(p);
        m.values[i] = clip(p, e.truth[i] + plan.sigma[i] * rng.normal());
      }
      corpus.certifications.push_back(m);
    }
  }
  truth.certification_rows = corpus.certifications.size();
  return corpus;
}

std::string manifest_json(const GroundTruth& t) {
  nlohmann::ordered_json doc;
  doc["seed"] = t.seed;
  doc["vehicles"] = t.vehicles;
  doc["injected_records"] = t.injected_records;
  doc["qc_injected"] = {{"missing_required_field", t.qc.missing_required_field},
                        {"dual_disposition", t.qc.dual_disposition},
                        {"impossible_dates", t.qc.impossible_dates},
                        {"over_110_years", t.qc.over_110_years}};
  doc["non_class4"] = t.non_class4;
  doc["missing_engine_cc"] = t.missing_cc;
  for (Fleet f : kAllFleets) {
    const auto& ft = t.fleets[static_cast<std::size_t>(f)];
    doc["fleets"][std::string(to_string(f))] = {{"vehicles", ft.vehicles},
                                                {"target_co2_g_km", ft.target_co2},
                                                {"realized_co2_g_km", ft.realized_co2},
                                                {"realized_co2_sd", ft.realized_sd}};
  }
  const auto& exported = t.fleets[static_cast<std::size_t>(Fleet::exported)];
  const auto& scrapped = t.fleets[static_cast<std::size_t>(Fleet::scrapped)];
  doc["target_gap_pct_exported_vs_scrapped"] =
      100.0 * (exported.target_co2 - scrapped.target_co2) / scrapped.target_co2;
  std::size_t sparse = 0;
  nlohmann::ordered_json regions = nlohmann::ordered_json::array();
  for (const auto& r : t.regions) {
    sparse += r.sparse ? 1 : 0;
    regions.push_back({{"code", r.code}, {"weight", r.weight}, {"base", r.base}, {"gap", r.gap},
                       {"sparse", r.sparse}});
  }
  doc["regions"] = {{"count", t.regions.size()},
                    {"positive", t.positive_regions},
                    {"positive_fraction", t.regions.empty() ? 0.0
                                                            : static_cast<double>(t.positive_regions) /
                                                                  static_cast<double>(t.regions.size())},
                    {"positive_gap", t.positive_gap},
                    {"sparse", sparse},
                    {"detail", regions}};
  nlohmann::ordered_json fn;
  fn["year_bands"] = {"<=2005", "2006-2012", ">=2013"};
  fn["engine_cc_bands"] = {"<1400", "1400-1999", ">=2000"};
  fn["fuel_groups"] = {{"diesel", {"DIE"}}, {"petrol", {"PET", "LPG", "CNG"}}, {"hybrid", {"HYB", "ELD"}}};
  for (Pollutant p : kAllPollutants) {
    const auto& f = kTruth[index_of(p)];
    fn["factors"][std::string(column_name(p))] = {
        {"base", f.base}, {"year", f.year}, {"engine_cc", f.cc}, {"fuel", f.fuel}};
  }
  doc["truth_function"] = fn;
  for (Pollutant p : kAllPollutants) {
    doc["noise_sigma"][std::string(column_name(p))] = t.sigma[index_of(p)];
    doc["truth_variance"][std::string(column_name(p))] = t.truth_variance[index_of(p)];
  }
  doc["catalog_variants"] = t.catalog_size;
  doc["certification_rows"] = t.certification_rows;
  return doc.dump(2) + "\n";
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  {
    auto out = csv::open_output(dir / "inspections.csv");
    ingest::write_inspections(out, corpus.inspections);
  }
  {
    auto out = csv::open_output(dir / "certifications.csv");
    ingest::write_certifications(out, corpus.certifications);
  }
  auto out = csv::open_output(dir / "manifest.json");
  out << manifest_json(corpus.truth);
  if (!out) throw Error(ErrorCode::io, "failed writing " + (dir / "manifest.json").string());
}

std::vector<analytics::Observation> generate_observations(const GeneratorSpec& spec,
                                                          GroundTruth* truth) {
  const Plan plan = make_plan(spec);
  if (truth) {
    *truth = GroundTruth{};
    truth->seed = spec.seed;
    truth->vehicles = spec.vehicles;
    truth->regions = plan.regions;
    truth->positive_regions = plan.positive_regions;
    truth->positive_gap = plan.positive_gap;
    truth->sigma = plan.sigma;
    truth->truth_variance = plan.variance;
    truth->catalog_size = plan.catalog.size();
  }
  std::vector<analytics::Observation> out;
  out.reserve(spec.vehicles);
  std::array<double, kFleetCount> sum{}, sum_sq{};
  for (std::size_t i = 0; i < spec.vehicles; ++i) {
    Draw draw;
    const auto r = build_record(plan, spec, i, draw);
    if (truth) {
      const double co2 = plan.catalog[draw.variant].truth[index_of(Pollutant::co2)];
      const auto f = static_cast<std::size_t>(draw.role);
      sum[f] += co2;
      sum_sq[f] += co2 * co2;
      ++truth->fleets[f].vehicles;
      truth->non_class4 += draw.class7 ? 1 : 0;
      truth->missing_cc += draw.missing_cc ? 1 : 0;
    }
    std::optional<Date> date = r.export_date ? r.export_date : r.scrap_date;
    if (!date) {
      // On-road vehicles are observed at their last test inside the window.
      for (auto it = r.tests.rbegin(); it != r.tests.rend(); ++it) {
        if (spec.window.contains(it->test_date)) {
          date = it->test_date;
          break;
        }
      }
    }
    if (!date) continue;
    const auto& e = plan.catalog[draw.variant];
    analytics::Observation o;
    o.vehicle_id = r.vehicle_id;
    o.fleet = draw.role;
    o.date = *date;
    o.region = r.postcode_region;
    o.fuel_type = e.fuel_type;
    for (Pollutant p : kAllPollutants) o.values[index_of(p)] = e.truth[index_of(p)];
    o.values[analytics::index_of(analytics::Metric::age_years)] = ingest::age_years(*r.first_use_date, *date);
    o.values[analytics::index_of(analytics::Metric::engine_cc)] = e.engine_cc;
    out.push_back(std::move(o));
  }
  if (truth) fleet_truth(plan, spec, sum, sum_sq, *truth);
  return out;
}

cart::TrainingTable generate_training_table(const GeneratorSpec& spec, Pollutant p,
                                            std::size_t rows) {
  validate(spec);
  const auto catalog = build_catalog(spec.seed, spec.model_lines);
  const double variance = truth_variance(catalog, p);
  const double sigma = spec.retest_r ? calibrate_noise(*spec.retest_r, variance) : spec.sigma[index_of(p)];

  Rng rng(derive_seed(spec.seed, "training"));
  std::vector<double> certified(catalog.size());
  std::vector<double> prior(catalog.size());
  for (std::size_t v = 0; v < catalog.size(); ++v) {
    certified[v] = clip(p, catalog[v].truth[index_of(p)] + sigma * rng.normal());
    prior[v] = catalog[v].prior;
  }
  const auto cdf = cumulative(prior);
  cart::TrainingTable table;
  table.target_kind = p;
  table.rows.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto v = sample_cdf(cdf, rng.uniform());
    const auto& e = catalog[v];
    cart::TrainingRow row;
    row.x = cart::FeatureVector{e.model_year, e.engine_cc, e.fuel_type};
    row.target = certified[v];
    row.group = match::group_of(match::MatchKey{match::normalize(e.make), match::normalize(e.model),
                                                e.fuel_type, e.model_year});
    table.rows.push_back(row);
  }
  return table;
}

std::vector<std::pair<double, double>> retest_pairs(const GeneratorSpec& spec, Pollutant p,
                                                    std::size_t n) {
  validate(spec);
  const auto catalog = build_catalog(spec.seed, spec.model_lines);
  const double variance = truth_variance(catalog, p);
  const double sigma = spec.retest_r ? calibrate_noise(*spec.retest_r, variance) : spec.sigma[index_of(p)];
  std::vector<double> prior;
  for (const auto& e : catalog) prior.push_back(e.prior);
  const auto cdf = cumulative(prior);
  Rng rng(derive_seed(spec.seed, "retest"));
  std::vector<std::pair<double, double>> out(n);
  for (auto& pair : out) {
    const double t = catalog[sample_cdf(cdf, rng.uniform())].truth[index_of(p)];
    pair.first = t + sigma * rng.normal();
    pair.second = t + sigma * rng.normal();
  }
  return out;
}

}  // namespace emx::synth
