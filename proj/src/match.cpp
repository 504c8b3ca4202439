#include "emx/match.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <ostream>
#include <set>

#include "emx/csv.hpp"
#include "emx/rng.hpp"

namespace emx::match {

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::ispunct(u)) continue;
    if (u < 0x80 && std::isspace(u)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
  }
  return out;
}

std::size_t MatchKeyHash::operator()(const MatchKey& key) const {
  return static_cast<std::size_t>(group_of(key));
}

MatchKey key_of(const ingest::EmissionsMeasurement& m) {
  return MatchKey{normalize(m.make), normalize(m.model), m.fuel_type, m.model_year};
}

std::optional<MatchKey> key_of(const ingest::VehicleRecord& r) {
  const auto year = r.model_year();
  if (!r.fuel_type || !year) return std::nullopt;
  return MatchKey{normalize(r.make), normalize(r.model), *r.fuel_type, *year};
}

std::uint64_t group_of(const MatchKey& key) {
  std::string text = key.make;
  text += '\x1f';
  text += key.model;
  text += '\x1f';
  text += to_string(key.fuel_type);
  text += '\x1f';
  text += std::to_string(key.model_year);
  return hash64(text);
}

Index Index::build(std::span<const ingest::EmissionsMeasurement> measurements) {
  Index index;
  std::vector<std::array<double, kPollutantCount>> sums;
  std::vector<std::array<std::size_t, kPollutantCount>> counts;
  for (const auto& m : measurements) {
    MatchKey key = key_of(m);
    auto [it, inserted] = index.lookup_.emplace(key, index.entries_.size());
    if (inserted) {
      index.entries_.push_back(IndexedMeasurement{std::move(key), {}, 0});
      sums.emplace_back();
      sums.back().fill(0.0);
      counts.emplace_back();
      counts.back().fill(0);
    }
    const std::size_t e = it->second;
    ++index.entries_[e].rows;
    for (std::size_t p = 0; p < kPollutantCount; ++p) {
      if (m.values[p]) {
        sums[e][p] += *m.values[p];
        ++counts[e][p];
      }
    }
  }
  for (std::size_t e = 0; e < index.entries_.size(); ++e) {
    for (std::size_t p = 0; p < kPollutantCount; ++p) {
      if (counts[e][p] > 0) {
        index.entries_[e].values[p] = sums[e][p] / static_cast<double>(counts[e][p]);
      }
    }
  }
  return index;
}

const IndexedMeasurement* Index::find(const MatchKey& key) const {
  const auto it = lookup_.find(key);
  return it == lookup_.end() ? nullptr : &entries_[it->second];
}

Fleet disposition_fleet(const ingest::VehicleRecord& r) {
  if (r.export_date) return Fleet::exported;
  if (r.scrap_date) return Fleet::scrapped;
  return Fleet::on_road;
}

const MatchStatsRow* MatchStats::find(std::string_view fleet, std::string_view test_class) const {
  for (const auto& row : rows) {
    if (row.fleet == fleet && row.test_class == test_class) return &row;
  }
  return nullptr;
}

namespace {

std::string class_label(const ingest::VehicleRecord& r) {
  return r.test_class ? std::to_string(*r.test_class) : "unknown";
}

// Numeric classes in order, then "unknown".
bool class_less(const std::string& a, const std::string& b) {
  const bool a_num = a != "unknown";
  const bool b_num = b != "unknown";
  if (a_num != b_num) return a_num;
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace

MatchResult match_records(std::span<const ingest::VehicleRecord> records, const Index& index) {
  MatchResult out;
  out.entry.reserve(records.size());

  std::array<std::map<std::string, std::pair<std::size_t, std::size_t>>, kFleetCount> cells;
  for (const auto& r : records) {
    std::optional<std::size_t> hit;
    if (const auto key = key_of(r)) {
      if (const auto* e = index.find(*key)) {
        hit = static_cast<std::size_t>(e - index.entries().data());
      }
    }
    out.entry.push_back(hit);
    auto& cell = cells[static_cast<std::size_t>(disposition_fleet(r))][class_label(r)];
    ++cell.first;
    if (hit) ++cell.second;
    ++out.stats.total;
    if (hit) ++out.stats.matched;
  }

  std::set<std::string, decltype(&class_less)> classes(&class_less);
  for (const auto& fleet_cells : cells) {
    for (const auto& [cls, counts] : fleet_cells) classes.insert(cls);
  }
  std::map<std::string, std::pair<std::size_t, std::size_t>> by_class;
  for (Fleet fleet : kAllFleets) {
    const auto& fleet_cells = cells[static_cast<std::size_t>(fleet)];
    std::size_t total = 0, matched = 0;
    for (const auto& cls : classes) {
      const auto it = fleet_cells.find(cls);
      if (it == fleet_cells.end()) continue;
      out.stats.rows.push_back({std::string(to_string(fleet)), cls, it->second.first,
                                it->second.second});
      total += it->second.first;
      matched += it->second.second;
      by_class[cls].first += it->second.first;
      by_class[cls].second += it->second.second;
    }
    out.stats.rows.push_back({std::string(to_string(fleet)), "all", total, matched});
  }
  for (const auto& cls : classes) {
    out.stats.rows.push_back({"all", cls, by_class[cls].first, by_class[cls].second});
  }
  out.stats.rows.push_back({"all", "all", out.stats.total, out.stats.matched});
  return out;
}

void write_match_stats(std::ostream& out, const MatchStats& stats) {
  csv::write_row(out, {"fleet", "class", "total", "matched", "rate"});
  for (const auto& row : stats.rows) {
    csv::write_row(out, {row.fleet, row.test_class, std::to_string(row.total),
                         std::to_string(row.matched), format_number(row.rate())});
  }
}

cart::TrainingTable build_training_table(std::span<const ingest::VehicleRecord> records,
                                         const Index& index, const MatchResult& matches,
                                         Pollutant pollutant) {
  if (matches.entry.size() != records.size()) {
    throw Error(ErrorCode::invalid_argument, "match result does not belong to these records");
  }
  cart::TrainingTable table;
  table.target_kind = pollutant;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!matches.entry[i] || r.test_class != 4 || !r.engine_cc || !r.fuel_type) continue;
    const auto& e = index.entries()[*matches.entry[i]];
    const auto value = e.value(pollutant);
    if (!value) continue;
    cart::TrainingRow row;
    row.x = cart::FeatureVector{e.key.model_year, *r.engine_cc, e.key.fuel_type};
    row.target = *value;
    row.group = group_of(e.key);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace emx::match
