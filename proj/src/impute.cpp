#include "emx/impute.hpp"

#include <algorithm>
#include <exception>
#include <thread>

namespace emx::impute {

std::string_view to_string(Policy policy) {
  return policy == Policy::tree_only ? "tree-only" : "prefer-measured";
}

std::optional<Policy> parse_policy(std::string_view text) {
  text = trim(text);
  if (text == "tree-only" || text == "tree_only") return Policy::tree_only;
  if (text == "prefer-measured" || text == "prefer_measured") return Policy::prefer_measured;
  return std::nullopt;
}

std::string_view to_string(SkipReason reason) {
  switch (reason) {
    case SkipReason::non_class4: return "non_class4";
    case SkipReason::missing_engine_cc: return "missing_engine_cc";
    case SkipReason::missing_fuel_type: return "missing_fuel_type";
    case SkipReason::missing_model_year: return "missing_model_year";
  }
  return "?";
}

std::string source_flags(const ImputedEmissions& e) {
  std::string out;
  for (Pollutant p : kAllPollutants) {
    if (!out.empty()) out += ';';
    out += to_string(p);
    out += e.source[index_of(p)] == Source::exact_match ? ":m" : ":t";
  }
  if (e.unmatched_category) out += ";unmatched-category";
  return out;
}

std::size_t ImputeResult::total_skipped() const {
  std::size_t total = 0;
  for (auto n : skipped) total += n;
  return total;
}

std::optional<SkipReason> skip_reason(const ingest::VehicleRecord& r) {
  if (r.test_class != 4) return SkipReason::non_class4;
  if (!r.engine_cc) return SkipReason::missing_engine_cc;
  if (!r.fuel_type) return SkipReason::missing_fuel_type;
  if (!r.model_year()) return SkipReason::missing_model_year;
  return std::nullopt;
}

namespace {

ImputedEmissions impute_one(const ingest::VehicleRecord& r, const TreeSet& trees,
                            const match::Index* index, const ImputeOptions& options) {
  ImputedEmissions out;
  out.vehicle_id = r.vehicle_id;
  out.fuel_type = *r.fuel_type;
  out.engine_cc = *r.engine_cc;
  const cart::FeatureVector x{*r.model_year(), *r.engine_cc, *r.fuel_type};

  const match::IndexedMeasurement* measured = nullptr;
  if (options.policy == Policy::prefer_measured && index) {
    if (const auto key = match::key_of(r)) measured = index->find(*key);
  }
  for (Pollutant p : kAllPollutants) {
    const auto i = index_of(p);
    if (measured && measured->values[i]) {
      out.values[i] = *measured->values[i];
      out.source[i] = Source::exact_match;
      continue;
    }
    const auto prediction = cart::predict(trees[i], x, options.unseen);
    out.values[i] = prediction.value;
    out.source[i] = Source::tree_imputed;
    out.unmatched_category = out.unmatched_category || prediction.unmatched_category;
  }
  return out;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(threads, std::max<std::size_t>(1, n / 4096));
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

ImputeResult impute_fleet(std::span<const ingest::VehicleRecord> records, const TreeSet& trees,
                          const match::Index* index, const ImputeOptions& options) {
  for (Pollutant p : kAllPollutants) {
    const auto& tree = trees[index_of(p)];
    if (tree.nodes.empty()) {
      throw Error(ErrorCode::invalid_argument,
                  "no fitted tree for " + std::string(to_string(p)));
    }
    if (tree.target_kind != p) {
      throw Error(ErrorCode::invalid_argument,
                  "tree in slot " + std::string(to_string(p)) + " targets " +
                      std::string(to_string(tree.target_kind)));
    }
  }

  ImputeResult out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (const auto reason = skip_reason(records[i])) {
      ++out.skipped[static_cast<std::size_t>(*reason)];
    } else {
      out.record_index.push_back(i);
    }
  }
  out.imputed.resize(out.record_index.size());
  parallel_for(out.record_index.size(), options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      out.imputed[k] = impute_one(records[out.record_index[k]], trees, index, options);
    }
  });
  return out;
}

}  // namespace emx::impute
