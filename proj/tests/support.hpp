#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "emx/analytics.hpp"
#include "emx/cart.hpp"
#include "emx/rng.hpp"

namespace emx::testing {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("emx_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Random tables mixing numeric and categorical structure. Targets come in
// several flavours, including small integer sets that produce exact ties.
inline cart::TrainingTable random_table(Rng& rng, std::size_t n) {
  cart::TrainingTable t;
  const int years = 1 + static_cast<int>(rng.below(12));
  const int ccs = 1 + static_cast<int>(rng.below(8));
  std::vector<double> cc_values;
  for (int i = 0; i < ccs; ++i) cc_values.push_back(900.0 + 100.0 * static_cast<double>(rng.below(30)));
  std::vector<FuelType> fuels;
  for (FuelType f : kAllFuelTypes) {
    if (rng.uniform() < 0.6) fuels.push_back(f);
  }
  if (fuels.empty()) fuels.push_back(FuelType::PET);
  const int flavour = static_cast<int>(rng.below(4));
  double fuel_effect[kFuelTypeCount];
  for (double& e : fuel_effect) e = 10.0 * rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    cart::TrainingRow row;
    row.x.model_year = 2000 + static_cast<int>(rng.below(static_cast<std::uint64_t>(years)));
    row.x.engine_cc = cc_values[rng.below(cc_values.size())];
    row.x.fuel_type = fuels[rng.below(fuels.size())];
    const double signal = (row.x.model_year > 2005 ? 8.0 : 0.0) + row.x.engine_cc / 200.0 +
                          fuel_effect[static_cast<std::size_t>(row.x.fuel_type)];
    switch (flavour) {
      case 0: row.target = signal + rng.normal(); break;
      case 1: row.target = static_cast<double>(rng.below(3)); break;
      case 2: row.target = std::round(signal / 4.0); break;
      default: row.target = rng.normal() * 5.0; break;
    }
    row.group = rng.below(40);
    t.rows.push_back(row);
  }
  return t;
}

struct OracleSplit {
  cart::Feature feature;
  double threshold = 0.0;     // numeric
  std::uint8_t left_set = 0;  // categorical
  double gain = 0.0;
};

inline double naive_sse(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s;
}

// Exhaustive search: every midpoint of every numeric feature and every
// fuel-code subset, with the documented tie-breaking applied afterwards.
inline std::optional<OracleSplit> brute_force_split(const std::vector<cart::TrainingRow>& rows,
                                                    int minbucket) {
  std::vector<double> all;
  for (const auto& r : rows) all.push_back(r.target);
  const double parent = naive_sse(all);
  const double tolerance = 1e-12 * parent;

  std::vector<OracleSplit> candidates;
  const auto evaluate = [&](auto&& goes_left, OracleSplit split) {
    std::vector<double> l, r;
    for (const auto& row : rows) (goes_left(row) ? l : r).push_back(row.target);
    if (l.size() < static_cast<std::size_t>(minbucket) ||
        r.size() < static_cast<std::size_t>(minbucket)) {
      return;
    }
    split.gain = parent - naive_sse(l) - naive_sse(r);
    candidates.push_back(split);
  };

  for (cart::Feature f : {cart::Feature::model_year, cart::Feature::engine_cc}) {
    std::set<double> values;
    for (const auto& r : rows) values.insert(r.x.numeric(f));
    std::vector<double> sorted(values.begin(), values.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const double t = (sorted[i] + sorted[i + 1]) / 2.0;
      evaluate([&](const cart::TrainingRow& r) { return r.x.numeric(f) < t; },
               OracleSplit{f, t, 0, 0.0});
    }
  }
  std::uint8_t known = 0;
  for (const auto& r : rows) known |= fuel_bit(r.x.fuel_type);
  if (known != 0) {
    const std::uint8_t lowest = static_cast<std::uint8_t>(known & -known);
    for (unsigned mask = 1; mask < 64; ++mask) {
      const auto left = static_cast<std::uint8_t>(mask);
      if ((left & ~known) || left == known || !(left & lowest)) continue;
      evaluate([&](const cart::TrainingRow& r) { return (left & fuel_bit(r.x.fuel_type)) != 0; },
               OracleSplit{cart::Feature::fuel_type, 0.0, left, 0.0});
    }
  }
  if (candidates.empty()) return std::nullopt;
  double best = candidates.front().gain;
  for (const auto& c : candidates) best = std::max(best, c.gain);
  if (!(best > tolerance)) return std::nullopt;

  const auto codes = [](std::uint8_t set) {
    std::vector<int> ids;
    for (int id = 0; id < 6; ++id) {
      if (set & (1 << id)) ids.push_back(id);
    }
    return ids;
  };
  std::optional<OracleSplit> pick;
  for (const auto& c : candidates) {
    if (c.gain < best - tolerance) continue;
    if (!pick) {
      pick = c;
      continue;
    }
    if (c.feature != pick->feature) {
      if (c.feature < pick->feature) pick = c;
    } else if (c.feature == cart::Feature::fuel_type) {
      if (codes(c.left_set) < codes(pick->left_set)) pick = c;
    } else if (c.threshold < pick->threshold) {
      pick = c;
    }
  }
  return pick;
}

// True when `small` is a rooted subtree of `big` with identical splits.
inline bool is_rooted_subtree(const cart::FittedTree& small, const cart::FittedTree& big,
                              std::size_t a = 0, std::size_t b = 0) {
  const auto& s = small.nodes[a];
  const auto& g = big.nodes[b];
  if (s.n != g.n) return false;
  if (s.is_leaf()) return true;
  if (g.is_leaf() || !(*s.split == *g.split)) return false;
  return is_rooted_subtree(small, big, static_cast<std::size_t>(s.left),
                           static_cast<std::size_t>(g.left)) &&
         is_rooted_subtree(small, big, static_cast<std::size_t>(s.right),
                           static_cast<std::size_t>(g.right));
}

// Exact sum in a wide fixed-point integer (units of 2^-1074), rounded to
// nearest-even once at the end. Finite inputs only.
inline double oracle_exact_sum(const std::vector<double>& values) {
  constexpr int kLimbs = 72;  // 32-bit digits, enough for 2^(1024+1074) plus carries
  std::array<std::int64_t, kLimbs> acc{};
  for (double v : values) {
    if (v == 0.0) continue;
    int e = 0;
    const double f = std::frexp(std::abs(v), &e);
    auto m = static_cast<std::uint64_t>(std::ldexp(f, 53));
    int shift = e - 53 + 1074;
    if (shift < 0) {
      m >>= -shift;
      shift = 0;
    }
    const std::int64_t sign = v < 0 ? -1 : 1;
    const auto at = static_cast<std::size_t>(shift / 32);
    const unsigned __int128 wide = static_cast<unsigned __int128>(m) << (shift % 32);
    for (std::size_t k = 0; k < 3; ++k) {
      acc[at + k] += sign * static_cast<std::int64_t>(static_cast<std::uint64_t>(wide >> (32 * k)) & 0xffffffffu);
    }
  }
  const auto normalize = [&] {
    for (std::size_t k = 0; k + 1 < acc.size(); ++k) {
      std::int64_t carry = acc[k] >> 32;  // floor division
      acc[k] -= carry * (std::int64_t{1} << 32);
      acc[k + 1] += carry;
    }
  };
  normalize();
  bool negative = acc.back() < 0;
  if (negative) {
    for (auto& d : acc) d = -d;
    normalize();
  }
  int top = -1;
  for (int k = kLimbs - 1; k >= 0 && top < 0; --k) {
    for (int b = 31; b >= 0; --b) {
      if ((acc[static_cast<std::size_t>(k)] >> b) & 1) {
        top = 32 * k + b;
        break;
      }
    }
  }
  if (top < 0) return 0.0;
  const auto bit = [&](int i) {
    return i >= 0 && ((acc[static_cast<std::size_t>(i / 32)] >> (i % 32)) & 1);
  };
  const int low = std::max(top - 52, 0);
  std::uint64_t m = 0;
  for (int i = top; i >= low; --i) m = (m << 1) | (bit(i) ? 1u : 0u);
  if (low > 0) {
    bool sticky = false;
    for (int i = low - 2; i >= 0 && !sticky; --i) sticky = bit(i);
    if (bit(low - 1) && (sticky || (m & 1))) ++m;
  }
  const double r = std::ldexp(static_cast<double>(m), low - 1074);
  return negative ? -r : r;
}

// Order statistics computed the long way: 1-based type-7 positions, a
// long double running sum, and linear scans for the whiskers.
inline analytics::SummaryStats oracle_summary(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto q = [&](double p) {
    const double h = 1.0 + (static_cast<double>(v.size()) - 1.0) * p;
    const auto j = static_cast<std::size_t>(h);
    if (j >= v.size()) return v.back();
    return v[j - 1] + (h - static_cast<double>(j)) * (v[j] - v[j - 1]);
  };
  analytics::SummaryStats s;
  s.n = v.size();
  s.mean = oracle_exact_sum(v) / static_cast<double>(v.size());
  s.q1 = q(0.25);
  s.median = q(0.5);
  s.q3 = q(0.75);
  const double lo = s.q1 - 1.5 * (s.q3 - s.q1), hi = s.q3 + 1.5 * (s.q3 - s.q1);
  s.whisker_low = s.q3;
  s.whisker_high = s.q1;
  for (double x : v) {
    if (x >= lo) s.whisker_low = std::min(s.whisker_low, x);
    if (x <= hi) s.whisker_high = std::max(s.whisker_high, x);
  }
  return s;
}

// Direct lowess: bandwidth is the distance to the k-th nearest point and every
// point enters the weighted least squares with its tricube weight.
inline std::vector<double> oracle_lowess(const std::vector<double>& x, const std::vector<double>& y,
                                         double span, int iterations) {
  const std::size_t n = x.size();
  const auto k = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(span * static_cast<double>(n))), 2, n);
  std::vector<double> fit(n), robust(n, 1.0);
  for (int pass = 0; pass <= iterations; ++pass) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> d(n);
      for (std::size_t j = 0; j < n; ++j) d[j] = std::abs(x[j] - x[i]);
      std::vector<double> sorted = d;
      std::sort(sorted.begin(), sorted.end());
      const double h = sorted[k - 1];
      long double sw = 0, sx = 0, sy = 0;
      std::vector<double> w(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double u = d[j] / h;
        w[j] = u < 1.0 ? std::pow(1.0 - u * u * u, 3) * robust[j] : 0.0;
        sw += w[j];
        sx += w[j] * x[j];
        sy += w[j] * y[j];
      }
      const double cx = static_cast<double>(sx / sw), cy = static_cast<double>(sy / sw);
      long double sxx = 0, sxy = 0;
      for (std::size_t j = 0; j < n; ++j) {
        sxx += w[j] * (x[j] - cx) * (x[j] - cx);
        sxy += w[j] * (x[j] - cx) * (y[j] - cy);
      }
      fit[i] = cy + static_cast<double>(sxy / sxx) * (x[i] - cx);
    }
    if (pass == iterations) break;
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = std::abs(y[i] - fit[i]);
    std::vector<double> sr = r;
    std::sort(sr.begin(), sr.end());
    const double med = n % 2 ? sr[n / 2] : 0.5 * (sr[n / 2 - 1] + sr[n / 2]);
    if (!(med > 0.0)) break;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = r[i] / (6.0 * med);
      robust[i] = u < 1.0 ? std::pow(1.0 - u * u, 2) : 0.0;
    }
  }
  return fit;
}

inline cart::FitParams params(double cp, int minsplit, int minbucket, int xval = 0,
                              int max_depth = 30, std::uint64_t seed = 1) {
  cart::FitParams p;
  p.cp = cp;
  p.minsplit = minsplit;
  p.minbucket = minbucket;
  p.xval = xval;
  p.max_depth = max_depth;
  p.seed = seed;
  return p;
}

}  // namespace emx::testing
