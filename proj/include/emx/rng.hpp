#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <utility>

namespace emx {

// The single source of randomness for every stochastic step. Built on
// mt19937_64 (bit-exact across standard libraries) with its own bounded-int
// and normal draws, since the std distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);

  // Uniform in [0, 1) with 53 random bits.
  double uniform();

  double normal();

  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

std::uint64_t hash64(std::string_view text);
std::uint64_t mix64(std::uint64_t x);

// Independent sub-streams keyed by an identifier, so per-item draws do not
// depend on iteration order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key);

}  // namespace emx
