#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "emx/kernel_types.hpp"

// Reduction kernels behind the hot aggregation loops (node moments, held-out
// error, quantile means, correlation, LOWESS local fits, threshold counts).
//
// Every variant reduces in the same canonical order: four interleaved lane
// accumulators (lane j takes elements 4i+j), combined as (l0+l1)+(l2+l3),
// then the tail added left to right. Scalar and SIMD results are therefore
// bitwise identical, which keeps pipeline output independent of the CPU.

namespace emx::kernels {

std::string_view to_string(Isa isa);

bool supported(Isa isa);

// Throws emx::Error if the ISA is not compiled in or not supported by the CPU.
const KernelTable& table(Isa isa);

// Selected once per process: best supported ISA, unless EMX_KERNELS names
// one of "scalar", "avx2", "neon".
const KernelTable& active();

inline double sum(std::span<const double> x) {
  return active().sum(x.data(), x.size());
}

inline double sum_sq_dev(std::span<const double> x, double center) {
  return active().sum_sq_dev(x.data(), x.size(), center);
}

// a and b must have equal length.
inline double squared_error(std::span<const double> a, std::span<const double> b) {
  return active().squared_error(a.data(), b.data(), a.size());
}

// Strictly greater than threshold.
inline std::size_t count_above(std::span<const double> x, double threshold) {
  return active().count_above(x.data(), x.size(), threshold);
}

inline CrossDev cross_dev(std::span<const double> x, std::span<const double> y,
                          double cx, double cy) {
  return active().cross_dev(x.data(), y.data(), x.size(), cx, cy);
}

inline WeightedSums weighted_sums(std::span<const double> x,
                                  std::span<const double> y,
                                  std::span<const double> w) {
  return active().weighted_sums(x.data(), y.data(), w.data(), x.size());
}

inline WeightedCross weighted_cross(std::span<const double> x,
                                    std::span<const double> y,
                                    std::span<const double> w, double cx,
                                    double cy) {
  return active().weighted_cross(x.data(), y.data(), w.data(), x.size(), cx, cy);
}

namespace detail {
extern const KernelTable scalar_table;
#if defined(EMX_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(EMX_HAVE_NEON)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace emx::kernels
