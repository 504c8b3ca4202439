#pragma once

#include <cstddef>

// Plain types shared by every kernel translation unit. The SIMD sources are
// compiled with ISA-specific flags and include only this header, so no inline
// code from elsewhere is emitted with those flags.

namespace emx::kernels {

enum class Isa { scalar, avx2, neon };

struct CrossDev {
  double sxx = 0.0;  // sum (x - cx)^2
  double syy = 0.0;  // sum (y - cy)^2
  double sxy = 0.0;  // sum (x - cx)(y - cy)
};

struct WeightedSums {
  double sw = 0.0;
  double swx = 0.0;
  double swy = 0.0;
};

struct WeightedCross {
  double swxx = 0.0;  // sum w (x - cx)^2
  double swxy = 0.0;  // sum w (x - cx)(y - cy)
};

struct KernelTable {
  Isa isa;
  double (*sum)(const double* x, std::size_t n);
  double (*sum_sq_dev)(const double* x, std::size_t n, double center);
  double (*squared_error)(const double* a, const double* b, std::size_t n);
  std::size_t (*count_above)(const double* x, std::size_t n, double threshold);
  CrossDev (*cross_dev)(const double* x, const double* y, std::size_t n,
                        double cx, double cy);
  WeightedSums (*weighted_sums)(const double* x, const double* y,
                                const double* w, std::size_t n);
  WeightedCross (*weighted_cross)(const double* x, const double* y,
                                  const double* w, std::size_t n, double cx,
                                  double cy);
};

}  // namespace emx::kernels
