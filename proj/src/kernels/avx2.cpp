// AVX2 kernels: one 256-bit register holds the four canonical lanes.
// Built with -mavx2; selected at runtime only when the CPU reports AVX2.

#include <immintrin.h>

#include "emx/kernel_types.hpp"

namespace emx::kernels {
namespace {

inline double combine(__m256d acc) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double total = combine(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

double sum_sq_dev(const double* x, std::size_t n, double center) {
  const __m256d c = _mm256_set1_pd(center);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), c);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double total = combine(acc);
  for (; i < n; ++i) {
    const double d = x[i] - center;
    total += d * d;
  }
  return total;
}

double squared_error(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double total = combine(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

std::size_t count_above(const double* x, std::size_t n, double threshold) {
  const __m256d t = _mm256_set1_pd(threshold);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(x + i), t, _CMP_GT_OQ));
    count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) count += x[i] > threshold ? 1 : 0;
  return count;
}

CrossDev cross_dev(const double* x, const double* y, std::size_t n, double cx,
                   double cy) {
  const __m256d vx = _mm256_set1_pd(cx);
  const __m256d vy = _mm256_set1_pd(cy);
  __m256d xx = _mm256_setzero_pd();
  __m256d yy = _mm256_setzero_pd();
  __m256d xy = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vy);
    xx = _mm256_add_pd(xx, _mm256_mul_pd(dx, dx));
    yy = _mm256_add_pd(yy, _mm256_mul_pd(dy, dy));
    xy = _mm256_add_pd(xy, _mm256_mul_pd(dx, dy));
  }
  CrossDev out{combine(xx), combine(yy), combine(xy)};
  for (; i < n; ++i) {
    const double dx = x[i] - cx;
    const double dy = y[i] - cy;
    out.sxx += dx * dx;
    out.syy += dy * dy;
    out.sxy += dx * dy;
  }
  return out;
}

WeightedSums weighted_sums(const double* x, const double* y, const double* w,
                           std::size_t n) {
  __m256d sw = _mm256_setzero_pd();
  __m256d swx = _mm256_setzero_pd();
  __m256d swy = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vw = _mm256_loadu_pd(w + i);
    sw = _mm256_add_pd(sw, vw);
    swx = _mm256_add_pd(swx, _mm256_mul_pd(vw, _mm256_loadu_pd(x + i)));
    swy = _mm256_add_pd(swy, _mm256_mul_pd(vw, _mm256_loadu_pd(y + i)));
  }
  WeightedSums out{combine(sw), combine(swx), combine(swy)};
  for (; i < n; ++i) {
    out.sw += w[i];
    out.swx += w[i] * x[i];
    out.swy += w[i] * y[i];
  }
  return out;
}

WeightedCross weighted_cross(const double* x, const double* y, const double* w,
                             std::size_t n, double cx, double cy) {
  const __m256d vx = _mm256_set1_pd(cx);
  const __m256d vy = _mm256_set1_pd(cy);
  __m256d xx = _mm256_setzero_pd();
  __m256d xy = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vy);
    const __m256d wdx = _mm256_mul_pd(_mm256_loadu_pd(w + i), dx);
    xx = _mm256_add_pd(xx, _mm256_mul_pd(wdx, dx));
    xy = _mm256_add_pd(xy, _mm256_mul_pd(wdx, dy));
  }
  WeightedCross out{combine(xx), combine(xy)};
  for (; i < n; ++i) {
    const double wdx = w[i] * (x[i] - cx);
    out.swxx += wdx * (x[i] - cx);
    out.swxy += wdx * (y[i] - cy);
  }
  return out;
}

}  // namespace

namespace detail {
extern const KernelTable avx2_table;
const KernelTable avx2_table{Isa::avx2,     sum,         sum_sq_dev,
                             squared_error, count_above, cross_dev,
                             weighted_sums, weighted_cross};
}  // namespace detail

}  // namespace emx::kernels
