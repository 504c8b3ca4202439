// NEON kernels for aarch64: two float64x2 registers carry the four canonical
// lanes (lo = lanes 0,1; hi = lanes 2,3).

#include <arm_neon.h>

#include "emx/kernel_types.hpp"

namespace emx::kernels {
namespace {

struct Acc {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
};

inline double combine(const Acc& a) {
  return (vgetq_lane_f64(a.lo, 0) + vgetq_lane_f64(a.lo, 1)) +
         (vgetq_lane_f64(a.hi, 0) + vgetq_lane_f64(a.hi, 1));
}

double sum(const double* x, std::size_t n) {
  Acc acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc.lo = vaddq_f64(acc.lo, vld1q_f64(x + i));
    acc.hi = vaddq_f64(acc.hi, vld1q_f64(x + i + 2));
  }
  double total = combine(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

double sum_sq_dev(const double* x, std::size_t n, double center) {
  const float64x2_t c = vdupq_n_f64(center);
  Acc acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(x + i), c);
    const float64x2_t d1 = vsubq_f64(vld1q_f64(x + i + 2), c);
    acc.lo = vaddq_f64(acc.lo, vmulq_f64(d0, d0));
    acc.hi = vaddq_f64(acc.hi, vmulq_f64(d1, d1));
  }
  double total = combine(acc);
  for (; i < n; ++i) {
    const double d = x[i] - center;
    total += d * d;
  }
  return total;
}

double squared_error(const double* a, const double* b, std::size_t n) {
  Acc acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    acc.lo = vaddq_f64(acc.lo, vmulq_f64(d0, d0));
    acc.hi = vaddq_f64(acc.hi, vmulq_f64(d1, d1));
  }
  double total = combine(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

std::size_t count_above(const double* x, std::size_t n, double threshold) {
  const float64x2_t t = vdupq_n_f64(threshold);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t gt = vcgtq_f64(vld1q_f64(x + i), t);
    count += (vgetq_lane_u64(gt, 0) & 1u) + (vgetq_lane_u64(gt, 1) & 1u);
  }
  for (; i < n; ++i) count += x[i] > threshold ? 1 : 0;
  return count;
}

CrossDev cross_dev(const double* x, const double* y, std::size_t n, double cx,
                   double cy) {
  const float64x2_t vx = vdupq_n_f64(cx);
  const float64x2_t vy = vdupq_n_f64(cy);
  Acc xx, yy, xy;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t dx0 = vsubq_f64(vld1q_f64(x + i), vx);
    const float64x2_t dx1 = vsubq_f64(vld1q_f64(x + i + 2), vx);
    const float64x2_t dy0 = vsubq_f64(vld1q_f64(y + i), vy);
    const float64x2_t dy1 = vsubq_f64(vld1q_f64(y + i + 2), vy);
    xx.lo = vaddq_f64(xx.lo, vmulq_f64(dx0, dx0));
    xx.hi = vaddq_f64(xx.hi, vmulq_f64(dx1, dx1));
    yy.lo = vaddq_f64(yy.lo, vmulq_f64(dy0, dy0));
    yy.hi = vaddq_f64(yy.hi, vmulq_f64(dy1, dy1));
    xy.lo = vaddq_f64(xy.lo, vmulq_f64(dx0, dy0));
    xy.hi = vaddq_f64(xy.hi, vmulq_f64(dx1, dy1));
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
  Acc sw, swx, swy;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t w0 = vld1q_f64(w + i);
    const float64x2_t w1 = vld1q_f64(w + i + 2);
    sw.lo = vaddq_f64(sw.lo, w0);
    sw.hi = vaddq_f64(sw.hi, w1);
    swx.lo = vaddq_f64(swx.lo, vmulq_f64(w0, vld1q_f64(x + i)));
    swx.hi = vaddq_f64(swx.hi, vmulq_f64(w1, vld1q_f64(x + i + 2)));
    swy.lo = vaddq_f64(swy.lo, vmulq_f64(w0, vld1q_f64(y + i)));
    swy.hi = vaddq_f64(swy.hi, vmulq_f64(w1, vld1q_f64(y + i + 2)));
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
  const float64x2_t vx = vdupq_n_f64(cx);
  const float64x2_t vy = vdupq_n_f64(cy);
  Acc xx, xy;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t dx0 = vsubq_f64(vld1q_f64(x + i), vx);
    const float64x2_t dx1 = vsubq_f64(vld1q_f64(x + i + 2), vx);
    const float64x2_t wdx0 = vmulq_f64(vld1q_f64(w + i), dx0);
    const float64x2_t wdx1 = vmulq_f64(vld1q_f64(w + i + 2), dx1);
    xx.lo = vaddq_f64(xx.lo, vmulq_f64(wdx0, dx0));
    xx.hi = vaddq_f64(xx.hi, vmulq_f64(wdx1, dx1));
    xy.lo = vaddq_f64(xy.lo, vmulq_f64(wdx0, vsubq_f64(vld1q_f64(y + i), vy)));
    xy.hi = vaddq_f64(xy.hi, vmulq_f64(wdx1, vsubq_f64(vld1q_f64(y + i + 2), vy)));
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
extern const KernelTable neon_table;
const KernelTable neon_table{Isa::neon,     sum,         sum_sq_dev,
                             squared_error, count_above, cross_dev,
                             weighted_sums, weighted_cross};
}  // namespace detail

}  // namespace emx::kernels
