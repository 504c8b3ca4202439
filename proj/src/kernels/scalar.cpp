// Reference kernels. The lane structure mirrors the SIMD variants exactly;
// see kernels.hpp for the reduction order contract.

#include "emx/kernel_types.hpp"

namespace emx::kernels {
namespace {

inline double combine(const double (&lane)[4]) {
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum(const double* x, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int j = 0; j < 4; ++j) lane[j] += x[i + j];
  }
  double total = combine(lane);
  for (; i < n; ++i) total += x[i];
  return total;
}

double sum_sq_dev(const double* x, std::size_t n, double center) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int j = 0; j < 4; ++j) {
      const double d = x[i + j] - center;
      lane[j] += d * d;
    }
  }
  double total = combine(lane);
  for (; i < n; ++i) {
    const double d = x[i] - center;
    total += d * d;
  }
  return total;
}

double squared_error(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int j = 0; j < 4; ++j) {
      const double d = a[i + j] - b[i + j];
      lane[j] += d * d;
    }
  }
  double total = combine(lane);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

std::size_t count_above(const double* x, std::size_t n, double threshold) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += x[i] > threshold ? 1 : 0;
  return count;
}

CrossDev cross_dev(const double* x, const double* y, std::size_t n, double cx,
                   double cy) {
  double xx[4] = {0.0, 0.0, 0.0, 0.0};
  double yy[4] = {0.0, 0.0, 0.0, 0.0};
  double xy[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int j = 0; j < 4; ++j) {
      const double dx = x[i + j] - cx;
      const double dy = y[i + j] - cy;
      xx[j] += dx * dx;
      yy[j] += dy * dy;
      xy[j] += dx * dy;
    }
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
  double sw[4] = {0.0, 0.0, 0.0, 0.0};
  double swx[4] = {0.0, 0.0, 0.0, 0.0};
  double swy[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int j = 0; j < 4; ++j) {
      sw[j] += w[i + j];
      swx[j] += w[i + j] * x[i + j];
      swy[j] += w[i + j] * y[i + j];
    }
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
  double xx[4] = {0.0, 0.0, 0.0, 0.0};
  double xy[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int j = 0; j < 4; ++j) {
      const double wdx = w[i + j] * (x[i + j] - cx);
      xx[j] += wdx * (x[i + j] - cx);
      xy[j] += wdx * (y[i + j] - cy);
    }
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
extern const KernelTable scalar_table;
const KernelTable scalar_table{Isa::scalar,    sum,          sum_sq_dev,
                               squared_error,  count_above,  cross_dev,
                               weighted_sums,  weighted_cross};
}  // namespace detail

}  // namespace emx::kernels
