#include <cstring>
#include <vector>

#include "doctest.h"
#include "emx/common.hpp"
#include "emx/kernels.hpp"
#include "emx/rng.hpp"

using namespace emx;
using namespace emx::kernels;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::vector<double> random_vector(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal() + (rng.uniform() < 0.1 ? 1e6 : 0.0);
  return v;
}

}  // namespace

TEST_CASE("every supported ISA matches the scalar kernels bit for bit") {
  const auto& ref = table(Isa::scalar);
  Rng rng(123);
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (!supported(isa)) continue;
    const auto& k = table(isa);
    CAPTURE(to_string(isa));
    for (std::size_t n = 0; n < 70; ++n) {
      for (int rep = 0; rep < 5; ++rep) {
        const auto x = random_vector(rng, n, 10.0);
        const auto y = random_vector(rng, n, 3.0);
        std::vector<double> w(n);
        for (auto& v : w) v = rng.uniform();
        const double cx = rng.normal(), cy = rng.normal(), t = rng.normal();
        CHECK(same_bits(k.sum(x.data(), n), ref.sum(x.data(), n)));
        CHECK(same_bits(k.sum_sq_dev(x.data(), n, cx), ref.sum_sq_dev(x.data(), n, cx)));
        CHECK(same_bits(k.squared_error(x.data(), y.data(), n), ref.squared_error(x.data(), y.data(), n)));
        CHECK(k.count_above(x.data(), n, t) == ref.count_above(x.data(), n, t));
        const auto a = k.cross_dev(x.data(), y.data(), n, cx, cy);
        const auto b = ref.cross_dev(x.data(), y.data(), n, cx, cy);
        CHECK(same_bits(a.sxx, b.sxx));
        CHECK(same_bits(a.syy, b.syy));
        CHECK(same_bits(a.sxy, b.sxy));
        const auto ws = k.weighted_sums(x.data(), y.data(), w.data(), n);
        const auto wr = ref.weighted_sums(x.data(), y.data(), w.data(), n);
        CHECK(same_bits(ws.sw, wr.sw));
        CHECK(same_bits(ws.swx, wr.swx));
        CHECK(same_bits(ws.swy, wr.swy));
        const auto wc = k.weighted_cross(x.data(), y.data(), w.data(), n, cx, cy);
        const auto wcr = ref.weighted_cross(x.data(), y.data(), w.data(), n, cx, cy);
        CHECK(same_bits(wc.swxx, wcr.swxx));
        CHECK(same_bits(wc.swxy, wcr.swxy));
      }
    }
  }
}

TEST_CASE("scalar kernels agree with direct loops") {
  Rng rng(9);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 1000u}) {
    const auto x = random_vector(rng, n, 1.0);
    double s = 0, sq = 0;
    std::size_t above = 0;
    for (double v : x) {
      s += v;
      sq += (v - 0.5) * (v - 0.5);
      above += v > 0.25 ? 1 : 0;
    }
    CHECK(sum(x) == doctest::Approx(s).epsilon(1e-12));
    CHECK(sum_sq_dev(x, 0.5) == doctest::Approx(sq).epsilon(1e-12));
    CHECK(count_above(x, 0.25) == above);
  }
  const std::vector<double> v = {1.0, 2.0, 2.0};
  CHECK(count_above(v, 2.0) == 0);
}

TEST_CASE("dispatch reports ISA support") {
  CHECK(supported(Isa::scalar));
  CHECK((active().isa == Isa::scalar || supported(active().isa)));
#if !defined(EMX_HAVE_NEON)
  CHECK_THROWS_AS(table(Isa::neon), Error);
#endif
}
