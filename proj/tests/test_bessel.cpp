#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bdsym/bessel.hpp"

using namespace bdsym;

namespace {

// Independent oracle: 50-term ascending series, sum_i (x/2)^{k+2i} / (i! (k+i)!).
double series_oracle(long k, double x) {
  double sum = 0.0;
  double term = std::pow(0.5 * x, static_cast<double>(k)) / std::tgamma(static_cast<double>(k) + 1.0);
  for (int i = 0; i < 50; ++i) {
    sum += term;
    term *= 0.25 * x * x / ((i + 1.0) * (static_cast<double>(k) + i + 1.0));
  }
  return sum;
}

struct TestRng {
  std::uint64_t s = 0x9e3779b97f4a7c15ULL;
  double unit() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s >> 11) * 0x1.0p-53;
  }
};

}  // namespace

TEST_CASE("values at zero argument") {
  CHECK(bessel_i(0, 0.0) == 1.0);
  CHECK(bessel_i(3, 0.0) == 0.0);
  CHECK(bessel_i(-5, 0.0) == 0.0);
  CHECK(bessel_i_scaled(0, 0.0) == 1.0);
}

TEST_CASE("matches the defining series for small arguments") {
  CHECK(bessel_i(1, 2.0) == doctest::Approx(1.5906368546373291).epsilon(1e-12));
  for (long k : {0L, 1L, 2L, 5L, 9L, 17L}) {
    for (double x : {0.05, 0.7, 2.0, 11.0, 28.5}) {
      const double ref = series_oracle(k, x);
      CHECK(bessel_i(k, x) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("order symmetry") {
  TestRng rng;
  for (int trial = 0; trial < 200; ++trial) {
    const long k = static_cast<long>(rng.unit() * 60);
    const double x = rng.unit() * 120.0;
    CHECK(bessel_i_scaled(k, x) == bessel_i_scaled(-k, x));
  }
}

TEST_CASE("three-term recurrence residual") {
  for (double x : {0.8, 4.0, 29.0, 31.0, 77.0, 400.0}) {
    const std::vector<double> band = bessel_i_scaled_band(0, 25, x);
    for (long k = 1; k <= 24; ++k) {
      const double lhs = band[static_cast<std::size_t>(k - 1)] -
                         band[static_cast<std::size_t>(k + 1)] -
                         2.0 * static_cast<double>(k) / x * band[static_cast<std::size_t>(k)];
      CHECK(std::fabs(lhs) <= 1e-10 * band[static_cast<std::size_t>(k - 1)]);
    }
  }
}

TEST_CASE("scaled band agrees with the scalar routine and is symmetric") {
  const std::vector<double> band = bessel_i_scaled_band(-40, 40, 5.0);
  REQUIRE(band.size() == 81);
  for (long k = -40; k <= 40; ++k) {
    CHECK(band[static_cast<std::size_t>(k + 40)] == band[static_cast<std::size_t>(40 - k)]);
  }
  for (long k : {0L, 1L, 7L, 23L, 40L}) {
    CHECK(band[static_cast<std::size_t>(k + 40)] ==
          doctest::Approx(bessel_i_scaled(k, 5.0)).epsilon(1e-12));
  }
  const std::vector<double> at_zero = bessel_i_scaled_band(-2, 2, 0.0);
  CHECK(at_zero == std::vector<double>{0.0, 0.0, 1.0, 0.0, 0.0});
  const std::vector<double> two = bessel_i_scaled_band(0, 1, 2.0);
  CHECK(two[0] == doctest::Approx(std::exp(-2.0) * bessel_i(0, 2.0)).epsilon(1e-13));
  CHECK(two[1] == doctest::Approx(std::exp(-2.0) * bessel_i(1, 2.0)).epsilon(1e-13));
}

TEST_CASE("series/recurrence crossover is seamless") {
  // f(x) = e^{-x} I_k(x) has f'(x) = e^{-x} [ (I_{k-1} + I_{k+1})/2 - I_k ];
  // stepping across the method cutoff must agree with the trapezoid of the
  // derivative to O(h^3), tying the two evaluation branches together.
  const double a = 29.999, b = 30.001;
  for (long k : {0L, 3L, 12L}) {
    const std::vector<double> fa = bessel_i_scaled_band(k - 1, k + 1, a);
    const std::vector<double> fb = bessel_i_scaled_band(k - 1, k + 1, b);
    const double da = 0.5 * (fa[0] + fa[2]) - fa[1];
    const double db = 0.5 * (fb[0] + fb[2]) - fb[1];
    const double predicted = 0.5 * (b - a) * (da + db);
    CHECK(std::fabs((fb[1] - fa[1]) - predicted) <= 1e-10);
  }
}

TEST_CASE("random-walk normalization over the truncation band") {
  for (double x : {0.3, 2.0, 9.0, 41.5}) {
    const long K = bessel_order_band(2.0 * x);
    const std::vector<double> band = bessel_i_scaled_band(-K, K, 2.0 * x);
    double sum = 0.0;
    for (double v : band) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("rejects bad arguments and signals overflow") {
  CHECK_THROWS_AS(bessel_i(0, -1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_i_scaled_band(3, 2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(bessel_i(0, 800.0), std::overflow_error);
  CHECK_THROWS_AS(bessel_i(kMaxBesselOrder + 1, 1.0), std::invalid_argument);
  CHECK_NOTHROW(bessel_i_scaled(0, 800.0));  // scaled form stays finite
}
