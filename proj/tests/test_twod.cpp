#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "bdsym/kernels.hpp"
#include "bdsym/model_io.hpp"
#include "bdsym/sim.hpp"
#include "bdsym/twod.hpp"

using namespace bdsym;

namespace {

struct TestRng {
  std::uint64_t s = 0x2545f4914f6cdd1dULL;
  double unit() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s >> 11) * 0x1.0p-53;
  }
  long state(long span) { return static_cast<long>(unit() * (2 * span + 1)) - span; }
};

const PlaneModel kXiTwo = make_plane_model(2.0, 1.0, 1.0, 2.0);

}  // namespace

TEST_CASE("transition probability factorizes over the coordinates") {
  TestRng rng;
  for (int trial = 0; trial < 10000; ++trial) {
    const PlanePoint k{rng.state(4), rng.state(4)};
    const PlanePoint n{rng.state(6), rng.state(6)};
    const double t = 0.05 + 2.0 * rng.unit();
    const double joint = p2d(kXiTwo, k, n, t);
    const double product = p_bilateral_poisson(2.0, 1.0, k[0], n[0], t) *
                           p_bilateral_poisson(1.0, 2.0, k[1], n[1], t);
    CHECK(joint == doctest::Approx(product).epsilon(1e-12));
  }
}

TEST_CASE("initial condition") {
  CHECK(p2d(kXiTwo, {2, -1}, {2, -1}, 0.0) == 1.0);
  CHECK(p2d(kXiTwo, {2, -1}, {2, 0}, 0.0) == 0.0);
}

TEST_CASE("mirror identity across unit-slope lines") {
  double worst = 0.0;
  for (long r : {-2L, 0L, 1L}) {
    for (double t : {0.4, 1.3}) {
      for (long k1 = -1; k1 <= 1; ++k1) {
        for (long k2 = -1; k2 <= 1; ++k2) {
          for (long n1 = -2; n1 <= 2; ++n1) {
            for (long n2 = -2; n2 <= 2; ++n2) {
              const double lhs = p2d(kXiTwo, {k2 - r, k1 + r}, {n2 - r, n1 + r}, t);
              const double rhs = std::pow(2.0, static_cast<double>(n2 - k2 - n1 + k1)) *
                                 p2d(kXiTwo, {k1, k2}, {n1, n2}, t);
              worst = std::max(worst, std::fabs(lhs - rhs));
            }
          }
        }
      }
    }
  }
  CHECK(worst <= 1e-10);

  // pinned instance
  const double lhs = p2d(kXiTwo, {0, 0}, {0, 1}, 0.7);
  const double rhs = std::pow(2.0, -1.0) * p2d(kXiTwo, {0, 0}, {1, 0}, 0.7);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));

  // an asymmetric model breaks the identity badly
  const PlaneModel lopsided = make_plane_model(2.0, 1.0, 1.0, 0.4);
  const double bad_lhs = p2d(lopsided, {0, 0}, {0, 1}, 0.7);
  const double bad_rhs = (2.0 / 1.0) * 0.0 + 0.5 * p2d(lopsided, {0, 0}, {1, 0}, 0.7);
  CHECK(std::fabs(bad_lhs - bad_rhs) > 1e-3);
}

TEST_CASE("line-avoiding probabilities") {
  const PlanePoint k{0, -2};
  SUBCASE("reflection difference stays nonnegative on the same side") {
    for (double t : {0.2, 0.8, 2.0}) {
      CHECK(taboo2d(kXiTwo, k, {0, -1}, 0, t) >= 0.0);
      CHECK(taboo2d(kXiTwo, k, {1, -2}, 0, t) >= 0.0);
    }
  }
  SUBCASE("dominated by the unconstrained probability") {
    for (double t : {0.2, 0.8, 2.0}) {
      CHECK(taboo2d(kXiTwo, k, {0, -1}, 0, t) <= p2d(kXiTwo, k, {0, -1}, t) + 1e-15);
    }
  }
  SUBCASE("side mismatch is rejected") {
    CHECK_THROWS_AS(taboo2d(kXiTwo, k, {0, 1}, 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(taboo2d(kXiTwo, k, {0, 0}, 0, 0.5), std::invalid_argument);
  }
  SUBCASE("asymmetric model is rejected") {
    CHECK_THROWS_AS(taboo2d(make_plane_model(2, 1, 1, 0.4), k, {0, -1}, 0, 0.5),
                    std::invalid_argument);
  }
}

TEST_CASE("taboo plus crossed mass reproduces the full probability") {
  // continuity route: P(n,t|k) = int_0^t sum_x g(x,x+r,tau|k) P(n,t-tau|x,x+r) dtau
  // for n on the far side of the line
  const PlanePoint k{0, -3};
  const PlanePoint n{1, 3};
  const long r = 0;
  const double t = 1.2;
  const long steps = 512;
  const double h = t / static_cast<double>(steps);
  double integral = 0.0;
  for (long j = 1; j <= steps; ++j) {
    const double tau = static_cast<double>(j) * h;
    const auto [xlo, xhi] = fpt2d_site_band(kXiTwo, k, r, tau);
    double inner = 0.0;
    for (long x = xlo; x <= xhi; ++x) {
      const double g = fpt2d_subdensity(kXiTwo, k, r, x, tau);
      if (g == 0.0) continue;
      inner += g * p2d(kXiTwo, {x, x + r}, n, t - tau);
    }
    integral += (j == steps ? 0.5 : 1.0) * inner;
  }
  integral *= h;  // tau -> 0 endpoint vanishes (density is O(tau^{d-1}), d = 3)
  CHECK(integral == doctest::Approx(p2d(kXiTwo, k, n, t)).epsilon(1e-6));
}

TEST_CASE("crossing density identities") {
  const PlanePoint k{0, -3};
  for (double t : {0.3, 0.7, 1.5, 3.0}) {
    const double total = fpt2d_total(kXiTwo, k, 0, t);
    const double direct = 3.0 / t * diagonal_probability_direct(kXiTwo, k, 0, t);
    CHECK(std::fabs(total - direct) <= 1e-10);

    const auto [xlo, xhi] = fpt2d_site_band(kXiTwo, k, 0, t);
    double sum = 0.0;
    for (long x = xlo; x <= xhi; ++x) sum += fpt2d_subdensity(kXiTwo, k, 0, x, t);
    CHECK(sum == doctest::Approx(total).epsilon(1e-10));
  }
  CHECK_THROWS_AS(fpt2d_total(kXiTwo, {0, 0}, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(fpt2d_subdensity(kXiTwo, k, 0, 0, 0.0), std::invalid_argument);
}

TEST_CASE("crossing density obeys the mirror weight") {
  const PlanePoint k{1, -2};
  const long r = 0;
  for (double t : {0.5, 1.4}) {
    const double base = fpt2d_total(kXiTwo, k, r, t);
    const double mirrored = fpt2d_total(kXiTwo, {k[1] - r, k[0] + r}, r, t);
    const double weight = std::pow(2.0, static_cast<double>(k[0] + r - k[1]));
    CHECK(mirrored == doctest::Approx(weight * base).epsilon(1e-10));
  }
}

TEST_CASE("ultimate crossing probability") {
  SUBCASE("balanced rates cross surely") {
    const PlaneModel even = make_plane_model(1.0, 1.0, 1.0, 1.0);
    const CrossingResult res = crossing_probability(even, {0, -4}, 0);
    CHECK(res.pi == 1.0);
    CHECK(res.xi == 1.0);
  }
  SUBCASE("geometric branch at distance one") {
    const CrossingResult res = crossing_probability(kXiTwo, {0, -1}, 0);
    CHECK(res.geometric_branch);
    CHECK(res.pi == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(crossing_probability_integral(kXiTwo, {0, -1}, 0) ==
          doctest::Approx(res.pi).epsilon(2e-3));
  }
  SUBCASE("approach from the favorable side is certain") {
    const CrossingResult res = crossing_probability(kXiTwo, {0, 2}, 0);
    CHECK_FALSE(res.geometric_branch);
    CHECK(res.pi == 1.0);
    CHECK(crossing_probability_integral(kXiTwo, {0, 2}, 0) ==
          doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("mirror relation") {
    const PlanePoint k{1, -2};
    const long r = 0;
    const double base = crossing_probability(kXiTwo, k, r).pi;
    const double mirrored = crossing_probability(kXiTwo, {k[1] - r, k[0] + r}, r).pi;
    const double weight = std::pow(2.0, static_cast<double>(k[0] + r - k[1]));
    CHECK(mirrored == doctest::Approx(std::min(1.0, weight * base)).epsilon(1e-13));
  }
  SUBCASE("on-line start is rejected") {
    CHECK_THROWS_AS(crossing_probability(kXiTwo, {2, 2}, 0), std::invalid_argument);
  }
}

TEST_CASE("line-avoiding frequency from exact-event paths") {
  const PlanePoint k{0, -2};
  const PlanePoint n{0, -1};
  const long r = 0;
  const double t_obs = 0.8;
  const long R = 40000;
  long hits = 0;
  for (long i = 0; i < R; ++i) {
    RngStream rng(13579, static_cast<std::uint64_t>(i));
    long x1 = k[0], x2 = k[1];
    bool avoided = true;
    for (const PlaneEvent& e : simulate_plane_path(kXiTwo, k, t_obs, rng)) {
      x1 = e.x1;
      x2 = e.x2;
      if (x2 == x1 + r) {
        avoided = false;
        break;
      }
    }
    if (avoided && x1 == n[0] && x2 == n[1]) ++hits;
  }
  const double phat = static_cast<double>(hits) / static_cast<double>(R);
  const double p = taboo2d(kXiTwo, k, n, r, t_obs);
  const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(R));
  CHECK(std::fabs(phat - p) <= 3.0 * sigma);
}

TEST_CASE("crossing record serializes to JSON") {
  const std::string doc = crossing_to_json(crossing_probability(kXiTwo, {0, -1}, 0));
  CHECK(doc.find("\"xi\"") != std::string::npos);
  CHECK(doc.find("\"branch\"") != std::string::npos);
  CHECK(doc.find("geometric") != std::string::npos);
  CHECK(doc.find("\"pi\"") != std::string::npos);
}
