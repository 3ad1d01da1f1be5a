#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bdsym/bessel.hpp"
#include "bdsym/kernels.hpp"
#include "bdsym/rates.hpp"

using namespace bdsym;

namespace {

RateModel constant_absorbing(long N, double lambda, double mu) {
  PresetParams p;
  p.N = N;
  p.lambda = lambda;
  p.mu = mu;
  return build_preset(Preset::ConstantAbsorbing, p);
}

RateModel ehrenfest(long N, double alpha) {
  PresetParams p;
  p.N = N;
  p.alpha = alpha;
  return build_preset(Preset::Ehrenfest, p);
}

}  // namespace

TEST_CASE("uniformization starts from the indicator row") {
  const RateModel m = constant_absorbing(8, 1.0, 0.7);
  const ProbabilityGrid g = uniformize(m, 3, {0.0, 0.4}, 1e-10);
  for (long n = 0; n <= 8; ++n) CHECK(g.at_state(0, n) == (n == 3 ? 1.0 : 0.0));
}

TEST_CASE("uniformization conserves mass") {
  const ProbabilityGrid g = uniformize(ehrenfest(10, 1.0), 4, {0.1, 0.5, 2.0, 7.0}, 1e-10);
  for (std::size_t ti = 0; ti < g.times.size(); ++ti) {
    CHECK(g.row_sum(ti) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("constant absorbing series matches the uniformization oracle") {
  const RateModel m = constant_absorbing(20, 1.0, 0.5);
  const ProbabilityGrid g = uniformize(m, 10, {1.0}, 1e-12);
  CHECK(p_constant_absorbing(20, 1.0, 0.5, 10, 6, 1.0) ==
        doctest::Approx(g.at_state(0, 6)).epsilon(1e-9));
  CHECK(std::fabs(p_constant_absorbing(20, 1.0, 0.5, 10, 16, 1.0) - g.at_state(0, 16)) <= 1e-9);

  const ProbabilityGrid g6 = uniformize(m, 6, {1.0}, 1e-12);
  CHECK(std::fabs(p_constant_absorbing(20, 1.0, 0.5, 6, 10, 1.0) - g6.at_state(0, 10)) <= 1e-9);
}

TEST_CASE("constant absorbing mirrors through the weight ratio") {
  const long N = 14;
  const RateModel m = constant_absorbing(N, 1.0, 0.5);
  const SymmetryWeights w = weights(m);
  for (long k : {2L, 5L, 9L}) {
    for (long n = 1; n <= N - 1; ++n) {
      const double lhs = p_constant_absorbing(N, 1.0, 0.5, N - k, N - n, 0.9);
      const double rhs = w.x[static_cast<std::size_t>(n)] / w.x[static_cast<std::size_t>(k)] *
                         p_constant_absorbing(N, 1.0, 0.5, k, n, 0.9);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
    }
  }
}

TEST_CASE("constant absorbing is time-reversible across the midline when rates match") {
  const long N = 12;
  for (long k = 1; k <= N - 1; ++k) {
    const long n = N - k;
    CHECK(p_constant_absorbing(N, 1.0, 1.0, k, n, 1.3) ==
          doctest::Approx(p_constant_absorbing(N, 1.0, 1.0, n, k, 1.3)).epsilon(1e-13));
  }
}

TEST_CASE("ehrenfest closed form") {
  CHECK(p_ehrenfest_reflecting(10, 1.0, 3, 3, 0.0) == 1.0);
  CHECK(p_ehrenfest_reflecting(10, 1.0, 3, 4, 0.0) == 0.0);

  // long-time limit is the symmetric binomial law
  double binom = 1.0;
  for (long j = 0; j < 4; ++j) binom = binom * static_cast<double>(10 - j) / (j + 1.0);
  CHECK(p_ehrenfest_reflecting(10, 1.0, 2, 4, 1e9) ==
        doctest::Approx(binom / 1024.0).epsilon(1e-13));

  // mirror identity
  CHECK(p_ehrenfest_reflecting(10, 1.0, 3, 7, 0.5) ==
        doctest::Approx(p_ehrenfest_reflecting(10, 1.0, 7, 3, 0.5)).epsilon(1e-13));

  // oracle check
  const ProbabilityGrid g = uniformize(ehrenfest(10, 1.0), 3, {0.5}, 1e-12);
  for (long n = 0; n <= 10; ++n) {
    CHECK(std::fabs(p_ehrenfest_reflecting(10, 1.0, 3, n, 0.5) - g.at_state(0, n)) <= 1e-10);
  }
}

TEST_CASE("bilateral kernel") {
  CHECK(p_bilateral_poisson(1.0, 1.0, 2, 2, 0.0) == 1.0);
  CHECK(p_bilateral_poisson(1.0, 1.0, 2, 3, 0.0) == 0.0);
  CHECK(p_bilateral_poisson(1.0, 1.0, 0, 0, 1.0) ==
        doctest::Approx(std::exp(-2.0) * bessel_i(0, 2.0)).epsilon(1e-14));

  const long K = bessel_order_band(2.0 * 1.7 * std::sqrt(1.3 * 0.6));
  double sum = 0.0;
  for (long n = -K; n <= K; ++n) sum += p_bilateral_poisson(1.3, 0.6, 0, n, 1.7);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<double> row = bilateral_poisson_row(1.3, 0.6, 2, -5, 9, 1.7);
  for (long n = -5; n <= 9; ++n) {
    CHECK(row[static_cast<std::size_t>(n + 5)] ==
          doctest::Approx(p_bilateral_poisson(1.3, 0.6, 2, n, 1.7)).epsilon(1e-13));
  }
}

TEST_CASE("catastrophe kernel") {
  CHECK(p_catastrophe_constant(1.0, 1.0, 0.0, 2, -1, 0.8) ==
        p_bilateral_poisson(1.0, 1.0, 2, -1, 0.8));
  CHECK(p_catastrophe_constant(1.0, 1.0, 0.5, 2, 2, 0.0) == 1.0);
  CHECK(p_catastrophe_constant(1.0, 1.0, 0.5, 2, 0, 0.0) == 0.0);

  PresetParams p;
  p.lambda = 1.0;
  p.mu = 1.0;
  p.alpha = 0.5;
  p.window_lo = -40;
  p.window_hi = 40;
  const RateModel m = build_preset(Preset::ConstantCatastrophe, p);
  const ProbabilityGrid g = uniformize(m, 2, {0.8}, 1e-11);
  CHECK(std::fabs(p_catastrophe_constant(1.0, 1.0, 0.5, 2, -1, 0.8) - g.at_state(0, -1)) <= 1e-8);
  CHECK(std::fabs(p_catastrophe_constant(1.0, 1.0, 0.5, 2, 0, 0.8) - g.at_state(0, 0)) <= 1e-8);
}

TEST_CASE("absorbing mass balance and monotone absorption") {
  const RateModel m = constant_absorbing(12, 1.0, 0.8);
  const std::vector<double> times{0.2, 0.6, 1.4, 3.0, 8.0};
  const ProbabilityGrid g = uniformize(m, 5, times, 1e-11);
  double prev_absorbed = 0.0;
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    CHECK(g.row_sum(ti) == doctest::Approx(1.0).epsilon(1e-10));
    const double absorbed = g.at_state(ti, 0) + g.at_state(ti, 12);
    CHECK(absorbed >= prev_absorbed - 1e-12);
    prev_absorbed = absorbed;
  }
  // interior closed form plus uniformized absorbed mass accounts for everything
  const ProbabilityGrid closed = closed_form_grid(m, 5, times);
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    double total = g.at_state(ti, 0) + g.at_state(ti, 12);
    for (long n = 1; n <= 11; ++n) total += closed.at_state(ti, n);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("quasi-symmetry verification separates symmetric from asymmetric") {
  const RateModel good = constant_absorbing(10, 1.0, 2.0);
  const std::vector<double> times{0.4, 1.1};
  const SymmetryReport ok = verify_quasi_symmetry(good, uniformize(good, 3, times, 1e-10),
                                                  uniformize(good, 7, times, 1e-10), 1e-8);
  CHECK(ok.satisfied);

  const RateModel bad = custom_model(Family::Absorbing, 0, 4, {0, 1, 2, 1, 0}, {0, 1, 1, 2, 0});
  const SymmetryReport no = verify_quasi_symmetry(bad, uniformize(bad, 1, times, 1e-10),
                                                  uniformize(bad, 3, times, 1e-10), 1e-4);
  CHECK_FALSE(no.satisfied);
  CHECK(no.worst_residual > 1e-3);

  CHECK_THROWS_AS(verify_quasi_symmetry(good, uniformize(good, 3, times, 1e-10),
                                        uniformize(good, 6, times, 1e-10), 1e-8),
                  std::invalid_argument);
}

TEST_CASE("bilateral quasi-symmetry through the origin") {
  PresetParams p;
  p.lambda = 0.9;
  p.mu = 0.9;
  p.alpha = 0.4;
  p.window_lo = -25;
  p.window_hi = 25;
  const RateModel m = build_preset(Preset::ConstantCatastrophe, p);
  const std::vector<double> times{0.3, 1.0};
  const ProbabilityGrid gk = uniformize(m, 2, times, 1e-10);
  const SymmetryReport rep =
      verify_quasi_symmetry(m, gk, uniformize(m, -2, times, 1e-10), 1e-9);
  CHECK(rep.satisfied);
  // catastrophe rows stay normalized within the reported tail bound
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    CHECK(std::fabs(gk.row_sum(ti) - 1.0) <= gk.tail_bound + 1e-12);
  }
}

TEST_CASE("matched-rate absorbing chain agrees with the oracle at the midpoint") {
  const RateModel m = constant_absorbing(20, 1.0, 1.0);
  const ProbabilityGrid g = uniformize(m, 10, {1.0}, 1e-12);
  for (long n = 1; n <= 19; ++n) {
    CHECK(std::fabs(p_constant_absorbing(20, 1.0, 1.0, 10, n, 1.0) - g.at_state(0, n)) <= 1e-9);
  }
}

TEST_CASE("window growth reporting for custom bilateral models") {
  const std::size_t n = 11;
  const RateModel tight = custom_model(Family::Bilateral, -5, 5, std::vector<double>(n, 1.0),
                                       std::vector<double>(n, 1.0));
  CHECK_THROWS_AS(uniformize(tight, 0, {50.0}, 1e-10), std::runtime_error);
  CHECK_NOTHROW(uniformize(tight, 0, {0.05}, 1e-6));
}

TEST_CASE("grid CSV is deterministic and carries the method tag") {
  const RateModel m = constant_absorbing(6, 1.0, 1.0);
  const ProbabilityGrid g = uniformize(m, 3, {0.5, 1.0}, 1e-10);
  const std::string a = g.to_csv();
  CHECK(a == g.to_csv());
  CHECK(a.rfind("t,state,probability,method\n", 0) == 0);
  CHECK(a.find("uniformization") != std::string::npos);
  const ProbabilityGrid c = closed_form_grid(m, 3, {0.5, 1.0});
  CHECK(c.to_csv().find("closed_form") != std::string::npos);
}

TEST_CASE("closed-form dispatch") {
  CHECK(has_closed_form(constant_absorbing(6, 1.0, 1.0)));
  CHECK(has_closed_form(ehrenfest(6, 1.0)));
  PresetParams pq;
  pq.N = 6;
  pq.alpha = 1.0;
  CHECK_FALSE(has_closed_form(build_preset(Preset::QuadraticEhrenfest, pq)));
  const ProbabilityGrid g = transition_grid(build_preset(Preset::QuadraticEhrenfest, pq), 2,
                                            {0.4}, 1e-10);
  CHECK(g.method == Method::Uniformization);
  CHECK(g.row_sum(0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(p_constant_absorbing(10, 1.0, 0.5, 0, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(p_constant_absorbing(10, 1.0, 0.5, 3, 10, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(p_bilateral_poisson(1.0, 1.0, 0, 0, -0.1), std::invalid_argument);
  const RateModel m = constant_absorbing(6, 1.0, 1.0);
  CHECK_THROWS_AS(uniformize(m, 3, {0.5, 0.4}, 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(uniformize(m, 3, {0.5}, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(uniformize(m, 9, {0.5}, 1e-10), std::invalid_argument);
}
