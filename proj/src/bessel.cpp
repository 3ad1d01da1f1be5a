#include "bdsym/bessel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bdsym {

namespace {

// Above this argument the ascending series needs too many terms and loses
// accuracy; switch to the scaled backward recurrence.
constexpr double kSeriesCutoff = 30.0;

void check_arguments(long order, double x) {
  if (!(x >= 0.0)) {
    throw std::domain_error("bessel_i: argument must be nonnegative, got " +
                            std::to_string(x));
  }
  if (order < -kMaxBesselOrder || order > kMaxBesselOrder) {
    throw std::invalid_argument("bessel_i: |order| exceeds the configured maximum " +
                                std::to_string(kMaxBesselOrder));
  }
}

// log I_k(x) via the ascending series, k >= 0, x > 0. The ratio sum is kept
// in linear space (bounded by e^{(x/2)^2}); the (x/2)^k / k! prefix stays in
// log space so large orders do not underflow prematurely.
double series_log(long k, double x) {
  const double q = 0.25 * x * x;
  double sum = 1.0;
  double term = 1.0;
  for (int i = 0; i < 4000; ++i) {
    term *= q / ((i + 1.0) * (static_cast<double>(k) + i + 1.0));
    sum += term;
    if (term < sum * 1e-18) break;
  }
  const double log_prefix =
      static_cast<double>(k) * std::log(0.5 * x) - std::lgamma(static_cast<double>(k) + 1.0);
  return log_prefix + std::log(sum);
}

// Backward (Miller) recurrence normalized with e^x = I_0 + 2 sum_{m>=1} I_m.
// Returns e^{-x} I_m(x) for m = 0..kmax. Values grow steeply toward m = 0,
// so the running pair is rescaled by 1e-250 whenever it passes 1e+250 and
// stored entries remember the epoch they were written in.
std::vector<double> miller_scaled(long kmax, double x) {
  const long start = std::max(kmax, static_cast<long>(std::ceil(x)));
  const long top = start + 40 + static_cast<long>(std::ceil(std::sqrt(40.0 * static_cast<double>(start))));

  std::vector<double> stored(static_cast<std::size_t>(kmax) + 1, 0.0);
  std::vector<int> epoch(static_cast<std::size_t>(kmax) + 1, 0);

  constexpr double kBig = 1e250;
  constexpr double kInv = 1e-250;
  int ep = 0;
  double above = 0.0;  // b_{m+1}
  double cur = 1.0;    // b_m, starting at m = top
  double norm = 0.0;

  for (long m = top; m >= 0; --m) {
    if (m <= kmax) {
      stored[static_cast<std::size_t>(m)] = cur;
      epoch[static_cast<std::size_t>(m)] = ep;
    }
    norm += (m == 0) ? cur : 2.0 * cur;
    if (m == 0) break;
    const double below = above + (2.0 * static_cast<double>(m) / x) * cur;
    above = cur;
    cur = below;
    if (cur > kBig) {
      cur *= kInv;
      above *= kInv;
      norm *= kInv;
      ++ep;
    }
  }

  for (long m = 0; m <= kmax; ++m) {
    double v = stored[static_cast<std::size_t>(m)] / norm;
    for (int e = epoch[static_cast<std::size_t>(m)]; e < ep && v != 0.0; ++e) v *= kInv;
    stored[static_cast<std::size_t>(m)] = v;
  }
  return stored;
}

// e^{-x} I_m(x) for m = 0..kmax, dispatching on the argument size.
std::vector<double> scaled_base(long kmax, double x) {
  std::vector<double> base(static_cast<std::size_t>(kmax) + 1, 0.0);
  if (x == 0.0) {
    base[0] = 1.0;
    return base;
  }
  if (x <= kSeriesCutoff) {
    for (long m = 0; m <= kmax; ++m) {
      const double lg = series_log(m, x) - x;
      base[static_cast<std::size_t>(m)] = (lg < -745.0) ? 0.0 : std::exp(lg);
    }
    return base;
  }
  return miller_scaled(kmax, x);
}

}  // namespace

double bessel_i(long order, double x) {
  check_arguments(order, x);
  const long k = std::labs(order);
  if (x == 0.0) return k == 0 ? 1.0 : 0.0;
  if (x <= kSeriesCutoff) {
    const double lg = series_log(k, x);
    return (lg < -745.0) ? 0.0 : std::exp(lg);
  }
  const double scaled = bessel_i_scaled(k, x);
  if (scaled == 0.0) return 0.0;
  const double lg = std::log(scaled) + x;
  if (lg >= std::log(std::numeric_limits<double>::max())) {
    throw std::overflow_error("bessel_i: I_" + std::to_string(k) + "(" + std::to_string(x) +
                              ") overflows the double range; use bessel_i_scaled");
  }
  return (x > 700.0) ? std::exp(lg) : scaled * std::exp(x);
}

double bessel_i_scaled(long order, double x) {
  check_arguments(order, x);
  const long k = std::labs(order);
  if (x == 0.0) return k == 0 ? 1.0 : 0.0;
  if (x <= kSeriesCutoff) {
    const double lg = series_log(k, x) - x;
    return (lg < -745.0) ? 0.0 : std::exp(lg);
  }
  return miller_scaled(k, x)[static_cast<std::size_t>(k)];
}

std::vector<double> bessel_i_scaled_band(long lo, long hi, double x) {
  if (lo > hi) throw std::invalid_argument("bessel_i_scaled_band: empty order range");
  check_arguments(std::labs(lo) > std::labs(hi) ? lo : hi, x);
  const long kmax = std::max(std::labs(lo), std::labs(hi));
  const std::vector<double> base = scaled_base(kmax, x);
  std::vector<double> out(static_cast<std::size_t>(hi - lo) + 1);
  for (long k = lo; k <= hi; ++k) {
    out[static_cast<std::size_t>(k - lo)] = base[static_cast<std::size_t>(std::labs(k))];
  }
  return out;
}

long bessel_order_band(double x) {
  if (!(x >= 0.0)) throw std::domain_error("bessel_order_band: argument must be nonnegative");
  return static_cast<long>(std::ceil(x + 40.0 * std::sqrt(x) + 40.0));
}

}  // namespace bdsym
