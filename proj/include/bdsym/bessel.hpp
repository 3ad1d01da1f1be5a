#pragma once

#include <vector>

namespace bdsym {

inline constexpr long kMaxBesselOrder = 1'000'000;

/// Modified Bessel function of the first kind I_k(x), integer order.
/// Throws std::domain_error for x < 0 and std::overflow_error when the
/// unscaled value exceeds the double range (use the scaled form instead).
double bessel_i(long order, double x);

/// Exponentially scaled value e^{-x} I_k(x); stays in [0, 1] for x >= 0.
double bessel_i_scaled(long order, double x);

/// e^{-x} I_k(x) for every order k in the contiguous range [lo, hi].
std::vector<double> bessel_i_scaled_band(long lo, long hi, double x);

/// Order past which e^{-x} I_k(x) falls below ~1e-15 of the leading term.
/// Lattice sums over Bessel orders truncate here.
long bessel_order_band(double x);

}  // namespace bdsym
