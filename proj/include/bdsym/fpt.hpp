#pragma once

#include <string>
#include <vector>

#include "bdsym/kernels.hpp"

namespace bdsym {

enum class Direction { Up, Down };

/// First-passage-time density on a time grid, with cumulative mass and an
/// eventual-hit estimate (cumulative at t_max plus a fitted exponential
/// tail; `tail_extrapolated` flags whether the fit contributed).
struct FptDensity {
  long start = 0;
  long target = 0;
  Direction direction = Direction::Up;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> cumulative;
  double eventual_probability = 0.0;
  bool tail_extrapolated = false;
  double discretization_error = 0.0;  // renewal-solver Richardson estimate
  double tail_bound = 0.0;            // window truncation of the current sums
  std::vector<double> current_up, current_down;  // catastrophe currents h+/h-
  std::string to_csv() const;                    // t,value
};

/// Taboo transition probabilities p^{<r>}_{k,n}(t) for all states n on the
/// start's side of the taboo state r.
struct TabooGrid {
  long start = 0;
  long taboo = 0;
  std::vector<long> states;
  std::vector<double> times;
  std::vector<double> values;  // time-major
  bool below = true;           // start side relative to the taboo state

  double at(std::size_t ti, std::size_t si) const { return values[ti * states.size() + si]; }
  double at_state(std::size_t ti, long n) const;
  std::string to_csv() const;  // t,state,value
};

/// General first-passage density through state s via the renewal integral
/// equation, discretized with the product-trapezoidal rule on a uniform
/// grid. The grid times must be consecutive multiples of one step h; the
/// solver runs at h and h/2, reports the Richardson discrepancy, and returns
/// the extrapolated values. Throws when the discrepancy exceeds `tol`.
FptDensity fpt_renewal(const RateModel& model, long k, long s, Direction direction,
                       const std::vector<double>& times, double tol);

/// Symmetric truncated chain with absorbing endpoints, passage through the
/// midpoint s = N/2: difference of one-step inflow probabilities.
FptDensity fpt_symmetric_absorbing(const RateModel& model, long k,
                                   const std::vector<double>& times, double tol = 1e-10);
TabooGrid taboo_symmetric_absorbing(const RateModel& model, long k,
                                    const std::vector<double>& times, double tol = 1e-10);

/// Symmetric reflecting chain, passage through s = N/2.
FptDensity fpt_symmetric_reflecting(const RateModel& model, long k,
                                    const std::vector<double>& times, double tol = 1e-10);
TabooGrid taboo_reflecting(const RateModel& model, long k, const std::vector<double>& times,
                           double tol = 1e-10);

/// Symmetric bilateral chain, passage through state 0.
FptDensity fpt_bilateral(const RateModel& model, long k, const std::vector<double>& times,
                         double tol = 1e-10);
TabooGrid taboo_bilateral(const RateModel& model, long k, const std::vector<double>& times,
                          double tol = 1e-10);

/// Symmetric bilateral chain with catastrophes, passage through state 0 via
/// the probability currents h+/h- (stored on the result).
FptDensity fpt_catastrophe(const RateModel& model, long k, const std::vector<double>& times,
                           double tol = 1e-10);
TabooGrid taboo_catastrophe(const RateModel& model, long k, const std::vector<double>& times,
                            double tol = 1e-10);

/// Constant-rate absorbing chain on {0..2s}: explicit Bessel series for the
/// upward density through s. Times must be strictly positive (the series
/// carries a 1/t factor; the t->0 limits are the small-time laws).
FptDensity fpt_constant_closed(long N, double lambda, double mu, long k,
                               const std::vector<double>& times);
double taboo_constant_closed_value(long N, double lambda, double mu, long k, long n, double t);

/// Ehrenfest chain on {0..2s}: explicit binomial series for the density
/// through s and the s-avoiding probabilities.
FptDensity fpt_ehrenfest_closed(long s, double alpha, long k, const std::vector<double>& times);
double taboo_ehrenfest_closed_value(long s, double alpha, long k, long n, double t);

/// Constant-rate catastrophe chain with lambda = mu: explicit Bessel series
/// for the density through 0 from |k| and the 0-avoiding probabilities.
FptDensity fpt_catastrophe_series(double lambda, double alpha, long k,
                                  const std::vector<double>& times);
double taboo_catastrophe_closed_value(double lambda, double alpha, long k, long n, double t);

/// Taboo probabilities via the renewal route: p_{k,n} minus the convolution
/// of the first-passage density with p_{r,n}. Uniform grid required.
TabooGrid taboo_renewal(const RateModel& model, long k, long r, const std::vector<double>& times,
                        double tol);

}  // namespace bdsym
