#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "bdsym/rates.hpp"

namespace bdsym {

enum class Method { ClosedForm, Uniformization };
const char* method_name(Method m);

/// Transition probabilities p_{k,n}(t) over a state x time lattice.
struct ProbabilityGrid {
  long start = 0;
  std::vector<long> states;    // ascending
  std::vector<double> times;   // ascending
  std::vector<double> values;  // time-major: values[ti * states.size() + si]
  Method method = Method::Uniformization;
  long window_lo = 0, window_hi = 0;  // truncation window the values were computed on
  double tail_bound = 0.0;            // Poisson tail + window-boundary mass

  double at(std::size_t ti, std::size_t si) const {
    return values[ti * states.size() + si];
  }
  double at_state(std::size_t ti, long n) const;  // 0 when n is outside `states`
  double row_sum(std::size_t ti) const;
  std::string to_csv() const;  // t,state,probability,method
};

/// Conservative generator of the forward equations on a state window.
/// Outward rates at an artificial (bilateral) window edge are zeroed, so the
/// rows always sum to zero, catastrophe column included.
struct Generator {
  long lo = 0, hi = 0;
  std::vector<double> birth, death, cata;

  std::size_t size() const { return birth.size(); }
  double uniformization_rate() const;
  /// out = v (I + Q / rate), with v a row vector of probabilities.
  void apply(const std::vector<double>& v, std::vector<double>& out, double inv_rate) const;
};

Generator make_generator(const RateModel& model);
Generator make_generator(const RateModel& model, long lo, long hi);

/// Numerical oracle: Poisson-weighted powers of the uniformized transition
/// matrix. Each returned row matches the forward-equation solution within
/// `tol` in total variation; bilateral windows auto-grow until the boundary
/// mass drops below tol.
ProbabilityGrid uniformize(const RateModel& model, long k, const std::vector<double>& times,
                           double tol);

/// Constant-rate absorbing chain on {0..N}: reflection-expanded Bessel series
/// for the interior transition probabilities, 1 <= k, n <= N-1.
double p_constant_absorbing(long N, double lambda, double mu, long k, long n, double t);

/// Ehrenfest chain with reflecting endpoints: binomial closed form.
double p_ehrenfest_reflecting(long N, double alpha, long k, long n, double t);

/// Constant-rate walk on the integers (bilateral Poisson kernel).
double p_bilateral_poisson(double lambda, double mu, long k, long n, double t);

/// One row of the bilateral Poisson kernel via a single scaled-Bessel band.
std::vector<double> bilateral_poisson_row(double lambda, double mu, long k, long lo, long hi,
                                          double t);

/// Constant-rate walk with total catastrophes: renewal-in-time closed form;
/// the time integral is evaluated by adaptive Gauss-Kronrod quadrature to
/// 1e-10 absolute. Reduces to p_bilateral_poisson when alpha = 0.
double p_catastrophe_constant(double lambda, double mu, double alpha, long k, long n, double t);

bool has_closed_form(const RateModel& model);
ProbabilityGrid closed_form_grid(const RateModel& model, long k, const std::vector<double>& times);
/// Closed form when the preset has one, uniformization otherwise.
ProbabilityGrid transition_grid(const RateModel& model, long k, const std::vector<double>& times,
                                double tol);

/// Probability-level mirror identity check between a grid started at k and a
/// grid started at the mirrored state (N-k, or -k for bilateral families).
SymmetryReport verify_quasi_symmetry(const RateModel& model, const ProbabilityGrid& from_start,
                                     const ProbabilityGrid& from_mirror, double tol);

/// Adaptive Gauss-Kronrod (7/15) integration to an absolute tolerance.
/// Throws when the achieved error estimate stays above the request.
double integrate_gk(const std::function<double(double)>& f, double a, double b, double abstol);

}  // namespace bdsym
