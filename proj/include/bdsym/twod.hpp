#pragma once

#include <array>
#include <string>
#include <utility>

#include "bdsym/rates.hpp"

namespace bdsym {

using PlanePoint = std::array<long, 2>;

/// Two-dimensional constant-rate birth-death process on the integer lattice:
/// independent coordinate walks with rates (lambda_i up, mu_i down).
/// The spatial symmetry is about lines x2 = x1 + r and requires
/// lambda1/lambda2 = mu2/mu1 = xi.
struct PlaneModel {
  double lambda1 = 0.0, lambda2 = 0.0, mu1 = 0.0, mu2 = 0.0;

  double xi() const { return lambda1 / lambda2; }
  double rate_sum() const { return lambda1 + lambda2 + mu1 + mu2; }
  bool symmetric(double tol = 1e-12) const;
};

PlaneModel make_plane_model(double lambda1, double lambda2, double mu1, double mu2);

SymmetryReport check_symmetry(const PlaneModel& model, double tol = 1e-12);

/// Product-form transition probability P(n, t | k).
double p2d(const PlaneModel& model, PlanePoint k, PlanePoint n, double t);

/// Line-avoiding (taboo) probability for states strictly on the same side of
/// x2 = x1 + r: reflection difference with the xi weight.
double taboo2d(const PlaneModel& model, PlanePoint k, PlanePoint n, long r, double t);

/// Sub-density of first passage through the line in site (x, x+r).
double fpt2d_subdensity(const PlaneModel& model, PlanePoint k, long r, long x, double t);

/// Total first-passage density through the line: |k2-k1-r|/t times the
/// on-line probability, summed over a Bessel-band site range.
double fpt2d_total(const PlaneModel& model, PlanePoint k, long r, double t);

/// Independent route to P{X2(t) = X1(t) + r}: the coordinate difference is a
/// 1D constant-rate walk with up rate lambda2+mu1 and down rate lambda1+mu2.
double diagonal_probability_direct(const PlaneModel& model, PlanePoint k, long r, double t);

/// Landing-site range [lo, hi] carrying all but a negligible tail of the
/// line-crossing mass at time t (drift-centered, Bessel-band widened).
std::pair<long, long> fpt2d_site_band(const PlaneModel& model, PlanePoint k, long r, double t);

struct CrossingResult {
  double xi = 1.0;
  bool geometric_branch = false;  // true: pi = xi^{k2-k1-r}; false: crossing certain
  double pi = 1.0;
};

/// Probability of ever reaching the line x2 = x1 + r.
CrossingResult crossing_probability(const PlaneModel& model, PlanePoint k, long r);

/// Numeric cross-check: trapezoid integral of the crossing density up to
/// 50/min-rate plus an exponential tail fitted over the last decade.
double crossing_probability_integral(const PlaneModel& model, PlanePoint k, long r);

/// Smallest usable time for the 1/t first-passage forms.
double plane_min_time(const PlaneModel& model);

}  // namespace bdsym
