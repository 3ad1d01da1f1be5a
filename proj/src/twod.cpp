#include "bdsym/twod.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bdsym/bessel.hpp"
#include "bdsym/format.hpp"
#include "bdsym/kernels.hpp"

namespace bdsym {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void require_symmetric(const PlaneModel& m) {
  if (!m.symmetric()) {
    const SymmetryReport rep = check_symmetry(m);
    throw std::invalid_argument("plane model violates lambda1/lambda2 = mu2/mu1 (residual " +
                                g17(rep.worst_residual) + ")");
  }
}

long line_distance(PlanePoint k, long r) { return k[1] - k[0] - r; }

}  // namespace

bool PlaneModel::symmetric(double tol) const { return check_symmetry(*this, tol).satisfied; }

PlaneModel make_plane_model(double lambda1, double lambda2, double mu1, double mu2) {
  PlaneModel m{lambda1, lambda2, mu1, mu2};
  require(lambda1 > 0.0 && lambda2 > 0.0 && mu1 > 0.0 && mu2 > 0.0,
          "plane model: all four rates must be positive");
  return m;
}

SymmetryReport check_symmetry(const PlaneModel& model, double tol) {
  const double lhs = model.lambda1 / model.lambda2;
  const double rhs = model.mu2 / model.mu1;
  double r = std::fabs(lhs - rhs);
  const double scale = std::max(std::fabs(lhs), std::fabs(rhs));
  if (scale > 1.0) r /= scale;
  SymmetryReport rep;
  rep.family = Family::TwoD;
  rep.worst_residual = r;
  rep.satisfied = r <= tol;
  return rep;
}

double p2d(const PlaneModel& model, PlanePoint k, PlanePoint n, double t) {
  require(t >= 0.0, "p2d: time must be nonnegative");
  return p_bilateral_poisson(model.lambda1, model.mu1, k[0], n[0], t) *
         p_bilateral_poisson(model.lambda2, model.mu2, k[1], n[1], t);
}

double taboo2d(const PlaneModel& model, PlanePoint k, PlanePoint n, long r, double t) {
  require_symmetric(model);
  const long dk = line_distance(k, r);
  const long dn = line_distance(n, r);
  require(dk != 0 && dn != 0 && ((dk < 0) == (dn < 0)),
          "taboo2d: start and end must lie strictly on the same side of the line");
  const double direct = p2d(model, k, n, t);
  const double mirrored = p2d(model, k, {n[1] - r, n[0] + r}, t);
  const double weight = std::exp(static_cast<double>(n[0] + r - n[1]) * std::log(model.xi()));
  const double v = direct - weight * mirrored;
  return (v < 0.0 && v > -1e-12) ? 0.0 : v;
}

double fpt2d_subdensity(const PlaneModel& model, PlanePoint k, long r, long x, double t) {
  require_symmetric(model);
  const long d = line_distance(k, r);
  require(d != 0, "fpt2d_subdensity: start must lie off the line");
  require(t > 0.0, "fpt2d_subdensity: density undefined at t = 0");
  return static_cast<double>(std::labs(d)) / t * p2d(model, k, {x, x + r}, t);
}

std::pair<long, long> fpt2d_site_band(const PlaneModel& model, PlanePoint k, long r, double t) {
  require(t > 0.0, "fpt2d_site_band: need a positive time");
  // each coordinate centered on its drift, widened by the per-coordinate
  // Bessel band
  const double c1 = static_cast<double>(k[0]) + (model.lambda1 - model.mu1) * t;
  const double c2 = static_cast<double>(k[1] - r) + (model.lambda2 - model.mu2) * t;
  const long band =
      std::max(bessel_order_band(2.0 * t * std::sqrt(model.lambda1 * model.mu1)),
               bessel_order_band(2.0 * t * std::sqrt(model.lambda2 * model.mu2)));
  return {static_cast<long>(std::floor(std::min(c1, c2))) - band,
          static_cast<long>(std::ceil(std::max(c1, c2))) + band};
}

double fpt2d_total(const PlaneModel& model, PlanePoint k, long r, double t) {
  require_symmetric(model);
  const long d = line_distance(k, r);
  require(d != 0, "fpt2d_total: start must lie off the line");
  require(t > 0.0, "fpt2d_total: density undefined at t = 0");

  const auto [xlo, xhi] = fpt2d_site_band(model, k, r, t);
  const std::vector<double> f1 =
      bilateral_poisson_row(model.lambda1, model.mu1, k[0], xlo, xhi, t);
  const std::vector<double> f2 =
      bilateral_poisson_row(model.lambda2, model.mu2, k[1], xlo + r, xhi + r, t);
  double on_line = 0.0;
  for (std::size_t i = 0; i < f1.size(); ++i) on_line += f1[i] * f2[i];
  return static_cast<double>(std::labs(d)) / t * on_line;
}

double diagonal_probability_direct(const PlaneModel& model, PlanePoint k, long r, double t) {
  return p_bilateral_poisson(model.lambda2 + model.mu1, model.lambda1 + model.mu2, k[1] - k[0], r,
                             t);
}

CrossingResult crossing_probability(const PlaneModel& model, PlanePoint k, long r) {
  require_symmetric(model);
  const long d = line_distance(k, r);
  require(d != 0, "crossing_probability: start must lie off the line");
  CrossingResult res;
  res.xi = model.xi();
  const double toward_sum = model.lambda1 + model.mu2;
  const double away_sum = model.mu1 + model.lambda2;
  const bool geometric = (d < 0 && toward_sum >= away_sum) || (d > 0 && toward_sum <= away_sum);
  res.geometric_branch = geometric;
  res.pi = geometric ? std::exp(static_cast<double>(d) * std::log(res.xi)) : 1.0;
  return res;
}

double crossing_probability_integral(const PlaneModel& model, PlanePoint k, long r) {
  require_symmetric(model);
  const long d = line_distance(k, r);
  require(d != 0, "crossing_probability_integral: start must lie off the line");
  const double min_rate =
      std::min(std::min(model.lambda1, model.lambda2), std::min(model.mu1, model.mu2));
  const double t_end = 50.0 / min_rate;
  const double t_min = plane_min_time(model);
  const long steps = 4000;
  const double h = (t_end - t_min) / static_cast<double>(steps);

  const double dist = static_cast<double>(std::labs(d));
  auto density = [&](double t) {
    return dist / t * diagonal_probability_direct(model, k, r, t);
  };
  double mass = 0.0;
  double prev = density(t_min);
  std::vector<double> ts, hs;
  for (long i = 1; i <= steps; ++i) {
    const double t = t_min + static_cast<double>(i) * h;
    const double cur = density(t);
    mass += 0.5 * h * (prev + cur);
    prev = cur;
    if (t >= 0.1 * t_end && cur > 0.0) {
      ts.push_back(t);
      hs.push_back(std::log(cur));
    }
  }
  if (ts.size() >= 5) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      sx += ts[i];
      sy += hs[i];
      sxx += ts[i] * ts[i];
      sxy += ts[i] * hs[i];
    }
    const double n = static_cast<double>(ts.size());
    const double denom = n * sxx - sx * sx;
    if (denom > 0.0) {
      const double beta = -(n * sxy - sx * sy) / denom;
      if (beta > 1e-12 && prev > 0.0) mass += prev / beta;
    }
  }
  return mass;
}

double plane_min_time(const PlaneModel& model) { return 1e-6 / model.rate_sum(); }

}  // namespace bdsym
