#include "bdsym/fpt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bdsym/bessel.hpp"
#include "bdsym/format.hpp"

namespace bdsym {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double clamp_taboo(double v) { return (v < 0.0 && v > -1e-12) ? 0.0 : v; }

double report_clamp(double v) { return (v < 0.0 && v > -1e-9) ? 0.0 : v; }

void require_symmetric(const RateModel& model, Family family) {
  const SymmetryReport rep = check_symmetry(model, family);
  if (!rep.satisfied) {
    std::string at = rep.violating_index ? (" at state " + std::to_string(*rep.violating_index))
                                         : std::string();
    throw std::invalid_argument(std::string("model violates the ") + family_name(family) +
                                " symmetry conditions" + at + " (residual " +
                                g17(rep.worst_residual) + ")");
  }
}

// Grid whose points are consecutive multiples of a single step h; the
// renewal solver and the convolution routes need this alignment.
struct UniformGrid {
  double h = 0.0;
  long first = 0;  // times[0] = first * h
  long last = 0;   // times.back() = last * h
};

UniformGrid parse_uniform(const std::vector<double>& times) {
  require(times.size() >= 2, "renewal route: need at least two grid times");
  UniformGrid g;
  g.h = times[1] - times[0];
  require(g.h > 0.0, "renewal route: grid must be ascending");
  const double f = times[0] / g.h;
  g.first = static_cast<long>(std::llround(f));
  require(g.first >= 0 && std::fabs(times[0] - static_cast<double>(g.first) * g.h) <= 1e-6 * g.h,
          "renewal route: grid start must be a multiple of the step");
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double expect = (static_cast<double>(g.first) + static_cast<double>(i)) * g.h;
    require(std::fabs(times[i] - expect) <= 1e-6 * g.h,
            "renewal route: grid must be uniformly spaced");
  }
  g.last = g.first + static_cast<long>(times.size()) - 1;
  return g;
}

std::vector<double> node_times(long count, double step) {
  std::vector<double> t(static_cast<std::size_t>(count));
  for (long j = 0; j < count; ++j) t[static_cast<std::size_t>(j)] = static_cast<double>(j) * step;
  return t;
}

// Product-trapezoidal sweep for g = pref (F - int g K). The kernel vanishes
// at 0, so every step is explicit.
std::vector<double> volterra_solve(double pref, const std::vector<double>& F,
                                   const std::vector<double>& K, double h, double g0) {
  const std::size_t m = F.size();
  std::vector<double> g(m);
  g[0] = g0;
  for (std::size_t i = 1; i < m; ++i) {
    double conv = 0.5 * g[0] * K[i];
    for (std::size_t j = 1; j < i; ++j) conv += g[j] * K[i - j];
    g[i] = pref * (F[i] - h * conv);
  }
  return g;
}

// Cumulative mass by trapezoid (anchored at the known t=0 density value) and
// the eventual-probability estimate with an exponential tail fitted over the
// last decade of the grid.
void finish_density(FptDensity& d, double g_at_zero) {
  d.cumulative.resize(d.times.size());
  double mass = 0.0;
  double prev_t = 0.0, prev_g = g_at_zero;
  for (std::size_t i = 0; i < d.times.size(); ++i) {
    mass += 0.5 * (d.times[i] - prev_t) * (d.values[i] + prev_g);
    d.cumulative[i] = mass;
    prev_t = d.times[i];
    prev_g = d.values[i];
  }
  d.eventual_probability = mass;
  d.tail_extrapolated = false;
  const double t_end = d.times.back();
  const double cutoff = 0.1 * t_end;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long npts = 0;
  for (std::size_t i = 0; i < d.times.size(); ++i) {
    if (d.times[i] < cutoff || d.values[i] <= 0.0) continue;
    const double x = d.times[i], y = std::log(d.values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++npts;
  }
  if (npts >= 5) {
    const double denom = static_cast<double>(npts) * sxx - sx * sx;
    if (denom > 0.0) {
      const double slope = (static_cast<double>(npts) * sxy - sx * sy) / denom;
      const double beta = -slope;
      if (beta > 1e-12 && d.values.back() > 0.0) {
        d.eventual_probability = mass + d.values.back() / beta;
        d.tail_extrapolated = true;
      }
    }
  }
}

long midpoint_target(const RateModel& model) {
  require(model.N() % 2 == 0, "symmetric closed forms need an even state count N = 2s");
  return model.N() / 2;
}

}  // namespace

double TabooGrid::at_state(std::size_t ti, long n) const {
  if (states.empty() || n < states.front() || n > states.back()) return 0.0;
  return at(ti, static_cast<std::size_t>(n - states.front()));
}

std::string FptDensity::to_csv() const {
  std::ostringstream os;
  os << "t,value\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    os << g17(times[i]) << ',' << g17(report_clamp(values[i])) << '\n';
  }
  return os.str();
}

std::string TabooGrid::to_csv() const {
  std::ostringstream os;
  os << "t,state,value\n";
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    for (std::size_t si = 0; si < states.size(); ++si) {
      os << g17(times[ti]) << ',' << states[si] << ',' << g17(report_clamp(at(ti, si))) << '\n';
    }
  }
  return os.str();
}

FptDensity fpt_renewal(const RateModel& model, long k, long s, Direction direction,
                       const std::vector<double>& times, double tol) {
  require(!model.has_catastrophes(),
          "fpt_renewal: renewal route requires a skip-free model (no catastrophes)");
  require(tol > 0.0, "fpt_renewal: tol must be positive");
  const bool up = direction == Direction::Up;
  if (model.truncated()) {
    const long N = model.N();
    if (up) {
      require(0 < k && k < s && s < N, "fpt_renewal: upward passage requires 0 < k < s < N");
    } else {
      require(0 < s && s < k && k < N, "fpt_renewal: downward passage requires 0 < s < k < N");
    }
  } else {
    require(up ? k < s : k > s, "fpt_renewal: direction inconsistent with start and target");
  }
  const long neighbor = up ? s - 1 : s + 1;
  const double pref = up ? model.birth_at(neighbor) : model.death_at(neighbor);
  require(pref > 0.0, "fpt_renewal: entrance rate at the target is zero");

  const UniformGrid grid = parse_uniform(times);
  const double h2 = 0.5 * grid.h;
  const long fine_count = 2 * grid.last + 1;
  const std::vector<double> fine = node_times(fine_count, h2);
  const double ptol = std::clamp(tol * 1e-3, 1e-13, 1e-11);

  const ProbabilityGrid from_k = transition_grid(model, k, fine, ptol);
  const ProbabilityGrid from_s = transition_grid(model, s, fine, ptol);
  std::vector<double> forcing(static_cast<std::size_t>(fine_count));
  std::vector<double> kernel(static_cast<std::size_t>(fine_count));
  for (long j = 0; j < fine_count; ++j) {
    forcing[static_cast<std::size_t>(j)] = from_k.at_state(static_cast<std::size_t>(j), neighbor);
    kernel[static_cast<std::size_t>(j)] = from_s.at_state(static_cast<std::size_t>(j), neighbor);
  }
  const double g0 = (std::labs(k - s) == 1) ? pref : 0.0;

  std::vector<double> coarse_f(static_cast<std::size_t>(grid.last) + 1);
  std::vector<double> coarse_k(static_cast<std::size_t>(grid.last) + 1);
  for (long i = 0; i <= grid.last; ++i) {
    coarse_f[static_cast<std::size_t>(i)] = forcing[static_cast<std::size_t>(2 * i)];
    coarse_k[static_cast<std::size_t>(i)] = kernel[static_cast<std::size_t>(2 * i)];
  }
  const std::vector<double> g_h = volterra_solve(pref, coarse_f, coarse_k, grid.h, g0);
  const std::vector<double> g_h2 = volterra_solve(pref, forcing, kernel, h2, g0);

  double err = 0.0;
  for (long i = 0; i <= grid.last; ++i) {
    err = std::max(err, std::fabs(g_h[static_cast<std::size_t>(i)] -
                                  g_h2[static_cast<std::size_t>(2 * i)]));
  }
  if (err > tol) {
    throw std::runtime_error("fpt_renewal: grid too coarse for tol " + g17(tol) +
                             " (step-halving discrepancy " + g17(err) + ")");
  }

  FptDensity d;
  d.start = k;
  d.target = s;
  d.direction = direction;
  d.times = times;
  d.discretization_error = err;
  d.values.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const long node = grid.first + static_cast<long>(i);
    d.values[i] = (4.0 * g_h2[static_cast<std::size_t>(2 * node)] -
                   g_h[static_cast<std::size_t>(node)]) /
                  3.0;
  }
  finish_density(d, g0);
  return d;
}

FptDensity fpt_symmetric_absorbing(const RateModel& model, long k,
                                   const std::vector<double>& times, double tol) {
  require(model.family == Family::Absorbing, "fpt_symmetric_absorbing: absorbing family required");
  const long s = midpoint_target(model);
  require(k > 0 && k < model.N() && k != s,
          "fpt_symmetric_absorbing: start must be interior and distinct from the midpoint");
  require_symmetric(model, Family::Absorbing);

  const ProbabilityGrid grid = transition_grid(model, k, times, tol);
  const double lam = model.birth(s - 1);
  const double mud = model.death(s + 1);
  const double sign = k < s ? 1.0 : -1.0;

  FptDensity d;
  d.start = k;
  d.target = s;
  d.direction = k < s ? Direction::Up : Direction::Down;
  d.times = times;
  d.values.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    d.values[i] = sign * (lam * grid.at_state(i, s - 1) - mud * grid.at_state(i, s + 1));
  }
  const double g0 = (k == s - 1) ? lam : (k == s + 1 ? mud : 0.0);
  finish_density(d, g0);
  return d;
}

TabooGrid taboo_symmetric_absorbing(const RateModel& model, long k,
                                    const std::vector<double>& times, double tol) {
  require(model.family == Family::Absorbing, "taboo_symmetric_absorbing: absorbing family required");
  const long s = midpoint_target(model);
  require(k > 0 && k < model.N() && k != s,
          "taboo_symmetric_absorbing: start must be interior and distinct from the midpoint");
  require_symmetric(model, Family::Absorbing);

  const ProbabilityGrid gk = transition_grid(model, k, times, tol);
  const ProbabilityGrid gm = transition_grid(model, model.N() - k, times, tol);
  const SymmetryWeights w = weights(model);
  const double ratio = w.x[static_cast<std::size_t>(k)] / w.x[static_cast<std::size_t>(s)];

  TabooGrid tg;
  tg.start = k;
  tg.taboo = s;
  tg.below = k < s;
  tg.times = times;
  const long lo = tg.below ? 1 : s + 1;
  const long hi = tg.below ? s - 1 : model.N() - 1;
  for (long n = lo; n <= hi; ++n) tg.states.push_back(n);
  tg.values.resize(tg.states.size() * times.size());
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    for (std::size_t si = 0; si < tg.states.size(); ++si) {
      const long n = tg.states[si];
      tg.values[ti * tg.states.size() + si] =
          clamp_taboo(gk.at_state(ti, n) - ratio * gm.at_state(ti, n));
    }
  }
  return tg;
}

FptDensity fpt_symmetric_reflecting(const RateModel& model, long k,
                                    const std::vector<double>& times, double tol) {
  require(model.family == Family::Reflecting,
          "fpt_symmetric_reflecting: reflecting family required");
  const long s = midpoint_target(model);
  require(k >= 0 && k <= model.N() && k != s,
          "fpt_symmetric_reflecting: start must differ from the midpoint");
  require_symmetric(model, Family::Reflecting);

  const ProbabilityGrid grid = transition_grid(model, k, times, tol);
  const double mud = model.death(s + 1);
  const double sign = k < s ? 1.0 : -1.0;

  FptDensity d;
  d.start = k;
  d.target = s;
  d.direction = k < s ? Direction::Up : Direction::Down;
  d.times = times;
  d.values.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    d.values[i] = sign * mud * (grid.at_state(i, s - 1) - grid.at_state(i, s + 1));
  }
  const double g0 = (k == s - 1) ? model.birth(s - 1) : (k == s + 1 ? model.death(s + 1) : 0.0);
  finish_density(d, g0);
  return d;
}

TabooGrid taboo_reflecting(const RateModel& model, long k, const std::vector<double>& times,
                           double tol) {
  require(model.family == Family::Reflecting, "taboo_reflecting: reflecting family required");
  const long s = midpoint_target(model);
  require(k >= 0 && k <= model.N() && k != s,
          "taboo_reflecting: start must differ from the midpoint");
  require_symmetric(model, Family::Reflecting);

  const ProbabilityGrid gk = transition_grid(model, k, times, tol);
  const ProbabilityGrid gm = transition_grid(model, model.N() - k, times, tol);

  TabooGrid tg;
  tg.start = k;
  tg.taboo = s;
  tg.below = k < s;
  tg.times = times;
  const long lo = tg.below ? 0 : s + 1;
  const long hi = tg.below ? s - 1 : model.N();
  for (long n = lo; n <= hi; ++n) tg.states.push_back(n);
  tg.values.resize(tg.states.size() * times.size());
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    for (std::size_t si = 0; si < tg.states.size(); ++si) {
      const long n = tg.states[si];
      const double v1 = gk.at_state(ti, n) - gm.at_state(ti, n);
      const double v2 = gk.at_state(ti, n) - gk.at_state(ti, model.N() - n);
      if (std::fabs(v1 - v2) > 1e-9) {
        throw std::runtime_error(
            "taboo_reflecting: the two mirror expressions disagree (residual " +
            g17(std::fabs(v1 - v2)) + " at state " + std::to_string(n) + ")");
      }
      tg.values[ti * tg.states.size() + si] = clamp_taboo(v1);
    }
  }
  return tg;
}

FptDensity fpt_bilateral(const RateModel& model, long k, const std::vector<double>& times,
                         double tol) {
  require(model.family == Family::Bilateral, "fpt_bilateral: bilateral family required");
  require(k != 0 && model.contains(k), "fpt_bilateral: start must be a nonzero window state");
  require_symmetric(model, Family::Bilateral);

  FptDensity d;
  d.start = k;
  d.target = 0;
  d.direction = k < 0 ? Direction::Up : Direction::Down;
  d.times = times;
  d.values.resize(times.size());
  const double mu1 = model.death_at(1);
  const double sign = k < 0 ? 1.0 : -1.0;

  if (model.preset == Preset::ConstantBilateral) {
    const double lam = model.params.lambda, mu = model.params.mu;
    for (std::size_t i = 0; i < times.size(); ++i) {
      d.values[i] = sign * mu1 * (p_bilateral_poisson(lam, mu, k, -1, times[i]) -
                                  p_bilateral_poisson(lam, mu, k, 1, times[i]));
    }
  } else {
    const ProbabilityGrid grid = uniformize(model, k, times, tol);
    d.tail_bound = grid.tail_bound;
    for (std::size_t i = 0; i < times.size(); ++i) {
      d.values[i] = sign * mu1 * (grid.at_state(i, -1) - grid.at_state(i, 1));
    }
  }
  finish_density(d, std::labs(k) == 1 ? mu1 : 0.0);
  return d;
}

TabooGrid taboo_bilateral(const RateModel& model, long k, const std::vector<double>& times,
                          double tol) {
  require(model.family == Family::Bilateral, "taboo_bilateral: bilateral family required");
  require(k != 0 && model.contains(k), "taboo_bilateral: start must be a nonzero window state");
  require_symmetric(model, Family::Bilateral);

  const ProbabilityGrid gk = transition_grid(model, k, times, tol);
  const ProbabilityGrid gm = transition_grid(model, -k, times, tol);

  TabooGrid tg;
  tg.start = k;
  tg.taboo = 0;
  tg.below = k < 0;
  tg.times = times;
  const long lo = tg.below ? std::max(gk.states.front(), gm.states.front()) : 1;
  const long hi = tg.below ? -1 : std::min(gk.states.back(), gm.states.back());
  for (long n = lo; n <= hi; ++n) tg.states.push_back(n);
  tg.values.resize(tg.states.size() * times.size());
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    for (std::size_t si = 0; si < tg.states.size(); ++si) {
      const long n = tg.states[si];
      tg.values[ti * tg.states.size() + si] =
          clamp_taboo(gk.at_state(ti, n) - gm.at_state(ti, n));
    }
  }
  return tg;
}

FptDensity fpt_catastrophe(const RateModel& model, long k, const std::vector<double>& times,
                           double tol) {
  require(model.family == Family::Catastrophe, "fpt_catastrophe: catastrophe family required");
  require(k != 0 && model.contains(k), "fpt_catastrophe: start must be a nonzero window state");
  require_symmetric(model, Family::Catastrophe);

  FptDensity d;
  d.start = k;
  d.target = 0;
  d.direction = k < 0 ? Direction::Up : Direction::Down;
  d.times = times;
  d.values.resize(times.size());
  d.current_up.resize(times.size());
  d.current_down.resize(times.size());
  const double sign = k < 0 ? 1.0 : -1.0;

  if (model.preset == Preset::ConstantCatastrophe && model.params.alpha == 0.0) {
    // no catastrophe flux: the currents collapse to the one-step terms
    const double lam = model.params.lambda, mu = model.params.mu;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double hp = model.birth_at(-1) * p_bilateral_poisson(lam, mu, k, -1, times[i]);
      const double hm = model.death_at(1) * p_bilateral_poisson(lam, mu, k, 1, times[i]);
      d.current_up[i] = hp;
      d.current_down[i] = hm;
      d.values[i] = sign * (hp - hm);
    }
  } else {
    const ProbabilityGrid grid = uniformize(model, k, times, tol);
    d.tail_bound = grid.tail_bound;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      double hp = model.birth_at(-1) * grid.at_state(ti, -1);
      double hm = model.death_at(1) * grid.at_state(ti, 1);
      for (std::size_t si = 0; si < grid.states.size(); ++si) {
        const long n = grid.states[si];
        if (n == 0) continue;
        const double flux = model.catastrophe_at(n) * grid.at(ti, si);
        if (n < 0) {
          hp += flux;
        } else {
          hm += flux;
        }
      }
      d.current_up[ti] = hp;
      d.current_down[ti] = hm;
      d.values[ti] = sign * (hp - hm);
    }
  }
  const double g0 =
      (std::labs(k) == 1 ? model.death_at(1) : 0.0) + model.catastrophe_at(k);
  finish_density(d, g0);
  return d;
}

TabooGrid taboo_catastrophe(const RateModel& model, long k, const std::vector<double>& times,
                            double tol) {
  require(model.family == Family::Catastrophe, "taboo_catastrophe: catastrophe family required");
  require(k != 0 && model.contains(k), "taboo_catastrophe: start must be a nonzero window state");
  require_symmetric(model, Family::Catastrophe);

  TabooGrid tg;
  tg.start = k;
  tg.taboo = 0;
  tg.below = k < 0;
  tg.times = times;

  if (model.preset == Preset::ConstantCatastrophe && model.params.lambda == model.params.mu) {
    const double lam = model.params.lambda;
    const double alpha = model.params.alpha;
    const long lo = tg.below ? model.lo : 1;
    const long hi = tg.below ? -1 : model.hi;
    for (long n = lo; n <= hi; ++n) tg.states.push_back(n);
    tg.values.resize(tg.states.size() * times.size());
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      for (std::size_t si = 0; si < tg.states.size(); ++si) {
        tg.values[ti * tg.states.size() + si] =
            clamp_taboo(taboo_catastrophe_closed_value(lam, alpha, k, tg.states[si], times[ti]));
      }
    }
    return tg;
  }

  const ProbabilityGrid gk = uniformize(model, k, times, tol);
  const ProbabilityGrid gm = uniformize(model, -k, times, tol);
  const long lo = tg.below ? std::max(gk.states.front(), gm.states.front()) : 1;
  const long hi = tg.below ? -1 : std::min(gk.states.back(), gm.states.back());
  for (long n = lo; n <= hi; ++n) tg.states.push_back(n);
  tg.values.resize(tg.states.size() * times.size());
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    for (std::size_t si = 0; si < tg.states.size(); ++si) {
      const long n = tg.states[si];
      tg.values[ti * tg.states.size() + si] =
          clamp_taboo(gk.at_state(ti, n) - gm.at_state(ti, n));
    }
  }
  return tg;
}

FptDensity fpt_constant_closed(long N, double lam, double mu, long k,
                               const std::vector<double>& times) {
  require(N > 1 && N % 2 == 0, "fpt_constant_closed: N must be even and exceed 1");
  const long s = N / 2;
  require(k > 0 && k < s, "fpt_constant_closed: start must satisfy 0 < k < s");
  require(lam > 0.0 && mu > 0.0, "fpt_constant_closed: rates must be positive");

  FptDensity d;
  d.start = k;
  d.target = s;
  d.direction = Direction::Up;
  d.times = times;
  d.values.resize(times.size());
  const double lr = std::log(lam) - std::log(mu);
  const double drift = std::sqrt(lam) - std::sqrt(mu);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    require(t > 0.0, "fpt_constant_closed: times must be strictly positive");
    const double z = 2.0 * t * std::sqrt(lam * mu);
    const long band = bessel_order_band(z);
    const long max_order = band + 4 * s;
    const std::vector<double> sc = bessel_i_scaled_band(0, max_order, z);
    auto scaled = [&](long order) {
      const long a = std::labs(order);
      return a <= max_order ? sc[static_cast<std::size_t>(a)] : 0.0;
    };
    const long jspan = (band + 2 * s) / (4 * s) + 2;
    double sum = 0.0;
    for (long j = -jspan; j <= jspan; ++j) {
      const long o1 = s - k - 4 * s * j;
      const long o2 = s + k - 4 * s * j;
      if (std::min(std::labs(o1), std::labs(o2)) > band) continue;
      sum += static_cast<double>(o1) * scaled(o1) - static_cast<double>(o2) * scaled(o2);
    }
    d.values[i] =
        std::exp(0.5 * static_cast<double>(s - k) * lr - drift * drift * t) / t * sum;
  }
  finish_density(d, k == s - 1 ? lam : 0.0);
  return d;
}

double taboo_constant_closed_value(long N, double lam, double mu, long k, long n, double t) {
  require(N > 1 && N % 2 == 0, "taboo_constant_closed_value: N must be even and exceed 1");
  const long s = N / 2;
  const bool below = k < s;
  require(k > 0 && k < N && k != s && n > 0 && n < N && n != s,
          "taboo_constant_closed_value: states must be interior and avoid the midpoint");
  require((n < s) == below, "taboo_constant_closed_value: n and k must lie on the same side");
  require(t > 0.0, "taboo_constant_closed_value: time must be strictly positive");
  require(lam > 0.0 && mu > 0.0, "taboo_constant_closed_value: rates must be positive");

  const double z = 2.0 * t * std::sqrt(lam * mu);
  const long band = bessel_order_band(z);
  const long max_order = band + 4 * s;
  const std::vector<double> sc = bessel_i_scaled_band(0, max_order, z);
  auto scaled = [&](long order) {
    const long a = std::labs(order);
    return a <= max_order ? sc[static_cast<std::size_t>(a)] : 0.0;
  };
  const long jspan = (band + 4 * s) / (4 * s) + 2;
  double sum = 0.0;
  for (long j = -jspan; j <= jspan; ++j) {
    const long o1 = n - k - 4 * s * j;
    const long o2 = n + k - 4 * s * j;
    const long o3 = n + k - 2 * s * (2 * j + 1);
    const long o4 = n - k - 2 * s * (2 * j + 1);
    const long smallest = std::min(std::min(std::labs(o1), std::labs(o2)),
                                   std::min(std::labs(o3), std::labs(o4)));
    if (smallest > band) continue;
    sum += scaled(o1) - scaled(o2) - scaled(o3) + scaled(o4);
  }
  const double drift = std::sqrt(lam) - std::sqrt(mu);
  return std::exp(0.5 * static_cast<double>(n - k) * (std::log(lam) - std::log(mu)) -
                  drift * drift * t) *
         sum;
}

FptDensity fpt_ehrenfest_closed(long s, double alpha, long k, const std::vector<double>& times) {
  require(s >= 1, "fpt_ehrenfest_closed: s must be positive");
  require(k >= 0 && k < s, "fpt_ehrenfest_closed: start must satisfy 0 <= k < s");
  require(alpha > 0.0, "fpt_ehrenfest_closed: alpha must be positive");

  auto lchoose = [](long a, long b) {
    return std::lgamma(static_cast<double>(a) + 1.0) - std::lgamma(static_cast<double>(b) + 1.0) -
           std::lgamma(static_cast<double>(a - b) + 1.0);
  };
  const double lpref = std::log(alpha) + std::log(static_cast<double>(s) + 1.0) -
                       2.0 * static_cast<double>(s) * std::log(2.0);

  FptDensity d;
  d.start = k;
  d.target = s;
  d.direction = Direction::Up;
  d.times = times;
  d.values.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    require(t >= 0.0, "fpt_ehrenfest_closed: times must be nonnegative");
    const double e = std::exp(-2.0 * alpha * t);
    const double lu = (t == 0.0) ? 0.0 : std::log(-std::expm1(-2.0 * alpha * t));
    const double lv = std::log1p(e);
    double sum = 0.0;
    for (long j = 0; j <= k; ++j) {
      const double lj = lchoose(k, j);
      if (s - 1 - j >= 0 && s - 1 - j <= 2 * s - k) {
        const long e1 = s - 1 + k - 2 * j;
        const long e2 = s + 1 - k + 2 * j;
        if (!(t == 0.0 && e1 != 0)) {
          double lt = lpref + lj + lchoose(2 * s - k, s - 1 - j);
          if (e1 != 0) lt += static_cast<double>(e1) * lu;
          if (e2 != 0) lt += static_cast<double>(e2) * lv;
          sum += std::exp(lt);
        }
      }
      if (s + 1 - j >= 0 && s + 1 - j <= 2 * s - k) {
        const long e1 = s + 1 + k - 2 * j;
        const long e2 = s - 1 - k + 2 * j;
        if (!(t == 0.0 && e1 != 0)) {
          double lt = lpref + lj + lchoose(2 * s - k, s + 1 - j);
          if (e1 != 0) lt += static_cast<double>(e1) * lu;
          if (e2 != 0) lt += static_cast<double>(e2) * lv;
          sum -= std::exp(lt);
        }
      }
    }
    d.values[i] = sum;
  }
  finish_density(d, k == s - 1 ? alpha * static_cast<double>(s + 1) : 0.0);
  return d;
}

double taboo_ehrenfest_closed_value(long s, double alpha, long k, long n, double t) {
  require(s >= 1, "taboo_ehrenfest_closed_value: s must be positive");
  const bool below = k < s;
  require(k >= 0 && k <= 2 * s && k != s && n >= 0 && n <= 2 * s && n != s,
          "taboo_ehrenfest_closed_value: states must avoid the midpoint");
  require((n < s) == below, "taboo_ehrenfest_closed_value: n and k must lie on the same side");
  require(alpha > 0.0 && t >= 0.0, "taboo_ehrenfest_closed_value: bad parameters");

  const long N = 2 * s;
  auto lchoose = [](long a, long b) {
    return std::lgamma(static_cast<double>(a) + 1.0) - std::lgamma(static_cast<double>(b) + 1.0) -
           std::lgamma(static_cast<double>(a - b) + 1.0);
  };
  const double e = std::exp(-2.0 * alpha * t);
  const double lu = (t == 0.0) ? 0.0 : std::log(-std::expm1(-2.0 * alpha * t));
  const double lv = std::log1p(e);
  const double lpref = -static_cast<double>(N) * std::log(2.0);

  double s1 = 0.0;
  for (long j = std::max(0L, n + k - N); j <= std::min(n, k); ++j) {
    const long e1 = n + k - 2 * j;
    const long e2 = N - e1;
    if (t == 0.0 && e1 != 0) continue;
    double lt = lpref + lchoose(k, j) + lchoose(N - k, n - j);
    if (e1 != 0) lt += static_cast<double>(e1) * lu;
    if (e2 != 0) lt += static_cast<double>(e2) * lv;
    s1 += std::exp(lt);
  }
  double s2 = 0.0;
  for (long j = std::max(0L, n - k); j <= std::min(n, N - k); ++j) {
    const long e1 = n + N - k - 2 * j;
    const long e2 = k - n + 2 * j;
    if (t == 0.0 && e1 != 0) continue;
    double lt = lpref + lchoose(N - k, j) + lchoose(k, n - j);
    if (e1 != 0) lt += static_cast<double>(e1) * lu;
    if (e2 != 0) lt += static_cast<double>(e2) * lv;
    s2 += std::exp(lt);
  }
  return s1 - s2;
}

FptDensity fpt_catastrophe_series(double lam, double alpha, long k,
                                  const std::vector<double>& times) {
  require(lam > 0.0, "fpt_catastrophe_series: lambda must be positive");
  require(alpha >= 0.0, "fpt_catastrophe_series: alpha must be nonnegative");
  require(k != 0, "fpt_catastrophe_series: start must be nonzero");
  const long a = std::labs(k);

  FptDensity d;
  d.start = k;
  d.target = 0;
  d.direction = k < 0 ? Direction::Up : Direction::Down;
  d.times = times;
  d.values.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    require(t >= 0.0, "fpt_catastrophe_series: times must be nonnegative");
    const double z = 2.0 * lam * t;
    const long band = bessel_order_band(z);
    const long jmax = band + a;
    const std::vector<double> sc = bessel_i_scaled_band(0, a + jmax, z);
    auto scaled = [&](long order) { return sc[static_cast<std::size_t>(std::labs(order))]; };
    double sum = lam * (scaled(a - 1) - scaled(a + 1));
    if (alpha > 0.0) {
      double cat = 0.0;
      for (long j = 1; j <= jmax; ++j) cat += scaled(a - j) - scaled(a + j);
      sum += alpha * cat;
    }
    d.values[i] = std::exp(-alpha * t) * sum;
  }
  finish_density(d, (a == 1 ? lam : 0.0) + alpha);
  return d;
}

double taboo_catastrophe_closed_value(double lam, double alpha, long k, long n, double t) {
  require(lam > 0.0 && alpha >= 0.0 && t >= 0.0, "taboo_catastrophe_closed_value: bad parameters");
  require(k != 0 && n != 0 && ((k < 0) == (n < 0)),
          "taboo_catastrophe_closed_value: states must be nonzero and on the same side");
  const double z = 2.0 * lam * t;
  const long a = std::labs(k), m = std::labs(n);
  const std::vector<double> sc = bessel_i_scaled_band(0, m + a, z);
  return std::exp(-alpha * t) *
         (sc[static_cast<std::size_t>(std::labs(m - a))] - sc[static_cast<std::size_t>(m + a)]);
}

TabooGrid taboo_renewal(const RateModel& model, long k, long r, const std::vector<double>& times,
                        double tol) {
  require(!model.has_catastrophes(), "taboo_renewal: requires a skip-free model");
  require(k != r, "taboo_renewal: start must differ from the taboo state");
  const Direction dir = k < r ? Direction::Up : Direction::Down;
  const UniformGrid grid = parse_uniform(times);
  require(grid.first >= 1, "taboo_renewal: grid must start at or after one step");

  const std::vector<double> nodes = node_times(grid.last + 1, grid.h);
  std::vector<double> solver_times(nodes.begin() + 1, nodes.end());
  const FptDensity g = fpt_renewal(model, k, r, dir, solver_times, tol);
  const double g0 = (std::labs(k - r) == 1)
                        ? (dir == Direction::Up ? model.birth_at(r - 1) : model.death_at(r + 1))
                        : 0.0;

  const double ptol = std::clamp(tol * 1e-3, 1e-13, 1e-11);
  const ProbabilityGrid pk = transition_grid(model, k, nodes, ptol);
  const ProbabilityGrid pr = transition_grid(model, r, nodes, ptol);

  TabooGrid tg;
  tg.start = k;
  tg.taboo = r;
  tg.below = k < r;
  tg.times = times;
  long lo, hi;
  if (model.truncated()) {
    const long interior_lo = model.boundary == BoundaryKind::Absorbing ? 1 : 0;
    const long interior_hi =
        model.boundary == BoundaryKind::Absorbing ? model.N() - 1 : model.N();
    lo = tg.below ? interior_lo : r + 1;
    hi = tg.below ? r - 1 : interior_hi;
  } else {
    lo = tg.below ? std::max(pk.states.front(), pr.states.front()) : r + 1;
    hi = tg.below ? r - 1 : std::min(pk.states.back(), pr.states.back());
  }
  for (long n = lo; n <= hi; ++n) tg.states.push_back(n);
  tg.values.resize(tg.states.size() * times.size());

  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const long node = grid.first + static_cast<long>(ti);
    for (std::size_t si = 0; si < tg.states.size(); ++si) {
      const long n = tg.states[si];
      double conv = 0.5 * g0 * pr.at_state(static_cast<std::size_t>(node), n);
      for (long j = 1; j < node; ++j) {
        conv += g.values[static_cast<std::size_t>(j - 1)] *
                pr.at_state(static_cast<std::size_t>(node - j), n);
      }
      // the j = node endpoint vanishes: p_{r,n}(0) = 0 for n != r
      const double v = pk.at_state(static_cast<std::size_t>(node), n) - grid.h * conv;
      tg.values[ti * tg.states.size() + si] = clamp_taboo(v);
    }
  }
  return tg;
}

}  // namespace bdsym
