#include "bdsym/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "bdsym/bessel.hpp"
#include "bdsym/format.hpp"

namespace bdsym {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_times(const std::vector<double>& times) {
  require(!times.empty(), "time grid must be nonempty");
  double prev = -1.0;
  for (double t : times) {
    require(std::isfinite(t) && t >= 0.0, "time grid must be nonnegative");
    require(t > prev || (prev < 0.0), "time grid must be strictly ascending");
    prev = t;
  }
}

double clamp_probability(double v) {
  if (v < 0.0 && v > -1e-12) return 0.0;
  if (v > 1.0 && v < 1.0 + 1e-12) return 1.0;
  return v;
}

// exp factor folded into scaled-Bessel sums: e^{-(l+m)t} I_j(2t sqrt(l m))
// = e^{-(sqrt l - sqrt m)^2 t} * [e^{-z} I_j(z)].
double drift_exponent(double lam, double mu, double t) {
  const double d = std::sqrt(lam) - std::sqrt(mu);
  return -d * d * t;
}

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1].
constexpr double kKronrodNodes[8] = {
    0.000000000000000000000000000000000e+00, 2.077849550078984676006894037732449e-01,
    4.058451513773971669066064120769615e-01, 5.860872354676911302941448382587296e-01,
    7.415311855993944398638647732807884e-01, 8.648644233597690727897127886409262e-01,
    9.491079123427585245261896840478513e-01, 9.914553711208126392068546975263285e-01};
constexpr double kKronrodWeights[8] = {
    2.094821410847278280129991748917143e-01, 2.044329400752988924141619992346491e-01,
    1.903505780647854099132564024210137e-01, 1.690047266392679028265834265985503e-01,
    1.406532597155259187451895905102379e-01, 1.047900103222501838398763225415180e-01,
    6.309209262997855329070066318920429e-02, 2.293532201052922496373200805896959e-02};
constexpr double kGaussWeights[4] = {
    4.179591836734693877551020408163265e-01, 3.818300505051189449503697754889751e-01,
    2.797053914892766679014677714237796e-01, 1.294849661688696932706114326790820e-01};

struct PanelResult {
  double value;
  double error;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  fv[7] = f(c);
  for (int i = 1; i < 8; ++i) {
    fv[7 - i] = f(c - h * kKronrodNodes[i]);
    fv[7 + i] = f(c + h * kKronrodNodes[i]);
  }
  double kron = kKronrodWeights[0] * fv[7];
  for (int i = 1; i < 8; ++i) kron += kKronrodWeights[i] * (fv[7 - i] + fv[7 + i]);
  double gauss = kGaussWeights[0] * fv[7];
  gauss += kGaussWeights[1] * (fv[7 - 2] + fv[7 + 2]);
  gauss += kGaussWeights[2] * (fv[7 - 4] + fv[7 + 4]);
  gauss += kGaussWeights[3] * (fv[7 - 6] + fv[7 + 6]);
  return {kron * h, std::fabs(kron - gauss) * h};
}

// j-index ranges whose reflection order n - 2jP lies inside [-band, band].
void reflection_j_range(long n, long period, long band, long& jlo, long& jhi) {
  jlo = static_cast<long>(std::floor(static_cast<double>(n - band) / (2.0 * period)));
  jhi = static_cast<long>(std::ceil(static_cast<double>(n + band) / (2.0 * period)));
}

std::vector<double> uniformized_row(const Generator& gen, long k, double t, double tol,
                                    double* poisson_tail) {
  const std::size_t size = gen.size();
  std::vector<double> v(size, 0.0);
  v[static_cast<std::size_t>(k - gen.lo)] = 1.0;
  std::vector<double> out(size, 0.0);
  if (t == 0.0) {
    if (poisson_tail) *poisson_tail = 0.0;
    return v;
  }
  const double rate = gen.uniformization_rate();
  if (rate == 0.0) {
    if (poisson_tail) *poisson_tail = 0.0;
    return v;
  }
  const double q = rate * t;
  if (q > 2e6) {
    throw std::invalid_argument(
        "uniformize: horizon too large (uniformized step count " + g17(q) +
        "); use a closed form for long-time behavior");
  }
  const double logq = std::log(q);
  const long hard_cap =
      static_cast<long>(std::ceil(q + 12.0 * std::sqrt(q) + 200.0));
  std::vector<double> next(size, 0.0);
  double logw = -q;
  double cum = 0.0;
  const double inv_rate = 1.0 / rate;
  for (long m = 0;; ++m) {
    const double w = (logw < -745.0) ? 0.0 : std::exp(logw);
    if (w > 0.0) {
      cum += w;
      for (std::size_t i = 0; i < size; ++i) out[i] += w * v[i];
    }
    if ((static_cast<double>(m) >= q && 1.0 - cum <= tol) || m >= hard_cap) break;
    gen.apply(v, next, inv_rate);
    v.swap(next);
    logw += logq - std::log(static_cast<double>(m) + 1.0);
  }
  if (poisson_tail) *poisson_tail = std::max(0.0, 1.0 - cum);
  return out;
}

}  // namespace

const char* method_name(Method m) {
  return m == Method::ClosedForm ? "closed_form" : "uniformization";
}

double ProbabilityGrid::at_state(std::size_t ti, long n) const {
  if (states.empty() || n < states.front() || n > states.back()) return 0.0;
  return at(ti, static_cast<std::size_t>(n - states.front()));
}

double ProbabilityGrid::row_sum(std::size_t ti) const {
  double s = 0.0;
  for (std::size_t si = 0; si < states.size(); ++si) s += at(ti, si);
  return s;
}

std::string ProbabilityGrid::to_csv() const {
  std::ostringstream os;
  os << "t,state,probability,method\n";
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    for (std::size_t si = 0; si < states.size(); ++si) {
      os << g17(times[ti]) << ',' << states[si] << ',' << g17(at(ti, si)) << ','
         << method_name(method) << '\n';
    }
  }
  return os.str();
}

double Generator::uniformization_rate() const {
  double r = 0.0;
  for (std::size_t i = 0; i < birth.size(); ++i) {
    r = std::max(r, birth[i] + death[i] + (cata.empty() ? 0.0 : cata[i]));
  }
  return r;
}

void Generator::apply(const std::vector<double>& v, std::vector<double>& out,
                      double inv_rate) const {
  const std::size_t n = v.size();
  out.assign(n, 0.0);
  double cata_flow = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = cata.empty() ? 0.0 : cata[i];
    double flux = -(birth[i] + death[i] + a) * v[i];
    if (i > 0) flux += birth[i - 1] * v[i - 1];
    if (i + 1 < n) flux += death[i + 1] * v[i + 1];
    out[i] = v[i] + inv_rate * flux;
    if (a != 0.0) cata_flow += a * v[i];
  }
  if (cata_flow != 0.0) out[static_cast<std::size_t>(-lo)] += inv_rate * cata_flow;
}

Generator make_generator(const RateModel& model) { return make_generator(model, model.lo, model.hi); }

Generator make_generator(const RateModel& model, long lo, long hi) {
  require(lo >= model.lo && hi <= model.hi && lo < hi, "generator window outside the model window");
  if (model.has_catastrophes()) {
    require(lo <= 0 && hi >= 0, "catastrophe generator window must contain state 0");
  }
  Generator g;
  g.lo = lo;
  g.hi = hi;
  const std::size_t n = static_cast<std::size_t>(hi - lo + 1);
  g.birth.resize(n);
  g.death.resize(n);
  if (model.has_catastrophes()) g.cata.resize(n);
  for (long s = lo; s <= hi; ++s) {
    g.birth[static_cast<std::size_t>(s - lo)] = model.birth(s);
    g.death[static_cast<std::size_t>(s - lo)] = model.death(s);
    if (model.has_catastrophes()) g.cata[static_cast<std::size_t>(s - lo)] = model.catastrophe(s);
  }
  if (!model.truncated()) {
    // artificial window edges: zero the outward rates so rows stay conservative
    g.birth[n - 1] = 0.0;
    g.death[0] = 0.0;
  }
  return g;
}

ProbabilityGrid uniformize(const RateModel& model, long k, const std::vector<double>& times,
                           double tol) {
  check_times(times);
  require(tol > 0.0 && tol < 1.0, "uniformize: tol must lie in (0,1)");
  const double tmax = times.back();

  RateModel work = model;
  if (!model.truncated()) {
    double r0 = 0.0;
    for (long n = model.lo; n <= model.hi; ++n) r0 = std::max(r0, model.total_rate(n));
    const double q = r0 * tmax;
    long m = static_cast<long>(std::ceil(q + 12.0 * std::sqrt(q) + 20.0));
    const long want_lo = std::min(k, 0L) - m;
    const long want_hi = std::max(k, 0L) + m;
    if (model.extendable()) {
      work = model.extended(std::min(want_lo, model.lo), std::max(want_hi, model.hi));
    }
  } else {
    require(model.contains(k), "uniformize: start state outside the state space");
  }
  require(work.contains(k), "uniformize: start state outside the window");

  for (int attempt = 0;; ++attempt) {
    const Generator gen = make_generator(work);
    ProbabilityGrid grid;
    grid.start = k;
    grid.method = Method::Uniformization;
    grid.window_lo = gen.lo;
    grid.window_hi = gen.hi;
    grid.times = times;
    grid.states.resize(static_cast<std::size_t>(gen.hi - gen.lo + 1));
    for (long s = gen.lo; s <= gen.hi; ++s) grid.states[static_cast<std::size_t>(s - gen.lo)] = s;
    grid.values.resize(grid.states.size() * times.size());

    double worst_tail = 0.0;
    double boundary_mass = 0.0;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      double ptail = 0.0;
      std::vector<double> row = uniformized_row(gen, k, times[ti], tol, &ptail);
      worst_tail = std::max(worst_tail, ptail);
      if (!work.truncated()) {
        boundary_mass = std::max(boundary_mass, row.front() + row.back());
      }
      for (std::size_t si = 0; si < row.size(); ++si) {
        grid.values[ti * row.size() + si] = clamp_probability(row[si]);
      }
    }
    if (work.truncated() || boundary_mass <= tol) {
      grid.tail_bound = worst_tail + boundary_mass;
      return grid;
    }
    if (!work.extendable() || attempt >= 8) {
      throw std::runtime_error(
          "uniformize: window [" + std::to_string(work.lo) + "," + std::to_string(work.hi) +
          "] too small for tol " + g17(tol) + " (boundary mass " + g17(boundary_mass) +
          "); grow the window to about [" + std::to_string(2 * work.lo) + "," +
          std::to_string(2 * work.hi) + "]");
    }
    work = work.extended(2 * work.lo, 2 * work.hi);
  }
}

namespace {

// One interior row of the reflection-expanded series, states 1..N-1; the
// scaled-Bessel band at time t is computed once and shared across states.
std::vector<double> constant_absorbing_row(long N, double lam, double mu, long k, double t) {
  const double z = 2.0 * t * std::sqrt(lam * mu);
  const long band = bessel_order_band(z);
  const long max_order = band + 2 * N;
  const std::vector<double> sc = bessel_i_scaled_band(0, max_order, z);
  auto scaled = [&](long order) {
    const long a = std::labs(order);
    return a <= max_order ? sc[static_cast<std::size_t>(a)] : 0.0;
  };
  const double lr = std::log(lam) - std::log(mu);
  const double de = drift_exponent(lam, mu, t);

  std::vector<double> row(static_cast<std::size_t>(N - 1));
  for (long n = 1; n <= N - 1; ++n) {
    long j1lo, j1hi, j2lo, j2hi;
    reflection_j_range(n - k, N, band, j1lo, j1hi);
    reflection_j_range(n + k, N, band, j2lo, j2hi);
    const long jlo = std::min(j1lo, j2lo - 1);
    const long jhi = std::max(j1hi, j2hi - 1);
    double sum = 0.0;
    for (long j = jlo; j <= jhi; ++j) {
      const long o1 = n - k - 2 * j * N;
      const long o2 = n + k - 2 * (j + 1) * N;
      if (std::min(std::labs(o1), std::labs(o2)) > band) continue;
      sum += scaled(o1) - scaled(o2);
    }
    row[static_cast<std::size_t>(n - 1)] =
        std::exp(0.5 * static_cast<double>(n - k) * lr + de) * sum;
  }
  return row;
}

}  // namespace

double p_constant_absorbing(long N, double lam, double mu, long k, long n, double t) {
  require(N > 1, "p_constant_absorbing: N must exceed 1");
  require(k >= 1 && k <= N - 1 && n >= 1 && n <= N - 1,
          "p_constant_absorbing: k and n must be interior states");
  require(lam > 0.0 && mu > 0.0, "p_constant_absorbing: rates must be positive");
  require(t >= 0.0, "p_constant_absorbing: time must be nonnegative");
  return constant_absorbing_row(N, lam, mu, k, t)[static_cast<std::size_t>(n - 1)];
}

double p_ehrenfest_reflecting(long N, double alpha, long k, long n, double t) {
  require(N > 1, "p_ehrenfest_reflecting: N must exceed 1");
  require(k >= 0 && k <= N && n >= 0 && n <= N, "p_ehrenfest_reflecting: states must lie in {0..N}");
  require(alpha > 0.0, "p_ehrenfest_reflecting: alpha must be positive");
  require(t >= 0.0, "p_ehrenfest_reflecting: time must be nonnegative");
  if (t == 0.0) return k == n ? 1.0 : 0.0;

  const double e = std::exp(-2.0 * alpha * t);
  const double lu = std::log(-std::expm1(-2.0 * alpha * t));  // log(1 - e)
  const double lv = std::log1p(e);                            // log(1 + e)
  const double l2 = std::log(2.0);
  auto lchoose = [](long a, long b) {
    return std::lgamma(static_cast<double>(a) + 1.0) - std::lgamma(static_cast<double>(b) + 1.0) -
           std::lgamma(static_cast<double>(a - b) + 1.0);
  };
  double sum = 0.0;
  for (long j = std::max(0L, n + k - N); j <= std::min(n, k); ++j) {
    const long e1 = n + k - 2 * j;
    const long e2 = N - e1;
    double lt = lchoose(k, j) + lchoose(N - k, n - j) - static_cast<double>(N) * l2;
    if (e1 != 0) lt += static_cast<double>(e1) * lu;
    if (e2 != 0) lt += static_cast<double>(e2) * lv;
    sum += std::exp(lt);
  }
  return sum;
}

double p_bilateral_poisson(double lam, double mu, long k, long n, double t) {
  require(lam > 0.0 && mu > 0.0, "p_bilateral_poisson: rates must be positive");
  require(t >= 0.0, "p_bilateral_poisson: time must be nonnegative");
  const double z = 2.0 * t * std::sqrt(lam * mu);
  const double sc = bessel_i_scaled(n - k, z);
  if (sc == 0.0) return 0.0;
  const double lpref = 0.5 * static_cast<double>(n - k) * (std::log(lam) - std::log(mu)) +
                       drift_exponent(lam, mu, t);
  return std::exp(lpref + std::log(sc));
}

std::vector<double> bilateral_poisson_row(double lam, double mu, long k, long lo, long hi,
                                          double t) {
  require(lo <= hi, "bilateral_poisson_row: empty state range");
  require(lam > 0.0 && mu > 0.0, "bilateral_poisson_row: rates must be positive");
  require(t >= 0.0, "bilateral_poisson_row: time must be nonnegative");
  const double z = 2.0 * t * std::sqrt(lam * mu);
  const std::vector<double> sc = bessel_i_scaled_band(lo - k, hi - k, z);
  const double lr = std::log(lam) - std::log(mu);
  const double de = drift_exponent(lam, mu, t);
  std::vector<double> out(sc.size());
  for (std::size_t i = 0; i < sc.size(); ++i) {
    if (sc[i] == 0.0) {
      out[i] = 0.0;
      continue;
    }
    const double d = static_cast<double>(lo - k + static_cast<long>(i));
    out[i] = std::exp(0.5 * d * lr + de + std::log(sc[i]));
  }
  return out;
}

double integrate_gk(const std::function<double(double)>& f, double a, double b, double abstol) {
  require(b >= a, "integrate_gk: reversed interval");
  if (a == b) return 0.0;
  struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  std::priority_queue<Panel> queue;
  const PanelResult first = gk15(f, a, b);
  queue.push({a, b, first.value, first.error});
  double total_error = first.error;
  int panels = 1;
  while (total_error > abstol && panels < 4000) {
    const Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const PanelResult left = gk15(f, worst.a, mid);
    const PanelResult right = gk15(f, mid, worst.b);
    total_error += left.error + right.error - worst.error;
    queue.push({worst.a, mid, left.value, left.error});
    queue.push({mid, worst.b, right.value, right.error});
    ++panels;
  }
  if (total_error > abstol) {
    throw std::runtime_error("integrate_gk: quadrature did not converge, achieved error " +
                             g17(total_error) + " > requested " + g17(abstol));
  }
  double value = 0.0;
  while (!queue.empty()) {
    value += queue.top().value;
    queue.pop();
  }
  return value;
}

double p_catastrophe_constant(double lam, double mu, double alpha, long k, long n, double t) {
  require(alpha >= 0.0, "p_catastrophe_constant: alpha must be nonnegative");
  require(t >= 0.0, "p_catastrophe_constant: time must be nonnegative");
  const double hat = p_bilateral_poisson(lam, mu, k, n, t);
  if (alpha == 0.0) return hat;
  if (t == 0.0) return k == n ? 1.0 : 0.0;
  const auto integrand = [&](double tau) {
    return std::exp(-alpha * tau) * p_bilateral_poisson(lam, mu, 0, n, tau);
  };
  const double integral = integrate_gk(integrand, 0.0, t, 1e-10);
  return std::exp(-alpha * t) * hat + alpha * integral;
}

bool has_closed_form(const RateModel& model) {
  switch (model.preset) {
    case Preset::ConstantAbsorbing:
    case Preset::Ehrenfest:
    case Preset::ConstantBilateral:
    case Preset::ConstantCatastrophe:
      return true;
    default:
      return false;
  }
}

ProbabilityGrid closed_form_grid(const RateModel& model, long k, const std::vector<double>& times) {
  check_times(times);
  require(model.contains(k), "closed_form_grid: start state outside the state space");
  ProbabilityGrid grid;
  grid.start = k;
  grid.times = times;
  grid.method = Method::ClosedForm;
  grid.window_lo = model.lo;
  grid.window_hi = model.hi;

  auto fill_states = [&](long lo, long hi) {
    grid.states.resize(static_cast<std::size_t>(hi - lo + 1));
    for (long s = lo; s <= hi; ++s) grid.states[static_cast<std::size_t>(s - lo)] = s;
    grid.values.assign(grid.states.size() * times.size(), 0.0);
  };

  switch (model.preset) {
    case Preset::ConstantAbsorbing: {
      // interior states only; the absorbed masses have no closed form here
      require(k >= 1 && k <= model.N() - 1, "closed_form_grid: start must be interior");
      fill_states(1, model.N() - 1);
      for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const std::vector<double> row =
            constant_absorbing_row(model.N(), model.params.lambda, model.params.mu, k, times[ti]);
        for (std::size_t si = 0; si < row.size(); ++si) {
          grid.values[ti * row.size() + si] = clamp_probability(row[si]);
        }
      }
      grid.tail_bound = 1e-15;
      return grid;
    }
    case Preset::Ehrenfest: {
      fill_states(0, model.N());
      for (std::size_t ti = 0; ti < times.size(); ++ti) {
        for (std::size_t si = 0; si < grid.states.size(); ++si) {
          grid.values[ti * grid.states.size() + si] = clamp_probability(p_ehrenfest_reflecting(
              model.N(), model.params.alpha, k, grid.states[si], times[ti]));
        }
      }
      grid.tail_bound = 0.0;
      return grid;
    }
    case Preset::ConstantBilateral:
    case Preset::ConstantCatastrophe: {
      fill_states(model.lo, model.hi);
      const double lam = model.params.lambda;
      const double mu = model.params.mu;
      const double alpha = model.preset == Preset::ConstantCatastrophe ? model.params.alpha : 0.0;
      double worst = 0.0;
      for (std::size_t ti = 0; ti < times.size(); ++ti) {
        if (alpha == 0.0) {
          const std::vector<double> row =
              bilateral_poisson_row(lam, mu, k, model.lo, model.hi, times[ti]);
          for (std::size_t si = 0; si < row.size(); ++si) {
            grid.values[ti * row.size() + si] = clamp_probability(row[si]);
          }
        } else {
          for (std::size_t si = 0; si < grid.states.size(); ++si) {
            grid.values[ti * grid.states.size() + si] = clamp_probability(
                p_catastrophe_constant(lam, mu, alpha, k, grid.states[si], times[ti]));
          }
        }
        worst = std::max(worst, std::fabs(1.0 - grid.row_sum(ti)));
      }
      grid.tail_bound = worst;
      return grid;
    }
    default:
      throw std::invalid_argument(std::string("closed_form_grid: preset ") +
                                  preset_name(model.preset) + " has no closed form");
  }
}

ProbabilityGrid transition_grid(const RateModel& model, long k, const std::vector<double>& times,
                                double tol) {
  if (has_closed_form(model) &&
      !(model.preset == Preset::ConstantAbsorbing && (k < 1 || k > model.N() - 1))) {
    return closed_form_grid(model, k, times);
  }
  return uniformize(model, k, times, tol);
}

SymmetryReport verify_quasi_symmetry(const RateModel& model, const ProbabilityGrid& from_start,
                                     const ProbabilityGrid& from_mirror, double tol) {
  require(from_start.times == from_mirror.times, "verify_quasi_symmetry: time grids differ");
  const long k = from_start.start;
  const bool truncated = model.truncated();
  const long mirror_start = truncated ? model.N() - k : -k;
  require(from_mirror.start == mirror_start,
          "verify_quasi_symmetry: grids are not started at mirrored states");

  std::vector<double> x;
  if (model.boundary == BoundaryKind::Absorbing) {
    x = weights(model).x;
  }

  SymmetryReport rep;
  rep.family = model.family;
  double worst = 0.0;
  std::optional<long> worst_index;
  for (std::size_t ti = 0; ti < from_start.times.size(); ++ti) {
    for (std::size_t si = 0; si < from_start.states.size(); ++si) {
      const long n = from_start.states[si];
      const long mn = truncated ? model.N() - n : -n;
      if (mn < from_mirror.states.front() || mn > from_mirror.states.back()) continue;
      const double lhs = from_mirror.at_state(ti, mn);
      double ratio = 1.0;
      if (!x.empty()) {
        ratio = x[static_cast<std::size_t>(n)] / x[static_cast<std::size_t>(k)];
      }
      const double rhs = ratio * from_start.at(ti, si);
      double r = std::fabs(lhs - rhs);
      const double scale = std::max(std::fabs(lhs), std::fabs(rhs));
      if (scale > 1.0) r /= scale;
      if (r > worst) {
        worst = r;
        worst_index = n;
      }
    }
  }
  rep.worst_residual = worst;
  rep.satisfied = worst <= tol;
  if (!rep.satisfied) rep.violating_index = worst_index;
  return rep;
}

}  // namespace bdsym
