#include "bdsym/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace bdsym {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool even(long n) { return (n % 2) == 0; }

// Sigmoidal rates lambda_n = lambda (1 + c q^{n+1}) / (1 + c q^n),
// mu_n = mu (1 + c q^{n-1}) / (1 + c q^n) with q = mu/lambda. Powers go
// through exp(n log q) so window edges far from 0 do not overflow; once
// c q^n passes the double range the ratio is replaced by its limit.
double sigmoidal_birth(double lam, double mu, double c, long n) {
  if (c == 0.0) return lam;
  const double lq = std::log(mu) - std::log(lam);
  const double le = std::log(c) + static_cast<double>(n) * lq;
  if (le > 690.0 || le + lq > 690.0) return lam * std::exp(lq);  // -> mu
  const double w = std::exp(le);
  const double wq = std::exp(le + lq);
  return lam * (1.0 + wq) / (1.0 + w);
}

double sigmoidal_death(double lam, double mu, double c, long n) {
  if (c == 0.0) return mu;
  const double lq = std::log(mu) - std::log(lam);
  const double le = std::log(c) + static_cast<double>(n) * lq;
  if (le > 690.0 || le - lq > 690.0) return mu * std::exp(-lq);  // -> lambda
  const double w = std::exp(le);
  const double wm = std::exp(le - lq);
  return mu * (1.0 + wm) / (1.0 + w);
}

struct RateTriple {
  double birth, death, cata;
};

RateTriple preset_rates(Preset tag, const PresetParams& p, long n) {
  switch (tag) {
    case Preset::ConstantAbsorbing: {
      if (n <= 0 || n >= p.N) return {0.0, 0.0, 0.0};
      return {p.lambda, p.mu, 0.0};
    }
    case Preset::Ehrenfest:
      return {p.alpha * static_cast<double>(p.N - n), p.alpha * static_cast<double>(n), 0.0};
    case Preset::QuadraticEhrenfest: {
      const double up = static_cast<double>(p.N - n);
      const double dn = static_cast<double>(n);
      return {p.alpha * up * up, p.alpha * dn * dn, 0.0};
    }
    case Preset::Sigmoidal:
      return {sigmoidal_birth(p.lambda, p.mu, p.c, n), sigmoidal_death(p.lambda, p.mu, p.c, n),
              0.0};
    case Preset::AlternatingA:
      return {even(n) ? p.lambda : p.mu, even(n) ? p.mu : p.lambda, 0.0};
    case Preset::AlternatingB:
      return {even(n) ? p.lambda : p.mu, even(n) ? p.lambda : p.mu, 0.0};
    case Preset::ConstantBilateral:
      return {p.lambda, p.mu, 0.0};
    case Preset::ConstantCatastrophe:
      return {p.lambda, p.mu, n == 0 ? 0.0 : p.alpha};
    case Preset::Custom:
      break;
  }
  throw std::logic_error("preset_rates: custom models have no rate formula");
}

void validate_rates(const RateModel& m) {
  const long N = m.hi;
  for (long n = m.lo; n <= m.hi; ++n) {
    const double l = m.birth(n), d = m.death(n), a = m.catastrophe(n);
    require(std::isfinite(l) && l >= 0.0, "rate model: birth rate at state " +
                                              std::to_string(n) + " must be finite and nonnegative");
    require(std::isfinite(d) && d >= 0.0, "rate model: death rate at state " +
                                              std::to_string(n) + " must be finite and nonnegative");
    require(std::isfinite(a) && a >= 0.0, "rate model: catastrophe rate at state " +
                                              std::to_string(n) + " must be finite and nonnegative");
  }
  switch (m.boundary) {
    case BoundaryKind::Absorbing:
      require(m.lo == 0 && N > 1, "absorbing model requires state space {0..N} with N > 1");
      require(m.birth(0) == 0.0 && m.death(0) == 0.0 && m.birth(N) == 0.0 && m.death(N) == 0.0,
              "absorbing model requires lambda_0 = mu_0 = lambda_N = mu_N = 0");
      for (long n = 1; n < N; ++n) {
        require(m.birth(n) > 0.0 && m.death(n) > 0.0,
                "absorbing model requires positive interior rates (state " + std::to_string(n) + ")");
      }
      break;
    case BoundaryKind::Reflecting:
      require(m.lo == 0 && N > 1, "reflecting model requires state space {0..N} with N > 1");
      require(m.death(0) == 0.0 && m.birth(N) == 0.0,
              "reflecting model requires mu_0 = lambda_N = 0");
      require(m.birth(0) > 0.0 && m.death(N) > 0.0,
              "reflecting model requires lambda_0 > 0 and mu_N > 0");
      for (long n = 1; n < N; ++n) {
        require(m.birth(n) > 0.0 && m.death(n) > 0.0,
                "reflecting model requires positive interior rates (state " + std::to_string(n) + ")");
      }
      break;
    case BoundaryKind::None:
      require(m.lo < 0 && m.hi > 0, "bilateral model window must straddle state 0");
      for (long n = m.lo; n <= m.hi; ++n) {
        require(m.birth(n) > 0.0 && m.death(n) > 0.0,
                "bilateral model requires positive rates (state " + std::to_string(n) + ")");
      }
      break;
  }
  if (m.family == Family::Catastrophe) {
    require(m.boundary == BoundaryKind::None, "catastrophe rates are bilateral-only");
    require(!m.alpha.empty(), "catastrophe model is missing its alpha map");
    require(m.catastrophe(0) == 0.0, "catastrophe rate is not defined at state 0");
  } else {
    require(m.alpha.empty(), "catastrophe map present on a non-catastrophe family");
  }
}

RateModel materialize(Preset tag, Family family, BoundaryKind boundary, long lo, long hi,
                      const PresetParams& p) {
  RateModel m;
  m.family = family;
  m.boundary = boundary;
  m.preset = tag;
  m.lo = lo;
  m.hi = hi;
  m.params = p;
  const std::size_t n = static_cast<std::size_t>(hi - lo + 1);
  m.lambda.resize(n);
  m.mu.resize(n);
  if (family == Family::Catastrophe) m.alpha.resize(n);
  for (long s = lo; s <= hi; ++s) {
    const RateTriple r = preset_rates(tag, p, s);
    m.lambda[static_cast<std::size_t>(s - lo)] = r.birth;
    m.mu[static_cast<std::size_t>(s - lo)] = r.death;
    if (family == Family::Catastrophe) m.alpha[static_cast<std::size_t>(s - lo)] = r.cata;
  }
  validate_rates(m);
  return m;
}

struct ResidualTracker {
  double worst = 0.0;
  std::optional<long> index;

  void update(long n, double lhs, double rhs) {
    double r = std::fabs(lhs - rhs);
    const double scale = std::max(std::fabs(lhs), std::fabs(rhs));
    if (scale > 1.0) r /= scale;
    if (r > worst) {
      worst = r;
      index = n;
    }
  }
};

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::Absorbing: return "absorbing";
    case Family::Reflecting: return "reflecting";
    case Family::Bilateral: return "bilateral";
    case Family::Catastrophe: return "catastrophe";
    case Family::TwoD: return "twod";
  }
  return "?";
}

const char* preset_name(Preset p) {
  switch (p) {
    case Preset::ConstantAbsorbing: return "constant_absorbing";
    case Preset::Ehrenfest: return "ehrenfest";
    case Preset::QuadraticEhrenfest: return "quadratic_ehrenfest";
    case Preset::Sigmoidal: return "sigmoidal";
    case Preset::AlternatingA: return "alternating_a";
    case Preset::AlternatingB: return "alternating_b";
    case Preset::ConstantBilateral: return "constant_bilateral";
    case Preset::ConstantCatastrophe: return "constant_catastrophe";
    case Preset::Custom: return "custom";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  for (Family f : {Family::Absorbing, Family::Reflecting, Family::Bilateral, Family::Catastrophe,
                   Family::TwoD}) {
    if (name == family_name(f)) return f;
  }
  throw std::invalid_argument("unknown family: " + name);
}

Preset preset_from_name(const std::string& name) {
  for (Preset p : {Preset::ConstantAbsorbing, Preset::Ehrenfest, Preset::QuadraticEhrenfest,
                   Preset::Sigmoidal, Preset::AlternatingA, Preset::AlternatingB,
                   Preset::ConstantBilateral, Preset::ConstantCatastrophe, Preset::Custom}) {
    if (name == preset_name(p)) return p;
  }
  throw std::invalid_argument("unknown preset: " + name);
}

double RateModel::birth_at(long n) const {
  if (contains(n)) return birth(n);
  if (preset == Preset::Custom || truncated()) {
    throw std::out_of_range("rate model: state " + std::to_string(n) + " outside window");
  }
  return preset_rates(preset, params, n).birth;
}

double RateModel::death_at(long n) const {
  if (contains(n)) return death(n);
  if (preset == Preset::Custom || truncated()) {
    throw std::out_of_range("rate model: state " + std::to_string(n) + " outside window");
  }
  return preset_rates(preset, params, n).death;
}

double RateModel::catastrophe_at(long n) const {
  if (contains(n)) return catastrophe(n);
  if (preset == Preset::Custom || truncated()) {
    throw std::out_of_range("rate model: state " + std::to_string(n) + " outside window");
  }
  return preset_rates(preset, params, n).cata;
}

RateModel RateModel::extended(long new_lo, long new_hi) const {
  if (!extendable()) {
    throw std::invalid_argument("rate model: custom window [" + std::to_string(lo) + "," +
                                std::to_string(hi) + "] cannot be extended to [" +
                                std::to_string(new_lo) + "," + std::to_string(new_hi) + "]");
  }
  PresetParams p = params;
  p.window_lo = std::min(new_lo, lo);
  p.window_hi = std::max(new_hi, hi);
  return build_preset(preset, p);
}

RateModel build_preset(Preset tag, const PresetParams& p) {
  switch (tag) {
    case Preset::ConstantAbsorbing:
      require(p.N > 1, "constant_absorbing: N must exceed 1");
      require(p.lambda > 0.0 && p.mu > 0.0, "constant_absorbing: lambda and mu must be positive");
      return materialize(tag, Family::Absorbing, BoundaryKind::Absorbing, 0, p.N, p);
    case Preset::Ehrenfest:
    case Preset::QuadraticEhrenfest:
      require(p.N > 1, std::string(preset_name(tag)) + ": N must exceed 1");
      require(p.alpha > 0.0, std::string(preset_name(tag)) + ": alpha must be positive");
      return materialize(tag, Family::Reflecting, BoundaryKind::Reflecting, 0, p.N, p);
    case Preset::Sigmoidal:
      require(p.lambda > 0.0 && p.mu > 0.0, "sigmoidal: lambda and mu must be positive");
      require(p.c >= 0.0, "sigmoidal: c must be nonnegative");
      require(p.window_lo < 0 && p.window_hi > 0, "sigmoidal: window must straddle 0");
      return materialize(tag, Family::Bilateral, BoundaryKind::None, p.window_lo, p.window_hi, p);
    case Preset::AlternatingA:
    case Preset::AlternatingB:
    case Preset::ConstantBilateral:
      require(p.lambda > 0.0 && p.mu > 0.0,
              std::string(preset_name(tag)) + ": lambda and mu must be positive");
      require(p.window_lo < 0 && p.window_hi > 0,
              std::string(preset_name(tag)) + ": window must straddle 0");
      return materialize(tag, Family::Bilateral, BoundaryKind::None, p.window_lo, p.window_hi, p);
    case Preset::ConstantCatastrophe:
      require(p.lambda > 0.0 && p.mu > 0.0,
              "constant_catastrophe: lambda and mu must be positive");
      require(p.alpha >= 0.0, "constant_catastrophe: alpha must be nonnegative");
      require(p.window_lo < 0 && p.window_hi > 0, "constant_catastrophe: window must straddle 0");
      return materialize(tag, Family::Catastrophe, BoundaryKind::None, p.window_lo, p.window_hi, p);
    case Preset::Custom:
      break;
  }
  throw std::invalid_argument("build_preset: custom models go through custom_model()");
}

RateModel custom_model(Family family, long lo, long hi, std::vector<double> lambda,
                       std::vector<double> mu, std::vector<double> alpha) {
  require(hi > lo, "custom model: window must contain at least two states");
  const std::size_t n = static_cast<std::size_t>(hi - lo + 1);
  require(lambda.size() == n && mu.size() == n,
          "custom model: rate vectors must cover the state window");
  require(alpha.empty() || alpha.size() == n,
          "custom model: alpha vector must cover the state window when present");
  RateModel m;
  m.family = family;
  m.preset = Preset::Custom;
  m.lo = lo;
  m.hi = hi;
  m.lambda = std::move(lambda);
  m.mu = std::move(mu);
  m.alpha = std::move(alpha);
  switch (family) {
    case Family::Absorbing: m.boundary = BoundaryKind::Absorbing; break;
    case Family::Reflecting: m.boundary = BoundaryKind::Reflecting; break;
    case Family::Bilateral:
    case Family::Catastrophe: m.boundary = BoundaryKind::None; break;
    case Family::TwoD: throw std::invalid_argument("custom model: twod has no 1D rate vectors");
  }
  validate_rates(m);
  return m;
}

SymmetryWeights weights(const RateModel& model) {
  if (model.boundary != BoundaryKind::Absorbing) {
    throw std::invalid_argument("weights: model must have absorbing endpoints");
  }
  const long N = model.N();
  SymmetryWeights w;
  w.x.resize(static_cast<std::size_t>(N) + 1);
  w.x[0] = 1.0;
  for (long n = 1; n <= N - 1; ++n) {
    w.x[static_cast<std::size_t>(n)] =
        model.death(n) / model.birth(N - n) * w.x[static_cast<std::size_t>(n - 1)];
  }
  w.x[static_cast<std::size_t>(N)] =
      model.death(1) / model.birth(N - 1) * w.x[static_cast<std::size_t>(N - 1)];
  return w;
}

SymmetryReport check_symmetry(const RateModel& model, Family family, double tol) {
  if (family != model.family) {
    throw std::invalid_argument(std::string("check_symmetry: model family is ") +
                                family_name(model.family) + ", requested " + family_name(family));
  }
  ResidualTracker tr;
  const long N = model.hi;
  switch (family) {
    case Family::Absorbing:
      for (long n = 1; n <= N - 2; ++n) {
        tr.update(n, model.birth(n) * model.death(n + 1),
                  model.birth(N - n - 1) * model.death(N - n));
      }
      for (long n = 1; n <= N - 1; ++n) {
        tr.update(n, model.birth(n) + model.death(n), model.birth(N - n) + model.death(N - n));
      }
      break;
    case Family::Reflecting:
      for (long n = 0; n <= N; ++n) tr.update(n, model.birth(n), model.death(N - n));
      break;
    case Family::Bilateral:
    case Family::Catastrophe: {
      const long w = std::min(-model.lo, model.hi);
      for (long n = -w; n <= w; ++n) tr.update(n, model.birth(n), model.death(-n));
      if (family == Family::Catastrophe) {
        for (long n = 1; n <= w; ++n) tr.update(n, model.catastrophe(n), model.catastrophe(-n));
      }
      break;
    }
    case Family::TwoD:
      throw std::invalid_argument("check_symmetry: twod models use the PlaneModel overload");
  }
  SymmetryReport rep;
  rep.family = family;
  rep.worst_residual = tr.worst;
  rep.satisfied = tr.worst <= tol;
  if (!rep.satisfied) rep.violating_index = tr.index;
  return rep;
}

}  // namespace bdsym
