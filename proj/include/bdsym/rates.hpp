#pragma once

#include <optional>
#include <string>
#include <vector>

namespace bdsym {

enum class Family { Absorbing, Reflecting, Bilateral, Catastrophe, TwoD };

enum class BoundaryKind { Absorbing, Reflecting, None };

enum class Preset {
  ConstantAbsorbing,
  Ehrenfest,
  QuadraticEhrenfest,
  Sigmoidal,
  AlternatingA,
  AlternatingB,
  ConstantBilateral,
  ConstantCatastrophe,
  Custom,
};

const char* family_name(Family f);
const char* preset_name(Preset p);
Family family_from_name(const std::string& name);
Preset preset_from_name(const std::string& name);

struct PresetParams {
  long N = 0;                       // truncated families
  double lambda = 0.0;
  double mu = 0.0;
  double alpha = 0.0;               // catastrophe rate / Ehrenfest scale
  double c = 0.0;                   // sigmoidal shape
  long window_lo = 0, window_hi = 0;  // bilateral families
};

/// One-dimensional birth-death rate model over a contiguous state window.
/// Truncated families live on {0..N}; bilateral families on a caller-chosen
/// window [lo, hi] around 0. Immutable after construction; safe to share
/// across threads.
struct RateModel {
  Family family = Family::Bilateral;
  BoundaryKind boundary = BoundaryKind::None;
  Preset preset = Preset::Custom;
  long lo = 0, hi = 0;
  std::vector<double> lambda;  // indexed by state - lo
  std::vector<double> mu;
  std::vector<double> alpha;   // empty unless catastrophe family; alpha(0) = 0
  PresetParams params;         // meaningful for presets only

  long size() const { return hi - lo + 1; }
  long N() const { return hi; }  // truncated families
  bool truncated() const { return boundary != BoundaryKind::None; }
  bool has_catastrophes() const { return !alpha.empty(); }
  bool contains(long n) const { return n >= lo && n <= hi; }

  double birth(long n) const { return lambda[static_cast<std::size_t>(n - lo)]; }
  double death(long n) const { return mu[static_cast<std::size_t>(n - lo)]; }
  double catastrophe(long n) const {
    return alpha.empty() ? 0.0 : alpha[static_cast<std::size_t>(n - lo)];
  }
  double total_rate(long n) const { return birth(n) + death(n) + catastrophe(n); }

  // Rate evaluation without the window restriction: presets evaluate their
  // formula at any state, custom models must stay inside [lo, hi].
  double birth_at(long n) const;
  double death_at(long n) const;
  double catastrophe_at(long n) const;

  bool extendable() const { return preset != Preset::Custom && !truncated(); }
  RateModel extended(long new_lo, long new_hi) const;
};

RateModel build_preset(Preset tag, const PresetParams& params);

RateModel custom_model(Family family, long lo, long hi, std::vector<double> lambda,
                       std::vector<double> mu, std::vector<double> alpha = {});

/// Mirror weights x_n of a truncated model with absorbing endpoints:
/// x_0 = 1, x_n = (mu_n / lambda_{N-n}) x_{n-1}, x_N = (mu_1 / lambda_{N-1}) x_{N-1}.
struct SymmetryWeights {
  std::vector<double> x;
};

SymmetryWeights weights(const RateModel& model);

struct SymmetryReport {
  Family family = Family::Absorbing;
  bool satisfied = false;
  double worst_residual = 0.0;
  std::optional<long> violating_index;
};

/// Rate-level symmetry conditions per family. Residuals are absolute,
/// switching to relative when either side exceeds 1.
SymmetryReport check_symmetry(const RateModel& model, Family family, double tol = 1e-12);

}  // namespace bdsym
