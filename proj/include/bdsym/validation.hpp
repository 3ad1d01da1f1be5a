#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bdsym/rates.hpp"

namespace bdsym {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Full validation suite (includes Monte Carlo runs; takes a few minutes).
std::vector<CriterionResult> run_acceptance();

/// Runs the suite printing one pass/fail line per criterion; true when all pass.
bool print_acceptance(std::ostream& os);

/// Exact reference for absorbing hitting probabilities: P(hit s before 0)
/// from start k, via a Thomas solve of the interior linear system.
double hitting_probability_tridiagonal(const RateModel& model, long k, long s);

}  // namespace bdsym
