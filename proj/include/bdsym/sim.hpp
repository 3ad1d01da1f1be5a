#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdsym/rates.hpp"
#include "bdsym/twod.hpp"

namespace bdsym {

/// Counter-based splittable generator: replication i always consumes the same
/// stream regardless of which thread runs it, so estimates are byte-stable
/// under any parallel schedule.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next_u64();
  double next_unit();  // uniform on (0, 1)
  double next_exponential(double rate);

 private:
  std::uint64_t state_;
};

struct Event {
  double time;
  long state;
};

/// Exact event-driven sample path up to the horizon. Paths entering an
/// absorbing endpoint stop early; an interior state with zero total rate is
/// a model error.
std::vector<Event> simulate_path(const RateModel& model, long start, double horizon,
                                 RngStream& rng);

struct PlaneEvent {
  double time;
  long x1, x2;
};

std::vector<PlaneEvent> simulate_plane_path(const PlaneModel& model, PlanePoint start,
                                            double horizon, RngStream& rng);

enum class Observable { TransitionRow, FirstPassage, Taboo, Crossing2D };

struct SimConfig {
  Observable observable = Observable::TransitionRow;
  const RateModel* model = nullptr;  // 1D observables
  const PlaneModel* plane = nullptr; // Crossing2D
  long start = 0;
  PlanePoint start2{0, 0};
  long target = 0;              // first-passage target / taboo state / line offset r
  long state = 0;               // taboo terminal state n
  std::vector<double> times;    // observation times (TransitionRow, Taboo)
  double horizon = 0.0;         // censoring horizon (FirstPassage, Crossing2D)
  long replications = 0;
  std::uint64_t seed = 0;
  int threads = 0;              // 0: BD_SYM_THREADS, then hardware
  int histogram_bins = 0;       // FirstPassage histogram (0: none)
};

struct EmpiricalEstimate {
  std::string observable;
  double estimate = 0.0;
  long replications = 0;
  double std_error = 0.0;  // sqrt(p(1-p)/R) for binomial observables
};

struct Histogram {
  std::vector<double> edges;  // bins + 1 ascending
  std::vector<long> counts;
  std::string to_csv() const;  // bin_lo,bin_hi,count
};

struct EstimateSet {
  std::vector<EmpiricalEstimate> estimates;
  std::optional<Histogram> histogram;
  std::string to_csv() const;  // observable,estimate,stderr,R
};

/// Runs the replications over deterministically derived substreams
/// (stream i = f(seed, i)) and aggregates in substream order; the output is
/// independent of thread count and execution order.
EstimateSet estimate(const SimConfig& config);

/// First-visit times of `target`; horizon-censored paths report +infinity.
std::vector<double> sample_first_passage(const RateModel& model, long start, long target,
                                         double horizon, long replications, std::uint64_t seed,
                                         int threads = 0);

std::vector<double> sample_crossing_times(const PlaneModel& model, PlanePoint start, long r,
                                          double horizon, long replications, std::uint64_t seed,
                                          int threads = 0);

Histogram make_histogram(const std::vector<double>& samples, double lo, double hi, int bins);

int resolve_threads(int requested);

}  // namespace bdsym
