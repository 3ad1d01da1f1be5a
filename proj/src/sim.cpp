#include "bdsym/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bdsym/format.hpp"

namespace bdsym {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Runs fn(i) for i in [0, count); each call must touch only its own slot.
void for_each_replication(long count, int threads, const std::function<void(long)>& fn) {
  const int t = std::max(1, threads);
  if (t == 1 || count < 2 * t) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(t));
  for (int w = 0; w < t; ++w) {
    const long lo = count * w / t;
    const long hi = count * (w + 1) / t;
    pool.emplace_back([lo, hi, &fn] {
      for (long i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

double binomial_stderr(double p, long r) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(r));
}

struct StepRates {
  double up, down, cata;
};

StepRates rates_at(const RateModel& m, long n) {
  return {m.birth_at(n), m.death_at(n), m.catastrophe_at(n)};
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed) ^ mix64(0xD1B54A32D192ED03ULL * (stream + 1))) {}

std::uint64_t RngStream::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double RngStream::next_unit() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_exponential(double rate) { return -std::log(next_unit()) / rate; }

std::vector<Event> simulate_path(const RateModel& model, long start, double horizon,
                                 RngStream& rng) {
  require(horizon > 0.0, "simulate_path: horizon must be positive");
  if (model.truncated()) {
    require(model.contains(start), "simulate_path: start outside the state space");
  }
  std::vector<Event> events;
  double t = 0.0;
  long n = start;
  for (;;) {
    const StepRates r = rates_at(model, n);
    const double total = r.up + r.down + r.cata;
    if (total == 0.0) {
      if (model.boundary == BoundaryKind::Absorbing && (n == 0 || n == model.N())) break;
      throw std::runtime_error("simulate_path: zero total rate at non-absorbing state " +
                               std::to_string(n));
    }
    t += rng.next_exponential(total);
    if (t > horizon) break;
    const double u = rng.next_unit() * total;
    if (u < r.up) {
      n = n + 1;
    } else if (u < r.up + r.down) {
      n = n - 1;
    } else {
      n = 0;
    }
    events.push_back({t, n});
  }
  return events;
}

std::vector<PlaneEvent> simulate_plane_path(const PlaneModel& model, PlanePoint start,
                                            double horizon, RngStream& rng) {
  require(horizon > 0.0, "simulate_plane_path: horizon must be positive");
  std::vector<PlaneEvent> events;
  double t = 0.0;
  long x1 = start[0], x2 = start[1];
  const double total = model.rate_sum();
  const double c1 = model.lambda1;
  const double c2 = c1 + model.mu1;
  const double c3 = c2 + model.lambda2;
  for (;;) {
    t += rng.next_exponential(total);
    if (t > horizon) break;
    const double u = rng.next_unit() * total;
    if (u < c1) {
      ++x1;
    } else if (u < c2) {
      --x1;
    } else if (u < c3) {
      ++x2;
    } else {
      --x2;
    }
    events.push_back({t, x1, x2});
  }
  return events;
}

std::string Histogram::to_csv() const {
  std::ostringstream os;
  os << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    os << g17(edges[i]) << ',' << g17(edges[i + 1]) << ',' << counts[i] << '\n';
  }
  return os.str();
}

std::string EstimateSet::to_csv() const {
  std::ostringstream os;
  os << "observable,estimate,stderr,R\n";
  for (const auto& e : estimates) {
    os << e.observable << ',' << g17(e.estimate) << ',' << g17(e.std_error) << ','
       << e.replications << '\n';
  }
  return os.str();
}

int resolve_threads(int requested) {
  if (requested > 0) return std::min(requested, 64);
  if (const char* env = std::getenv("BD_SYM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<int>(std::min<long>(v, 64));
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(std::min<unsigned>(hc, 64));
}

Histogram make_histogram(const std::vector<double>& samples, double lo, double hi, int bins) {
  require(bins > 0 && hi > lo, "make_histogram: bad bin layout");
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) {
    h.edges[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  }
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double s : samples) {
    if (!std::isfinite(s) || s < lo || s >= hi) continue;
    const int b = std::min(bins - 1, static_cast<int>((s - lo) / (hi - lo) * bins));
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

std::vector<double> sample_first_passage(const RateModel& model, long start, long target,
                                         double horizon, long replications, std::uint64_t seed,
                                         int threads) {
  require(replications >= 1, "sample_first_passage: need at least one replication");
  require(start != target, "sample_first_passage: start equals target");
  std::vector<double> out(static_cast<std::size_t>(replications),
                          std::numeric_limits<double>::infinity());
  for_each_replication(replications, resolve_threads(threads), [&](long i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    const std::vector<Event> path =
        simulate_path(model, start, horizon, rng);
    for (const Event& e : path) {
      if (e.state == target) {
        out[static_cast<std::size_t>(i)] = e.time;
        break;
      }
    }
  });
  return out;
}

std::vector<double> sample_crossing_times(const PlaneModel& model, PlanePoint start, long r,
                                          double horizon, long replications, std::uint64_t seed,
                                          int threads) {
  require(replications >= 1, "sample_crossing_times: need at least one replication");
  require(start[1] != start[0] + r, "sample_crossing_times: start lies on the line");
  std::vector<double> out(static_cast<std::size_t>(replications),
                          std::numeric_limits<double>::infinity());
  const double total = model.rate_sum();
  const double c1 = model.lambda1;
  const double c2 = c1 + model.mu1;
  const double c3 = c2 + model.lambda2;
  for_each_replication(replications, resolve_threads(threads), [&](long i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    double t = 0.0;
    long x1 = start[0], x2 = start[1];
    for (;;) {
      t += rng.next_exponential(total);
      if (t > horizon) break;
      const double u = rng.next_unit() * total;
      if (u < c1) {
        ++x1;
      } else if (u < c2) {
        --x1;
      } else if (u < c3) {
        ++x2;
      } else {
        --x2;
      }
      if (x2 == x1 + r) {
        out[static_cast<std::size_t>(i)] = t;
        break;
      }
    }
  });
  return out;
}

EstimateSet estimate(const SimConfig& cfg) {
  require(cfg.replications >= 1, "estimate: need at least one replication");
  EstimateSet out;
  const long R = cfg.replications;
  const int threads = resolve_threads(cfg.threads);

  switch (cfg.observable) {
    case Observable::TransitionRow: {
      require(cfg.model != nullptr, "estimate: transition row needs a model");
      require(!cfg.times.empty(), "estimate: transition row needs observation times");
      const double horizon = cfg.times.back();
      const std::size_t nt = cfg.times.size();
      std::vector<long> slots(static_cast<std::size_t>(R) * nt);
      for_each_replication(R, threads, [&](long i) {
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(i));
        const std::vector<Event> path = simulate_path(*cfg.model, cfg.start, horizon, rng);
        std::size_t ev = 0;
        long state = cfg.start;
        for (std::size_t ti = 0; ti < nt; ++ti) {
          while (ev < path.size() && path[ev].time <= cfg.times[ti]) state = path[ev++].state;
          slots[static_cast<std::size_t>(i) * nt + ti] = state;
        }
      });
      const long lo = cfg.model->lo, hi = cfg.model->hi;
      const std::size_t ns = static_cast<std::size_t>(hi - lo + 1);
      std::vector<long> counts(nt * ns, 0);
      for (long i = 0; i < R; ++i) {
        for (std::size_t ti = 0; ti < nt; ++ti) {
          const long s = slots[static_cast<std::size_t>(i) * nt + ti];
          if (s >= lo && s <= hi) ++counts[ti * ns + static_cast<std::size_t>(s - lo)];
        }
      }
      for (std::size_t ti = 0; ti < nt; ++ti) {
        for (std::size_t si = 0; si < ns; ++si) {
          const double p = static_cast<double>(counts[ti * ns + si]) / static_cast<double>(R);
          EmpiricalEstimate e;
          e.observable = "p[k=" + std::to_string(cfg.start) + "][n=" +
                         std::to_string(lo + static_cast<long>(si)) + "][t=" + g17(cfg.times[ti]) +
                         "]";
          e.estimate = p;
          e.replications = R;
          e.std_error = binomial_stderr(p, R);
          out.estimates.push_back(std::move(e));
        }
      }
      return out;
    }
    case Observable::FirstPassage: {
      require(cfg.model != nullptr, "estimate: first passage needs a model");
      require(cfg.horizon > 0.0, "estimate: first passage needs a horizon");
      const std::vector<double> samples = sample_first_passage(
          *cfg.model, cfg.start, cfg.target, cfg.horizon, R, cfg.seed, cfg.threads);
      long hits = 0;
      for (double s : samples) {
        if (std::isfinite(s)) ++hits;
      }
      const double p = static_cast<double>(hits) / static_cast<double>(R);
      EmpiricalEstimate e;
      e.observable = "fpt_hit[k=" + std::to_string(cfg.start) + "][s=" +
                     std::to_string(cfg.target) + "][T=" + g17(cfg.horizon) + "]";
      e.estimate = p;
      e.replications = R;
      e.std_error = binomial_stderr(p, R);
      out.estimates.push_back(std::move(e));
      if (cfg.histogram_bins > 0) {
        out.histogram = make_histogram(samples, 0.0, cfg.horizon, cfg.histogram_bins);
      }
      return out;
    }
    case Observable::Taboo: {
      require(cfg.model != nullptr, "estimate: taboo needs a model");
      require(!cfg.times.empty(), "estimate: taboo needs an observation time");
      require(cfg.start != cfg.target, "estimate: taboo start equals the taboo state");
      const double t_obs = cfg.times.front();
      std::vector<unsigned char> ok(static_cast<std::size_t>(R), 0);
      for_each_replication(R, threads, [&](long i) {
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(i));
        const std::vector<Event> path = simulate_path(*cfg.model, cfg.start, t_obs, rng);
        long state = cfg.start;
        bool avoided = true;
        for (const Event& e : path) {
          if (e.time > t_obs) break;
          state = e.state;
          if (state == cfg.target) {
            avoided = false;
            break;
          }
        }
        ok[static_cast<std::size_t>(i)] = (avoided && state == cfg.state) ? 1 : 0;
      });
      long hits = 0;
      for (unsigned char b : ok) hits += b;
      const double p = static_cast<double>(hits) / static_cast<double>(R);
      EmpiricalEstimate e;
      e.observable = "taboo[k=" + std::to_string(cfg.start) + "][r=" + std::to_string(cfg.target) +
                     "][n=" + std::to_string(cfg.state) + "][t=" + g17(t_obs) + "]";
      e.estimate = p;
      e.replications = R;
      e.std_error = binomial_stderr(p, R);
      out.estimates.push_back(std::move(e));
      return out;
    }
    case Observable::Crossing2D: {
      require(cfg.plane != nullptr, "estimate: crossing needs a plane model");
      require(cfg.horizon > 0.0, "estimate: crossing needs a horizon");
      const std::vector<double> samples = sample_crossing_times(
          *cfg.plane, cfg.start2, cfg.target, cfg.horizon, R, cfg.seed, cfg.threads);
      long hits = 0;
      for (double s : samples) {
        if (std::isfinite(s)) ++hits;
      }
      const double p = static_cast<double>(hits) / static_cast<double>(R);
      EmpiricalEstimate e;
      e.observable = "crossing[k1=" + std::to_string(cfg.start2[0]) + "][k2=" +
                     std::to_string(cfg.start2[1]) + "][r=" + std::to_string(cfg.target) + "][T=" +
                     g17(cfg.horizon) + "]";
      e.estimate = p;
      e.replications = R;
      e.std_error = binomial_stderr(p, R);
      out.estimates.push_back(std::move(e));
      if (cfg.histogram_bins > 0) {
        out.histogram = make_histogram(samples, 0.0, cfg.horizon, cfg.histogram_bins);
      }
      return out;
    }
  }
  throw std::logic_error("estimate: unknown observable");
}

}  // namespace bdsym
