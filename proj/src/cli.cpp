#include "bdsym/cli.hpp"

#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "bdsym/format.hpp"
#include "bdsym/fpt.hpp"
#include "bdsym/kernels.hpp"
#include "bdsym/model_io.hpp"
#include "bdsym/sim.hpp"
#include "bdsym/twod.hpp"
#include "bdsym/validation.hpp"

namespace bdsym::cli {

namespace {

struct ModelOpts {
  std::string preset;
  std::string model_path;
  long N = 0;
  double lambda = 0.0, mu = 0.0, alpha = 0.0, c = 0.0;
  std::vector<long> window;
};

void add_model_flags(CLI::App* cmd, ModelOpts& mo) {
  auto* preset = cmd->add_option("--preset", mo.preset, "preset model name");
  auto* file = cmd->add_option("--model", mo.model_path, "model JSON file");
  preset->excludes(file);
  cmd->add_option("--N", mo.N, "state count for truncated models");
  cmd->add_option("--lambda", mo.lambda, "birth rate parameter");
  cmd->add_option("--mu", mo.mu, "death rate parameter");
  cmd->add_option("--alpha", mo.alpha, "catastrophe rate / Ehrenfest scale");
  cmd->add_option("--c", mo.c, "sigmoidal shape parameter");
  cmd->add_option("--window", mo.window, "bilateral window: L R")->expected(2);
}

RateModel build_model(const ModelOpts& mo) {
  if (!mo.model_path.empty()) return load_model(mo.model_path);
  if (mo.preset.empty()) {
    throw CLI::ValidationError("model", "exactly one of --preset or --model is required");
  }
  PresetParams p;
  p.N = mo.N;
  p.lambda = mo.lambda;
  p.mu = mo.mu;
  p.alpha = mo.alpha;
  p.c = mo.c;
  if (mo.window.size() == 2) {
    p.window_lo = mo.window[0];
    p.window_hi = mo.window[1];
  } else {
    p.window_lo = -40;
    p.window_hi = 40;
  }
  return build_preset(preset_from_name(mo.preset), p);
}

struct GridOpts {
  double tmin = 0.02, tmax = 10.0;
  long steps = 500;
  std::vector<double> explicit_t;
};

void add_grid_flags(CLI::App* cmd, GridOpts& go) {
  cmd->add_option("--tmin", go.tmin, "grid start time");
  cmd->add_option("--tmax", go.tmax, "grid end time");
  cmd->add_option("--steps", go.steps, "number of grid points");
  cmd->add_option("--t", go.explicit_t, "explicit time points (overrides the grid)");
}

std::vector<double> build_times(const GridOpts& go) {
  if (!go.explicit_t.empty()) {
    std::vector<double> t = go.explicit_t;
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (t[i] <= t[i - 1]) throw CLI::ValidationError("--t", "times must be strictly increasing");
    }
    return t;
  }
  if (go.steps < 1 || go.tmax <= go.tmin || go.tmin < 0.0) {
    throw CLI::ValidationError("--steps/--tmin/--tmax", "need tmax > tmin >= 0 and steps >= 1");
  }
  std::vector<double> t(static_cast<std::size_t>(go.steps));
  if (go.steps == 1) {
    t[0] = go.tmax;
    return t;
  }
  const double d = (go.tmax - go.tmin) / static_cast<double>(go.steps - 1);
  for (long i = 0; i < go.steps; ++i) {
    t[static_cast<std::size_t>(i)] = go.tmin + static_cast<double>(i) * d;
  }
  return t;
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << content;
}

bool symmetric_route(const RateModel& m) { return check_symmetry(m, m.family).satisfied; }

long default_target(const RateModel& m) { return m.truncated() ? m.N() / 2 : 0; }

std::string run_fpt(const RateModel& m, long k, long s, const std::vector<double>& times,
                    double tol) {
  std::string method;
  FptDensity d;
  const bool midpoint = m.truncated() ? (m.N() % 2 == 0 && s == m.N() / 2) : (s == 0);
  if (midpoint && symmetric_route(m)) {
    method = "symmetric-closed";
    switch (m.family) {
      case Family::Absorbing: d = fpt_symmetric_absorbing(m, k, times, tol); break;
      case Family::Reflecting: d = fpt_symmetric_reflecting(m, k, times, tol); break;
      case Family::Bilateral: d = fpt_bilateral(m, k, times, tol); break;
      case Family::Catastrophe: d = fpt_catastrophe(m, k, times, tol); break;
      default: throw std::invalid_argument("fpt: unsupported family");
    }
  } else {
    method = "renewal";
    d = fpt_renewal(m, k, s, k < s ? Direction::Up : Direction::Down, times, tol);
  }
  std::ostringstream os;
  os << "# method: " << method << "\n" << d.to_csv();
  return os.str();
}

std::string run_avoid(const RateModel& m, long k, long r, const std::vector<double>& times,
                      double tol) {
  std::string method;
  TabooGrid tg;
  const bool midpoint = m.truncated() ? (m.N() % 2 == 0 && r == m.N() / 2) : (r == 0);
  if (midpoint && symmetric_route(m)) {
    method = "symmetric-closed";
    switch (m.family) {
      case Family::Absorbing: tg = taboo_symmetric_absorbing(m, k, times, tol); break;
      case Family::Reflecting: tg = taboo_reflecting(m, k, times, tol); break;
      case Family::Bilateral: tg = taboo_bilateral(m, k, times, tol); break;
      case Family::Catastrophe: tg = taboo_catastrophe(m, k, times, tol); break;
      default: throw std::invalid_argument("avoid: unsupported family");
    }
  } else {
    method = "renewal";
    tg = taboo_renewal(m, k, r, times, tol);
  }
  std::ostringstream os;
  os << "# method: " << method << "\n" << tg.to_csv();
  return os.str();
}

std::string figure_csv(const std::string& id, const GridOpts& go) {
  GridOpts grid = go;
  if (grid.explicit_t.empty() && grid.tmin <= 0.0) grid.tmin = 0.02;
  const std::vector<double> times = build_times(grid);
  const bool variant_a = id.back() == 'a';
  std::ostringstream os;
  if (id[0] == '1') {
    const double mu = variant_a ? 0.5 : 1.0;
    std::vector<FptDensity> curves;
    for (long k = 6; k <= 9; ++k) curves.push_back(fpt_constant_closed(20, 1.0, mu, k, times));
    os << "t,k6,k7,k8,k9\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
      os << g17(times[i]);
      for (const auto& c : curves) os << ',' << g17(c.values[i]);
      os << '\n';
    }
  } else if (id[0] == '2') {
    const double mu = variant_a ? 0.5 : 1.0;
    os << "t,n7,n8,n9\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
      os << g17(times[i]);
      for (long n = 7; n <= 9; ++n) {
        os << ',' << g17(taboo_constant_closed_value(20, 1.0, mu, 9, n, times[i]));
      }
      os << '\n';
    }
  } else if (id[0] == '3') {
    const double alpha = variant_a ? 0.5 : 1.0;
    std::vector<FptDensity> curves;
    for (long k = 6; k <= 9; ++k) curves.push_back(fpt_ehrenfest_closed(10, alpha, k, times));
    os << "t,k6,k7,k8,k9\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
      os << g17(times[i]);
      for (const auto& c : curves) os << ',' << g17(c.values[i]);
      os << '\n';
    }
  } else {
    const double alpha = variant_a ? 0.5 : 1.0;
    os << "t,n6,n7,n8,n9\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
      os << g17(times[i]);
      for (long n = 6; n <= 9; ++n) {
        os << ',' << g17(taboo_ehrenfest_closed_value(10, alpha, 9, n, times[i]));
      }
      os << '\n';
    }
  }
  return os.str();
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"symmetric birth-death process toolkit"};
  app.require_subcommand(1);

  // prob
  auto* prob = app.add_subcommand("prob", "transition probability grid");
  ModelOpts prob_model;
  GridOpts prob_grid;
  long prob_k = 0;
  double prob_tol = 1e-10;
  std::string prob_method = "auto", prob_out;
  add_model_flags(prob, prob_model);
  add_grid_flags(prob, prob_grid);
  prob->add_option("--k", prob_k, "start state")->required();
  prob->add_option("--tol", prob_tol, "uniformization tolerance");
  prob->add_option("--method", prob_method, "auto|closed|uniformization")
      ->check(CLI::IsMember({"auto", "closed", "uniformization"}));
  prob->add_option("--out", prob_out, "output CSV path (default stdout)");

  // fpt
  auto* fpt = app.add_subcommand("fpt", "first-passage-time density");
  ModelOpts fpt_model;
  GridOpts fpt_grid;
  long fpt_k = 0, fpt_s = std::numeric_limits<long>::min();
  double fpt_tol = 1e-8;
  std::string fpt_out;
  add_model_flags(fpt, fpt_model);
  add_grid_flags(fpt, fpt_grid);
  fpt->add_option("--k", fpt_k, "start state")->required();
  fpt->add_option("--s", fpt_s, "target state (default midpoint / 0)");
  fpt->add_option("--tol", fpt_tol, "solver tolerance");
  fpt->add_option("--out", fpt_out, "output CSV path (default stdout)");

  // avoid
  auto* avoid = app.add_subcommand("avoid", "taboo transition probabilities");
  ModelOpts avoid_model;
  GridOpts avoid_grid;
  long avoid_k = 0, avoid_r = std::numeric_limits<long>::min();
  double avoid_tol = 1e-8;
  std::string avoid_out;
  add_model_flags(avoid, avoid_model);
  add_grid_flags(avoid, avoid_grid);
  avoid->add_option("--k", avoid_k, "start state")->required();
  avoid->add_option("--r", avoid_r, "taboo state (default midpoint / 0)");
  avoid->add_option("--tol", avoid_tol, "solver tolerance");
  avoid->add_option("--out", avoid_out, "output CSV path (default stdout)");

  // twod
  auto* twod = app.add_subcommand("twod", "two-dimensional line-crossing analysis");
  GridOpts twod_grid;
  double l1 = 0, l2 = 0, m1 = 0, m2 = 0;
  long k1 = 0, k2 = 0, twod_r = 0;
  std::string twod_out;
  add_grid_flags(twod, twod_grid);
  twod->add_option("--lambda1", l1, "coordinate-1 birth rate")->required();
  twod->add_option("--lambda2", l2, "coordinate-2 birth rate")->required();
  twod->add_option("--mu1", m1, "coordinate-1 death rate")->required();
  twod->add_option("--mu2", m2, "coordinate-2 death rate")->required();
  twod->add_option("--k1", k1, "start coordinate 1")->required();
  twod->add_option("--k2", k2, "start coordinate 2")->required();
  twod->add_option("--r", twod_r, "line offset: x2 = x1 + r");
  twod->add_option("--out", twod_out, "output prefix (<out>.h.csv, <out>.g.csv, <out>.pi.json)")
      ->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates");
  ModelOpts sim_model;
  std::string sim_observable;
  long sim_k = 0, sim_target = 0, sim_n = 0, sim_R = 10000;
  long sim_k1 = 0, sim_k2 = 0;
  double sim_horizon = 0.0;
  std::vector<double> sim_times;
  std::uint64_t sim_seed = 1;
  int sim_bins = 0;
  double sl1 = 0, sl2 = 0, sm1 = 0, sm2 = 0;
  std::string sim_out, sim_hist_out;
  add_model_flags(sim, sim_model);
  sim->add_option("--observable", sim_observable, "row|fpt|taboo|crossing")
      ->required()
      ->check(CLI::IsMember({"row", "fpt", "taboo", "crossing"}));
  sim->add_option("--k", sim_k, "start state");
  sim->add_option("--s", sim_target, "first-passage target / taboo state / line offset");
  sim->add_option("--n", sim_n, "taboo terminal state");
  sim->add_option("--t", sim_times, "observation times");
  sim->add_option("--horizon", sim_horizon, "censoring horizon");
  sim->add_option("--R", sim_R, "replications");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--bins", sim_bins, "histogram bins for first-passage/crossing samples");
  sim->add_option("--lambda1", sl1, "2D coordinate-1 birth rate");
  sim->add_option("--lambda2", sl2, "2D coordinate-2 birth rate");
  sim->add_option("--mu1", sm1, "2D coordinate-1 death rate");
  sim->add_option("--mu2", sm2, "2D coordinate-2 death rate");
  sim->add_option("--k1", sim_k1, "2D start coordinate 1");
  sim->add_option("--k2", sim_k2, "2D start coordinate 2");
  sim->add_option("--out", sim_out, "estimates CSV path (default stdout)");
  sim->add_option("--hist-out", sim_hist_out, "histogram CSV path");

  // figure
  auto* figure = app.add_subcommand("figure", "caption-parameterized golden curves");
  GridOpts figure_grid;
  std::string figure_id, figure_out;
  add_grid_flags(figure, figure_grid);
  figure->add_option("id", figure_id, "one of 1a,1b,2a,2b,3a,3b,4a,4b")
      ->required()
      ->check(CLI::IsMember({"1a", "1b", "2a", "2b", "3a", "3b", "4a", "4b"}));
  figure->add_option("--out", figure_out, "output CSV path (default figure_<id>.csv)");

  // validate
  auto* validate = app.add_subcommand("validate", "run the full validation suite");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("bdsym");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (prob->parsed()) {
      const RateModel m = build_model(prob_model);
      const std::vector<double> times = build_times(prob_grid);
      ProbabilityGrid grid;
      if (prob_method == "closed") {
        grid = closed_form_grid(m, prob_k, times);
      } else if (prob_method == "uniformization") {
        grid = uniformize(m, prob_k, times, prob_tol);
      } else {
        grid = transition_grid(m, prob_k, times, prob_tol);
      }
      write_output(prob_out, grid.to_csv(), out);
      return 0;
    }
    if (fpt->parsed()) {
      const RateModel m = build_model(fpt_model);
      const long s = fpt_s == std::numeric_limits<long>::min() ? default_target(m) : fpt_s;
      write_output(fpt_out, run_fpt(m, fpt_k, s, build_times(fpt_grid), fpt_tol), out);
      return 0;
    }
    if (avoid->parsed()) {
      const RateModel m = build_model(avoid_model);
      const long r = avoid_r == std::numeric_limits<long>::min() ? default_target(m) : avoid_r;
      write_output(avoid_out, run_avoid(m, avoid_k, r, build_times(avoid_grid), avoid_tol), out);
      return 0;
    }
    if (twod->parsed()) {
      const PlaneModel pm = make_plane_model(l1, l2, m1, m2);
      GridOpts grid = twod_grid;
      const double tmin_floor = plane_min_time(pm);
      if (grid.explicit_t.empty() && grid.tmin < tmin_floor) grid.tmin = tmin_floor;
      const std::vector<double> times = build_times(grid);
      const PlanePoint k{k1, k2};
      std::ostringstream hs;
      hs << "t,h_r\n";
      for (double t : times) hs << g17(t) << ',' << g17(fpt2d_total(pm, k, twod_r, t)) << '\n';
      std::ostringstream gs;
      gs << "t,x,g\n";
      for (double t : times) {
        const auto [xlo, xhi] = fpt2d_site_band(pm, k, twod_r, t);
        for (long x = xlo; x <= xhi; ++x) {
          gs << g17(t) << ',' << x << ',' << g17(fpt2d_subdensity(pm, k, twod_r, x, t)) << '\n';
        }
      }
      const CrossingResult cp = crossing_probability(pm, k, twod_r);
      write_output(twod_out + ".h.csv", hs.str(), out);
      write_output(twod_out + ".g.csv", gs.str(), out);
      write_output(twod_out + ".pi.json", crossing_to_json(cp), out);
      return 0;
    }
    if (sim->parsed()) {
      SimConfig cfg;
      cfg.replications = sim_R;
      cfg.seed = sim_seed;
      cfg.histogram_bins = sim_bins;
      RateModel m1d;
      PlaneModel pm{};
      if (sim_observable == "crossing") {
        cfg.observable = Observable::Crossing2D;
        pm = make_plane_model(sl1, sl2, sm1, sm2);
        cfg.plane = &pm;
        cfg.start2 = {sim_k1, sim_k2};
        cfg.target = sim_target;
        cfg.horizon = sim_horizon;
      } else {
        m1d = build_model(sim_model);
        cfg.model = &m1d;
        cfg.start = sim_k;
        cfg.target = sim_target;
        cfg.state = sim_n;
        cfg.times = sim_times;
        cfg.horizon = sim_horizon;
        cfg.observable = sim_observable == "row"
                             ? Observable::TransitionRow
                             : (sim_observable == "fpt" ? Observable::FirstPassage
                                                        : Observable::Taboo);
      }
      const EstimateSet est = estimate(cfg);
      write_output(sim_out, est.to_csv(), out);
      if (!sim_hist_out.empty() && est.histogram) {
        write_output(sim_hist_out, est.histogram->to_csv(), out);
      }
      return 0;
    }
    if (figure->parsed()) {
      const std::string path = figure_out.empty() ? "figure_" + figure_id + ".csv" : figure_out;
      write_output(path, figure_csv(figure_id, figure_grid), out);
      return 0;
    }
    if (validate->parsed()) {
      return print_acceptance(out) ? 0 : 1;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return dispatch(args, out, err);
}

}  // namespace bdsym::cli
