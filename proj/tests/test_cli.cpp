#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bdsym/cli.hpp"
#include "bdsym/model_io.hpp"
#include "bdsym/rates.hpp"

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = bdsym::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("prob reaches the binomial stationary law") {
  const RunResult r = run_cli({"prob", "--preset", "ehrenfest", "--N", "4", "--alpha", "1",
                               "--k", "2", "--t", "1e9"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("t,state,probability,method\n", 0) == 0);
  // row converges to [1,4,6,4,1]/16
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);  // header
  const double expect[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  for (int n = 0; n <= 4; ++n) {
    REQUIRE(std::getline(lines, line));
    std::istringstream cells(line);
    std::string t_cell, state_cell, p_cell, method_cell;
    std::getline(cells, t_cell, ',');
    std::getline(cells, state_cell, ',');
    std::getline(cells, p_cell, ',');
    std::getline(cells, method_cell, ',');
    CHECK(std::stol(state_cell) == n);
    CHECK(std::stod(p_cell) == doctest::Approx(expect[n]).epsilon(1e-12));
    CHECK(method_cell == "closed_form");
  }
}

TEST_CASE("argument errors exit with code 2") {
  CHECK(run_cli({"prob", "--preset", "ehrenfest", "--N", "4", "--alpha", "1"}).code == 2);
  CHECK(run_cli({"nonsense"}).code == 2);
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"prob", "--preset", "no_such_preset", "--k", "1"}).code == 2);
  const RunResult bad = run_cli({"prob", "--preset", "constant_absorbing", "--N", "1", "--lambda",
                                 "1", "--mu", "1", "--k", "1"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("N must exceed 1") != std::string::npos);
}

TEST_CASE("figure emitters are byte deterministic and caption-parameterized") {
  TempFile f1("cli_fig_1a.csv");
  const RunResult a = run_cli({"figure", "1a", "--steps", "40", "--out", f1.path});
  REQUIRE(a.code == 0);
  const std::string first = slurp(f1.path);
  CHECK(first.rfind("t,k6,k7,k8,k9\n", 0) == 0);
  const RunResult b = run_cli({"figure", "1a", "--steps", "40", "--out", f1.path});
  REQUIRE(b.code == 0);
  CHECK(slurp(f1.path) == first);

  TempFile f2("cli_fig_2b.csv");
  REQUIRE(run_cli({"figure", "2b", "--steps", "16", "--out", f2.path}).code == 0);
  CHECK(slurp(f2.path).rfind("t,n7,n8,n9\n", 0) == 0);
  TempFile f4("cli_fig_4a.csv");
  REQUIRE(run_cli({"figure", "4a", "--steps", "16", "--out", f4.path}).code == 0);
  CHECK(slurp(f4.path).rfind("t,n6,n7,n8,n9\n", 0) == 0);
  CHECK(run_cli({"figure", "9z"}).code == 2);
}

TEST_CASE("fpt picks the closed route on symmetric models and renewal otherwise") {
  const RunResult closed =
      run_cli({"fpt", "--preset", "constant_absorbing", "--N", "20", "--lambda", "1", "--mu",
               "0.5", "--k", "9", "--tmin", "0.02", "--tmax", "2", "--steps", "100"});
  REQUIRE(closed.code == 0);
  CHECK(closed.out.rfind("# method: symmetric-closed\n", 0) == 0);

  // off-midpoint target forces the renewal route
  const RunResult renewal =
      run_cli({"fpt", "--preset", "constant_absorbing", "--N", "20", "--lambda", "1", "--mu",
               "0.5", "--k", "5", "--s", "8", "--tmin", "0.02", "--tmax", "2", "--steps", "100",
               "--tol", "1e-2"});
  REQUIRE(renewal.code == 0);
  CHECK(renewal.out.rfind("# method: renewal\n", 0) == 0);
}

TEST_CASE("avoid emits the same-side grid") {
  const RunResult r =
      run_cli({"avoid", "--preset", "constant_absorbing", "--N", "20", "--lambda", "1", "--mu",
               "0.5", "--k", "9", "--t", "0.5", "--t", "1.0"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("# method: symmetric-closed\nt,state,value\n", 0) == 0);
  // states 1..9 at two times
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2 + 18);
}

TEST_CASE("model JSON file round-trips through the CLI") {
  using namespace bdsym;
  TempFile mf("cli_model.json");
  PresetParams p;
  p.N = 10;
  p.lambda = 1.0;
  p.mu = 2.0;
  save_model(build_preset(Preset::ConstantAbsorbing, p), mf.path);
  const RunResult direct = run_cli({"prob", "--preset", "constant_absorbing", "--N", "10",
                                    "--lambda", "1", "--mu", "2", "--k", "3", "--t", "0.7"});
  const RunResult via_file = run_cli({"prob", "--model", mf.path, "--k", "3", "--t", "0.7"});
  REQUIRE(direct.code == 0);
  REQUIRE(via_file.code == 0);
  CHECK(direct.out == via_file.out);
}

TEST_CASE("twod writes the crossing bundle") {
  TempFile h("cli_twod.h.csv"), g("cli_twod.g.csv"), pi("cli_twod.pi.json");
  const RunResult r = run_cli({"twod", "--lambda1", "2", "--lambda2", "1", "--mu1", "1", "--mu2",
                               "2", "--k1", "0", "--k2", "-1", "--r", "0", "--tmin", "0.1",
                               "--tmax", "2", "--steps", "8", "--out", "cli_twod"});
  REQUIRE(r.code == 0);
  CHECK(slurp(h.path).rfind("t,h_r\n", 0) == 0);
  CHECK(slurp(g.path).rfind("t,x,g\n", 0) == 0);
  const std::string pjson = slurp(pi.path);
  CHECK(pjson.find("\"pi\": 0.5") != std::string::npos);
  CHECK(pjson.find("geometric") != std::string::npos);
}

TEST_CASE("validate passes on a pristine build") {
  const RunResult r = run_cli({"validate"});
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS criterion 1") != std::string::npos);
  CHECK(r.out.find("PASS criterion 10") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("simulate writes deterministic estimates") {
  const std::vector<std::string> args = {"simulate", "--observable", "row",     "--preset",
                                         "ehrenfest", "--N",         "6",       "--alpha",
                                         "1",         "--k",         "2",       "--t",
                                         "0.5",       "--R",         "2000",    "--seed",
                                         "9"};
  const RunResult a = run_cli(args);
  const RunResult b = run_cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("observable,estimate,stderr,R\n", 0) == 0);
}
