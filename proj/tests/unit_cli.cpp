#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gkdvlab/config.hpp"
#include "gkdvlab/io.hpp"

using namespace gkdvlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("gkdvlab_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::vector<std::string>& args, Metrics* m = nullptr) {
  std::ostringstream sink;
  return cli_main(args, m, &sink);
}

}  // namespace

TEST_CASE("grid parsing and validation") {
  CHECK(parse_grid("1024,40", false).n == 1024);
  CHECK(parse_grid("1024,40,1e-3", true).dt == doctest::Approx(1e-3));
  CHECK_THROWS_WITH_AS(parse_grid("1000,40,1e-4", false),
                       doctest::Contains("N must be a power of two"),
                       UsageError);
  CHECK_THROWS_AS(parse_grid("1024", false), UsageError);
  CHECK_THROWS_AS(parse_grid("1024,-3", false), UsageError);
  CHECK_THROWS_AS(parse_grid("1024,40", true), UsageError);
}

TEST_CASE("valid solve invocation writes a reproducible run") {
  TempDir tmp("solve");
  const std::string out = (tmp.path / "run").string();
  const int code = run({"solve", "--model", "mkdv", "--ic", "mkdv_soliton",
                        "--ic-lambda", "1", "--grid", "256,32,1e-3", "--T",
                        "0.01", "--out", out});
  CHECK(code == 0);
  CHECK(fs::exists(tmp.path / "run" / "manifest.json"));
  CHECK(fs::exists(tmp.path / "run" / "manifest.cfg"));
  CHECK(fs::exists(tmp.path / "run" / "diagnostics.csv"));
  CHECK(fs::exists(tmp.path / "run" / "final_state.csv"));

  // the emitted manifest round-trips through the config file path
  const std::string out2 = (tmp.path / "run2").string();
  const int code2 = run({"solve", "--config",
                         (tmp.path / "run" / "manifest.cfg").string(), "--out",
                         out2});
  CHECK(code2 == 0);
  CHECK(slurp(tmp.path / "run" / "manifest.json") ==
        slurp(tmp.path / "run2" / "manifest.json"));
  CHECK(slurp(tmp.path / "run" / "final_state.csv") ==
        slurp(tmp.path / "run2" / "final_state.csv"));
}

TEST_CASE("bad grid is a usage error naming N") {
  const int code = run({"solve", "--model", "mkdv", "--grid", "1000,40,1e-4",
                        "--T", "0.01"});
  CHECK(code == 1);
}

TEST_CASE("config file values are overridden by flags") {
  TempDir tmp("cfg");
  const fs::path cfg = tmp.path / "run.cfg";
  {
    std::ofstream out(cfg);
    out << "[solve]\n"
        << "model = mkdv\n"
        << "ic = mkdv_soliton\n"
        << "ic-lambda = 1\n"
        << "grid = \"256,32,1e-3\"\n"
        << "T = 0.02\n";
  }
  const std::string out = (tmp.path / "run").string();
  const int code = run({"solve", "--config", cfg.string(), "--T", "0.01",
                        "--out", out});
  CHECK(code == 0);
  ordered_json j;
  std::ifstream in(tmp.path / "run" / "manifest.json");
  in >> j;
  CHECK(j["t_final"].get<double>() == doctest::Approx(0.01));
}

TEST_CASE("unknown config keys are rejected") {
  TempDir tmp("badcfg");
  const fs::path cfg = tmp.path / "run.cfg";
  {
    std::ofstream out(cfg);
    out << "[solve]\n"
        << "model = mkdv\n"
        << "grid = \"256,32,1e-3\"\n"
        << "no-such-key = 1\n";
  }
  const int code = run({"solve", "--config", cfg.string(), "--T", "0.01",
                        "--out", (tmp.path / "r").string()});
  CHECK(code == 1);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  TempDir tmp("det");
  const std::vector<std::string> base = {
      "commutator", "--lambda", "4",    "--b",    "0",  "--ensemble", "8",
      "--grid",     "256,30",   "--seed", "7",    "--jobs", "2"};
  for (const char* name : {"a", "b"}) {
    auto args = base;
    args.push_back("--out");
    args.push_back((tmp.path / name / "report.json").string());
    CHECK(run(args) == 0);
  }
  CHECK(slurp(tmp.path / "a" / "report.json") ==
        slurp(tmp.path / "b" / "report.json"));
}

TEST_CASE("weight-check subcommand") {
  TempDir tmp("weight");
  Metrics m;
  const int code = run({"weight-check", "--r-max", "20", "--step", "0.01",
                        "--out", (tmp.path / "w.csv").string(), "--json",
                        (tmp.path / "w.json").string()},
                       &m);
  CHECK(code == 0);
  CHECK(m.at("pass") == 1.0);
  CHECK(m.at("c0_measured") > 0.0);
  CHECK(fs::exists(tmp.path / "w.csv"));
  CHECK(fs::exists(tmp.path / "w.json"));
}

TEST_CASE("exact and exact-residual subcommands") {
  TempDir tmp("exact");
  CHECK(run({"exact", "--kind", "mkdv_breather", "--lambda", "1", "--mu", "2",
             "--grid", "1024,60", "--t", "0.25", "--out",
             (tmp.path / "b.csv").string()}) == 0);
  CHECK(fs::exists(tmp.path / "b.csv"));

  Metrics m;
  CHECK(run({"exact-residual", "--kind", "mkdv_soliton", "--lambda", "1",
             "--grid", "2048,80"},
            &m) == 0);
  CHECK(m.at("sup_residual") < 1e-6);
  CHECK(m.at("decay_rate_fit") == doctest::Approx(1.0).epsilon(0.02));

  // tails hitting the boundary is a numerical-contract failure: exit 2
  CHECK(run({"exact-residual", "--kind", "mkdv_soliton", "--lambda", "0.3",
             "--grid", "64,5"}) == 2);
}

TEST_CASE("blow-up exits with code 3") {
  TempDir tmp("blow");
  // sparse diagnostics so the ceiling trips before the radiation floor
  // reaches the boundary guard
  const int code = run({"solve", "--model", "power", "--j", "4", "--coeff",
                        "-5", "--ic", "gaussian", "--ic-amp", "2.5",
                        "--ic-sigma", "1", "--grid", "512,20,1e-4", "--T", "1",
                        "--ceiling", "3.6", "--diag-every", "2000", "--out",
                        (tmp.path / "run").string()});
  CHECK(code == 3);
  CHECK(fs::exists(tmp.path / "run" / "blowup.json"));
  CHECK(fs::exists(tmp.path / "run" / "last_good_state.csv"));
}

TEST_CASE("sweep over a lambda axis") {
  TempDir tmp("sweep");
  Metrics m;
  const int code =
      run({"sweep", "--sub", "commutator", "--axis", "lambda=1,2,4", "--set",
           "grid=256,30", "--set", "ensemble=4", "--set", "seed=3", "--out",
           tmp.path.string(), "--jobs", "2"},
          &m);
  CHECK(code == 0);
  CHECK(m.at("failures") == 0.0);
  CHECK(fs::exists(tmp.path / "summary.csv"));
  CHECK(fs::exists(tmp.path / "point_000" / "report.json"));
  CHECK(fs::exists(tmp.path / "point_002" / "report.json"));
  const std::string summary = slurp(tmp.path / "summary.csv");
  CHECK(summary.find("measured_A0") != std::string::npos);
  CHECK(summary.find("lambda") != std::string::npos);
}

TEST_CASE("sweep usage errors") {
  CHECK(run({"sweep", "--sub", "commutator", "--axis", "lambda="}) == 1);
  CHECK(run({"sweep", "--sub", "nope", "--axis", "lambda=1"}) == 1);
  CHECK(run({"sweep", "--axis", "lambda=1"}) == 1);
}

TEST_CASE("GKDV_LAB_OUT is the default output root") {
  TempDir tmp("envroot");
  setenv("GKDV_LAB_OUT", tmp.path.c_str(), 1);
  CHECK(resolve_out("x.csv") == (tmp.path / "x.csv").string());
  CHECK(resolve_out("/abs/x.csv") == "/abs/x.csv");
  unsetenv("GKDV_LAB_OUT");
  CHECK(resolve_out("x.csv") == "x.csv");
}

TEST_CASE("diagnose over a stored run") {
  TempDir tmp("diag");
  const std::string rdir = (tmp.path / "run").string();
  CHECK(run({"solve", "--model", "mkdv", "--ic", "mkdv_soliton", "--ic-lambda",
             "2", "--ic-x0", "1.5", "--grid", "1024,20,2e-4", "--T", "1.5",
             "--diag-every", "500", "--store-every", "10", "--out",
             rdir}) == 0);
  Metrics m;
  const int code = run({"diagnose", "--run", rdir, "--lambda", "1", "--b", "4",
                        "--lambda-grid", "0.5:3:6", "--window", "triangle",
                        "--center", "1", "--out",
                        (tmp.path / "d").string()},
                       &m);
  CHECK(code == 0);
  CHECK(fs::exists(tmp.path / "d" / "diagnose.csv"));
  CHECK(fs::exists(tmp.path / "d" / "diagnose.json"));
  CHECK(m.count("residual_I"));
  CHECK(m.at("residual_I") < 1e-2);
  CHECK(m.at("max_admissible_lambda") == doctest::Approx(2.0).epsilon(0.1));

  // diagnose without stored states is a usage error
  const std::string rdir2 = (tmp.path / "run2").string();
  CHECK(run({"solve", "--model", "mkdv", "--ic", "mkdv_soliton", "--grid",
             "256,32,1e-3", "--T", "0.01", "--out", rdir2}) == 0);
  CHECK(run({"diagnose", "--run", rdir2, "--out",
             (tmp.path / "d2").string()}) == 1);
}
