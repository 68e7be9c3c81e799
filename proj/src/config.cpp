#include "gkdvlab/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "gkdvlab/diagnostics.hpp"
#include "gkdvlab/io.hpp"
#include "gkdvlab/operators.hpp"
#include "gkdvlab/solutions.hpp"
#include "gkdvlab/solver.hpp"
#include "gkdvlab/weight.hpp"

namespace gkdvlab {

namespace fs = std::filesystem;

GridSpec parse_grid(const std::string& text, bool need_dt) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() < 2 || parts.size() > 3)
    throw UsageError("grid must be N,L or N,L,dt, got '" + text + "'");
  GridSpec g;
  try {
    g.n = std::stoi(parts[0]);
  } catch (...) {
    throw UsageError("grid N is not an integer: '" + parts[0] + "'");
  }
  if (!GridSpec::power_of_two(g.n) || g.n < 64)
    throw UsageError("grid N must be a power of two >= 64, got " + parts[0]);
  try {
    g.half_length = std::stod(parts[1]);
  } catch (...) {
    throw UsageError("grid L is not a number: '" + parts[1] + "'");
  }
  if (!(g.half_length > 0)) throw UsageError("grid L must be positive");
  if (parts.size() == 3) {
    try {
      g.dt = std::stod(parts[2]);
    } catch (...) {
      throw UsageError("grid dt is not a number: '" + parts[2] + "'");
    }
  }
  if (need_dt && g.dt == 0.0)
    throw UsageError("this subcommand needs grid N,L,dt");
  return g;
}

std::string resolve_out(const std::string& path) {
  if (path.empty()) return path;
  const char* root = std::getenv("GKDV_LAB_OUT");
  if (root && *root && fs::path(path).is_relative())
    return (fs::path(root) / path).string();
  return path;
}

namespace {

SolutionSpec make_solution(const std::string& kind, double lambda, double mu,
                           int j, double x0) {
  if (kind == "mkdv_soliton") return SolutionSpec::mkdv_soliton(lambda, x0);
  if (kind == "gkdv_soliton") return SolutionSpec::gkdv_soliton(j, lambda, x0);
  if (kind == "mkdv_breather")
    return SolutionSpec::mkdv_breather(lambda, mu, x0);
  if (kind == "complex_breather")
    return SolutionSpec::complex_breather(lambda, mu, x0);
  throw UsageError("unknown solution kind '" + kind + "'");
}

NonlinearitySpec make_model(const std::string& name, int j, double coeff,
                            bool coeff_set, double a1, double a2) {
  if (name == "linear") return NonlinearitySpec::none();
  if (name == "kdv") return NonlinearitySpec::gardner(1.0, 0.0);
  if (name == "mkdv") return NonlinearitySpec::mkdv();
  if (name == "gardner") return NonlinearitySpec::gardner(a1, a2);
  if (name == "power")
    return coeff_set ? NonlinearitySpec::pure_power_coeff(j, coeff)
                     : NonlinearitySpec::pure_power(j);
  if (name == "complex") return NonlinearitySpec::complex_cubic();
  throw UsageError("unknown model '" + name + "'");
}

// ---------------------------------------------------------------------------
// subcommand option bags
// ---------------------------------------------------------------------------

struct WeightCheckOpts {
  double r_max = 100.0;
  double step = 1e-3;
  double scale = 1.0;
  std::string out, json_out;
};

struct ExactOpts {
  std::string kind = "mkdv_soliton";
  double lambda = 1.0, mu = 2.0, x0 = 0.0, t = 0.0;
  int j = 1;
  std::string grid = "2048,80";
  std::string out;
  double fit_lo = 0.0, fit_hi = 0.0;  // 0: choose from lambda
};

struct CommutatorOpts {
  double lambda = 4.0, b = 0.0;
  int ensemble = 32;
  std::string grid = "1024,30";
  uint64_t seed = 1;
  int jobs = 1;
  std::string out;
};

struct SolveOpts {
  std::string model = "mkdv";
  int j = 1;
  double coeff = 0.0;
  bool coeff_set = false;
  double alpha1 = 0.0, alpha2 = 0.0;
  std::string ic = "mkdv_soliton";
  double ic_lambda = 1.0, ic_mu = 2.0, ic_x0 = 0.0;
  int ic_j = 1;
  double ic_amp = 1.0, ic_sigma = 1.0, ic_center = 0.0;
  int ic_mode = 1;
  std::string grid = "1024,40,1e-3";
  double T = 1.0;
  int diag_every = 10, store_every = 0;
  double ceiling = 1e6;
  uint64_t seed = 0;
  bool track_weighted = false;
  double weight_lambda = 0.0, weight_b = 0.0;
  std::string out = "run";
};

struct DiagnoseOpts {
  std::string run;
  double lambda = 1.0, b = 0.0;
  std::string lambda_grid;  // "a:b:n"
  std::string window = "triangle";
  double center = 1.0, t0 = 0.0, t1 = 0.0;
  std::string out = "diagnose";
};

struct SweepOpts {
  std::string sub;
  std::string axis;
  std::vector<std::string> sets;
  std::string out = "sweep";
  int jobs = 1;
  std::string config;
};

// ---------------------------------------------------------------------------
// runners
// ---------------------------------------------------------------------------

int run_weight_check(const WeightCheckOpts& o, Metrics* metrics,
                     std::ostream& os) {
  const WeightProfile w = build_weight(o.scale);
  const WeightAudit audit = w.audit(o.r_max, o.step);

  if (!o.out.empty()) {
    const fs::path path = resolve_out(o.out);
    std::ostringstream ss;
    ss << "r,phi0,d1,d2,d3,d4,d5,d6,ok_second,ok_monotone,ratio_high,"
          "ratio_exp\n";
    const long npts = std::lround(o.r_max / o.step);
    // keep the dump readable: at most ~4000 rows
    const long stride = std::max(1L, npts / 4000);
    double prev = 0.0;
    bool have_prev = false;
    for (long i = 0; i <= npts; i += stride) {
      const double r = i * o.step;
      std::array<double, 7> d;
      for (int k = 0; k <= 6; ++k) d[k] = w.derivative(k, r);
      const double p2 = w.phi0_derivative(2, r);
      double ratio = 0.0;
      for (int k = 3; k <= 6; ++k)
        ratio = std::max(ratio, std::abs(w.phi0_derivative(k, r)) / p2);
      const bool ok2 = p2 > 0.0 && p2 <= 1.0 + 1e-14;
      const bool okm = !have_prev || r <= 1.5 || p2 < prev;
      prev = p2;
      have_prev = true;
      ss << fmt17(r);
      for (int k = 0; k <= 6; ++k) ss << ',' << fmt17(d[k]);
      ss << ',' << (ok2 ? 1 : 0) << ',' << (okm ? 1 : 0) << ','
         << fmt17(ratio) << ',' << fmt17(std::exp(-0.5 * r) / p2) << '\n';
    }
    write_text_file(path, ss.str());
  }

  ordered_json j = to_json(audit);
  j["scale"] = o.scale;
  os << j.dump(2) << "\n";
  if (!o.json_out.empty()) write_json_file(resolve_out(o.json_out), j);
  if (metrics) {
    (*metrics)["c0_measured"] = audit.c0;
    (*metrics)["C0_measured"] = audit.C0;
    (*metrics)["pass"] = audit.pass() ? 1.0 : 0.0;
  }
  return audit.pass() ? 0 : 2;
}

int run_exact(const ExactOpts& o, Metrics* metrics, std::ostream& os) {
  const SolutionSpec spec =
      make_solution(o.kind, o.lambda, o.mu, o.j, o.x0);
  const GridSpec grid = parse_grid(o.grid, false);
  const SampledField f = sample(spec, grid, o.t);
  if (!o.out.empty()) save_field_csv(resolve_out(o.out), f);
  ordered_json j = to_json(spec);
  j["t"] = o.t;
  j["max_abs"] = f.max_abs();
  os << j.dump(2) << "\n";
  if (metrics) (*metrics)["max_abs"] = f.max_abs();
  return 0;
}

int run_exact_residual(const ExactOpts& o, Metrics* metrics,
                       std::ostream& os) {
  const SolutionSpec spec =
      make_solution(o.kind, o.lambda, o.mu, o.j, o.x0);
  const GridSpec grid = parse_grid(o.grid, false);
  SpectralWorkspace ws(grid.n);
  const NonlinearitySpec nl = spec.matching_nonlinearity();
  const double sup = residual_sup(spec, nl, grid, o.t, ws);
  const double lo = o.fit_lo > 0 ? o.fit_lo : 4.0 / spec.lambda;
  const double hi = o.fit_hi > 0 ? o.fit_hi : 14.0 / spec.lambda;
  const double rate = tail_decay_rate(spec, o.t, lo, hi);
  const double mal = max_admissible_lambda(sample(spec, grid, o.t),
                                           spec.envelope_speed(), o.t);
  ordered_json j = to_json(spec);
  j["model"] = to_json(nl);
  j["t"] = o.t;
  j["sup_residual"] = sup;
  j["decay_rate_fit"] = rate;
  j["fit_window"] = {lo, hi};
  j["max_admissible_lambda"] = mal;
  os << j.dump(2) << "\n";
  if (!o.out.empty()) write_json_file(resolve_out(o.out), j);
  if (metrics) {
    (*metrics)["sup_residual"] = sup;
    (*metrics)["decay_rate_fit"] = rate;
    (*metrics)["max_admissible_lambda"] = mal;
  }
  return 0;
}

int run_commutator(const CommutatorOpts& o, Metrics* metrics,
                   std::ostream& os) {
  const GridSpec grid = parse_grid(o.grid, false);
  const FrameSpec frame = FrameSpec::make(o.lambda, o.b);
  const auto fields = random_ensemble(grid, o.ensemble, o.seed);
  const EnsembleReport rep = run_commutator_ensemble(frame, fields, o.jobs);
  ordered_json j = to_json(rep);
  j["grid"] = to_json(grid);
  j["seed"] = o.seed;
  os << j.dump(2) << "\n";
  if (!o.out.empty()) write_json_file(resolve_out(o.out), j);
  if (metrics) {
    (*metrics)["measured_A0"] = rep.min_ratio;
    (*metrics)["max_identity_rel"] = rep.max_identity_rel;
    (*metrics)["max_composition_rel"] = rep.max_composition_rel;
  }
  return 0;
}

RunManifest build_manifest(const SolveOpts& o) {
  RunManifest m;
  m.model = make_model(o.model, o.j, o.coeff, o.coeff_set, o.alpha1, o.alpha2);
  m.grid = parse_grid(o.grid, true);
  if (o.ic == "zero")
    m.ic = ICSpec::zero();
  else if (o.ic == "gaussian")
    m.ic = ICSpec::gaussian(o.ic_amp, o.ic_sigma, o.ic_center);
  else if (o.ic == "cosine")
    m.ic = ICSpec::cosine(o.ic_amp, o.ic_mode);
  else
    m.ic = ICSpec::exact(
        make_solution(o.ic, o.ic_lambda, o.ic_mu, o.ic_j, o.ic_x0));
  m.t_final = o.T;
  m.diag_every = o.diag_every;
  m.store_every = o.store_every;
  m.blowup_ceiling = o.ceiling;
  m.seed = o.seed;
  m.track_weighted = o.track_weighted;
  m.diag_lambda = o.weight_lambda;
  m.diag_b = o.weight_b;
  return m;
}

int run_solve(const SolveOpts& o, Metrics* metrics, std::ostream& os) {
  const RunManifest manifest = build_manifest(o);
  manifest.validate();
  const fs::path dir = resolve_out(o.out);
  GkdvSolver solver(manifest.model, manifest.grid);
  try {
    RunResult result = solver.run(manifest);
    save_run(dir, result);
    const auto& s = result.series;
    ordered_json j;
    j["t_final"] = result.final_state.t;
    j["l2_initial"] = s.l2.front();
    j["l2_final"] = s.l2.back();
    j["l2_rel_drift"] =
        std::abs(s.l2.back() - s.l2.front()) / std::max(s.l2.front(), 1e-300);
    j["mass_drift"] = std::abs(s.mass_re.back() - s.mass_re.front());
    j["peak_x_final"] = s.peak_x.back();
    os << j.dump(2) << "\n";
    if (metrics) {
      (*metrics)["l2_rel_drift"] = j["l2_rel_drift"].get<double>();
      (*metrics)["mass_drift"] = j["mass_drift"].get<double>();
      (*metrics)["peak_x_final"] = s.peak_x.back();
    }
    return 0;
  } catch (const BlowUpError& e) {
    fs::create_directories(dir);
    write_json_file(dir / "manifest.json", to_json(manifest));
    save_field_csv(dir / "last_good_state.csv", e.last_good);
    ordered_json j;
    j["blowup"] = true;
    j["t_last_good"] = e.last_good.t;
    j["max_abs_last_good"] = e.last_good.max_abs();
    write_json_file(dir / "blowup.json", j);
    os << j.dump(2) << "\n";
    throw;
  }
}

int run_diagnose(const DiagnoseOpts& o, Metrics* metrics, std::ostream& os) {
  const StoredRun run = load_run(resolve_out(o.run));
  if (run.fields.empty())
    throw UsageError("run directory has no stored states (solve with "
                     "--store-every)");
  const FrameSpec frame = FrameSpec::make(o.lambda, o.b);
  const GridSpec& grid = run.manifest.grid;
  SpectralWorkspace ws(grid.n);
  const fs::path dir = resolve_out(o.out);

  std::vector<std::vector<double>> rows;
  for (const auto& u : run.fields) {
    const ConjugatedFrame op(frame, grid, u.t);
    const cvec f = op.conjugate(u.values);
    const cvec Sf = op.apply_S(ws, f);
    std::vector<double> row{u.t,
                            u.mass().real(),
                            u.l2_sq(),
                            h1_norm_sq(u, ws),
                            m3_functional(u, o.b, u.t)};
    const WeightedNorm w2l = weighted_norm(u, o.lambda, o.b, u.t, 0, ws);
    row.push_back(w2l.overflowed ? std::numeric_limits<double>::infinity()
                                 : w2l.value);
    for (int k = 1; k <= 3; ++k) {
      const WeightedNorm wk = weighted_norm(u, o.lambda, o.b, u.t, k, ws);
      row.push_back(wk.overflowed ? std::numeric_limits<double>::infinity()
                                  : wk.value);
    }
    row.push_back(inner_real(grid, f, f));
    row.push_back(inner_real(grid, Sf, f));
    row.push_back(inner_real(grid, Sf, Sf));
    rows.push_back(std::move(row));
  }
  write_csv(dir / "diagnose.csv",
            {"t", "mass", "l2", "h1", "w_exp1", "w_exp2lambda", "w_k1", "w_k2",
             "w_k3", "H", "SfF", "Sf_sq"},
            rows);

  ordered_json j;
  const SampledField& last = run.fields.back();
  try {
    j["max_admissible_lambda"] = max_admissible_lambda(last, o.b, last.t);
  } catch (const Error& e) {
    j["max_admissible_lambda_error"] = e.what();
  }

  if (!o.lambda_grid.empty()) {
    double a = 0, b = 0;
    int n = 0;
    if (std::sscanf(o.lambda_grid.c_str(), "%lf:%lf:%d", &a, &b, &n) != 3 ||
        n < 2)
      throw UsageError("lambda-grid must be a:b:n with n >= 2");
    ordered_json table = ordered_json::array();
    for (int i = 0; i < n; ++i) {
      const double lam = a + (b - a) * i / (n - 1);
      const WeightedNorm wn = weighted_norm(last, lam, o.b, last.t, 0, ws);
      table.push_back({{"lambda", lam},
                       {"value", wn.value},
                       {"overflowed", wn.overflowed}});
    }
    j["weighted_norm_sweep"] = table;
  }

  try {
    WindowSpec window = o.window == "ramp"
                            ? WindowSpec::smooth_ramp(o.t0, o.t1 > 0
                                                                ? o.t1
                                                                : last.t)
                            : WindowSpec::triangle(o.center);
    const TimeIdentityResult ti =
        time_identity_check(run.fields, frame, run.manifest.model, window, ws);
    j["residual_I"] = ti.residual_I;
    j["residual_II"] = ti.residual_II;
    if (metrics) {
      (*metrics)["residual_I"] = ti.residual_I;
      (*metrics)["residual_II"] = ti.residual_II;
    }
  } catch (const Error& e) {
    j["time_identity_error"] = e.what();
  }

  if (!run.manifest.model.is_complex()) {
    const ClaimTwoResult c2 =
        claim2_identity_check(last, frame, run.manifest.model, ws);
    const ClaimThreeResult c3 =
        claim3_bound_check(last, frame, run.manifest.model, ws);
    j["claim2"] = {{"lhs", c2.lhs},
                   {"rhs", c2.rhs},
                   {"lhs_over_lambda", c2.lhs_over_lambda}};
    j["claim3"] = {{"ratio", c3.ratio},
                   {"m2", c3.m2},
                   {"m3", c3.m3},
                   {"pointwise_max", c3.pointwise_max},
                   {"pointwise_bound", c3.pointwise_bound}};
    if (metrics) (*metrics)["claim3_ratio"] = c3.ratio;
  }
  write_json_file(dir / "diagnose.json", j);
  os << j.dump(2) << "\n";
  if (metrics && j.contains("max_admissible_lambda"))
    (*metrics)["max_admissible_lambda"] =
        j["max_admissible_lambda"].get<double>();
  return 0;
}

int run_sweep(const SweepOpts& o, Metrics* metrics, std::ostream& os);

// ---------------------------------------------------------------------------
// CLI wiring
// ---------------------------------------------------------------------------

struct Cli {
  CLI::App app{"Carleman-weighted commutator and decay workbench for "
               "KdV-type equations"};
  WeightCheckOpts weight;
  ExactOpts exact;
  CommutatorOpts comm;
  SolveOpts solve;
  DiagnoseOpts diagnose;
  SweepOpts sweep;
  CLI::App* sub_weight = nullptr;
  CLI::App* sub_exact = nullptr;
  CLI::App* sub_exact_res = nullptr;
  CLI::App* sub_comm = nullptr;
  CLI::App* sub_solve = nullptr;
  CLI::App* sub_diag = nullptr;
  CLI::App* sub_sweep = nullptr;

  Cli() {
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key = value file with [subcommand] sections");
    app.allow_config_extras(CLI::config_extras_mode::error);

    sub_weight = app.add_subcommand("weight-check",
                                    "audit the Carleman weight constraints");
    sub_weight->configurable();
    sub_weight->add_option("--r-max", weight.r_max, "audit range [0, r-max]");
    sub_weight->add_option("--step", weight.step, "audit grid step");
    sub_weight->add_option("--scale", weight.scale, "weight scale (1 or 0.25)");
    sub_weight->add_option("--out", weight.out, "CSV output path");
    sub_weight->add_option("--json", weight.json_out, "JSON summary path");

    auto add_exact_opts = [this](CLI::App* s, ExactOpts& e) {
      s->configurable();
      s->add_option("--kind", e.kind,
                    "mkdv_soliton|gkdv_soliton|mkdv_breather|complex_breather");
      s->add_option("--lambda", e.lambda, "amplitude/decay parameter");
      s->add_option("--mu", e.mu, "breather frequency");
      s->add_option("--j", e.j, "gkdv power");
      s->add_option("--x0", e.x0, "translation");
      s->add_option("--grid", e.grid, "N,L");
      s->add_option("--t", e.t, "evaluation time");
      s->add_option("--out", e.out, "output path");
    };
    sub_exact = app.add_subcommand("exact", "sample a closed-form solution");
    add_exact_opts(sub_exact, exact);
    sub_exact_res = app.add_subcommand(
        "exact-residual", "PDE residual and tail decay of a closed form");
    add_exact_opts(sub_exact_res, exact);
    sub_exact_res->add_option("--fit-lo", exact.fit_lo, "tail fit window lo");
    sub_exact_res->add_option("--fit-hi", exact.fit_hi, "tail fit window hi");

    sub_comm = app.add_subcommand("commutator",
                                  "commutator breakdown over a random ensemble");
    sub_comm->configurable();
    sub_comm->add_option("--lambda", comm.lambda, "conjugation strength (>= 1)");
    sub_comm->add_option("--b", comm.b, "frame speed");
    sub_comm->add_option("--ensemble", comm.ensemble, "ensemble size");
    sub_comm->add_option("--grid", comm.grid, "N,L");
    sub_comm->add_option("--seed", comm.seed, "ensemble seed");
    sub_comm->add_option("--jobs", comm.jobs, "parallel workers");
    sub_comm->add_option("--out", comm.out, "JSON output path");

    sub_solve = app.add_subcommand("solve", "pseudospectral time integration");
    sub_solve->configurable();
    sub_solve->add_option("--model", solve.model,
                          "linear|kdv|mkdv|gardner|power|complex");
    sub_solve->add_option("--j", solve.j, "pure power exponent");
    auto* co = sub_solve->add_option("--coeff", solve.coeff,
                                     "pure power coefficient (default -j)");
    co->each([this](const std::string&) { solve.coeff_set = true; });
    sub_solve->add_option("--alpha1", solve.alpha1, "gardner alpha1");
    sub_solve->add_option("--alpha2", solve.alpha2, "gardner alpha2");
    sub_solve->add_option("--ic", solve.ic,
                          "initial condition kind (solution name, gaussian, "
                          "cosine, zero)");
    sub_solve->add_option("--ic-lambda", solve.ic_lambda, "IC lambda");
    sub_solve->add_option("--ic-mu", solve.ic_mu, "IC mu");
    sub_solve->add_option("--ic-j", solve.ic_j, "IC gkdv power");
    sub_solve->add_option("--ic-x0", solve.ic_x0, "IC translation");
    sub_solve->add_option("--ic-amp", solve.ic_amp, "IC amplitude");
    sub_solve->add_option("--ic-sigma", solve.ic_sigma, "gaussian width");
    sub_solve->add_option("--ic-center", solve.ic_center, "gaussian center");
    sub_solve->add_option("--ic-mode", solve.ic_mode, "cosine mode");
    sub_solve->add_option("--grid", solve.grid, "N,L,dt");
    sub_solve->add_option("--T", solve.T, "final time");
    sub_solve->add_option("--diag-every", solve.diag_every,
                          "diagnostic cadence in steps");
    sub_solve->add_option("--store-every", solve.store_every,
                          "field storage cadence in steps (0 = none)");
    sub_solve->add_option("--ceiling", solve.ceiling, "blow-up ceiling");
    sub_solve->add_option("--seed", solve.seed, "seed recorded in manifest");
    sub_solve->add_flag("--track-weighted", solve.track_weighted,
                        "record weighted norms along the run");
    sub_solve->add_option("--weight-lambda", solve.weight_lambda,
                          "weighted-norm rate");
    sub_solve->add_option("--weight-b", solve.weight_b, "weighted-norm frame");
    sub_solve->add_option("--out", solve.out, "run output directory");

    sub_diag = app.add_subcommand("diagnose", "decay diagnostics over a run");
    sub_diag->configurable();
    sub_diag->add_option("--run", diagnose.run, "run directory")->required();
    sub_diag->add_option("--lambda", diagnose.lambda, "frame strength (>= 1)");
    sub_diag->add_option("--b", diagnose.b, "frame speed");
    sub_diag->add_option("--lambda-grid", diagnose.lambda_grid,
                         "a:b:n weighted-norm sweep");
    sub_diag->add_option("--window", diagnose.window, "triangle|ramp");
    sub_diag->add_option("--center", diagnose.center, "triangle center");
    sub_diag->add_option("--t0", diagnose.t0, "ramp start");
    sub_diag->add_option("--t1", diagnose.t1, "ramp end (default: last time)");
    sub_diag->add_option("--out", diagnose.out, "output directory");

    sub_sweep = app.add_subcommand("sweep", "run a subcommand over an axis");
    sub_sweep->add_option("--sub", sweep.sub, "subcommand to sweep")->required();
    sub_sweep->add_option("--axis", sweep.axis, "key=v1,v2,... parameter axis")
        ->required();
    sub_sweep->add_option("--set", sweep.sets,
                          "template key=value (repeatable)");
    sub_sweep->add_option("--out", sweep.out, "sweep output directory");
    sub_sweep->add_option("--jobs", sweep.jobs, "concurrent points");
    sub_sweep->add_option("--point-config", sweep.config,
                          "config file forwarded to each point");
  }
};

int dispatch(Cli& cli, Metrics* metrics, std::ostream& os) {
  if (cli.sub_weight->parsed())
    return run_weight_check(cli.weight, metrics, os);
  if (cli.sub_exact->parsed()) return run_exact(cli.exact, metrics, os);
  if (cli.sub_exact_res->parsed())
    return run_exact_residual(cli.exact, metrics, os);
  if (cli.sub_comm->parsed()) return run_commutator(cli.comm, metrics, os);
  if (cli.sub_solve->parsed()) return run_solve(cli.solve, metrics, os);
  if (cli.sub_diag->parsed()) return run_diagnose(cli.diagnose, metrics, os);
  if (cli.sub_sweep->parsed()) return run_sweep(cli.sweep, metrics, os);
  throw UsageError("no subcommand given");
}

int run_sweep(const SweepOpts& o, Metrics* metrics, std::ostream& os) {
  const auto eq = o.axis.find('=');
  if (eq == std::string::npos)
    throw UsageError("axis must be key=v1,v2,...");
  const std::string key = o.axis.substr(0, eq);
  std::vector<std::string> values;
  {
    std::string cur;
    for (char c : o.axis.substr(eq + 1)) {
      if (c == ',') {
        if (!cur.empty()) values.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) values.push_back(cur);
  }
  if (key.empty() || values.empty())
    throw UsageError("sweep axis is empty");
  const std::set<std::string> known = {"weight-check", "exact",
                                       "exact-residual", "commutator",
                                       "solve", "diagnose"};
  if (!known.count(o.sub))
    throw UsageError("cannot sweep unknown subcommand '" + o.sub + "'");

  const fs::path dir = resolve_out(o.out);
  fs::create_directories(dir);

  struct Point {
    int index;
    std::string value;
    int code = 0;
    Metrics metrics;
  };
  std::vector<Point> points(values.size());

  auto run_point = [&](int i) {
    Point& p = points[i];
    p.index = i;
    p.value = values[i];
    char name[32];
    std::snprintf(name, sizeof name, "point_%03d", i);
    const fs::path pdir = dir / name;
    fs::create_directories(pdir);
    std::vector<std::string> args{o.sub};
    if (!o.config.empty()) {
      args.push_back("--config");
      args.push_back(o.config);
    }
    for (const auto& kv : o.sets) {
      const auto e = kv.find('=');
      if (e == std::string::npos)
        throw UsageError("--set expects key=value, got '" + kv + "'");
      args.push_back("--" + kv.substr(0, e));
      args.push_back(kv.substr(e + 1));
    }
    args.push_back("--" + key);
    args.push_back(values[i]);
    args.push_back("--out");
    if (o.sub == "solve" || o.sub == "diagnose")
      args.push_back((pdir / "run").string());
    else if (o.sub == "weight-check" || o.sub == "exact")
      args.push_back((pdir / "out.csv").string());
    else
      args.push_back((pdir / "report.json").string());
    std::ostringstream sink;
    p.code = cli_main(args, &p.metrics, &sink);
    write_text_file(pdir / "log.txt", sink.str());
  };

  const int jobs = std::max(1, o.jobs);
  if (jobs == 1) {
    for (size_t i = 0; i < values.size(); ++i) run_point(int(i));
  } else {
    std::vector<std::future<void>> futs;
    std::atomic<size_t> next{0};
    for (int j = 0; j < jobs; ++j)
      futs.push_back(std::async(std::launch::async, [&] {
        for (;;) {
          const size_t i = next.fetch_add(1);
          if (i >= values.size()) return;
          run_point(int(i));
        }
      }));
    for (auto& f : futs) f.get();
  }

  // union of metric keys, sorted for deterministic columns
  std::set<std::string> keys;
  for (const auto& p : points)
    for (const auto& kv : p.metrics) keys.insert(kv.first);
  std::ostringstream ss;
  ss << "index," << key << ",status";
  for (const auto& k : keys) ss << ',' << k;
  ss << '\n';
  int failures = 0;
  for (const auto& p : points) {
    ss << p.index << ',' << p.value << ',' << p.code;
    failures += p.code != 0;
    for (const auto& k : keys) {
      auto it = p.metrics.find(k);
      ss << ',' << (it == p.metrics.end() ? "" : fmt17(it->second));
    }
    ss << '\n';
  }
  write_text_file(dir / "summary.csv", ss.str());
  ordered_json j;
  j["points"] = int(points.size());
  j["failures"] = failures;
  j["summary"] = (dir / "summary.csv").string();
  os << j.dump(2) << "\n";
  if (metrics) (*metrics)["failures"] = failures;
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, Metrics* metrics,
             std::ostream* out) {
  std::ostream& os = out ? *out : std::cout;
  Cli cli;
  // Accept `--config file` in either position by hoisting it ahead of the
  // subcommand (the option lives on the top-level app).
  std::vector<std::string> ordered;
  std::vector<std::string> hoisted;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      hoisted.push_back(args[i]);
      hoisted.push_back(args[i + 1]);
      ++i;
    } else {
      ordered.push_back(args[i]);
    }
  }
  ordered.insert(ordered.begin(), hoisted.begin(), hoisted.end());
  // CLI11 parses argv-style reversed vectors.
  std::vector<std::string> rev(ordered.rbegin(), ordered.rend());
  try {
    cli.app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends
      os << cli.app.help() << "\n";
      return 0;
    }
    std::cerr << e.what() << "\n";
    return 1;
  }
  try {
    return dispatch(cli, metrics, os);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace gkdvlab
