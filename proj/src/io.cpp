#include "gkdvlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gkdvlab {

namespace fs = std::filesystem;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream ss;
  for (size_t i = 0; i < header.size(); ++i)
    ss << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i)
      ss << fmt17(row[i]) << (i + 1 < row.size() ? "," : "\n");
  }
  write_text_file(path, ss.str());
}

void save_field_csv(const fs::path& path, const SampledField& f) {
  std::vector<std::vector<double>> rows;
  rows.reserve(f.grid.n);
  for (int i = 0; i < f.grid.n; ++i)
    rows.push_back({f.grid.x(i), f.values[i].real(), f.values[i].imag()});
  write_csv(path, {"x", "re_u", "im_u"}, rows);
}

void write_json_file(const fs::path& path, const ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// json conversions
// ---------------------------------------------------------------------------

ordered_json to_json(const GridSpec& g) {
  return ordered_json{{"n", g.n}, {"half_length", g.half_length}, {"dt", g.dt}};
}

GridSpec grid_from_json(const ordered_json& j) {
  return GridSpec{j.at("n").get<int>(), j.at("half_length").get<double>(),
                  j.value("dt", 0.0)};
}

ordered_json to_json(const NonlinearitySpec& n) {
  ordered_json j;
  switch (n.family) {
    case NonlinearityFamily::pure_power: j["family"] = "pure_power"; break;
    case NonlinearityFamily::gardner: j["family"] = "gardner"; break;
    case NonlinearityFamily::complex_cubic: j["family"] = "complex_cubic"; break;
  }
  j["j"] = n.j;
  j["coeff"] = n.coeff;
  j["alpha1"] = n.alpha1;
  j["alpha2"] = n.alpha2;
  j["M1"] = n.M1;
  return j;
}

NonlinearitySpec nonlinearity_from_json(const ordered_json& j) {
  const std::string fam = j.at("family").get<std::string>();
  NonlinearitySpec n;
  if (fam == "pure_power")
    n = NonlinearitySpec::pure_power_coeff(j.at("j").get<int>(),
                                           j.at("coeff").get<double>());
  else if (fam == "gardner")
    n = NonlinearitySpec::gardner(j.at("alpha1").get<double>(),
                                  j.at("alpha2").get<double>());
  else if (fam == "complex_cubic")
    n = NonlinearitySpec::complex_cubic();
  else
    throw UsageError("unknown nonlinearity family " + fam);
  n.M1 = j.value("M1", n.M1);
  return n;
}

ordered_json to_json(const SolutionSpec& s) {
  return ordered_json{{"kind", s.name()},
                      {"lambda", s.lambda},
                      {"mu", s.mu},
                      {"j", s.j},
                      {"x0", s.x0}};
}

SolutionSpec solution_from_json(const ordered_json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const double lambda = j.at("lambda").get<double>();
  const double mu = j.value("mu", 0.0);
  const double x0 = j.value("x0", 0.0);
  if (kind == "gkdv_soliton")
    return SolutionSpec::gkdv_soliton(j.at("j").get<int>(), lambda, x0);
  if (kind == "mkdv_soliton") return SolutionSpec::mkdv_soliton(lambda, x0);
  if (kind == "mkdv_breather")
    return SolutionSpec::mkdv_breather(lambda, mu, x0);
  if (kind == "complex_breather")
    return SolutionSpec::complex_breather(lambda, mu, x0);
  throw UsageError("unknown solution kind " + kind);
}

ordered_json to_json(const ICSpec& ic) {
  ordered_json j;
  switch (ic.kind) {
    case ICSpec::Kind::zero: j["kind"] = "zero"; break;
    case ICSpec::Kind::exact:
      j["kind"] = "exact";
      j["solution"] = to_json(ic.sol);
      break;
    case ICSpec::Kind::gaussian:
      j["kind"] = "gaussian";
      j["amplitude"] = ic.amplitude;
      j["sigma"] = ic.sigma;
      j["center"] = ic.center;
      break;
    case ICSpec::Kind::cosine:
      j["kind"] = "cosine";
      j["amplitude"] = ic.amplitude;
      j["mode"] = ic.mode;
      break;
  }
  return j;
}

ICSpec ic_from_json(const ordered_json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") return ICSpec::zero();
  if (kind == "exact") return ICSpec::exact(solution_from_json(j.at("solution")));
  if (kind == "gaussian")
    return ICSpec::gaussian(j.at("amplitude").get<double>(),
                            j.at("sigma").get<double>(),
                            j.value("center", 0.0));
  if (kind == "cosine")
    return ICSpec::cosine(j.at("amplitude").get<double>(),
                          j.at("mode").get<int>());
  throw UsageError("unknown initial condition kind " + kind);
}

ordered_json to_json(const RunManifest& m) {
  ordered_json j;
  j["model"] = to_json(m.model);
  j["grid"] = to_json(m.grid);
  j["ic"] = to_json(m.ic);
  j["t_final"] = m.t_final;
  j["diag_every"] = m.diag_every;
  j["store_every"] = m.store_every;
  j["blowup_ceiling"] = m.blowup_ceiling;
  j["seed"] = m.seed;
  j["track_weighted"] = m.track_weighted;
  j["diag_lambda"] = m.diag_lambda;
  j["diag_b"] = m.diag_b;
  return j;
}

RunManifest manifest_from_json(const ordered_json& j) {
  RunManifest m;
  m.model = nonlinearity_from_json(j.at("model"));
  m.grid = grid_from_json(j.at("grid"));
  m.ic = ic_from_json(j.at("ic"));
  m.t_final = j.at("t_final").get<double>();
  m.diag_every = j.at("diag_every").get<int>();
  m.store_every = j.value("store_every", 0);
  m.blowup_ceiling = j.value("blowup_ceiling", 1e6);
  m.seed = j.value("seed", uint64_t(0));
  m.track_weighted = j.value("track_weighted", false);
  m.diag_lambda = j.value("diag_lambda", 0.0);
  m.diag_b = j.value("diag_b", 0.0);
  return m;
}

ordered_json to_json(const WeightAudit& a) {
  auto check = [](const AuditCheck& c) {
    return ordered_json{{"pass", c.pass},
                        {"worst_r", c.worst_r},
                        {"worst_value", c.worst_value}};
  };
  ordered_json j;
  j["pass"] = a.pass();
  j["c0_measured"] = a.c0;
  j["C0_measured"] = a.C0;
  j["integral_value"] = a.integral_value;
  j["positive"] = check(a.positive);
  j["first_deriv_low"] = check(a.first_deriv_low);
  j["first_deriv_high"] = check(a.first_deriv_high);
  j["second_range"] = check(a.second_range);
  j["second_monotone"] = check(a.second_monotone);
  j["high_order"] = check(a.high_order);
  j["exp_lower"] = check(a.exp_lower);
  j["junctions"] = check(a.junctions);
  j["integral"] = check(a.integral);
  return j;
}

ordered_json to_json(const EnsembleReport& r) {
  ordered_json j;
  j["lambda"] = r.lambda;
  j["b"] = r.b;
  j["scale"] = r.scale;
  j["measured_A0"] = r.min_ratio;
  j["all_positive"] = r.all_positive;
  j["max_identity_rel"] = r.max_identity_rel;
  j["max_composition_rel"] = r.max_composition_rel;
  j["mean_terms"] = r.mean_terms;
  j["ratios"] = r.ratios;
  return j;
}

// ---------------------------------------------------------------------------
// run storage
// ---------------------------------------------------------------------------

namespace {

std::string manifest_cfg_text(const RunManifest& m);

}  // namespace

void save_run(const fs::path& dir, const RunResult& result) {
  fs::create_directories(dir);
  write_json_file(dir / "manifest.json", to_json(result.manifest));
  write_text_file(dir / "manifest.cfg", manifest_cfg_text(result.manifest));

  const auto& s = result.series;
  std::vector<std::string> header = {"t",  "mass",   "mass_im",
                                     "l2", "h1",     "peak_x"};
  if (s.has_weighted)
    for (int k = 0; k <= 3; ++k) header.push_back("w_k" + std::to_string(k));
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < s.t.size(); ++i) {
    std::vector<double> row = {s.t[i],  s.mass_re[i], s.mass_im[i],
                               s.l2[i], s.h1[i],      s.peak_x[i]};
    if (s.has_weighted)
      for (int k = 0; k <= 3; ++k) row.push_back(s.weighted[i][k]);
    rows.push_back(std::move(row));
  }
  write_csv(dir / "diagnostics.csv", header, rows);
  save_field_csv(dir / "final_state.csv", result.final_state);

  if (!result.stored.empty()) {
    std::ostringstream ss;
    for (const auto& f : result.stored) {
      ss << fmt17(f.t);
      for (const auto& v : f.values)
        ss << '\t' << fmt17(v.real()) << '\t' << fmt17(v.imag());
      ss << '\n';
    }
    write_text_file(dir / "states.tsv", ss.str());
  }
}

StoredRun load_run(const fs::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw UsageError("no manifest.json in " + dir.string());
  ordered_json j;
  mf >> j;
  StoredRun run;
  run.manifest = manifest_from_json(j);

  std::ifstream sf(dir / "states.tsv");
  if (sf) {
    std::string line;
    while (std::getline(sf, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      SampledField f = zero_field(run.manifest.grid, 0.0);
      ls >> f.t;
      for (int i = 0; i < run.manifest.grid.n; ++i) {
        double re, im;
        ls >> re >> im;
        f.values[i] = {re, im};
      }
      run.fields.push_back(std::move(f));
    }
  }
  return run;
}

namespace {

std::string manifest_cfg_text(const RunManifest& m) {
  std::ostringstream ss;
  ss << "[solve]\n";
  switch (m.model.family) {
    case NonlinearityFamily::pure_power:
      ss << "model = power\n";
      ss << "j = " << m.model.j << "\n";
      ss << "coeff = " << fmt17(m.model.coeff) << "\n";
      break;
    case NonlinearityFamily::gardner:
      ss << "model = gardner\n";
      ss << "alpha1 = " << fmt17(m.model.alpha1) << "\n";
      ss << "alpha2 = " << fmt17(m.model.alpha2) << "\n";
      break;
    case NonlinearityFamily::complex_cubic:
      ss << "model = complex\n";
      break;
  }
  switch (m.ic.kind) {
    case ICSpec::Kind::zero:
      ss << "ic = zero\n";
      break;
    case ICSpec::Kind::exact:
      ss << "ic = " << m.ic.sol.name() << "\n";
      ss << "ic-lambda = " << fmt17(m.ic.sol.lambda) << "\n";
      ss << "ic-mu = " << fmt17(m.ic.sol.mu) << "\n";
      ss << "ic-j = " << m.ic.sol.j << "\n";
      ss << "ic-x0 = " << fmt17(m.ic.sol.x0) << "\n";
      break;
    case ICSpec::Kind::gaussian:
      ss << "ic = gaussian\n";
      ss << "ic-amp = " << fmt17(m.ic.amplitude) << "\n";
      ss << "ic-sigma = " << fmt17(m.ic.sigma) << "\n";
      ss << "ic-center = " << fmt17(m.ic.center) << "\n";
      break;
    case ICSpec::Kind::cosine:
      ss << "ic = cosine\n";
      ss << "ic-amp = " << fmt17(m.ic.amplitude) << "\n";
      ss << "ic-mode = " << m.ic.mode << "\n";
      break;
  }
  // quoted so the config parser keeps the comma-separated triple intact
  ss << "grid = \"" << m.grid.n << "," << fmt17(m.grid.half_length) << ","
     << fmt17(m.grid.dt) << "\"\n";
  ss << "T = " << fmt17(m.t_final) << "\n";
  ss << "diag-every = " << m.diag_every << "\n";
  ss << "store-every = " << m.store_every << "\n";
  ss << "ceiling = " << fmt17(m.blowup_ceiling) << "\n";
  ss << "seed = " << m.seed << "\n";
  if (m.track_weighted) {
    ss << "track-weighted = true\n";
    ss << "weight-lambda = " << fmt17(m.diag_lambda) << "\n";
    ss << "weight-b = " << fmt17(m.diag_b) << "\n";
  }
  return ss.str();
}

}  // namespace

}  // namespace gkdvlab
