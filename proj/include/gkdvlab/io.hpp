#ifndef GKDVLAB_IO_HPP
#define GKDVLAB_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "gkdvlab/operators.hpp"
#include "gkdvlab/solver.hpp"
#include "gkdvlab/weight.hpp"

namespace gkdvlab {

using ordered_json = nlohmann::ordered_json;

/// Decimal scientific with 17 significant digits (round-trip safe).
std::string fmt17(double v);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

/// CSV with a header line; every numeric cell through fmt17.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Column dump x, Re(u), Im(u).
void save_field_csv(const std::filesystem::path& path, const SampledField& f);

ordered_json to_json(const GridSpec& g);
ordered_json to_json(const NonlinearitySpec& n);
ordered_json to_json(const SolutionSpec& s);
ordered_json to_json(const ICSpec& ic);
ordered_json to_json(const RunManifest& m);
ordered_json to_json(const WeightAudit& a);
ordered_json to_json(const EnsembleReport& r);

GridSpec grid_from_json(const ordered_json& j);
NonlinearitySpec nonlinearity_from_json(const ordered_json& j);
SolutionSpec solution_from_json(const ordered_json& j);
ICSpec ic_from_json(const ordered_json& j);
RunManifest manifest_from_json(const ordered_json& j);

/// Run directory layout: manifest.json, manifest.cfg, diagnostics.csv,
/// final_state.csv, states.tsv (when fields were stored).
void save_run(const std::filesystem::path& dir, const RunResult& result);

struct StoredRun {
  RunManifest manifest;
  std::vector<SampledField> fields;
};
StoredRun load_run(const std::filesystem::path& dir);

void write_json_file(const std::filesystem::path& path, const ordered_json& j);

}  // namespace gkdvlab

#endif
