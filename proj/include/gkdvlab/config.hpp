#ifndef GKDVLAB_CONFIG_HPP
#define GKDVLAB_CONFIG_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gkdvlab/grid.hpp"

namespace gkdvlab {

using Metrics = std::map<std::string, double>;

/// Parses and runs one CLI invocation (subcommand + flags, no argv[0]).
/// Returns the process exit code: 0 ok, 1 usage, 2 numerical-contract
/// failure, 3 blow-up. `metrics` collects flat numeric results (used by
/// sweep); `out` receives the normal JSON/summary output (defaults to
/// std::cout).
int cli_main(const std::vector<std::string>& args, Metrics* metrics = nullptr,
             std::ostream* out = nullptr);

/// "N,L" or "N,L,dt" -> GridSpec; UsageError names the offending field.
GridSpec parse_grid(const std::string& text, bool need_dt);

/// Resolves an output path against the GKDV_LAB_OUT root when relative.
std::string resolve_out(const std::string& path);

}  // namespace gkdvlab

#endif
