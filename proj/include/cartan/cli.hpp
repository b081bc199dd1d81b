#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cartan/dynamics.hpp"
#include "cartan/geometry.hpp"
#include "cartan/variational.hpp"

namespace cartan {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitDiverged = 2,
  kExitConfig = 3,
  kExitNotConverged = 4,
};

struct SweepConfig {
  std::string param;
  std::vector<double> values;
};

/// Everything a command needs. Built from a flat JSON object; integrator and solver
/// settings appear as top-level keys (step, span, tolerance, ...). Unknown keys are rejected.
struct RunConfig {
  std::string preset;
  std::string embedding;
  PresetParams params;
  std::optional<Vec> q0;
  std::optional<Vec> v0;
  std::string kind = "autoparallel";  // autoparallel | geodesic | modified-el
  IntegratorConfig integrator;
  std::string suite = "all";
  int segments = 200;
  SolverConfig solver;
  double residual_threshold = 1e-4;
  std::optional<Vec> q_end;
  std::string output_dir;
  std::string name = "run";
  std::uint64_t seed = 1;
  std::optional<SweepConfig> sweep;
  int jobs = 1;

  GeometrySpec geometry() const;
  Point initial_q() const;
  TangentVector initial_v() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);
/// Hash of the normalized config without output placement (output_dir, name, jobs).
std::string config_hash(const RunConfig& config);

int cmd_integrate(const RunConfig& config, std::ostream& out);
int cmd_check(const RunConfig& config, std::ostream& out);
int cmd_extremum(const RunConfig& config, std::ostream& out);
int cmd_report(const RunConfig& config, std::ostream& out);

/// Parses `cartan <command> [--config file] [flags]`; flags override the config file.
/// The output directory defaults to $CARTAN_OUTPUT_DIR, then ".".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cartan
