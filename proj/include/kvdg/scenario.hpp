#pragma once

#include "kvdg/config.hpp"
#include "kvdg/simulation.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace kvdg {

PolyMesh build_mesh(const MeshSpec& spec);

/// Preset material, then raster fields, then the optional derived tau.
CoefficientField build_coefficients(const CoefficientSpec& spec, const MeshSpec& mesh, int n_elements);

/// Load series of a source. A mollifier radius <= 0 becomes 2 h.
LoadSeries build_loads(const DgSpace& space, const SourceSpec& source);

/// Everything needed to call run_simulation.
struct Scenario {
  Discretization disc;
  LoadSeries loads;
  State initial;
  IntegratorConfig integrator;
  std::vector<std::string> warnings;
};

Scenario build_scenario(const RunConfig& config);

/// Built-in configurations:
///   thermoelastic-vertical, thermoelastic-shear  (wave runs on (0, 2310)^2)
///   flow-D, flow-P, flow-PVE  (injection in a synthetic channel medium)
std::vector<std::string> scenario_names();
RunConfig scenario_config(const std::string& name);

/// Probe points of the flow scenarios.
std::vector<Probe> flow_probes();
/// Channel centreline and pockets of the synthetic flow medium.
ChannelSpec flow_channel();

struct RunResult {
  RunSummary summary;
  std::filesystem::path directory;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

/// Builds and runs a scenario and writes config.ini, summary.json, snapshot
/// fields at the configured instants, probes.csv and energy.csv into `dir`.
RunResult execute_run(const RunConfig& config, const std::filesystem::path& dir, std::ostream* log = nullptr);

}  // namespace kvdg
