#pragma once

#include "kvdg/assembly.hpp"
#include "kvdg/dg_forms.hpp"
#include "kvdg/mesh.hpp"
#include "kvdg/models.hpp"
#include "kvdg/simulation.hpp"
#include "kvdg/timestepping.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kvdg {

struct MeshSpec {
  enum class Kind { kVoronoi, kCartesian, kFile };
  Kind kind = Kind::kVoronoi;
  Rect domain{};
  int elements = 100;
  int nx = 10, ny = 10;
  int lloyd_iters = 40;
  std::uint64_t seed = 1;
  std::filesystem::path file;
  int degree = 2;
};

/// Synthetic high-permeability channel used in place of a measured map.
struct ChannelSpec {
  double background = 1e-8;
  double channel = 1e-5;
  double width = 30.0;
  std::vector<Vec2> path;
  std::vector<Vec2> pockets;
};

struct CoefficientSpec {
  Preset preset = Preset::kUnified;
  Overrides overrides;
  /// Per-element fields from raster files (cartesian meshes only). Keys are
  /// parameter names as in Overrides; D sets an isotropic tensor.
  std::map<std::string, std::filesystem::path> rasters;
  std::map<std::string, double> raster_scale;
  /// Built-in synthetic channel for D (cartesian meshes only).
  std::optional<ChannelSpec> channel;
  /// Recompute tau1 = tau2 = rho_f D / porosity per element after rasters.
  bool derive_tau = false;
};

struct TimeSpec {
  IntegratorConfig integrator;
  bool auto_scheme = true;
};

struct OutputSpec {
  std::string directory = "run";
  std::vector<double> snapshots{0.1, 0.3, 0.5};
  std::vector<Probe> probes;
  bool energy = true;
  bool vtk = true;
  int grid_nx = 0, grid_ny = 0;  // point-sampled grid; 0 disables
};

/// Complete description of one run. All physical values in SI units.
struct RunConfig {
  std::string name = "run";
  MeshSpec mesh;
  CoefficientSpec coefficients;
  SourceSpec source;
  BoundaryConditions bcs = BoundaryConditions::all_dirichlet();
  PenaltyConstants penalties;
  TimeSpec time;
  OutputSpec output;
  int threads = 0;

  /// Checks cross-field invariants; throws ConfigError naming the module.
  void validate() const;
};

/// INI text with sections [run], [mesh], [coefficients], [sources], [bc],
/// [penalty], [time], [output]. Unknown sections or keys are errors.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical INI rendering; parse_run_config(to_ini(c)) reproduces c.
std::string to_ini(const RunConfig& c);

// Small parsing helpers shared with the command line.
std::vector<double> parse_number_list(const std::string& text, const std::string& what);
Rect parse_domain(const std::string& text);
int parse_boundary_tag(const std::string& text);

}  // namespace kvdg
