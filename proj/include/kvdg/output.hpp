#pragma once

#include "kvdg/simulation.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace kvdg {

/// Element averages of the primary and derived fields.
struct ElementFields {
  std::vector<Vec2> u, v, w;  // displacement, velocity, filtration D grad phi
  std::vector<double> phi;
};

ElementFields element_means(const Discretization& d, const State& s);

/// Legacy ASCII VTK unstructured grid, one polygon cell per element, fields as
/// cell data.
std::string vtk_snapshot(const PolyMesh& mesh, const ElementFields& f, double t);

/// element,cx,cy,ux,uy,vx,vy,phi,wx,wy
std::string element_csv(const PolyMesh& mesh, const ElementFields& f);

/// Point values on an nx-by-ny grid of cell centres over the domain
/// bounding box: x,y,ux,uy,vx,vy,phi,w.
std::string grid_csv(const Discretization& d, const State& s, int nx, int ny);

/// Writes text, creating parent directories; throws ConfigError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace kvdg
