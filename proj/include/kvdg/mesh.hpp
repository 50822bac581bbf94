#pragma once

#include "kvdg/common.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace kvdg {

struct Rect {
  double xmin = 0.0, ymin = 0.0, xmax = 1.0, ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  bool valid() const { return xmax > xmin && ymax > ymin; }
};

/// Boundary tags produced by the built-in generators.
enum BoundarySide : int { kBottom = 1, kRight = 2, kTop = 3, kLeft = 4 };

/// Face shared by two elements. The normal points from `plus` to `minus`;
/// the minus-side normal is its negation and is never stored.
struct InteriorFace {
  int plus = -1, minus = -1;
  int local_plus = -1, local_minus = -1;
  Vec2 a, b;
  Vec2 normal;
  double length = 0.0;
};

struct BoundaryFace {
  int element = -1;
  int local_edge = -1;
  Vec2 a, b;
  Vec2 normal;  // outward
  double length = 0.0;
  int tag = 0;
};

struct BoundaryTag {
  int element = -1;
  int local_edge = -1;
  int tag = 0;
};

struct SubTriangle {
  std::array<Vec2, 3> v;
  double area = 0.0;
};

struct ElementGeometry {
  double area = 0.0;
  double diameter = 0.0;
  Vec2 centroid;
  Vec2 bbox_min, bbox_max;
  std::vector<SubTriangle> triangles;
};

/// Immutable 2D polygonal mesh. Construction derives faces, geometry and a
/// sub-triangulation of every element and validates all invariants; a
/// violation raises TopologyError.
class PolyMesh {
 public:
  PolyMesh(std::vector<Vec2> vertices, std::vector<std::vector<int>> elements,
           std::vector<BoundaryTag> tags);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::vector<int>>& elements() const { return elements_; }
  const std::vector<BoundaryTag>& boundary_tags() const { return tags_; }
  const std::vector<InteriorFace>& interior_faces() const { return interior_; }
  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_; }
  const ElementGeometry& geometry(int k) const { return geometry_[static_cast<std::size_t>(k)]; }

  int num_elements() const { return static_cast<int>(elements_.size()); }
  int num_faces() const { return static_cast<int>(interior_.size() + boundary_.size()); }

  /// max over elements of the element diameter.
  double mesh_size() const;
  double total_area() const;

  /// Element-local polygon vertex coordinates (counter-clockwise).
  std::vector<Vec2> polygon(int k) const;

  /// Point-in-polygon with a relative tolerance on the boundary.
  bool contains(int k, const Vec2& x, double tol = 1e-10) const;

  /// Index of an element containing x, or -1.
  int locate(const Vec2& x) const;

  /// For each element, indices of face-adjacent elements.
  std::vector<std::vector<int>> neighbours() const;

 private:
  void build_faces();
  void build_geometry();

  std::vector<Vec2> vertices_;
  std::vector<std::vector<int>> elements_;
  std::vector<BoundaryTag> tags_;
  std::vector<InteriorFace> interior_;
  std::vector<BoundaryFace> boundary_;
  std::vector<ElementGeometry> geometry_;
};

struct MeshQualityReport {
  double min_shape_ratio = 0.0;  // min |K| / h_K^2
  double max_shape_ratio = 0.0;
  double min_contact_ratio = 0.0;  // min |F| / h_K over faces of K
  int element_count = 0;
  int face_count = 0;
  int interior_face_count = 0;
  int boundary_face_count = 0;
};

MeshQualityReport quality_report(const PolyMesh& mesh);

/// nx-by-ny grid of axis-aligned quadrilaterals; element (i, j) has index
/// j * nx + i with j counted upward from the lower edge.
PolyMesh cartesian_mesh(const Rect& domain, int nx, int ny);

struct VoronoiResult {
  PolyMesh mesh;
  std::vector<Vec2> generators;
  /// Sum of squared generator-to-centroid distances before each Lloyd update.
  std::vector<double> centroid_distance;
  /// Quantization energy sum_i int_{V_i} |x - g_i|^2 before each update.
  std::vector<double> cvt_energy;
  std::uint64_t seed_used = 0;
};

/// Clipped Voronoi tessellation of `domain` with `n_elements` uniformly
/// sampled generators relaxed by `lloyd_iters` Lloyd steps. Degenerate
/// configurations are retried with a perturbed seed up to five times.
VoronoiResult generate_voronoi(const Rect& domain, int n_elements, int lloyd_iters,
                               std::uint64_t seed);

/// Same as generate_voronoi with explicit initial generators.
VoronoiResult voronoi_from_generators(const Rect& domain, std::vector<Vec2> generators,
                                      int lloyd_iters);

void save_mesh(const PolyMesh& mesh, const std::filesystem::path& path);
std::string serialize_mesh(const PolyMesh& mesh);
PolyMesh load_mesh(const std::filesystem::path& path);
PolyMesh parse_mesh(const std::string& text);

}  // namespace kvdg
