#pragma once

#include "kvdg/common.hpp"
#include "kvdg/mesh.hpp"
#include "kvdg/quadrature.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace kvdg {

/// Basis values and gradients at cached quadrature points; rows are points.
struct ElementQuadrature {
  PointSet q;
  Dense phi, dx, dy;
};

/// Face quadrature with traces from both sides. Index 0 is the plus (or
/// boundary) element, index 1 the minus element; side 1 is empty on
/// boundary faces.
struct FaceQuadrature {
  PointSet q;
  Dense phi[2], dx[2], dy[2];
};

/// Vector field value with its broken derivatives at a point.
struct BrokenValue {
  Vec2 value = Vec2::Zero();
  Mat2 grad = Mat2::Zero();  // grad(i, j) = d u_i / d x_j
  double div = 0.0;
  Mat2 eps = Mat2::Zero();
};

using ScalarFn = std::function<double(const Vec2&)>;
using VectorFn = std::function<Vec2(const Vec2&)>;

/// Broken polynomial space of per-element degree on a polygonal mesh.
///
/// The local basis of element k is the set of monomials of total degree
/// <= l_k in coordinates centred and scaled by the element bounding box,
/// orthonormalized in L2(K). Vector DOFs are element-major:
/// 2 * scalar_offset(k) + comp * local_dim(k) + i.
class DgSpace {
 public:
  DgSpace(PolyMesh mesh, int degree);
  DgSpace(PolyMesh mesh, std::vector<int> degrees);

  const PolyMesh& mesh() const { return *mesh_; }
  int num_elements() const { return mesh_->num_elements(); }
  int degree(int k) const { return degrees_[static_cast<std::size_t>(k)]; }
  int max_degree() const { return max_degree_; }
  int local_dim(int k) const { return dims_[static_cast<std::size_t>(k)]; }
  int scalar_offset(int k) const { return offsets_[static_cast<std::size_t>(k)]; }
  int scalar_dofs() const { return offsets_.back(); }
  int vector_dofs() const { return 2 * scalar_dofs(); }
  int vector_index(int k, int comp, int i) const {
    return 2 * scalar_offset(k) + comp * local_dim(k) + i;
  }

  /// Basis values (and gradients) of element k at x; no containment check.
  void eval_basis(int k, const Vec2& x, Vector& phi) const;
  void eval_basis(int k, const Vec2& x, Vector& phi, Vector& dx, Vector& dy) const;

  const ElementQuadrature& volume(int k) const { return volume_[static_cast<std::size_t>(k)]; }
  const FaceQuadrature& interior_face(int f) const { return interior_[static_cast<std::size_t>(f)]; }
  const FaceQuadrature& boundary_face(int f) const { return boundary_[static_cast<std::size_t>(f)]; }

  /// Volume points of element k exact to `degree` over the sub-triangulation.
  PointSet volume_points(int k, int degree) const;

  /// Volume integral of f over element k; default rule exactness 2 l_k + 2.
  double integrate_volume(int k, const ScalarFn& f, int degree = -1) const;

  /// L2 projections, computed with rules of exactness 2 l_k + 4.
  Vector project_scalar(const ScalarFn& f) const;
  Vector project_vector(const VectorFn& f) const;

  /// Point evaluation of a discrete field. Raises LookupError when x is not
  /// in element k.
  double eval_scalar(const Vector& dofs, int k, const Vec2& x) const;
  Vec2 eval_scalar_grad(const Vector& dofs, int k, const Vec2& x) const;
  BrokenValue eval_broken(const Vector& dofs, int k, const Vec2& x) const;

  /// Same as above, locating the element first.
  double eval_scalar(const Vector& dofs, const Vec2& x) const;
  BrokenValue eval_broken(const Vector& dofs, const Vec2& x) const;

 private:
  struct LocalBasis {
    Vec2 center, scale;
    Dense coeff;  // phi = coeff * monomials
  };

  void build();
  void monomials(int k, const Vec2& x, Vector& m, Vector* mx, Vector* my) const;
  void tabulate(int k, const PointSet& ps, Dense& phi, Dense* dx, Dense* dy) const;
  void require_inside(int k, const Vec2& x) const;

  std::shared_ptr<const PolyMesh> mesh_;
  std::vector<int> degrees_;
  std::vector<int> dims_;
  std::vector<int> offsets_;
  int max_degree_ = 0;
  std::vector<LocalBasis> local_;
  std::vector<ElementQuadrature> volume_;
  std::vector<FaceQuadrature> interior_;
  std::vector<FaceQuadrature> boundary_;
};

inline int scalar_dim(int degree) { return (degree + 1) * (degree + 2) / 2; }

}  // namespace kvdg
