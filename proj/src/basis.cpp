#include "kvdg/basis.hpp"

#include "kvdg/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace kvdg {

DgSpace::DgSpace(PolyMesh mesh, int degree)
    : mesh_(std::make_shared<const PolyMesh>(std::move(mesh))) {
  degrees_.assign(static_cast<std::size_t>(mesh_->num_elements()), degree);
  build();
}

DgSpace::DgSpace(PolyMesh mesh, std::vector<int> degrees)
    : mesh_(std::make_shared<const PolyMesh>(std::move(mesh))), degrees_(std::move(degrees)) {
  build();
}

void DgSpace::build() {
  const int ne = mesh_->num_elements();
  if (static_cast<int>(degrees_.size()) != ne)
    throw ConfigError("basis", "degree list has " + std::to_string(degrees_.size()) +
                                   " entries for " + std::to_string(ne) + " elements");
  dims_.resize(static_cast<std::size_t>(ne));
  offsets_.assign(static_cast<std::size_t>(ne) + 1, 0);
  for (int k = 0; k < ne; ++k) {
    const int l = degrees_[static_cast<std::size_t>(k)];
    if (l < 1 || l > 12)
      throw ConfigError("basis", "polynomial degree must be in [1, 12] (element " +
                                     std::to_string(k) + ")");
    max_degree_ = std::max(max_degree_, l);
    dims_[static_cast<std::size_t>(k)] = scalar_dim(l);
    offsets_[static_cast<std::size_t>(k) + 1] =
        offsets_[static_cast<std::size_t>(k)] + scalar_dim(l);
  }

  local_.resize(static_cast<std::size_t>(ne));
  volume_.resize(static_cast<std::size_t>(ne));
  parallel_for(static_cast<std::size_t>(ne), [&](std::size_t ku) {
    const int k = static_cast<int>(ku);
    const ElementGeometry& g = mesh_->geometry(k);
    LocalBasis& lb = local_[ku];
    lb.center = 0.5 * (g.bbox_min + g.bbox_max);
    lb.scale = 0.5 * (g.bbox_max - g.bbox_min);
    const int n = dims_[ku];
    lb.coeff = Dense::Identity(n, n);

    ElementQuadrature& vq = volume_[ku];
    vq.q = volume_points(k, 2 * degree(k) + 2);
    const Eigen::Map<const Vector> w(vq.q.w.data(), static_cast<Eigen::Index>(vq.q.w.size()));

    // Orthonormalize twice: Cholesky of the Gram matrix, then again on the
    // result to clean up the rounding of the first pass.
    for (int pass = 0; pass < 2; ++pass) {
      Dense phi;
      tabulate(k, vq.q, phi, nullptr, nullptr);
      const Dense gram = phi.transpose() * w.asDiagonal() * phi;
      Eigen::LLT<Dense> llt(gram);
      const double dmax = gram.diagonal().maxCoeff();
      bool singular = llt.info() != Eigen::Success || !(dmax > 0.0);
      if (!singular) {
        const Dense L = llt.matrixL();
        const double pivot = L.diagonal().minCoeff();
        singular = !(pivot * pivot > 1e-14 * dmax);
      }
      if (singular)
        throw NumericalError("basis", "numerically singular Gram matrix on element " +
                                          std::to_string(k));
      const Dense Linv = llt.matrixL().solve(Dense::Identity(n, n));
      lb.coeff = Linv * lb.coeff;
    }
    tabulate(k, vq.q, vq.phi, &vq.dx, &vq.dy);
  });

  const auto& ifaces = mesh_->interior_faces();
  interior_.resize(ifaces.size());
  parallel_for(ifaces.size(), [&](std::size_t f) {
    const InteriorFace& face = ifaces[f];
    const int deg = 2 * std::max(degree(face.plus), degree(face.minus)) + 2;
    FaceQuadrature& fq = interior_[f];
    fq.q = map_segment(line_rule(deg), face.a, face.b);
    tabulate(face.plus, fq.q, fq.phi[0], &fq.dx[0], &fq.dy[0]);
    tabulate(face.minus, fq.q, fq.phi[1], &fq.dx[1], &fq.dy[1]);
  });
  const auto& bfaces = mesh_->boundary_faces();
  boundary_.resize(bfaces.size());
  parallel_for(bfaces.size(), [&](std::size_t f) {
    const BoundaryFace& face = bfaces[f];
    FaceQuadrature& fq = boundary_[f];
    fq.q = map_segment(line_rule(2 * degree(face.element) + 2), face.a, face.b);
    tabulate(face.element, fq.q, fq.phi[0], &fq.dx[0], &fq.dy[0]);
  });
}

void DgSpace::monomials(int k, const Vec2& x, Vector& m, Vector* mx, Vector* my) const {
  const LocalBasis& lb = local_[static_cast<std::size_t>(k)];
  const int l = degree(k);
  const double sx = lb.scale.x(), sy = lb.scale.y();
  const double X = (x.x() - lb.center.x()) / sx;
  const double Y = (x.y() - lb.center.y()) / sy;
  // Powers 0..l of X and Y.
  double px[16], py[16];
  px[0] = py[0] = 1.0;
  for (int i = 1; i <= l; ++i) {
    px[i] = px[i - 1] * X;
    py[i] = py[i - 1] * Y;
  }
  const int n = dims_[static_cast<std::size_t>(k)];
  m.resize(n);
  if (mx) mx->resize(n);
  if (my) my->resize(n);
  int idx = 0;
  for (int d = 0; d <= l; ++d)
    for (int j = 0; j <= d; ++j) {
      const int a = d - j, b = j;
      m[idx] = px[a] * py[b];
      if (mx) (*mx)[idx] = a > 0 ? a * px[a - 1] * py[b] / sx : 0.0;
      if (my) (*my)[idx] = b > 0 ? b * px[a] * py[b - 1] / sy : 0.0;
      ++idx;
    }
}

void DgSpace::tabulate(int k, const PointSet& ps, Dense& phi, Dense* dx, Dense* dy) const {
  const LocalBasis& lb = local_[static_cast<std::size_t>(k)];
  const int n = dims_[static_cast<std::size_t>(k)];
  const auto nq = static_cast<Eigen::Index>(ps.size());
  Dense M(nq, n), Mx, My;
  if (dx) Mx.resize(nq, n);
  if (dy) My.resize(nq, n);
  Vector m, mx, my;
  for (Eigen::Index q = 0; q < nq; ++q) {
    monomials(k, ps.x[static_cast<std::size_t>(q)], m, dx ? &mx : nullptr, dy ? &my : nullptr);
    M.row(q) = m.transpose();
    if (dx) Mx.row(q) = mx.transpose();
    if (dy) My.row(q) = my.transpose();
  }
  phi = M * lb.coeff.transpose();
  if (dx) *dx = Mx * lb.coeff.transpose();
  if (dy) *dy = My * lb.coeff.transpose();
}

void DgSpace::eval_basis(int k, const Vec2& x, Vector& phi) const {
  Vector m;
  monomials(k, x, m, nullptr, nullptr);
  phi = local_[static_cast<std::size_t>(k)].coeff * m;
}

void DgSpace::eval_basis(int k, const Vec2& x, Vector& phi, Vector& dx, Vector& dy) const {
  Vector m, mx, my;
  monomials(k, x, m, &mx, &my);
  const Dense& c = local_[static_cast<std::size_t>(k)].coeff;
  phi = c * m;
  dx = c * mx;
  dy = c * my;
}

PointSet DgSpace::volume_points(int k, int degree) const {
  const TriangleRule rule = triangle_rule(degree);
  PointSet ps;
  for (const SubTriangle& t : mesh_->geometry(k).triangles) {
    PointSet p = map_triangle(rule, t.v[0], t.v[1], t.v[2]);
    ps.x.insert(ps.x.end(), p.x.begin(), p.x.end());
    ps.w.insert(ps.w.end(), p.w.begin(), p.w.end());
  }
  return ps;
}

double DgSpace::integrate_volume(int k, const ScalarFn& f, int degree) const {
  const PointSet ps = volume_points(k, degree < 0 ? 2 * this->degree(k) + 2 : degree);
  double s = 0.0;
  for (std::size_t q = 0; q < ps.size(); ++q) s += ps.w[q] * f(ps.x[q]);
  return s;
}

Vector DgSpace::project_scalar(const ScalarFn& f) const {
  Vector out = Vector::Zero(scalar_dofs());
  parallel_for(static_cast<std::size_t>(num_elements()), [&](std::size_t ku) {
    const int k = static_cast<int>(ku);
    const PointSet ps = volume_points(k, 2 * degree(k) + 4);
    Vector phi;
    for (std::size_t q = 0; q < ps.size(); ++q) {
      eval_basis(k, ps.x[q], phi);
      out.segment(scalar_offset(k), local_dim(k)) += ps.w[q] * f(ps.x[q]) * phi;
    }
  });
  return out;
}

Vector DgSpace::project_vector(const VectorFn& f) const {
  Vector out = Vector::Zero(vector_dofs());
  parallel_for(static_cast<std::size_t>(num_elements()), [&](std::size_t ku) {
    const int k = static_cast<int>(ku);
    const int n = local_dim(k);
    const PointSet ps = volume_points(k, 2 * degree(k) + 4);
    Vector phi;
    for (std::size_t q = 0; q < ps.size(); ++q) {
      eval_basis(k, ps.x[q], phi);
      const Vec2 v = f(ps.x[q]);
      out.segment(vector_index(k, 0, 0), n) += ps.w[q] * v.x() * phi;
      out.segment(vector_index(k, 1, 0), n) += ps.w[q] * v.y() * phi;
    }
  });
  return out;
}

void DgSpace::require_inside(int k, const Vec2& x) const {
  if (k < 0 || k >= num_elements())
    throw LookupError("basis", "element index " + std::to_string(k) + " out of range");
  if (!mesh_->contains(k, x))
    throw LookupError("basis", "point (" + std::to_string(x.x()) + ", " +
                                   std::to_string(x.y()) + ") is not in element " +
                                   std::to_string(k));
}

double DgSpace::eval_scalar(const Vector& dofs, int k, const Vec2& x) const {
  require_inside(k, x);
  Vector phi;
  eval_basis(k, x, phi);
  return dofs.segment(scalar_offset(k), local_dim(k)).dot(phi);
}

Vec2 DgSpace::eval_scalar_grad(const Vector& dofs, int k, const Vec2& x) const {
  require_inside(k, x);
  Vector phi, dx, dy;
  eval_basis(k, x, phi, dx, dy);
  const auto c = dofs.segment(scalar_offset(k), local_dim(k));
  return Vec2(c.dot(dx), c.dot(dy));
}

BrokenValue DgSpace::eval_broken(const Vector& dofs, int k, const Vec2& x) const {
  require_inside(k, x);
  Vector phi, dx, dy;
  eval_basis(k, x, phi, dx, dy);
  const int n = local_dim(k);
  BrokenValue r;
  for (int c = 0; c < 2; ++c) {
    const auto u = dofs.segment(vector_index(k, c, 0), n);
    r.value[c] = u.dot(phi);
    r.grad(c, 0) = u.dot(dx);
    r.grad(c, 1) = u.dot(dy);
  }
  r.div = r.grad.trace();
  r.eps = 0.5 * (r.grad + r.grad.transpose());
  return r;
}

double DgSpace::eval_scalar(const Vector& dofs, const Vec2& x) const {
  const int k = mesh_->locate(x);
  if (k < 0) throw LookupError("basis", "point is outside the mesh");
  return eval_scalar(dofs, k, x);
}

BrokenValue DgSpace::eval_broken(const Vector& dofs, const Vec2& x) const {
  const int k = mesh_->locate(x);
  if (k < 0) throw LookupError("basis", "point is outside the mesh");
  return eval_broken(dofs, k, x);
}

}  // namespace kvdg
