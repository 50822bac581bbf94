#include "kvdg/output.hpp"

#include "kvdg/parallel.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace kvdg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

ElementFields element_means(const Discretization& d, const State& s) {
  const DgSpace& sp = d.sp();
  const int ne = sp.num_elements();
  ElementFields f;
  f.u.assign(ne, Vec2::Zero());
  f.v.assign(ne, Vec2::Zero());
  f.w.assign(ne, Vec2::Zero());
  f.phi.assign(ne, 0.0);
  parallel_for(static_cast<std::size_t>(ne), [&](std::size_t kk) {
    const int k = static_cast<int>(kk);
    const auto& vq = sp.volume(k);
    const int n = sp.local_dim(k), v0 = sp.vector_index(k, 0, 0), v1 = sp.vector_index(k, 1, 0);
    const int s0 = sp.scalar_offset(k);
    const Vector w = Eigen::Map<const Vector>(vq.q.w.data(), static_cast<Eigen::Index>(vq.q.size()));
    const double area = w.sum();
    // Integrals of the basis functions, then means by dot products.
    const Vector ib = vq.phi.transpose() * w / area;
    const Vector ix = vq.dx.transpose() * w / area, iy = vq.dy.transpose() * w / area;
    f.u[kk] = Vec2(ib.dot(s.U.segment(v0, n)), ib.dot(s.U.segment(v1, n)));
    f.v[kk] = Vec2(ib.dot(s.Z.segment(v0, n)), ib.dot(s.Z.segment(v1, n)));
    f.phi[kk] = ib.dot(s.Phi.segment(s0, n));
    const Vec2 g(ix.dot(s.Phi.segment(s0, n)), iy.dot(s.Phi.segment(s0, n)));
    f.w[kk] = d.coeffs[k].D * g;
  });
  return f;
}

std::string vtk_snapshot(const PolyMesh& mesh, const ElementFields& f, double t) {
  const int ne = mesh.num_elements();
  std::ostringstream o;
  o << "# vtk DataFile Version 3.0\nkvdg t=" << num(t) << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  std::vector<std::vector<Vec2>> polys(static_cast<std::size_t>(ne));
  std::size_t npts = 0;
  for (int k = 0; k < ne; ++k) {
    polys[static_cast<std::size_t>(k)] = mesh.polygon(k);
    npts += polys[static_cast<std::size_t>(k)].size();
  }
  o << "POINTS " << npts << " double\n";
  for (const auto& p : polys)
    for (const auto& x : p) o << num(x.x()) << ' ' << num(x.y()) << " 0\n";
  o << "CELLS " << ne << ' ' << npts + static_cast<std::size_t>(ne) << '\n';
  std::size_t next = 0;
  for (const auto& p : polys) {
    o << p.size();
    for (std::size_t i = 0; i < p.size(); ++i) o << ' ' << next++;
    o << '\n';
  }
  o << "CELL_TYPES " << ne << '\n';
  for (int k = 0; k < ne; ++k) o << "7\n";
  o << "CELL_DATA " << ne << '\n';
  auto vec = [&](const char* name, const std::vector<Vec2>& v) {
    o << "VECTORS " << name << " double\n";
    for (const auto& x : v) o << num(x.x()) << ' ' << num(x.y()) << " 0\n";
  };
  vec("displacement", f.u);
  vec("velocity", f.v);
  vec("filtration", f.w);
  o << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (double p : f.phi) o << num(p) << '\n';
  return o.str();
}

std::string element_csv(const PolyMesh& mesh, const ElementFields& f) {
  std::ostringstream o;
  o << "element,cx,cy,ux,uy,vx,vy,phi,wx,wy\n";
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const Vec2 c = mesh.geometry(k).centroid;
    o << k << ',' << num(c.x()) << ',' << num(c.y()) << ',' << num(f.u[kk].x()) << ',' << num(f.u[kk].y()) << ','
      << num(f.v[kk].x()) << ',' << num(f.v[kk].y()) << ',' << num(f.phi[kk]) << ',' << num(f.w[kk].x()) << ','
      << num(f.w[kk].y()) << '\n';
  }
  return o.str();
}

std::string grid_csv(const Discretization& d, const State& s, int nx, int ny) {
  const PolyMesh& mesh = d.sp().mesh();
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::max()), hi = -lo;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    lo = lo.cwiseMin(mesh.geometry(k).bbox_min);
    hi = hi.cwiseMax(mesh.geometry(k).bbox_max);
  }
  std::ostringstream o;
  o << "x,y,ux,uy,vx,vy,phi,w\n";
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec2 x(lo.x() + (i + 0.5) * (hi.x() - lo.x()) / nx, lo.y() + (j + 0.5) * (hi.y() - lo.y()) / ny);
      const int k = mesh.locate(x);
      if (k < 0) continue;
      const ProbeSample p = sample_state(d, s, k, x);
      o << num(x.x()) << ',' << num(x.y()) << ',' << num(p.u.x()) << ',' << num(p.u.y()) << ',' << num(p.v.x())
        << ',' << num(p.v.y()) << ',' << num(p.phi) << ',' << num(p.w) << '\n';
    }
  return o.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cli", "cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("cli", "write failed for " + path.string());
}

}  // namespace kvdg
