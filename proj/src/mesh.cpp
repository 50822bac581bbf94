#include "kvdg/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace kvdg {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    s += cross(p, q);
  }
  return 0.5 * s;
}

Vec2 polygon_centroid(const std::vector<Vec2>& poly, double area) {
  // Shift to the first vertex to limit cancellation on far-away polygons.
  const Vec2 o = poly.front();
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i] - o;
    const Vec2 q = poly[(i + 1) % poly.size()] - o;
    c += (p + q) * cross(p, q);
  }
  return o + c / (6.0 * area);
}

int orientation(const Vec2& a, const Vec2& b, const Vec2& c, double eps) {
  const double v = cross(b - a, c - a);
  if (v > eps) return 1;
  if (v < -eps) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p, double eps) {
  return std::min(a.x(), b.x()) - eps <= p.x() && p.x() <= std::max(a.x(), b.x()) + eps &&
         std::min(a.y(), b.y()) - eps <= p.y() && p.y() <= std::max(a.y(), b.y()) + eps;
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2,
                        double eps) {
  const int o1 = orientation(p1, p2, q1, eps);
  const int o2 = orientation(p1, p2, q2, eps);
  const int o3 = orientation(q1, q2, p1, eps);
  const int o4 = orientation(q1, q2, p2, eps);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
  if (o1 == 0 && on_segment(p1, p2, q1, eps)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2, eps)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1, eps)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2, eps)) return true;
  return false;
}

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  return cross(b - a, p - a) >= 0.0 && cross(c - b, p - b) >= 0.0 && cross(a - c, p - c) >= 0.0;
}

// Ear clipping for simple counter-clockwise polygons that are not star-shaped
// with respect to their centroid.
std::vector<SubTriangle> ear_clip(const std::vector<Vec2>& poly) {
  std::vector<int> idx(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) idx[i] = static_cast<int>(i);
  std::vector<SubTriangle> tris;
  int guard = 0;
  while (idx.size() > 3 && guard < 10000) {
    ++guard;
    bool clipped = false;
    const std::size_t m = idx.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Vec2& a = poly[static_cast<std::size_t>(idx[(i + m - 1) % m])];
      const Vec2& b = poly[static_cast<std::size_t>(idx[i])];
      const Vec2& c = poly[static_cast<std::size_t>(idx[(i + 1) % m])];
      if (cross(b - a, c - b) <= 0.0) continue;
      bool empty = true;
      for (std::size_t j = 0; j < m && empty; ++j) {
        if (j == i || j == (i + 1) % m || j == (i + m - 1) % m) continue;
        if (point_in_triangle(poly[static_cast<std::size_t>(idx[j])], a, b, c)) empty = false;
      }
      if (!empty) continue;
      tris.push_back({{a, b, c}, 0.5 * cross(b - a, c - a)});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
      clipped = true;
      break;
    }
    if (!clipped) throw TopologyError("mesh", "ear clipping failed on a non-simple polygon");
  }
  const Vec2& a = poly[static_cast<std::size_t>(idx[0])];
  const Vec2& b = poly[static_cast<std::size_t>(idx[1])];
  const Vec2& c = poly[static_cast<std::size_t>(idx[2])];
  tris.push_back({{a, b, c}, 0.5 * cross(b - a, c - a)});
  return tris;
}

}  // namespace

PolyMesh::PolyMesh(std::vector<Vec2> vertices, std::vector<std::vector<int>> elements,
                   std::vector<BoundaryTag> tags)
    : vertices_(std::move(vertices)), elements_(std::move(elements)), tags_(std::move(tags)) {
  if (elements_.empty()) throw TopologyError("mesh", "mesh has no elements");
  const int nv = static_cast<int>(vertices_.size());
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    const auto& loop = elements_[k];
    if (loop.size() < 3)
      throw TopologyError("mesh", "element " + std::to_string(k) + " has fewer than 3 vertices");
    for (std::size_t i = 0; i < loop.size(); ++i) {
      if (loop[i] < 0 || loop[i] >= nv)
        throw TopologyError("mesh", "element " + std::to_string(k) + " references vertex " +
                                        std::to_string(loop[i]) + " out of range");
      if (loop[i] == loop[(i + 1) % loop.size()])
        throw TopologyError("mesh", "element " + std::to_string(k) + " repeats a vertex");
    }
  }
  build_geometry();
  build_faces();
}

void PolyMesh::build_geometry() {
  geometry_.resize(elements_.size());
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    const auto poly = polygon(static_cast<int>(k));
    ElementGeometry& g = geometry_[k];
    g.area = signed_area(poly);
    if (!(g.area > 0.0))
      throw TopologyError("mesh", "element " + std::to_string(k) +
                                      " is not positively oriented or has zero area");
    g.centroid = polygon_centroid(poly, g.area);
    g.bbox_min = poly.front();
    g.bbox_max = poly.front();
    g.diameter = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      g.bbox_min = g.bbox_min.cwiseMin(poly[i]);
      g.bbox_max = g.bbox_max.cwiseMax(poly[i]);
      for (std::size_t j = i + 1; j < poly.size(); ++j)
        g.diameter = std::max(g.diameter, (poly[i] - poly[j]).norm());
    }

    // Simplicity: non-adjacent edges must not touch.
    const std::size_t m = poly.size();
    const double eps = 1e-14 * g.diameter * g.diameter;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        if (j == i + 1 || (i == 0 && j == m - 1)) continue;
        if (segments_intersect(poly[i], poly[(i + 1) % m], poly[j], poly[(j + 1) % m], eps))
          throw TopologyError("mesh", "element " + std::to_string(k) + " is self-intersecting");
      }
    }

    // Centroid fan when every fan triangle is positive, ear clipping otherwise.
    g.triangles.clear();
    bool fan_ok = true;
    const double min_area = 1e-14 * g.area;
    for (std::size_t i = 0; i < m; ++i) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[(i + 1) % m];
      const double area = 0.5 * cross(a - g.centroid, b - g.centroid);
      if (area <= min_area) {
        fan_ok = false;
        break;
      }
      g.triangles.push_back({{g.centroid, a, b}, area});
    }
    if (!fan_ok) g.triangles = ear_clip(poly);
  }
}

void PolyMesh::build_faces() {
  struct Half {
    int element, local;
    int from, to;
  };
  std::map<std::pair<int, int>, std::vector<Half>> edges;
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    const auto& loop = elements_[k];
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const int a = loop[i];
      const int b = loop[(i + 1) % loop.size()];
      edges[{std::min(a, b), std::max(a, b)}].push_back(
          {static_cast<int>(k), static_cast<int>(i), a, b});
    }
  }

  std::map<std::pair<int, int>, int> tag_of;
  for (const auto& t : tags_) {
    if (t.element < 0 || t.element >= num_elements())
      throw TopologyError("mesh", "boundary tag references element " + std::to_string(t.element));
    const auto& loop = elements_[static_cast<std::size_t>(t.element)];
    if (t.local_edge < 0 || t.local_edge >= static_cast<int>(loop.size()))
      throw TopologyError("mesh", "boundary tag references local edge " +
                                      std::to_string(t.local_edge) + " of element " +
                                      std::to_string(t.element));
    tag_of[{t.element, t.local_edge}] = t.tag;
  }

  interior_.clear();
  boundary_.clear();
  for (const auto& [key, halves] : edges) {
    if (halves.size() > 2)
      throw TopologyError("mesh", "face (" + std::to_string(key.first) + ", " +
                                      std::to_string(key.second) + ") borders " +
                                      std::to_string(halves.size()) + " elements");
    const Half& h = halves.front();
    const Vec2 a = vertices_[static_cast<std::size_t>(h.from)];
    const Vec2 b = vertices_[static_cast<std::size_t>(h.to)];
    const Vec2 d = b - a;
    const double len = d.norm();
    if (!(len > 0.0)) throw TopologyError("mesh", "zero-length face");
    const Vec2 n(d.y() / len, -d.x() / len);
    if (halves.size() == 2) {
      const Half& o = halves[1];
      if (o.from != h.to || o.to != h.from)
        throw TopologyError("mesh", "elements " + std::to_string(h.element) + " and " +
                                        std::to_string(o.element) +
                                        " traverse a shared face with the same orientation");
      if (o.element == h.element)
        throw TopologyError("mesh", "element " + std::to_string(h.element) + " borders itself");
      interior_.push_back({h.element, o.element, h.local, o.local, a, b, n, len});
      if (tag_of.count({h.element, h.local}) || tag_of.count({o.element, o.local}))
        throw TopologyError("mesh", "boundary tag placed on an interior face of element " +
                                        std::to_string(h.element));
    } else {
      const auto it = tag_of.find({h.element, h.local});
      boundary_.push_back({h.element, h.local, a, b, n, len, it == tag_of.end() ? 0 : it->second});
    }
  }
}

std::vector<Vec2> PolyMesh::polygon(int k) const {
  const auto& loop = elements_[static_cast<std::size_t>(k)];
  std::vector<Vec2> out;
  out.reserve(loop.size());
  for (int v : loop) out.push_back(vertices_[static_cast<std::size_t>(v)]);
  return out;
}

double PolyMesh::mesh_size() const {
  double h = 0.0;
  for (const auto& g : geometry_) h = std::max(h, g.diameter);
  return h;
}

double PolyMesh::total_area() const {
  double s = 0.0;
  for (const auto& g : geometry_) s += g.area;
  return s;
}

bool PolyMesh::contains(int k, const Vec2& x, double tol) const {
  const ElementGeometry& g = geometry(k);
  const double pad = tol * g.diameter;
  if (x.x() < g.bbox_min.x() - pad || x.x() > g.bbox_max.x() + pad ||
      x.y() < g.bbox_min.y() - pad || x.y() > g.bbox_max.y() + pad)
    return false;
  const auto poly = polygon(k);
  const std::size_t m = poly.size();
  // On-boundary check first, then crossing number.
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % m];
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    const double s = std::clamp((x - a).dot(d) / len2, 0.0, 1.0);
    if ((a + s * d - x).norm() <= pad) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
    const Vec2& pi = poly[i];
    const Vec2& pj = poly[j];
    if ((pi.y() > x.y()) != (pj.y() > x.y())) {
      const double xc = pj.x() + (x.y() - pj.y()) * (pi.x() - pj.x()) / (pi.y() - pj.y());
      if (x.x() < xc) inside = !inside;
    }
  }
  return inside;
}

int PolyMesh::locate(const Vec2& x) const {
  for (int k = 0; k < num_elements(); ++k)
    if (contains(k, x)) return k;
  return -1;
}

std::vector<std::vector<int>> PolyMesh::neighbours() const {
  std::vector<std::vector<int>> nb(elements_.size());
  for (const auto& f : interior_) {
    nb[static_cast<std::size_t>(f.plus)].push_back(f.minus);
    nb[static_cast<std::size_t>(f.minus)].push_back(f.plus);
  }
  return nb;
}

MeshQualityReport quality_report(const PolyMesh& mesh) {
  MeshQualityReport r;
  r.element_count = mesh.num_elements();
  r.interior_face_count = static_cast<int>(mesh.interior_faces().size());
  r.boundary_face_count = static_cast<int>(mesh.boundary_faces().size());
  r.face_count = r.interior_face_count + r.boundary_face_count;
  r.min_shape_ratio = std::numeric_limits<double>::infinity();
  r.max_shape_ratio = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& g = mesh.geometry(k);
    const double ratio = g.area / (g.diameter * g.diameter);
    r.min_shape_ratio = std::min(r.min_shape_ratio, ratio);
    r.max_shape_ratio = std::max(r.max_shape_ratio, ratio);
  }
  r.min_contact_ratio = std::numeric_limits<double>::infinity();
  for (const auto& f : mesh.interior_faces()) {
    r.min_contact_ratio = std::min(r.min_contact_ratio, f.length / mesh.geometry(f.plus).diameter);
    r.min_contact_ratio =
        std::min(r.min_contact_ratio, f.length / mesh.geometry(f.minus).diameter);
  }
  for (const auto& f : mesh.boundary_faces())
    r.min_contact_ratio =
        std::min(r.min_contact_ratio, f.length / mesh.geometry(f.element).diameter);
  return r;
}

PolyMesh cartesian_mesh(const Rect& domain, int nx, int ny) {
  if (nx < 1 || ny < 1) throw ConfigError("mesh", "cartesian mesh needs nx, ny >= 1");
  if (!domain.valid()) throw ConfigError("mesh", "domain has non-positive area");
  std::vector<Vec2> verts;
  verts.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    const double y = j == ny ? domain.ymax : domain.ymin + domain.height() * j / ny;
    for (int i = 0; i <= nx; ++i) {
      const double x = i == nx ? domain.xmax : domain.xmin + domain.width() * i / nx;
      verts.emplace_back(x, y);
    }
  }
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::vector<int>> elems;
  std::vector<BoundaryTag> tags;
  elems.reserve(static_cast<std::size_t>(nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = static_cast<int>(elems.size());
      elems.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
      if (j == 0) tags.push_back({k, 0, kBottom});
      if (i == nx - 1) tags.push_back({k, 1, kRight});
      if (j == ny - 1) tags.push_back({k, 2, kTop});
      if (i == 0) tags.push_back({k, 3, kLeft});
    }
  }
  return PolyMesh(std::move(verts), std::move(elems), std::move(tags));
}

std::string serialize_mesh(const PolyMesh& mesh) {
  std::string out;
  char buf[96];
  out += "polymesh 2d\n";
  out += "vertices " + std::to_string(mesh.vertices().size()) + "\n";
  for (const auto& v : mesh.vertices()) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", v.x(), v.y());
    out += buf;
  }
  out += "elements " + std::to_string(mesh.elements().size()) + "\n";
  for (const auto& e : mesh.elements()) {
    out += std::to_string(e.size());
    for (int v : e) out += " " + std::to_string(v);
    out += "\n";
  }
  // Canonical (element, edge) order; untagged faces are omitted.
  std::vector<BoundaryTag> tags;
  for (const auto& f : mesh.boundary_faces())
    if (f.tag != 0) tags.push_back({f.element, f.local_edge, f.tag});
  std::sort(tags.begin(), tags.end(), [](const BoundaryTag& a, const BoundaryTag& b) {
    return std::tie(a.element, a.local_edge) < std::tie(b.element, b.local_edge);
  });
  out += "boundary_tags " + std::to_string(tags.size()) + "\n";
  for (const auto& t : tags)
    out += std::to_string(t.element) + " " + std::to_string(t.local_edge) + " " +
           std::to_string(t.tag) + "\n";
  return out;
}

void save_mesh(const PolyMesh& mesh, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("mesh", "cannot open " + path.string() + " for writing");
  f << serialize_mesh(mesh);
  if (!f) throw ConfigError("mesh", "failed writing " + path.string());
}

namespace {

/// Whitespace tokenizer over the mesh format that tracks line numbers and
/// strips '#' comments.
class TokenStream {
 public:
  explicit TokenStream(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens_.push_back({tok, no});
    }
    last_line_ = no;
  }

  bool done() const { return pos_ >= tokens_.size(); }
  int line() const { return done() ? last_line_ : tokens_[pos_].second; }

  std::string word(const char* what) {
    if (done()) throw ParseError("mesh", last_line_, std::string("unexpected end of file, expected ") + what);
    return tokens_[pos_++].first;
  }

  void expect(const std::string& w) {
    const int ln = line();
    const std::string got = word(w.c_str());
    if (got != w) throw ParseError("mesh", ln, "expected '" + w + "', found '" + got + "'");
  }

  long integer(const char* what) {
    const int ln = line();
    const std::string tok = word(what);
    long v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      throw ParseError("mesh", ln, std::string("expected integer ") + what + ", found '" + tok + "'");
    return v;
  }

  double real(const char* what) {
    const int ln = line();
    const std::string tok = word(what);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v))
      throw ParseError("mesh", ln, std::string("expected real ") + what + ", found '" + tok + "'");
    return v;
  }

 private:
  std::vector<std::pair<std::string, int>> tokens_;
  std::size_t pos_ = 0;
  int last_line_ = 0;
};

}  // namespace

PolyMesh parse_mesh(const std::string& text) {
  TokenStream ts(text);
  ts.expect("polymesh");
  ts.expect("2d");
  ts.expect("vertices");
  const long nv = ts.integer("vertex count");
  if (nv < 3) throw ParseError("mesh", ts.line(), "need at least 3 vertices");
  std::vector<Vec2> verts;
  verts.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    const double x = ts.real("x coordinate");
    const double y = ts.real("y coordinate");
    verts.emplace_back(x, y);
  }
  ts.expect("elements");
  const long ne = ts.integer("element count");
  if (ne < 1) throw ParseError("mesh", ts.line(), "need at least 1 element");
  std::vector<std::vector<int>> elems(static_cast<std::size_t>(ne));
  for (long e = 0; e < ne; ++e) {
    const int ln = ts.line();
    const long k = ts.integer("vertex count of element");
    if (k < 3) throw ParseError("mesh", ln, "element with fewer than 3 vertices");
    for (long i = 0; i < k; ++i) {
      const int lnv = ts.line();
      const long v = ts.integer("vertex index");
      if (v < 0 || v >= nv) throw ParseError("mesh", lnv, "vertex index out of range");
      elems[static_cast<std::size_t>(e)].push_back(static_cast<int>(v));
    }
  }
  std::vector<BoundaryTag> tags;
  if (!ts.done()) {
    ts.expect("boundary_tags");
    const long nb = ts.integer("boundary tag count");
    for (long b = 0; b < nb; ++b) {
      BoundaryTag t;
      t.element = static_cast<int>(ts.integer("tag element"));
      t.local_edge = static_cast<int>(ts.integer("tag local edge"));
      t.tag = static_cast<int>(ts.integer("tag value"));
      tags.push_back(t);
    }
  }
  if (!ts.done()) throw ParseError("mesh", ts.line(), "trailing content");
  return PolyMesh(std::move(verts), std::move(elems), std::move(tags));
}

PolyMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("mesh", "cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_mesh(ss.str());
}

}  // namespace kvdg
