// Clipped Voronoi tessellations with Lloyd relaxation.

#include "kvdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

namespace kvdg {

namespace {

using Polygon = std::vector<Vec2>;

Polygon clip_halfplane(const Polygon& poly, const Vec2& mid, const Vec2& normal) {
  // Keeps {x : (x - mid) . normal <= 0}.
  Polygon out;
  out.reserve(poly.size() + 1);
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % m];
    const double dp = (p - mid).dot(normal);
    const double dq = (q - mid).dot(normal);
    if (dp <= 0.0) out.push_back(p);
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
      const double s = dp / (dp - dq);
      out.push_back(p + s * (q - p));
    }
  }
  return out;
}

double poly_area(const Polygon& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    s += p.x() * q.y() - p.y() * q.x();
  }
  return 0.5 * s;
}

Vec2 poly_centroid(const Polygon& poly, const Vec2& origin) {
  double a = 0.0;
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i] - origin;
    const Vec2 q = poly[(i + 1) % poly.size()] - origin;
    const double w = p.x() * q.y() - p.y() * q.x();
    a += w;
    c += (p + q) * w;
  }
  return origin + c / (3.0 * a);
}

// int_V |x - g|^2 dx by a fan from g.
double second_moment(const Polygon& poly, const Vec2& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i] - g;
    const Vec2 q = poly[(i + 1) % poly.size()] - g;
    const double area = 0.5 * (p.x() * q.y() - p.y() * q.x());
    s += area / 6.0 * (p.squaredNorm() + q.squaredNorm() + p.dot(q));
  }
  return s;
}

// Generators are bucketed on a uniform grid and visited ring by ring, so a
// cell only meets the neighbours that can still cut it.
std::vector<Polygon> voronoi_cells(const Rect& domain, const std::vector<Vec2>& gens) {
  const std::size_t n = gens.size();
  const Polygon box{{domain.xmin, domain.ymin},
                    {domain.xmax, domain.ymin},
                    {domain.xmax, domain.ymax},
                    {domain.xmin, domain.ymax}};
  const double s = std::sqrt(domain.area() / static_cast<double>(n));
  const int gx = std::max(1, static_cast<int>(std::ceil(domain.width() / s)));
  const int gy = std::max(1, static_cast<int>(std::ceil(domain.height() / s)));
  auto bucket_of = [&](const Vec2& p) {
    const int bx = std::clamp(static_cast<int>((p.x() - domain.xmin) / s), 0, gx - 1);
    const int by = std::clamp(static_cast<int>((p.y() - domain.ymin) / s), 0, gy - 1);
    return std::pair<int, int>(bx, by);
  };
  std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(gx * gy));
  for (std::size_t j = 0; j < n; ++j) {
    const auto [bx, by] = bucket_of(gens[j]);
    buckets[static_cast<std::size_t>(by * gx + bx)].push_back(j);
  }

  std::vector<Polygon> cells(n);
  std::vector<std::pair<double, std::size_t>> ring;
  for (std::size_t i = 0; i < n; ++i) {
    Polygon cell = box;
    auto radius2 = [&] {
      double r = 0.0;
      for (const auto& p : cell) r = std::max(r, (p - gens[i]).squaredNorm());
      return r;
    };
    double r2 = radius2();
    const auto [cx, cy] = bucket_of(gens[i]);
    const int max_ring = std::max(gx, gy);
    for (int k = 0; k <= max_ring && cell.size() >= 3; ++k) {
      // Every generator in ring k is at least (k - 1) s away.
      const double dmin = std::max(0, k - 1) * s;
      if (dmin * dmin > 4.0 * r2) break;
      ring.clear();
      for (int by = cy - k; by <= cy + k; ++by)
        for (int bx = cx - k; bx <= cx + k; ++bx) {
          if (std::max(std::abs(bx - cx), std::abs(by - cy)) != k) continue;
          if (bx < 0 || by < 0 || bx >= gx || by >= gy) continue;
          for (std::size_t j : buckets[static_cast<std::size_t>(by * gx + bx)])
            if (j != i) ring.emplace_back((gens[j] - gens[i]).squaredNorm(), j);
        }
      std::sort(ring.begin(), ring.end());
      for (const auto& [d2, j] : ring) {
        // A bisector farther than the cell radius cannot cut the cell.
        if (d2 > 4.0 * r2) break;
        const Vec2 normal = gens[j] - gens[i];
        cell = clip_halfplane(cell, 0.5 * (gens[i] + gens[j]), normal);
        if (cell.size() < 3) break;
        r2 = radius2();
      }
    }
    cells[i] = std::move(cell);
  }
  return cells;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[static_cast<std::size_t>(a)] = b;
  }
};

PolyMesh mesh_from_cells(const Rect& domain, const std::vector<Polygon>& cells) {
  const double scale = std::max(domain.width(), domain.height());
  const double tol = 1e-10 * scale;

  std::vector<Vec2> raw;
  std::vector<std::vector<int>> raw_loops(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (cells[c].size() < 3)
      throw NumericalError("mesh", "degenerate Voronoi cell " + std::to_string(c));
    for (const auto& p : cells[c]) {
      Vec2 q = p;
      if (std::abs(q.x() - domain.xmin) < tol) q.x() = domain.xmin;
      if (std::abs(q.x() - domain.xmax) < tol) q.x() = domain.xmax;
      if (std::abs(q.y() - domain.ymin) < tol) q.y() = domain.ymin;
      if (std::abs(q.y() - domain.ymax) < tol) q.y() = domain.ymax;
      raw_loops[c].push_back(static_cast<int>(raw.size()));
      raw.push_back(q);
    }
  }

  // Merge coincident points through a hashed grid with 3x3 neighbourhoods.
  const double cs = 4.0 * tol;
  auto key = [cs](long ix, long iy) { return (ix * 73856093L) ^ (iy * 19349663L); };
  std::unordered_multimap<long, int> grid;
  UnionFind uf(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const long ix = static_cast<long>(std::floor(raw[i].x() / cs));
    const long iy = static_cast<long>(std::floor(raw[i].y() / cs));
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy) {
        auto [lo, hi] = grid.equal_range(key(ix + dx, iy + dy));
        for (auto it = lo; it != hi; ++it)
          if ((raw[static_cast<std::size_t>(it->second)] - raw[i]).norm() <= tol)
            uf.unite(static_cast<int>(i), it->second);
      }
    grid.emplace(key(ix, iy), static_cast<int>(i));
  }

  std::vector<int> id(raw.size(), -1);
  std::vector<Vec2> verts;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int r = uf.find(static_cast<int>(i));
    if (id[static_cast<std::size_t>(r)] < 0) {
      id[static_cast<std::size_t>(r)] = static_cast<int>(verts.size());
      verts.push_back(raw[static_cast<std::size_t>(r)]);
    }
    id[i] = id[static_cast<std::size_t>(r)];
  }

  std::vector<std::vector<int>> loops;
  loops.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<int> loop;
    for (int r : raw_loops[c]) {
      const int v = id[static_cast<std::size_t>(r)];
      if (loop.empty() || loop.back() != v) loop.push_back(v);
    }
    while (loop.size() > 1 && loop.front() == loop.back()) loop.pop_back();
    if (loop.size() < 3)
      throw NumericalError("mesh", "Voronoi cell " + std::to_string(c) + " collapsed");
    loops.push_back(std::move(loop));
  }

  // Tag boundary edges by the side they lie on.
  std::vector<BoundaryTag> tags;
  for (std::size_t c = 0; c < loops.size(); ++c) {
    const auto& loop = loops[c];
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const Vec2& a = verts[static_cast<std::size_t>(loop[i])];
      const Vec2& b = verts[static_cast<std::size_t>(loop[(i + 1) % loop.size()])];
      int tag = 0;
      if (a.y() == domain.ymin && b.y() == domain.ymin) tag = kBottom;
      else if (a.x() == domain.xmax && b.x() == domain.xmax) tag = kRight;
      else if (a.y() == domain.ymax && b.y() == domain.ymax) tag = kTop;
      else if (a.x() == domain.xmin && b.x() == domain.xmin) tag = kLeft;
      if (tag != 0) tags.push_back({static_cast<int>(c), static_cast<int>(i), tag});
    }
  }

  PolyMesh mesh(std::move(verts), std::move(loops), std::move(tags));
  for (const auto& f : mesh.boundary_faces())
    if (f.tag == 0)
      throw TopologyError("mesh", "Voronoi mesh has an unmatched interior face at element " +
                                      std::to_string(f.element));
  return mesh;
}

void check_distinct(const std::vector<Vec2>& gens, double tol) {
  std::vector<std::size_t> order(gens.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gens[a].x() < gens[b].x();
  });
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (gens[order[j]].x() - gens[order[i]].x() > tol) break;
      if ((gens[order[j]] - gens[order[i]]).norm() <= tol)
        throw NumericalError("mesh", "coincident Voronoi generators");
    }
}

VoronoiResult relax_and_build(const Rect& domain, std::vector<Vec2> gens, int lloyd_iters) {
  if (!domain.valid()) throw ConfigError("mesh", "domain has non-positive area");
  if (gens.size() < 2) throw ConfigError("mesh", "Voronoi mesh needs at least 2 generators");
  if (lloyd_iters < 0) throw ConfigError("mesh", "negative Lloyd iteration count");
  const double tol = 1e-9 * std::max(domain.width(), domain.height());
  std::vector<double> dist, energy;
  for (int it = 0; it < lloyd_iters; ++it) {
    check_distinct(gens, tol);
    const auto cells = voronoi_cells(domain, gens);
    double d = 0.0, e = 0.0;
    std::vector<Vec2> next(gens.size());
    for (std::size_t i = 0; i < gens.size(); ++i) {
      if (cells[i].size() < 3 || !(poly_area(cells[i]) > 0.0))
        throw NumericalError("mesh", "empty Voronoi cell during relaxation");
      next[i] = poly_centroid(cells[i], gens[i]);
      d += (next[i] - gens[i]).squaredNorm();
      e += second_moment(cells[i], gens[i]);
    }
    dist.push_back(d);
    energy.push_back(e);
    gens = std::move(next);
  }
  check_distinct(gens, tol);
  PolyMesh mesh = mesh_from_cells(domain, voronoi_cells(domain, gens));
  return VoronoiResult{std::move(mesh), std::move(gens), std::move(dist), std::move(energy), 0};
}

// Uniform double in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementation.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

VoronoiResult voronoi_from_generators(const Rect& domain, std::vector<Vec2> generators,
                                      int lloyd_iters) {
  return relax_and_build(domain, std::move(generators), lloyd_iters);
}

VoronoiResult generate_voronoi(const Rect& domain, int n_elements, int lloyd_iters,
                               std::uint64_t seed) {
  if (n_elements < 2) throw ConfigError("mesh", "Voronoi mesh needs n_elements >= 2");
  if (!domain.valid()) throw ConfigError("mesh", "domain has non-positive area");
  constexpr int kMaxRetries = 5;
  std::string last_error;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt) * 0x9E3779B97F4A7C15ULL;
    std::mt19937_64 rng(s);
    std::vector<Vec2> gens(static_cast<std::size_t>(n_elements));
    for (auto& g : gens) {
      const double x = domain.xmin + domain.width() * unit_uniform(rng);
      const double y = domain.ymin + domain.height() * unit_uniform(rng);
      g = Vec2(x, y);
    }
    try {
      VoronoiResult r = relax_and_build(domain, std::move(gens), lloyd_iters);
      r.seed_used = s;
      return r;
    } catch (const NumericalError& e) {
      last_error = e.what();
    } catch (const TopologyError& e) {
      last_error = e.what();
    }
  }
  throw NumericalError("mesh", "Voronoi generation failed after " + std::to_string(kMaxRetries) +
                                   " retries: " + last_error);
}

}  // namespace kvdg
