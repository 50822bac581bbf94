#include "kvdg/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace kvdg {

namespace {

// Nodes on [-1, 1] by Newton iteration on P_n from Chebyshev guesses.
void legendre_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Re-evaluate the derivative at the converged node.
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    w[static_cast<std::size_t>(i)] = wi;
    w[static_cast<std::size_t>(n - 1 - i)] = wi;
  }
  if (n % 2 == 1) x[static_cast<std::size_t>(n / 2)] = 0.0;
}

}  // namespace

LineRule gauss_legendre(int n_points) {
  if (n_points < 1) throw ConfigError("basis", "Gauss rule needs at least one point");
  static std::mutex mutex;
  static std::map<int, LineRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n_points);
  if (it != cache.end()) return it->second;
  std::vector<double> x, w;
  if (n_points == 1) {
    x = {0.0};
    w = {2.0};
  } else {
    legendre_nodes(n_points, x, w);
  }
  LineRule r;
  r.degree = 2 * n_points - 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.points.push_back(0.5 * (x[i] + 1.0));
    r.weights.push_back(0.5 * w[i]);
  }
  cache.emplace(n_points, r);
  return r;
}

LineRule line_rule(int degree) {
  return gauss_legendre(std::max(1, (degree + 2) / 2));
}

TriangleRule triangle_rule(int degree) {
  if (degree < 0) throw ConfigError("basis", "negative quadrature degree");
  // x = u, y = v (1 - u); the Jacobian (1 - u) raises the u-degree by one.
  const LineRule ru = gauss_legendre(std::max(1, (degree + 2 + 1) / 2));
  const LineRule rv = gauss_legendre(std::max(1, (degree + 1 + 1) / 2));
  TriangleRule t;
  t.degree = degree;
  for (std::size_t i = 0; i < ru.points.size(); ++i)
    for (std::size_t j = 0; j < rv.points.size(); ++j) {
      const double u = ru.points[i];
      const double v = rv.points[j];
      t.points.emplace_back(u, v * (1.0 - u));
      t.weights.push_back(ru.weights[i] * rv.weights[j] * (1.0 - u));
    }
  return t;
}

PointSet map_triangle(const TriangleRule& rule, const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 e1 = b - a, e2 = c - a;
  const double jac = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
  PointSet ps;
  ps.x.reserve(rule.points.size());
  ps.w.reserve(rule.points.size());
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    ps.x.push_back(a + rule.points[q].x() * e1 + rule.points[q].y() * e2);
    ps.w.push_back(rule.weights[q] * jac);
  }
  return ps;
}

PointSet map_segment(const LineRule& rule, const Vec2& a, const Vec2& b) {
  const double len = (b - a).norm();
  PointSet ps;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    ps.x.push_back(a + rule.points[q] * (b - a));
    ps.w.push_back(rule.weights[q] * len);
  }
  return ps;
}

}  // namespace kvdg
