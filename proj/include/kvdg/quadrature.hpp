#pragma once

#include "kvdg/common.hpp"

#include <vector>

namespace kvdg {

/// Gauss-Legendre rule on [0, 1].
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;  // exactness
};

/// Rule on the reference triangle (0,0), (1,0), (0,1).
struct TriangleRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Physical points and weights; weights include the Jacobian.
struct PointSet {
  std::vector<Vec2> x;
  std::vector<double> w;

  std::size_t size() const { return x.size(); }
};

LineRule gauss_legendre(int n_points);
LineRule line_rule(int degree);

/// Collapsed (Duffy) tensor Gauss rule exact to `degree`.
TriangleRule triangle_rule(int degree);

PointSet map_triangle(const TriangleRule& rule, const Vec2& a, const Vec2& b, const Vec2& c);
PointSet map_segment(const LineRule& rule, const Vec2& a, const Vec2& b);

}  // namespace kvdg
