#pragma once

#include "kvdg/assembly.hpp"
#include "kvdg/common.hpp"

#include <array>
#include <functional>
#include <string>

namespace kvdg {

/// Value, gradient and Hessian of a scalar function of (x, y); forward-mode
/// second-order differentiation.
struct Jet2 {
  double v = 0.0;
  Vec2 g = Vec2::Zero();
  Mat2 h = Mat2::Zero();

  static Jet2 constant(double c) { return Jet2{c, Vec2::Zero(), Mat2::Zero()}; }
  static Jet2 x(const Vec2& p) { return Jet2{p.x(), Vec2(1.0, 0.0), Mat2::Zero()}; }
  static Jet2 y(const Vec2& p) { return Jet2{p.y(), Vec2(0.0, 1.0), Mat2::Zero()}; }
};

Jet2 operator+(const Jet2& a, const Jet2& b);
Jet2 operator-(const Jet2& a, const Jet2& b);
Jet2 operator-(const Jet2& a);
Jet2 operator*(const Jet2& a, const Jet2& b);
Jet2 operator*(double c, const Jet2& a);
Jet2 sin(const Jet2& a);
Jet2 cos(const Jet2& a);

/// Time factor with its first two derivatives.
struct TimeProfile {
  std::function<double(double)> f, df, ddf;
};

TimeProfile sine_profile(double omega);  // sin(omega t)

/// Separable exact solution u = a(t) U(x), phi = b(t) P(x).
struct ManufacturedCase {
  std::string name;
  std::function<std::array<Jet2, 2>(const Vec2&)> U;
  std::function<Jet2(const Vec2&)> P;
  TimeProfile a, b;

  Vec2 u(const Vec2& x, double t) const;
  Vec2 u_t(const Vec2& x, double t) const;
  Mat2 grad_u(const Vec2& x, double t) const;  // (i, j) = d u_i / d x_j
  double phi(const Vec2& x, double t) const;
  double phi_t(const Vec2& x, double t) const;
  Vec2 grad_phi(const Vec2& x, double t) const;
};

/// trig: smooth solution for h- and l-convergence; linear: affine in space
/// for time-step studies; scaled: trig with magnitudes nu_u, nu_phi.
ManufacturedCase manufactured_case(const std::string& name, double nu_u = 1.0, double nu_phi = 1.0);

/// Unit coefficients of the convergence studies with the given tau1 = tau2.
Material convergence_material(double tau = 1.0);

/// Load series (volume forcing plus Dirichlet lifting) reproducing the
/// exact solution with the given operators' discretization.
LoadSeries manufactured_loads(const ManufacturedCase& mc, const DgSpace& space,
                              const CoefficientField& coeffs, const PenaltyTable& penalties,
                              const BoundaryConditions& bcs);

/// Strong-form forcing (f, g) at a point for one material; used for checks.
Vec2 manufactured_f(const ManufacturedCase& mc, const Material& m, const Vec2& x, double t);
double manufactured_g(const ManufacturedCase& mc, const Material& m, const Vec2& x, double t);

}  // namespace kvdg
