#include "kvdg/manufactured.hpp"

#include "kvdg/parallel.hpp"

#include <cmath>
#include <numbers>

namespace kvdg {

Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.v + b.v, a.g + b.g, a.h + b.h}; }
Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.v - b.v, a.g - b.g, a.h - b.h}; }
Jet2 operator-(const Jet2& a) { return {-a.v, -a.g, -a.h}; }
Jet2 operator*(double c, const Jet2& a) { return {c * a.v, c * a.g, c * a.h}; }

Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.v * b.v, a.v * b.g + b.v * a.g,
          a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose()};
}

Jet2 sin(const Jet2& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return {s, c * a.g, c * a.h - s * a.g * a.g.transpose()};
}

Jet2 cos(const Jet2& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return {c, -s * a.g, -s * a.h - c * a.g * a.g.transpose()};
}

TimeProfile sine_profile(double w) {
  return {[w](double t) { return std::sin(w * t); }, [w](double t) { return w * std::cos(w * t); },
          [w](double t) { return -w * w * std::sin(w * t); }};
}

Vec2 ManufacturedCase::u(const Vec2& x, double t) const {
  const auto J = U(x);
  return a.f(t) * Vec2(J[0].v, J[1].v);
}

Vec2 ManufacturedCase::u_t(const Vec2& x, double t) const {
  const auto J = U(x);
  return a.df(t) * Vec2(J[0].v, J[1].v);
}

Mat2 ManufacturedCase::grad_u(const Vec2& x, double t) const {
  const auto J = U(x);
  Mat2 g;
  g.row(0) = J[0].g.transpose();
  g.row(1) = J[1].g.transpose();
  return a.f(t) * g;
}

double ManufacturedCase::phi(const Vec2& x, double t) const { return b.f(t) * P(x).v; }
double ManufacturedCase::phi_t(const Vec2& x, double t) const { return b.df(t) * P(x).v; }
Vec2 ManufacturedCase::grad_phi(const Vec2& x, double t) const { return b.f(t) * P(x).g; }

ManufacturedCase manufactured_case(const std::string& name, double nu_u, double nu_phi) {
  constexpr double pi = std::numbers::pi;
  ManufacturedCase mc;
  mc.name = name;
  mc.a = sine_profile(2.0 * pi);
  mc.b = sine_profile(std::sqrt(2.0) * pi);
  if (name == "trig" || name == "scaled") {
    if (name == "trig") nu_u = nu_phi = 1.0;
    mc.U = [nu_u](const Vec2& p) {
      const Jet2 x = Jet2::x(p), y = Jet2::y(p);
      const Jet2 s = x * x * sin(pi * x) * sin(pi * y);
      return std::array<Jet2, 2>{nu_u * s, -nu_u * s};
    };
    mc.P = [nu_phi](const Vec2& p) {
      const Jet2 x = Jet2::x(p);
      return nu_phi * (x * x * cos(0.5 * pi * x) * sin(pi * x));
    };
  } else if (name == "linear") {
    mc.U = [](const Vec2& p) {
      const Jet2 x = Jet2::x(p), y = Jet2::y(p);
      return std::array<Jet2, 2>{x + y, 3.0 * x - 5.0 * y};
    };
    mc.P = [](const Vec2& p) { return 10.0 * Jet2::x(p) + 6.0 * Jet2::y(p); };
  } else {
    throw ConfigError("verification", "unknown manufactured case '" + name + "' (expected trig, linear, scaled)");
  }
  return mc;
}

Material convergence_material(double tau) {
  Material m;
  m.rho = m.mu = m.lambda = m.delta1 = m.delta2 = m.gamma = m.d0 = 1.0;
  m.D = Mat2::Identity();
  m.tau1 = m.tau2 = tau;
  return m;
}

namespace {

// Spatial parts of the forcing, one per time factor.
struct SpatialForcing {
  Vec2 f_a, f_ad, f_add, f_b;
  double g_ad, g_add, g_b, g_bd, g_bdd;
};

SpatialForcing spatial_forcing(const ManufacturedCase& mc, const Material& m, const Vec2& x) {
  const auto J = mc.U(x);
  const Jet2 P = mc.P(x);
  const Vec2 lap(J[0].h.trace(), J[1].h.trace());
  const Vec2 grad_div(J[0].h(0, 0) + J[1].h(1, 0), J[0].h(0, 1) + J[1].h(1, 1));
  const double div = J[0].g.x() + J[1].g.y();
  double div_D_grad = 0.0;
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) div_D_grad += m.D(p, q) * P.h(p, q);
  SpatialForcing s;
  s.f_a = -m.mu * (lap + grad_div) - m.lambda * grad_div;
  s.f_ad = -m.mu * m.delta1 * (lap + grad_div) - m.lambda * m.delta2 * grad_div;
  s.f_add = m.rho * Vec2(J[0].v, J[1].v);
  s.f_b = m.gamma * P.g;
  s.g_ad = m.gamma * div;
  s.g_add = m.gamma * m.tau2 * div;
  s.g_b = -div_D_grad;
  s.g_bd = m.d0 * P.v;
  s.g_bdd = m.d0 * m.tau1 * P.v;
  return s;
}

}  // namespace

Vec2 manufactured_f(const ManufacturedCase& mc, const Material& m, const Vec2& x, double t) {
  const auto s = spatial_forcing(mc, m, x);
  return mc.a.f(t) * s.f_a + mc.a.df(t) * s.f_ad + mc.a.ddf(t) * s.f_add + mc.b.f(t) * s.f_b;
}

double manufactured_g(const ManufacturedCase& mc, const Material& m, const Vec2& x, double t) {
  const auto s = spatial_forcing(mc, m, x);
  return mc.a.df(t) * s.g_ad + mc.a.ddf(t) * s.g_add + mc.b.f(t) * s.g_b + mc.b.df(t) * s.g_bd +
         mc.b.ddf(t) * s.g_bdd;
}

LoadSeries manufactured_loads(const ManufacturedCase& mc, const DgSpace& space, const CoefficientField& coeffs,
                              const PenaltyTable& penalties, const BoundaryConditions& bcs) {
  if (coeffs.size() != space.num_elements())
    throw ConfigError("verification", "coefficient field size does not match the mesh");
  const int nu = space.vector_dofs(), np = space.scalar_dofs();
  Vector Fa = Vector::Zero(nu), Fad = Vector::Zero(nu), Fadd = Vector::Zero(nu), Fb = Vector::Zero(nu);
  Vector Gad = Vector::Zero(np), Gadd = Vector::Zero(np), Gb = Vector::Zero(np), Gbd = Vector::Zero(np),
         Gbdd = Vector::Zero(np);

  parallel_for(static_cast<std::size_t>(space.num_elements()), [&](std::size_t kk) {
    const int k = static_cast<int>(kk);
    const PointSet ps = space.volume_points(k, 2 * space.degree(k) + 4);
    const int n = space.local_dim(k);
    const int v0 = space.vector_index(k, 0, 0), v1 = space.vector_index(k, 1, 0), s0 = space.scalar_offset(k);
    Vector phi;
    for (std::size_t p = 0; p < ps.size(); ++p) {
      space.eval_basis(k, ps.x[p], phi);
      const auto s = spatial_forcing(mc, coeffs[k], ps.x[p]);
      const double w = ps.w[p];
      auto addv = [&](Vector& F, const Vec2& f) {
        F.segment(v0, n) += (w * f.x()) * phi;
        F.segment(v1, n) += (w * f.y()) * phi;
      };
      addv(Fa, s.f_a);
      addv(Fad, s.f_ad);
      addv(Fadd, s.f_add);
      addv(Fb, s.f_b);
      Gad.segment(s0, n) += (w * s.g_ad) * phi;
      Gadd.segment(s0, n) += (w * s.g_add) * phi;
      Gb.segment(s0, n) += (w * s.g_b) * phi;
      Gbd.segment(s0, n) += (w * s.g_bd) * phi;
      Gbdd.segment(s0, n) += (w * s.g_bdd) * phi;
    }
  });

  const auto lift = assemble_lifting(
      space, coeffs, penalties, bcs,
      [&](const Vec2& x) {
        const auto J = mc.U(x);
        return Vec2(J[0].v, J[1].v);
      },
      [&](const Vec2& x) { return mc.P(x).v; });

  LoadSeries series(nu, np);
  series.add({"a", mc.a.f, Fa + lift.elastic, Vector()});
  series.add({"a'", mc.a.df, Fad + lift.viscous, Gad + lift.coupling});
  series.add({"a''", mc.a.ddf, Fadd, Gadd + lift.coupling_tau2});
  series.add({"b", mc.b.f, Fb, Gb + lift.diffusion});
  series.add({"b'", mc.b.df, Vector(), Gbd});
  series.add({"b''", mc.b.ddf, Vector(), Gbdd});
  return series;
}

}  // namespace kvdg
