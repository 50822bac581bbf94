#include "doctest.h"

#include "kvdg/verification.hpp"

#include <cmath>
#include <random>

using namespace kvdg;

namespace {

std::shared_ptr<const DgSpace> voronoi_space(int n, int degree, std::uint64_t seed = 4) {
  return std::make_shared<const DgSpace>(generate_voronoi(Rect{}, n, 20, seed).mesh, degree);
}

Vector random_vector(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

Material random_material(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.5, 2.0);
  Material m;
  m.rho = d(rng);
  m.mu = d(rng);
  m.lambda = d(rng);
  m.delta1 = d(rng);
  m.delta2 = d(rng);
  m.gamma = d(rng);
  m.d0 = d(rng);
  m.D << d(rng) + 1.0, 0.3, 0.3, d(rng) + 1.0;
  return m;
}

// Strong-form residual of the exact solution by central differences.
struct FdForcing {
  Vec2 f;
  double g;
};

FdForcing fd_forcing(const ManufacturedCase& mc, const Material& m, const Vec2& x, double t) {
  const double h = 1e-4, k = 1e-4;
  const Vec2 ex(h, 0.0), ey(0.0, h);
  // Stress divergence via differences of the stress tensor.
  auto stress = [&](const Vec2& p, double s) {
    auto grad_at = [&](double tt) {
      Mat2 g;
      for (int j = 0; j < 2; ++j) {
        const Vec2 e = j == 0 ? ex : ey;
        g.col(j) = (mc.u(p + e, tt) - mc.u(p - e, tt)) / (2 * h);
      }
      return g;
    };
    const Mat2 g = grad_at(s);
    const Mat2 gd = (grad_at(s + k) - grad_at(s - k)) / (2 * k);
    const Mat2 eps = 0.5 * (g + g.transpose()), epsd = 0.5 * (gd + gd.transpose());
    return Mat2(2 * m.mu * eps + 2 * m.mu * m.delta1 * epsd +
                (m.lambda * g.trace() + m.lambda * m.delta2 * gd.trace() - m.gamma * mc.phi(p, s)) *
                    Mat2::Identity());
  };
  Vec2 div = Vec2::Zero();
  div += (stress(x + ex, t).col(0) - stress(x - ex, t).col(0)) / (2 * h);
  div += (stress(x + ey, t).col(1) - stress(x - ey, t).col(1)) / (2 * h);
  const Vec2 utt = (mc.u(x, t + k) - 2 * mc.u(x, t) + mc.u(x, t - k)) / (k * k);
  FdForcing out;
  out.f = m.rho * utt - div;

  auto divu = [&](double s) {
    return (mc.u(x + ex, s).x() - mc.u(x - ex, s).x() + mc.u(x + ey, s).y() - mc.u(x - ey, s).y()) / (2 * h);
  };
  auto flux = [&](const Vec2& p) {
    const Vec2 g((mc.phi(p + ex, t) - mc.phi(p - ex, t)) / (2 * h), (mc.phi(p + ey, t) - mc.phi(p - ey, t)) / (2 * h));
    return Vec2(m.D * g);
  };
  const double divflux =
      (flux(x + ex).x() - flux(x - ex).x()) / (2 * h) + (flux(x + ey).y() - flux(x - ey).y()) / (2 * h);
  const double pt = (mc.phi(x, t + k) - mc.phi(x, t - k)) / (2 * k);
  const double ptt = (mc.phi(x, t + k) - 2 * mc.phi(x, t) + mc.phi(x, t - k)) / (k * k);
  const double dt_div = (divu(t + k) - divu(t - k)) / (2 * k);
  const double dtt_div = (divu(t + k) - 2 * divu(t) + divu(t - k)) / (k * k);
  out.g = m.d0 * (pt + m.tau1 * ptt) + m.gamma * (dt_div + m.tau2 * dtt_div) - divflux;
  return out;
}

}  // namespace

TEST_CASE("manufactured cases") {
  const auto trig = manufactured_case("trig");
  const auto lin = manufactured_case("linear");
  const auto sc = manufactured_case("scaled", 0.1, 1e4);
  const Vec2 x(0.3, 0.7);
  CHECK(trig.u(x, 0.0).norm() == 0.0);
  CHECK(trig.phi(x, 0.0) == 0.0);
  const double t = 0.13;
  const double a = std::sin(2 * M_PI * t), b = std::sin(std::sqrt(2.0) * M_PI * t);
  CHECK(lin.u(x, t).x() == doctest::Approx(a * 1.0));
  CHECK(lin.u(x, t).y() == doctest::Approx(a * (0.9 - 3.5)));
  CHECK(lin.phi(x, t) == doctest::Approx(b * (3.0 + 4.2)));
  const double s = 0.09 * std::sin(M_PI * 0.3) * std::sin(M_PI * 0.7);
  CHECK(trig.u(x, t).x() == doctest::Approx(a * s));
  CHECK(trig.u(x, t).y() == doctest::Approx(-a * s));
  CHECK(sc.u(x, t).x() == doctest::Approx(0.1 * a * s));
  CHECK(sc.phi(x, t) == doctest::Approx(1e4 * trig.phi(x, t)));
  CHECK_THROWS_AS(manufactured_case("cubic"), ConfigError);
}

TEST_CASE("manufactured forcing matches a finite-difference residual") {
  std::mt19937_64 rng(17);
  for (const char* name : {"trig", "linear", "scaled"}) {
    const auto mc = manufactured_case(name, 0.3, 5.0);
    for (int rep = 0; rep < 5; ++rep) {
      Material m = random_material(rng);
      m.tau1 = 0.4;
      m.tau2 = 0.7;
      const Vec2 x(0.1 + 0.8 * (rep / 5.0), 0.2 + 0.13 * rep);
      const double t = 0.05 + 0.07 * rep;
      const auto fd = fd_forcing(mc, m, x, t);
      const Vec2 f = manufactured_f(mc, m, x, t);
      const double g = manufactured_g(mc, m, x, t);
      const double scale = 1.0 + f.norm() + std::abs(g);
      CHECK((f - fd.f).norm() / scale < 1e-5);
      CHECK(std::abs(g - fd.g) / scale < 1e-5);
    }
  }
}

TEST_CASE("quadrature dG norms agree with the assembled norm matrices") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 6; ++rep) {
    const int degree = 1 + rep % 3;
    auto space = voronoi_space(6 + rep, degree, 10 + rep);
    std::vector<Material> cells;
    for (int k = 0; k < space->num_elements(); ++k) cells.push_back(random_material(rng));
    BoundaryConditions bc = BoundaryConditions::all_dirichlet();
    if (rep % 2) {
      bc.u[kTop] = BcType::kNeumann;
      bc.phi[kLeft] = BcType::kNeumann;
    }
    const auto d = discretize(space, CoefficientField(cells), bc);
    const auto N = assemble_norm_matrices(*space, d.coeffs, d.penalties, d.bcs);
    const Vector U = random_vector(rng, space->vector_dofs()), P = random_vector(rng, space->scalar_dofs());
    const auto e = compute_errors(d, U, P, ExactFields::zero());
    const SparseMatrix M1 = assemble_mass(*space, std::vector<double>(cells.size(), 1.0), 2);
    const SparseMatrix M0 = assemble_mass(*space, std::vector<double>(cells.size(), 1.0), 1);
    CHECK(e.u_dg * e.u_dg == doctest::Approx(U.dot(N.e * U)).epsilon(1e-10));
    CHECK(e.phi_dg * e.phi_dg == doctest::Approx(P.dot(N.phi * P)).epsilon(1e-10));
    CHECK(e.u_l2 * e.u_l2 == doctest::Approx(U.dot(M1 * U)).epsilon(1e-10));
    CHECK(e.phi_l2 * e.phi_l2 == doctest::Approx(P.dot(M0 * P)).epsilon(1e-10));

    const double c = -3.7;
    const auto ec = compute_errors(d, c * U, c * P, ExactFields::zero());
    CHECK(ec.u_l2 == doctest::Approx(3.7 * e.u_l2).epsilon(1e-12));
    CHECK(ec.u_dg == doctest::Approx(3.7 * e.u_dg).epsilon(1e-12));
    CHECK(ec.phi_l2 == doctest::Approx(3.7 * e.phi_l2).epsilon(1e-12));
    CHECK(ec.phi_dg == doctest::Approx(3.7 * e.phi_dg).epsilon(1e-12));
  }
}

TEST_CASE("a representable exact solution has zero error") {
  auto space = voronoi_space(12, 1);
  const auto d = discretize(space, CoefficientField::uniform(12, convergence_material(1.0)),
                            BoundaryConditions::all_dirichlet());
  const auto mc = manufactured_case("linear");
  const double t = 0.37;
  State s = zero_state(d.ops);
  s.t = t;
  s.U = space->project_vector([&](const Vec2& x) { return mc.u(x, t); });
  s.Phi = space->project_scalar([&](const Vec2& x) { return mc.phi(x, t); });
  const auto e = compute_errors(d, s, mc);
  CHECK(e.u_l2 < 1e-12);
  CHECK(e.u_dg < 1e-11);
  CHECK(e.phi_l2 < 1e-11);
  CHECK(e.phi_dg < 1e-10);
}

TEST_CASE("rate computation") {
  ErrorReport r;
  r.kind = SweepKind::kMeshSize;
  const double p[4] = {4.0, 3.0, 2.5, 2.0};
  for (double h : {0.2, 0.13, 0.09, 0.061}) {
    ErrorRow row;
    row.parameter = h;
    row.err = {1.7 * std::pow(h, p[0]), 0.3 * std::pow(h, p[1]), 9.0 * std::pow(h, p[2]), 2.0 * std::pow(h, p[3])};
    r.rows.push_back(row);
  }
  const auto rates = r.rates();
  REQUIRE(rates.size() == 3);
  for (const auto& q : rates) {
    CHECK(std::abs(q.u_l2 - p[0]) < 1e-12);
    CHECK(std::abs(q.u_dg - p[1]) < 1e-12);
    CHECK(std::abs(q.phi_l2 - p[2]) < 1e-12);
    CHECK(std::abs(q.phi_dg - p[3]) < 1e-12);
  }
  const std::string csv = r.to_csv();
  CHECK(csv.rfind("1/h,e_u_L2,roc_u_L2,e_u_dG,roc_u_dG,e_phi_L2,roc_phi_L2,e_phi_dG,roc_phi_dG\n5,", 0) == 0);
  CHECK(csv.find(",-,") != std::string::npos);

  ErrorReport pr;
  pr.kind = SweepKind::kDegree;
  for (int l = 1; l <= 4; ++l) {
    ErrorRow row;
    row.parameter = l;
    row.err = {std::exp(-1.5 * l), 2 * std::exp(-0.5 * l), std::exp(-l), std::exp(-2.0 * l)};
    pr.rows.push_back(row);
  }
  CHECK(pr.rates().empty());
  const auto s = pr.log_slopes();
  CHECK(s.u_l2 == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(s.u_dg == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(s.phi_dg == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(pr.log_fit_r2().u_l2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pr.to_csv().find("slope,") != std::string::npos);
}

TEST_CASE("sweep configuration errors") {
  SweepConfig c;
  c.kind = SweepKind::kMeshSize;
  c.elements = {100};
  CHECK_THROWS_AS(convergence_sweep(c), ConfigError);
  c.kind = SweepKind::kTimeStep;
  c.dts = {0.01, 0.005};
  CHECK_THROWS_AS(convergence_sweep(c), ConfigError);
  CHECK(parse_sweep_kind("l") == SweepKind::kDegree);
  CHECK_THROWS_AS(parse_sweep_kind("q"), ConfigError);
}

TEST_CASE("time-step sweep is second order for both schemes") {
  for (double tau : {1.0, 0.0}) {
    SweepConfig c;
    c.kind = SweepKind::kTimeStep;
    c.case_name = "linear";
    c.degree = 1;
    c.n_elements = 30;
    c.material = convergence_material(tau);
    const auto rep = convergence_sweep(c);
    REQUIRE(rep.failure.empty());
    for (const auto& r : rep.rates()) {
      CHECK(r.u_l2 == doctest::Approx(2.0).epsilon(0.05));
      CHECK(r.phi_l2 == doctest::Approx(2.0).epsilon(0.05));
      CHECK(r.u_dg == doctest::Approx(2.0).epsilon(0.05));
      CHECK(r.phi_dg == doctest::Approx(2.0).epsilon(0.05));
    }
  }
}

TEST_CASE("small mesh sweep at degree 1 has the expected orders") {
  SweepConfig c;
  c.kind = SweepKind::kMeshSize;
  c.elements = {40, 80, 160};
  c.degree = 1;
  c.dt = 1e-3;
  c.t_final = 0.05;
  c.lloyd_iters = 100;
  c.material = convergence_material(0.0);
  const auto rep = convergence_sweep(c);
  REQUIRE(rep.rows.size() == 3);
  const auto r = rep.rates().back();
  CHECK(r.u_l2 > 1.5);
  CHECK(r.u_l2 < 2.6);
  CHECK(r.u_dg > 0.7);
  CHECK(r.u_dg < 1.4);
  CHECK(r.phi_dg > 0.7);
  CHECK(r.phi_dg < 1.4);
}

TEST_CASE("energy trace") {
  auto space = voronoi_space(16, 2);
  std::mt19937_64 rng(31);
  IntegratorConfig ic;
  ic.dt = 0.01;
  ic.t_final = 0.5;

  SUBCASE("zero data") {
    const auto d = discretize(space, CoefficientField::uniform(16, convergence_material(0.0)),
                              BoundaryConditions::all_dirichlet());
    EnergyTrace tr(d);
    run_simulation(d, LoadSeries(d.ops.nu, d.ops.nphi), ic, zero_state(d.ops), tr.observer());
    REQUIRE(tr.rows().size() == 51);
    for (const auto& r : tr.rows()) CHECK(r.total == 0.0);
  }

  SUBCASE("dissipative coefficients do not gain energy") {
    std::vector<Material> cells;
    for (int k = 0; k < 16; ++k) cells.push_back(random_material(rng));
    BoundaryConditions bc = BoundaryConditions::all_dirichlet();
    bc.phi[kRight] = BcType::kNeumann;
    const auto d = discretize(space, CoefficientField(cells), bc);
    State s = zero_state(d.ops);
    s.U = random_vector(rng, d.ops.nu);
    s.Z = random_vector(rng, d.ops.nu);
    s.Phi = random_vector(rng, d.ops.nphi);
    EnergyTrace tr(d);
    run_simulation(d, LoadSeries(d.ops.nu, d.ops.nphi), ic, s, tr.observer());
    CHECK(tr.growth_steps(1e-8).empty());
    CHECK(tr.rows().back().total < 0.5 * tr.rows().front().total);
    for (const auto& r : tr.rows()) {
      CHECK(r.kinetic >= 0.0);
      CHECK(r.elastic >= 0.0);
      CHECK(r.viscous >= 0.0);
      CHECK(r.relaxation == 0.0);
      CHECK(r.pressure >= 0.0);
    }
  }

  SUBCASE("undamped decoupled elasticity conserves energy") {
    for (double tau : {0.0, 1.0}) {
      Material m = convergence_material(tau);
      m.delta1 = m.delta2 = 0.0;
      m.gamma = 0.0;
      const auto d = discretize(space, CoefficientField::uniform(16, m), BoundaryConditions::all_dirichlet());
      State s = zero_state(d.ops);
      s.U = random_vector(rng, d.ops.nu);
      s.Z = random_vector(rng, d.ops.nu);
      IntegratorConfig c = ic;
      c.scheme = select_scheme(d.coeffs);
      EnergyTrace tr(d);
      run_simulation(d, LoadSeries(d.ops.nu, d.ops.nphi), c, s, tr.observer());
      CHECK(tr.max_relative_change() < 1e-10);
      CHECK(tr.rows().back().total > 0.0);
    }
  }
}

TEST_CASE("filtration field") {
  auto space = voronoi_space(10, 2);
  Material m;
  m.D = 2.5 * Mat2::Identity();
  const auto cf = CoefficientField::uniform(10, m);
  const Vector uniform = space->project_scalar([](const Vec2&) { return 4.0; });
  const auto w0 = filtration_field(*space, uniform, cf);
  for (double v : w0.norm) CHECK(v < 1e-12);
  const Vector px = space->project_scalar([](const Vec2& x) { return x.x(); });
  const auto w1 = filtration_field(*space, px, cf);
  for (int k = 0; k < 10; ++k) {
    CHECK(w1.magnitude[static_cast<std::size_t>(k)] == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(w1.mean[static_cast<std::size_t>(k)].y() == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK(w1.global_norm == doctest::Approx(2.5).epsilon(1e-12));

  const auto same = relative_flow_difference(*space, cf, px, cf, px, cf, px);
  for (double v : same) CHECK(v == 0.0);
  std::vector<std::string> warn;
  const Vector zero = Vector::Zero(space->scalar_dofs());
  const auto undefined = relative_flow_difference(*space, cf, px, cf, uniform, cf, zero, &warn);
  CHECK(std::isnan(undefined[0]));
  CHECK(warn.size() == 1);
  const double g = relative_flow_difference_global(*space, cf, px, cf, 2.0 * px, cf, px);
  CHECK(g == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("simulation driver checks") {
  auto space = voronoi_space(8, 1);
  const auto d = discretize(space, CoefficientField::uniform(8, convergence_material(1.0)),
                            BoundaryConditions::all_dirichlet());
  IntegratorConfig ic;
  ic.dt = 0.1;
  ic.t_final = 0.2;
  ic.scheme = Scheme::kNewmarkTheta;
  const LoadSeries none(d.ops.nu, d.ops.nphi);
  CHECK_THROWS_AS(run_simulation(d, none, ic, zero_state(d.ops)), ConfigError);
  ic.scheme = Scheme::kNewmark;
  ProbeRecorder rec(d, {{"c", Vec2(0.5, 0.5)}, {"corner", Vec2(0.0, 0.0)}});
  const auto out = run_simulation(d, none, ic, zero_state(d.ops), rec.observer());
  CHECK(out.steps == 2);
  REQUIRE(rec.times().size() == 3);
  CHECK(rec.times()[2] == doctest::Approx(0.2));
  for (const auto& row : rec.samples())
    for (const auto& p : row) {
      CHECK(p.u.norm() == 0.0);
      CHECK(p.phi == 0.0);
    }
  CHECK(rec.to_csv().rfind("t,probe,ux,uy,vx,vy,phi,w\n0,c,", 0) == 0);
  CHECK_THROWS_AS(ProbeRecorder(d, {{"out", Vec2(2.0, 0.5)}}), ConfigError);
}
