#include "doctest.h"

#include "kvdg/timestepping.hpp"

#include <cmath>
#include <random>

using namespace kvdg;

namespace {

SparseMatrix sparse(const Dense& d) { return d.sparseView(0.0, 0.0); }

SparseMatrix scalar(double v) {
  Dense d(1, 1);
  d(0, 0) = v;
  return sparse(d);
}

// ODE system u'' + u = 0 next to phi' + phi = 0 (tau1 = 0), or
// phi'' + phi' + phi = 0 when tau1 = 1.
BlockOperators scalar_ops(double tau1) {
  BlockOperators o;
  o.nu = o.nphi = 1;
  o.Mu = scalar(1.0);
  o.Ae = scalar(1.0);
  o.Ae_delta1 = o.Adiv = o.Adiv_delta2 = scalar(0.0);
  o.Mphi = scalar(1.0);
  o.Mphi_tau1 = scalar(tau1);
  o.Aphi = scalar(1.0);
  o.C = o.C_tau2 = scalar(0.0);
  return o;
}

State initial(int nu, int np) {
  State s;
  s.U = Vector::Zero(nu);
  s.Z = Vector::Zero(nu);
  s.Phi = Vector::Zero(np);
  s.Phid = Vector::Zero(np);
  return s;
}

struct OdeErrors {
  double u, phi;
};

OdeErrors run_scalar(Scheme scheme, double dt) {
  const double tau1 = scheme == Scheme::kNewmark ? 1.0 : 0.0;
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.t_final = 1.0;
  cfg.scheme = scheme;
  Integrator integ(scalar_ops(tau1), cfg);
  State s = initial(1, 1);
  s.U(0) = 1.0;
  s.Phi(0) = 1.0;
  const Vector zero = Vector::Zero(2);
  integ.initialize(s, zero);
  for (int n = 0; n < cfg.num_steps(); ++n) integ.step(s, zero, zero);
  const double t = s.t;
  double phi_exact = std::exp(-t);
  if (scheme == Scheme::kNewmark) {
    const double w = std::sqrt(3.0) / 2.0;
    phi_exact = std::exp(-t / 2.0) * (std::cos(w * t) + std::sin(w * t) / (2.0 * w));
  }
  return {std::abs(s.U(0) - std::cos(t)), std::abs(s.Phi(0) - phi_exact)};
}

Dense random_spd(std::mt19937_64& rng, int n, double shift) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Dense a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = d(rng);
  return a * a.transpose() + shift * Dense::Identity(n, n);
}

Dense random_dense(std::mt19937_64& rng, int r, int c) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Dense a(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) a(i, j) = d(rng);
  return a;
}

BlockOperators random_ops(std::mt19937_64& rng, int nu, int np, double tau1) {
  BlockOperators o;
  o.nu = nu;
  o.nphi = np;
  o.Mu = sparse(random_spd(rng, nu, 1.0));
  o.Ae = sparse(random_spd(rng, nu, 0.5));
  o.Adiv = sparse(random_spd(rng, nu, 0.0));
  o.Ae_delta1 = sparse(random_spd(rng, nu, 0.1));
  o.Adiv_delta2 = sparse(random_spd(rng, nu, 0.0));
  o.Mphi = sparse(random_spd(rng, np, 1.0));
  o.Mphi_tau1 = sparse(tau1 * Dense(o.Mphi));
  o.Aphi = sparse(random_spd(rng, np, 0.5));
  const Dense c = random_dense(rng, np, nu);
  o.C = sparse(c);
  o.C_tau2 = sparse(0.7 * c);
  return o;
}

}  // namespace

TEST_CASE("newmark-theta is second order on scalar test equations") {
  double prev_u = 0.0, prev_p = 0.0;
  for (int level = 0; level < 4; ++level) {
    const auto e = run_scalar(Scheme::kNewmarkTheta, 0.1 / std::pow(2.0, level));
    if (level > 0) {
      CHECK(std::log2(prev_u / e.u) == doctest::Approx(2.0).epsilon(0.05));
      CHECK(std::log2(prev_p / e.phi) == doctest::Approx(2.0).epsilon(0.05));
    }
    prev_u = e.u;
    prev_p = e.phi;
  }
}

TEST_CASE("newmark is second order on scalar test equations") {
  double prev_u = 0.0, prev_p = 0.0;
  for (int level = 0; level < 4; ++level) {
    const auto e = run_scalar(Scheme::kNewmark, 0.1 / std::pow(2.0, level));
    if (level > 0) {
      CHECK(std::log2(prev_u / e.u) == doctest::Approx(2.0).epsilon(0.05));
      CHECK(std::log2(prev_p / e.phi) == doctest::Approx(2.0).epsilon(0.05));
    }
    prev_u = e.u;
    prev_p = e.phi;
  }
}

TEST_CASE("zero data gives the zero trajectory") {
  std::mt19937_64 rng(3);
  for (double tau1 : {0.0, 0.5}) {
    IntegratorConfig cfg;
    cfg.dt = 0.01;
    cfg.t_final = 0.1;
    cfg.scheme = tau1 > 0 ? Scheme::kNewmark : Scheme::kNewmarkTheta;
    Integrator integ(random_ops(rng, 6, 3, tau1), cfg);
    State s = initial(6, 3);
    const Vector zero = Vector::Zero(9);
    integ.initialize(s, zero);
    for (int n = 0; n < cfg.num_steps(); ++n) integ.step(s, zero, zero);
    CHECK(s.U.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(s.Phi.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(s.t == doctest::Approx(0.1));
  }
}

TEST_CASE("linear solver") {
  SUBCASE("identity") {
    const Vector b = Vector::LinSpaced(5, 1.0, 5.0);
    const Vector x = solve_linear(sparse(Dense::Identity(5, 5)), b);
    CHECK((x - b).norm() == 0.0);
  }
  SUBCASE("2x2") {
    Dense a(2, 2);
    a << 2, 1, 1, 2;
    const Vector x = solve_linear(sparse(a), Vector::Ones(2));
    CHECK(x(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(x(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }
  SUBCASE("residual bound") {
    std::mt19937_64 rng(11);
    const Dense a = random_spd(rng, 40, 0.1) + random_dense(rng, 40, 40);
    const Vector b = random_dense(rng, 40, 1);
    LinearSolver s;
    s.factorize(sparse(a));
    const Vector x = s.solve(b);
    CHECK((b - a * x).norm() / b.norm() <= 1e-10);
    CHECK(s.last_residual <= 1e-10);
  }
  SUBCASE("singular") {
    Dense a = Dense::Zero(3, 3);
    a(0, 0) = 1.0;
    a(1, 1) = 1.0;
    CHECK_THROWS_AS(solve_linear(sparse(a), Vector::Ones(3)), NumericalError);
  }
}

TEST_CASE("cached and refactored steps agree") {
  for (double tau1 : {0.0, 0.3}) {
    std::mt19937_64 rng(21);
    const auto ops = random_ops(rng, 8, 4, tau1);
    IntegratorConfig cfg;
    cfg.dt = 0.02;
    cfg.t_final = 0.2;
    cfg.scheme = tau1 > 0 ? Scheme::kNewmark : Scheme::kNewmarkTheta;
    Integrator cached(ops, cfg, true), fresh(ops, cfg, false);
    State a = initial(8, 4);
    a.U = random_dense(rng, 8, 1);
    a.Phi = random_dense(rng, 4, 1);
    State b = a;
    const Vector load = random_dense(rng, 12, 1);
    cached.initialize(a, load);
    fresh.initialize(b, load);
    for (int n = 0; n < cfg.num_steps(); ++n) {
      cached.step(a, load, load);
      fresh.step(b, load, load);
    }
    const double scale = std::max(1.0, a.U.norm() + a.Phi.norm());
    CHECK((a.U - b.U).norm() / scale <= 1e-12);
    CHECK((a.Phi - b.Phi).norm() / scale <= 1e-12);
  }
}

TEST_CASE("newmark-theta step matches the four-block reference form") {
  // L X^{n+1} = R X^n + S with X = [U, Phi, Z, A].
  std::mt19937_64 rng(5);
  const int nu = 5, np = 3;
  const auto o = random_ops(rng, nu, np, 0.0);
  for (double theta : {0.5, 1.0, 0.3}) {
    IntegratorConfig cfg;
    cfg.dt = 0.05;
    cfg.t_final = 0.05;
    cfg.theta = theta;
    cfg.beta = 0.3;
    cfg.gamma = 0.6;
    const double dt = cfg.dt, b = cfg.beta, g = cfg.gamma, th = theta, tt = 1.0 - theta;
    Integrator integ(o, cfg);

    const Dense Mu = o.Mu, Au = o.Au(), Aud = o.Au_delta(), Mp = o.Mphi, Ap = o.Aphi;
    const Dense C = o.C, Ct2 = o.C_tau2;
    const Dense Iu = Dense::Identity(nu, nu);
    const Dense Cu = th / (b * dt * dt) * (Ct2 + dt * g * C);
    const Dense Cz = th / (b * dt) * Ct2 + (th * g - b) / b * C;
    const Dense Ca = (th - 2 * b) / (2 * b) * Ct2 + th * dt * (g - 2 * b) / (2 * b) * C;
    const int n = 3 * nu + np;
    Dense L = Dense::Zero(n, n), R = Dense::Zero(n, n);
    const int iu = 0, ip = nu, iz = nu + np, ia = 2 * nu + np;
    L.block(iu, iu, nu, nu) = Mu / (b * dt * dt) + Au + g / (b * dt) * Aud;
    L.block(iu, ip, nu, np) = -C.transpose();
    L.block(ip, iu, np, nu) = Cu;
    L.block(ip, ip, np, np) = Mp / dt + th * Ap;
    L.block(iz, iz, nu, nu) = Iu;
    L.block(iz, ia, nu, nu) = -dt * g * Iu;
    L.block(ia, iu, nu, nu) = -Iu / (b * dt * dt);
    L.block(ia, ia, nu, nu) = Iu;
    R.block(iu, iu, nu, nu) = Mu / (b * dt * dt) + g / (b * dt) * Aud;
    R.block(iu, iz, nu, nu) = Mu / (b * dt) - (b - g) / b * Aud;
    R.block(iu, ia, nu, nu) = (1 - 2 * b) / (2 * b) * Mu - dt * (2 * b - g) / (2 * b) * Aud;
    R.block(ip, iu, np, nu) = Cu;
    R.block(ip, ip, np, np) = Mp / dt - tt * Ap;
    R.block(ip, iz, np, nu) = Cz;
    R.block(ip, ia, np, nu) = Ca;
    R.block(iz, iz, nu, nu) = Iu;
    R.block(iz, ia, nu, nu) = dt * (1 - g) * Iu;
    R.block(ia, iu, nu, nu) = -Iu / (b * dt * dt);
    R.block(ia, iz, nu, nu) = -Iu / (b * dt);
    R.block(ia, ia, nu, nu) = (2 * b - 1) / (2 * b) * Iu;

    State s = initial(nu, np);
    s.U = random_dense(rng, nu, 1);
    s.Z = random_dense(rng, nu, 1);
    s.A = random_dense(rng, nu, 1);
    s.Phi = random_dense(rng, np, 1);
    s.Phid = Vector::Zero(np);
    s.Phidd = Vector::Zero(np);
    const Vector load_now = random_dense(rng, nu + np, 1), load_next = random_dense(rng, nu + np, 1);

    Vector X(n), S = Vector::Zero(n);
    X << s.U, s.Phi, s.Z, s.A;
    S.segment(iu, nu) = load_next.head(nu);
    S.segment(ip, np) = th * load_next.tail(np) + tt * load_now.tail(np);
    const Vector Xn = L.partialPivLu().solve(R * X + S);

    integ.step(s, load_now, load_next);
    Vector Y(n);
    Y << s.U, s.Phi, s.Z, s.A;
    CHECK((Y - Xn).norm() / Xn.norm() <= 1e-11);
  }
}

TEST_CASE("newmark step satisfies the discrete equations at the new level") {
  std::mt19937_64 rng(8);
  const auto o = random_ops(rng, 4, 3, 0.4);
  IntegratorConfig cfg;
  cfg.dt = 0.1;
  cfg.t_final = 0.1;
  cfg.scheme = Scheme::kNewmark;
  Integrator integ(o, cfg);
  State s = initial(4, 3);
  s.U = random_dense(rng, 4, 1);
  s.Phid = random_dense(rng, 3, 1);
  const Vector l0 = random_dense(rng, 7, 1), l1 = random_dense(rng, 7, 1);
  integ.initialize(s, l0);
  const auto blk = second_order_blocks(o);
  const Vector X0 = stack(s.U, s.Phi), Y0 = stack(s.Z, s.Phid), L0 = stack(s.A, s.Phidd);
  CHECK((Dense(blk.A) * L0 + Dense(blk.B) * Y0 + Dense(blk.K) * X0 - l0).norm() <= 1e-10);
  integ.step(s, l0, l1);
  const Vector X1 = stack(s.U, s.Phi), Y1 = stack(s.Z, s.Phid), L1 = stack(s.A, s.Phidd);
  CHECK((Dense(blk.A) * L1 + Dense(blk.B) * Y1 + Dense(blk.K) * X1 - l1).norm() <= 1e-10);
  const double dt = cfg.dt;
  CHECK((X1 - X0 - dt * Y0 - dt * dt * (0.25 * L0 + 0.25 * L1)).norm() <= 1e-12);
  CHECK((Y1 - Y0 - dt * (0.5 * L0 + 0.5 * L1)).norm() <= 1e-12);
}

TEST_CASE("integrator configuration validation") {
  IntegratorConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = [](auto edit) {
    IntegratorConfig x;
    edit(x);
    return x;
  };
  CHECK_THROWS_AS(bad([](auto& x) { x.dt = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& x) { x.beta = 0.6; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& x) { x.gamma = 1.5; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& x) { x.theta = -0.1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& x) { x.beta = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& x) { x.t_final = 0.105; x.dt = 0.01; }).validate(), ConfigError);
  CHECK_NOTHROW(bad([](auto& x) { x.beta = 0.0; x.scheme = Scheme::kNewmark; }).validate());
  CHECK(bad([](auto& x) { x.t_final = 0.1; x.dt = 5e-5; }).num_steps() == 2000);
  CHECK(parse_scheme("newmark") == Scheme::kNewmark);
  CHECK_THROWS_AS(parse_scheme("euler"), ConfigError);

  Material a, b;
  b.tau1 = 1.0;
  CHECK(select_scheme(CoefficientField({a, a})) == Scheme::kNewmarkTheta);
  CHECK(select_scheme(CoefficientField({b, b})) == Scheme::kNewmark);
  CHECK_THROWS_AS(select_scheme(CoefficientField({a, b})), ConfigError);
}
