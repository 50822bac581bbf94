#include <doctest.h>

#include "kvdg/assembly.hpp"
#include "oracle.hpp"

#include <Eigen/Eigenvalues>

#include <random>

using namespace kvdg;

namespace {

struct Case {
  PolyMesh mesh;
  CoefficientField coeffs;
  BoundaryConditions bcs;
  int degree;
};

Material random_material(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.5, 3.0);
  Material m;
  m.rho = U(rng);
  m.mu = U(rng);
  m.lambda = U(rng);
  m.delta1 = U(rng);
  m.delta2 = U(rng);
  m.gamma = U(rng);
  m.d0 = U(rng);
  const double a = U(rng), b = U(rng), c = 0.3 * (U(rng) - 1.5);
  m.D << a, c, c, b;
  m.tau1 = U(rng);
  m.tau2 = U(rng);
  return m;
}

Case random_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int n = 1 + int(rng() % 4);
  const Rect dom{0.0, 0.0, 1.0 + 0.5 * double(rng() % 3), 1.0};
  PolyMesh mesh = n == 1                  ? cartesian_mesh(dom, 1, 1)
                  : n == 4 && rng() % 2 ? cartesian_mesh(dom, 2, 2)
                                        : generate_voronoi(dom, n, 3, seed).mesh;
  std::vector<Material> cells;
  for (int k = 0; k < mesh.num_elements(); ++k) cells.push_back(random_material(rng));
  BoundaryConditions bc;
  for (int tag : {1, 2, 3, 4}) {
    bc.u[tag] = rng() % 3 ? BcType::kDirichlet : BcType::kNeumann;
    bc.phi[tag] = rng() % 3 ? BcType::kDirichlet : BcType::kNeumann;
  }
  return {std::move(mesh), CoefficientField(cells), bc, 1 + int(rng() % 2)};
}

double asym(const SparseMatrix& A) {
  return Dense(SparseMatrix(A - SparseMatrix(A.transpose()))).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("assembled operators match the dense oracle on small meshes") {
  for (std::uint64_t seed = 1; seed <= 24; ++seed) {
    CAPTURE(seed);
    Case c = random_case(seed);
    DgSpace space(c.mesh, c.degree);
    const auto pen = compute_penalties(space, c.coeffs);
    const auto ops = assemble_operators(space, c.coeffs, pen, c.bcs);
    const auto ref = oracle::operators(space, c.coeffs, c.bcs);
    CHECK(oracle::max_rel_diff(ops.Mu, ref.Mu) < 1e-12);
    CHECK(oracle::max_rel_diff(ops.Mphi, ref.Mphi) < 1e-12);
    CHECK(oracle::max_rel_diff(ops.Mphi_tau1, ref.Mt) < 1e-12);
    CHECK(oracle::max_rel_diff(ops.Ae, ref.Ae) < 1e-12);
    CHECK(oracle::max_rel_diff(ops.Ae_delta1, ref.Aed) < 1e-12);
    CHECK(oracle::max_rel_diff(ops.Adiv, ref.Adiv) < 1e-12);
    CHECK(oracle::max_rel_diff(ops.Adiv_delta2, ref.Adivd) < 1e-12);
    CHECK(oracle::max_rel_diff(ops.Aphi, ref.Aphi) < 1e-12);
    CHECK(oracle::max_rel_diff(ops.C, ref.C) < 1e-12);
    CHECK(oracle::max_rel_diff(ops.C_tau2, ref.Ct) < 1e-12);

    const auto norms = assemble_norm_matrices(space, c.coeffs, pen, c.bcs);
    const auto nref = oracle::operators(space, c.coeffs, c.bcs, 10.0, false);
    CHECK(oracle::max_rel_diff(norms.e, nref.Ae + nref.Adiv) < 1e-12);
    CHECK(oracle::max_rel_diff(norms.phi, nref.Aphi) < 1e-12);

    for (const SparseMatrix* A : {&ops.Mu, &ops.Mphi, &ops.Mphi_tau1, &ops.Ae, &ops.Ae_delta1, &ops.Adiv,
                                  &ops.Adiv_delta2, &ops.Aphi})
      CHECK(asym(*A) <= 1e-12 * std::max(1.0, Dense(*A).cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("elastic operator is positive semi-definite with alpha = 10") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    Case c = random_case(100 + seed);
    DgSpace space(c.mesh, c.degree);
    const auto ops = assemble_operators(space, c.coeffs, compute_penalties(space, c.coeffs), c.bcs);
    Eigen::SelfAdjointEigenSolver<Dense> es(Dense(ops.Au()));
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Dense> ed(Dense(ops.Aphi));
    CHECK(ed.eigenvalues().minCoeff() >= -1e-10 * ed.eigenvalues().cwiseAbs().maxCoeff());
  }
}

TEST_CASE("mass matrices") {
  DgSpace space(generate_voronoi({0, 0, 1, 1}, 4, 2, 7).mesh, 2);
  auto cf = CoefficientField::uniform(4, Material{});
  const auto ops = assemble_operators(space, cf, compute_penalties(space, cf), BoundaryConditions::all_dirichlet());
  CHECK(Dense(ops.Mu).isIdentity(1e-12));
  CHECK(ops.Mphi_tau1.norm() == 0.0);

  std::vector<double> w{0.5, 1.0, 0.5, 1.0};
  const SparseMatrix M = assemble_mass(space, w, 1);
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < space.local_dim(k); ++i)
      CHECK(M.coeff(space.scalar_offset(k) + i, space.scalar_offset(k) + i) == doctest::Approx(w[k]).epsilon(1e-12));
}

TEST_CASE("scaling and degenerate coefficients") {
  PolyMesh mesh = cartesian_mesh({0, 0, 1, 1}, 2, 1);
  DgSpace space(mesh, 2);
  Material m;
  m.tau2 = 0.7;
  auto cf = CoefficientField::uniform(2, m);
  auto bc = BoundaryConditions::all_dirichlet();
  const auto a = assemble_operators(space, cf, compute_penalties(space, cf), bc);
  auto cf2 = cf;
  for (int k = 0; k < 2; ++k) cf2[k].mu = 2.0;
  const auto b = assemble_operators(space, cf2, compute_penalties(space, cf2), bc);
  CHECK(Dense(b.Ae - 2.0 * a.Ae).cwiseAbs().maxCoeff() < 1e-11);
  CHECK(Dense(a.C_tau2 - 0.7 * a.C).cwiseAbs().maxCoeff() < 1e-12);

  auto cf0 = cf;
  for (int k = 0; k < 2; ++k) cf0[k].lambda = 0.0;
  CHECK(assemble_div(space, cf0, compute_penalties(space, cf0), bc).norm() == 0.0);
}

TEST_CASE("rigid body modes are in the kernel of the elastic operator") {
  PolyMesh mesh = generate_voronoi({0, 0, 1, 1}, 9, 3, 3).mesh;
  DgSpace space(mesh, 1);
  auto cf = CoefficientField::uniform(9, Material{});
  BoundaryConditions bc;
  for (int tag : {1, 2, 3, 4}) {
    bc.u[tag] = BcType::kNeumann;
    bc.phi[tag] = BcType::kNeumann;
  }
  const SparseMatrix Ae = assemble_elasticity(space, cf, compute_penalties(space, cf), bc);
  for (const VectorFn& f : std::vector<VectorFn>{[](const Vec2&) { return Vec2(1, 0); },
                                                 [](const Vec2&) { return Vec2(0, 1); },
                                                 [](const Vec2& x) { return Vec2(-x.y(), x.x()); }}) {
    const Vector U = space.project_vector(f);
    CHECK((Ae * U).norm() <= 1e-10);
  }
}

TEST_CASE("continuous polynomial fields: operator minus lifting equals the strong form") {
  // u = (x^2 + xy, y^2 - 2x), phi = x y + x: exactly representable at l = 2.
  PolyMesh mesh = generate_voronoi({0, 0, 1, 1}, 6, 3, 11).mesh;
  DgSpace space(mesh, 2);
  Material m;
  m.mu = 1.5;
  m.lambda = 0.8;
  m.delta1 = 0.3;
  m.delta2 = 0.4;
  m.gamma = 1.2;
  m.tau2 = 0.5;
  m.D << 2.0, 0.3, 0.3, 1.0;
  auto cf = CoefficientField::uniform(6, m);
  auto bc = BoundaryConditions::all_dirichlet();
  const auto pen = compute_penalties(space, cf);
  const auto ops = assemble_operators(space, cf, pen, bc);
  VectorFn u = [](const Vec2& x) { return Vec2(x.x() * x.x() + x.x() * x.y(), x.y() * x.y() - 2 * x.x()); };
  ScalarFn phi = [](const Vec2& x) { return x.x() * x.y() + x.x(); };
  const auto lift = assemble_lifting(space, cf, pen, bc, u, phi);
  const Vector U = space.project_vector(u);
  const Vector P = space.project_scalar(phi);

  // -div(2 mu eps(u)) = -mu (lap u + grad div u) = -mu ((2, 2) + (2, 3)); -lambda grad div u = -lambda (2, 3).
  const Vec2 fe = -m.mu * Vec2(4.0, 5.0);
  const Vec2 fd = -m.lambda * Vec2(2.0, 3.0);
  const Vector Fe = load_vector(space, VectorFn([&](const Vec2&) { return Vec2(fe + fd); }));
  CHECK((ops.Au() * U - lift.elastic - Fe).norm() < 1e-9);
  const Vector Fv = load_vector(space, VectorFn([&](const Vec2&) {
    return Vec2(m.delta1 * fe + m.delta2 * fd);
  }));
  CHECK((ops.Au_delta() * U - lift.viscous - Fv).norm() < 1e-9);

  // -div(D grad phi), grad phi = (y + 1, x): D00*0 + 2*D01*1 + D11*0.
  const Vector G = load_vector(space, ScalarFn([&](const Vec2&) { return -2.0 * m.D(0, 1); }));
  CHECK((ops.Aphi * P - lift.diffusion - G).norm() < 1e-9);

  const Vector Gc = load_vector(space, ScalarFn([&](const Vec2& x) { return m.gamma * (2 * x.x() + 3 * x.y()); }));
  CHECK((ops.C * U - lift.coupling - Gc).norm() < 1e-9);
  CHECK((ops.C_tau2 * U - lift.coupling_tau2 - m.tau2 * Gc).norm() < 1e-9);
}

TEST_CASE("homogeneous data gives zero loads") {
  PolyMesh mesh = cartesian_mesh({0, 0, 1, 1}, 2, 2);
  DgSpace space(mesh, 1);
  auto cf = CoefficientField::uniform(4, Material{});
  const auto pen = compute_penalties(space, cf);
  const auto lift = assemble_lifting(space, cf, pen, BoundaryConditions::all_dirichlet(),
                                     [](const Vec2&) { return Vec2::Zero().eval(); }, [](const Vec2&) { return 0.0; });
  CHECK(lift.elastic.norm() == 0.0);
  CHECK(lift.diffusion.norm() == 0.0);
  CHECK(load_vector(space, ScalarFn([](const Vec2&) { return 0.0; })).norm() == 0.0);

  // g = 1 against the constant basis function 1/sqrt|K|: entry sqrt|K|.
  const Vector G = load_vector(space, ScalarFn([](const Vec2&) { return 1.0; }));
  CHECK(std::abs(G(space.scalar_offset(0))) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("untagged or unresolved boundary faces are rejected") {
  PolyMesh mesh = cartesian_mesh({0, 0, 1, 1}, 2, 2);
  DgSpace space(mesh, 1);
  auto cf = CoefficientField::uniform(4, Material{});
  BoundaryConditions bc = BoundaryConditions::all_dirichlet();
  bc.u.erase(3);
  CHECK_THROWS_AS(assemble_operators(space, cf, compute_penalties(space, cf), bc), ConfigError);
  PenaltyTable short_table = compute_penalties(space, cf);
  short_table.interior.pop_back();
  CHECK_THROWS_AS(assemble_operators(space, cf, short_table, BoundaryConditions::all_dirichlet()), ConfigError);
}

TEST_CASE("mollified source integrates to one") {
  PolyMesh mesh = cartesian_mesh({0, 0, 1, 1}, 7, 7);
  DgSpace space(mesh, 2);
  Mollifier mol{Vec2(0.43, 0.51), 0.2, 3};
  const Vector G = load_vector_supported(space, ScalarFn([&](const Vec2& x) { return mol.value(x); }), mol.center,
                                         mol.radius);
  const Vector one = space.project_scalar([](const Vec2&) { return 1.0; });
  CHECK(G.dot(one) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("assembly is deterministic") {
  Case c = random_case(5);
  DgSpace space(c.mesh, 2);
  const auto pen = compute_penalties(space, c.coeffs);
  const auto a = assemble_operators(space, c.coeffs, pen, c.bcs);
  const auto b = assemble_operators(space, c.coeffs, pen, c.bcs);
  CHECK(Dense(a.Ae - b.Ae).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Dense(a.C - b.C).cwiseAbs().maxCoeff() == 0.0);
}
