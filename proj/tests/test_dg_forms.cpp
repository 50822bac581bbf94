#include <doctest.h>

#include "kvdg/dg_forms.hpp"

#include <random>

using namespace kvdg;

TEST_CASE("trace weights") {
  const TraceWeight w = trace_weight(1.0, 3.0);
  CHECK(w.plus == doctest::Approx(0.75));
  CHECK(w.minus == doctest::Approx(0.25));
  CHECK(w.harmonic == doctest::Approx(0.75));
  CHECK(w.active);
  const TraceWeight z = trace_weight(0.0, 0.0);
  CHECK_FALSE(z.active);
  CHECK(z.plus == 0.5);
  CHECK(z.harmonic == 0.0);
  const TraceWeight b = boundary_weight(2.5);
  CHECK(b.plus == 1.0);
  CHECK(b.harmonic == 2.5);
  CHECK_FALSE(boundary_weight(0.0).active);
}

TEST_CASE("trace weight properties") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(1e-3, 1e3);
  for (int i = 0; i < 200; ++i) {
    const double a = U(rng), b = U(rng);
    const TraceWeight w = trace_weight(a, b);
    CHECK(w.plus + w.minus == doctest::Approx(1.0));
    // Weighted average of the one-sided values q+ and q- is twice the harmonic term.
    CHECK(weighted_average(w, a, b) == doctest::Approx(2.0 * w.harmonic));
    CHECK(w.harmonic <= std::min(a, b) + 1e-12);
    CHECK(w.harmonic == doctest::Approx(trace_weight(b, a).harmonic));
    CHECK(weighted_average(w, 7.0, 7.0) == doctest::Approx(7.0));
  }
}

TEST_CASE("jump operators") {
  const Vec2 n(0.6, 0.8);
  CHECK(jump_scalar(2.0, 2.0, n).norm() == 0.0);
  CHECK((jump_scalar(3.0, 1.0, n) - 2.0 * n).norm() < 1e-15);
  const Vec2 a(1.0, 2.0), b(-1.0, 0.5);
  CHECK((jump_vector(a, b, n) - (a - b) * n.transpose()).norm() < 1e-15);
  CHECK(jump_normal(a, b, n) == doctest::Approx((a - b).dot(n)));
  CHECK(jump_vector(a, b, n).trace() == doctest::Approx(jump_normal(a, b, n)));
  CHECK((boundary_jump_vector(a, n) - a * n.transpose()).norm() == 0.0);
}

TEST_CASE("interior penalty values") {
  Material p, m;
  p.mu = 1.0;
  m.mu = 3.0;
  p.delta1 = 2.0;
  m.delta1 = 0.0;
  p.lambda = m.lambda = 4.0;
  p.delta2 = m.delta2 = 0.5;
  p.D << 2.0, 1.0, 1.0, 3.0;
  m.D = Mat2::Identity();
  const Vec2 n(1.0, 0.0);
  PenaltyConstants c;
  const FacePenalty fp = interior_penalty(p, m, 2, 3, 0.5, 0.25, n, c);
  const double scale = 36.0;  // max(2^2 / 0.5, 3^2 / 0.25)
  CHECK(fp.penalty[kMu] == doctest::Approx(10.0 * 0.75 * scale));
  CHECK(fp.penalty[kMuDelta1] == 0.0);  // mu delta1 vanishes on one side
  CHECK(fp.weight[kMuDelta1].harmonic == 0.0);
  CHECK(fp.penalty[kLambda] == doctest::Approx(10.0 * 2.0 * scale));
  CHECK(fp.penalty[kLambdaDelta2] == doctest::Approx(10.0 * 1.0 * scale));
  CHECK(fp.penalty[kDiffusion] == doctest::Approx(10.0 * (2.0 * 1.0 / 3.0) * scale));  // n^T D n = 2 and 1

  const FacePenalty swapped = interior_penalty(m, p, 3, 2, 0.25, 0.5, -n, c);
  for (int q = 0; q < kNumQuantities; ++q) CHECK(swapped.penalty[q] == doctest::Approx(fp.penalty[q]));

  c.alpha[kMu] = 20.0;
  CHECK(interior_penalty(p, m, 2, 3, 0.5, 0.25, n, c).penalty[kMu] == doctest::Approx(2.0 * fp.penalty[kMu]));
  c.alpha[kMu] = 0.0;
  CHECK_THROWS_AS(interior_penalty(p, m, 2, 3, 0.5, 0.25, n, c), ConfigError);
  CHECK_THROWS_AS(interior_penalty(p, m, 0, 3, 0.5, 0.25, n, PenaltyConstants{}), ConfigError);
  CHECK_THROWS_AS(interior_penalty(p, m, 1, 3, 0.0, 0.25, n, PenaltyConstants{}), ConfigError);
}

TEST_CASE("boundary penalty values") {
  Material m;
  m.mu = 2.0;
  m.D << 2.0, 0.0, 0.0, 8.0;
  PenaltyConstants c;
  const FacePenalty fp = boundary_penalty(m, 2, 0.5, Vec2(1.0, 0.0), c);
  CHECK(fp.penalty[kMu] == doctest::Approx(10.0 * 2.0 * 8.0));
  CHECK(fp.penalty[kDiffusion] == doctest::Approx(10.0 * 8.0 * 8.0));  // spectral bar, not n^T D n
  c.inverse_boundary_diffusion = true;
  CHECK(boundary_penalty(m, 2, 0.5, Vec2(1.0, 0.0), c).penalty[kDiffusion] == doctest::Approx(10.0 / 8.0 * 8.0));
}

TEST_CASE("penalty table covers every face") {
  const PolyMesh mesh = cartesian_mesh(Rect{0, 0, 2, 1}, 4, 2);
  DgSpace space(mesh, 2);
  Material a, b;
  b.mu = 5.0;
  std::vector<Material> cells;
  for (int k = 0; k < mesh.num_elements(); ++k) cells.push_back(k % 2 ? a : b);
  const PenaltyTable t = compute_penalties(space, CoefficientField(cells));
  CHECK(t.interior.size() == mesh.interior_faces().size());
  CHECK(t.boundary.size() == mesh.boundary_faces().size());
  const double h = std::sqrt(0.5 * 0.5 + 0.5 * 0.5);
  for (std::size_t f = 0; f < t.interior.size(); ++f) {
    const auto& face = mesh.interior_faces()[f];
    const double qp = cells[face.plus].mu, qm = cells[face.minus].mu;
    CHECK(t.interior[f].penalty[kMu] == doctest::Approx(10.0 * qp * qm / (qp + qm) * 4.0 / h));
  }
}
