#include "kvdg/dg_forms.hpp"

#include <algorithm>
#include <cmath>

namespace kvdg {

TraceWeight trace_weight(double q_plus, double q_minus) {
  TraceWeight w;
  const double sum = q_plus + q_minus;
  if (!(sum > 0.0)) return w;
  w.plus = q_minus / sum;
  w.minus = 1.0 - w.plus;
  w.harmonic = q_plus * q_minus / sum;
  w.active = true;
  return w;
}

TraceWeight boundary_weight(double q) {
  TraceWeight w;
  w.plus = 1.0;
  w.minus = 0.0;
  w.harmonic = q;
  w.active = q > 0.0;
  return w;
}

double normal_diffusivity(const Mat2& D, const Vec2& n) { return n.dot(D * n); }

double quantity_value(const Material& m, Quantity q, const Vec2& n) {
  switch (q) {
    case kMu: return m.mu;
    case kMuDelta1: return m.mu * m.delta1;
    case kLambda: return m.lambda;
    case kLambdaDelta2: return m.lambda * m.delta2;
    case kDiffusion: return normal_diffusivity(m.D, n);
  }
  return 0.0;
}

namespace {

void check_inputs(int l, double h) {
  if (l < 1) throw ConfigError("dg_forms", "polynomial degree must be >= 1");
  if (!(h > 0.0)) throw ConfigError("dg_forms", "element diameter must be > 0");
}

void check_alpha(const PenaltyConstants& c) {
  for (double a : c.alpha)
    if (!(a > 0.0)) throw ConfigError("dg_forms", "penalty coefficients must be > 0");
}

}  // namespace

FacePenalty interior_penalty(const Material& plus, const Material& minus, int l_plus, int l_minus,
                             double h_plus, double h_minus, const Vec2& normal,
                             const PenaltyConstants& c) {
  check_inputs(l_plus, h_plus);
  check_inputs(l_minus, h_minus);
  check_alpha(c);
  const double scale = std::max(double(l_plus * l_plus) / h_plus, double(l_minus * l_minus) / h_minus);
  FacePenalty fp;
  for (int q = 0; q < kNumQuantities; ++q) {
    // n- = -n+, and n^T D n is even in n.
    const auto qq = static_cast<Quantity>(q);
    fp.weight[q] = trace_weight(quantity_value(plus, qq, normal), quantity_value(minus, qq, normal));
    fp.penalty[q] = c.alpha[q] * fp.weight[q].harmonic * scale;
  }
  return fp;
}

FacePenalty boundary_penalty(const Material& m, int l, double h, const Vec2& normal,
                             const PenaltyConstants& c) {
  check_inputs(l, h);
  check_alpha(c);
  const double scale = double(l * l) / h;
  FacePenalty fp;
  for (int q = 0; q < kNumQuantities; ++q) {
    const auto qq = static_cast<Quantity>(q);
    const double value = quantity_value(m, qq, normal);
    fp.weight[q] = boundary_weight(value);
    if (qq == kDiffusion) {
      const double dbar = spectral_bar(m.D);
      if (!(dbar > 0.0)) {
        fp.weight[q].active = false;
        fp.penalty[q] = 0.0;
        continue;
      }
      fp.weight[q].active = true;
      fp.penalty[q] = c.alpha[q] * (c.inverse_boundary_diffusion ? 1.0 / dbar : dbar) * scale;
    } else {
      fp.penalty[q] = c.alpha[q] * value * scale;
    }
  }
  return fp;
}

PenaltyTable compute_penalties(const DgSpace& space, const CoefficientField& coeffs,
                               const PenaltyConstants& c) {
  const PolyMesh& mesh = space.mesh();
  if (coeffs.size() != mesh.num_elements())
    throw ConfigError("dg_forms", "coefficient field size does not match the mesh");
  PenaltyTable t;
  t.constants = c;
  for (const InteriorFace& f : mesh.interior_faces())
    t.interior.push_back(interior_penalty(coeffs[f.plus], coeffs[f.minus], space.degree(f.plus),
                                          space.degree(f.minus), mesh.geometry(f.plus).diameter,
                                          mesh.geometry(f.minus).diameter, f.normal, c));
  for (const BoundaryFace& f : mesh.boundary_faces())
    t.boundary.push_back(boundary_penalty(coeffs[f.element], space.degree(f.element),
                                          mesh.geometry(f.element).diameter, f.normal, c));
  return t;
}

}  // namespace kvdg
