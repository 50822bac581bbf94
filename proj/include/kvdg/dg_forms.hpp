#pragma once

#include "kvdg/basis.hpp"
#include "kvdg/common.hpp"
#include "kvdg/models.hpp"

#include <array>
#include <vector>

namespace kvdg {

/// Coefficient families carrying their own averages and penalties.
enum Quantity : int { kMu = 0, kMuDelta1 = 1, kLambda = 2, kLambdaDelta2 = 3, kDiffusion = 4 };
inline constexpr int kNumQuantities = 5;

/// omega+ = q-/(q+ + q-), omega- = q+/(q+ + q-), harmonic = q+ q-/(q+ + q-).
/// Both zero: omega = 1/2, harmonic 0, inactive. On boundary faces the
/// weight is 1.
struct TraceWeight {
  double plus = 0.5;
  double minus = 0.5;
  double harmonic = 0.0;
  bool active = false;
};

TraceWeight trace_weight(double q_plus, double q_minus);
TraceWeight boundary_weight(double q);

/// n^T D n.
double normal_diffusivity(const Mat2& D, const Vec2& n);

/// Value of the coefficient `q` on a material; kDiffusion uses n^T D n.
double quantity_value(const Material& m, Quantity q, const Vec2& n);

struct PenaltyConstants {
  std::array<double, 5> alpha{10.0, 10.0, 10.0, 10.0, 10.0};
  /// Uses alpha5 / Dbar l^2 / h on boundary faces instead of alpha5 Dbar l^2 / h.
  bool inverse_boundary_diffusion = false;
};

/// Penalties sigma, sigma_delta1, xi, xi_delta2, zeta (indexed by Quantity)
/// and the matching trace weights of one face.
struct FacePenalty {
  std::array<double, 5> penalty{};
  std::array<TraceWeight, 5> weight{};
};

struct PenaltyTable {
  std::vector<FacePenalty> interior;
  std::vector<FacePenalty> boundary;
  PenaltyConstants constants;
};

FacePenalty interior_penalty(const Material& plus, const Material& minus, int l_plus, int l_minus,
                             double h_plus, double h_minus, const Vec2& normal,
                             const PenaltyConstants& c);
FacePenalty boundary_penalty(const Material& m, int l, double h, const Vec2& normal,
                             const PenaltyConstants& c);

PenaltyTable compute_penalties(const DgSpace& space, const CoefficientField& coeffs,
                               const PenaltyConstants& c = {});

// Jump and average operators on a face with plus-side normal n.

inline Vec2 jump_scalar(double a_plus, double a_minus, const Vec2& n) {
  return a_plus * n - a_minus * n;
}
inline Mat2 jump_vector(const Vec2& a_plus, const Vec2& a_minus, const Vec2& n) {
  return a_plus * n.transpose() - a_minus * n.transpose();
}
inline double jump_normal(const Vec2& a_plus, const Vec2& a_minus, const Vec2& n) {
  return a_plus.dot(n) - a_minus.dot(n);
}
inline Vec2 boundary_jump_scalar(double a, const Vec2& n) { return a * n; }
inline Mat2 boundary_jump_vector(const Vec2& a, const Vec2& n) { return a * n.transpose(); }
inline double boundary_jump_normal(const Vec2& a, const Vec2& n) { return a.dot(n); }

template <typename T>
T weighted_average(const TraceWeight& w, const T& a_plus, const T& a_minus) {
  return w.plus * a_plus + w.minus * a_minus;
}

}  // namespace kvdg
