#pragma once

#include "kvdg/manufactured.hpp"
#include "kvdg/simulation.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace kvdg {

/// Exact fields at a fixed time.
struct ExactFields {
  std::function<Vec2(const Vec2&)> u;
  std::function<Mat2(const Vec2&)> grad_u;
  std::function<double(const Vec2&)> phi;
  std::function<Vec2(const Vec2&)> grad_phi;

  static ExactFields zero();
  static ExactFields from(const ManufacturedCase& mc, double t);
};

struct ErrorNorms {
  double u_l2 = 0.0, u_dg = 0.0, phi_l2 = 0.0, phi_dg = 0.0;
};

/// L2 and dG errors of (U, Phi) against exact fields, by quadrature of
/// exactness 2 l + 4 on elements and faces. The dG norms are
///   |e|_{dG,e}^2 = |sqrt(2 mu) eps_h(e)|^2 + |sqrt(lambda) div_h e|^2
///                  + sum_F sigma |[e]|^2 + xi |[e]_n|^2,
///   |e|_{dG,phi}^2 = |sqrt(D) grad_h e|^2 + sum_F zeta |[e]|^2,
/// with boundary faces counted only under Dirichlet conditions.
ErrorNorms compute_errors(const Discretization& d, const Vector& U, const Vector& Phi, const ExactFields& exact);
ErrorNorms compute_errors(const Discretization& d, const State& s, const ManufacturedCase& mc);

enum class SweepKind { kMeshSize, kDegree, kTimeStep, kNu };

SweepKind parse_sweep_kind(const std::string& name);  // h, p (or l), dt, nu
std::string sweep_kind_name(SweepKind k);

struct ErrorRow {
  double parameter = 0.0;  // h, l, dt or nu_phi
  double h = 0.0;
  int degree = 0;
  double dt = 0.0;
  int elements = 0;
  int dofs = 0;
  ErrorNorms err;
};

struct ErrorReport {
  SweepKind kind = SweepKind::kMeshSize;
  std::vector<ErrorRow> rows;
  /// Set when a level failed; rows then hold the completed levels.
  std::string failure;

  /// log(e_i / e_{i+1}) / log(p_i / p_{i+1}) between consecutive rows.
  std::vector<ErrorNorms> rates() const;
  /// Least-squares slope of log(error) against the parameter (l sweeps).
  ErrorNorms log_slopes() const;
  /// Coefficient of determination of the same fits.
  ErrorNorms log_fit_r2() const;

  /// h sweeps: 1/h, e_u L2, roc, e_u dG, roc, e_phi L2, roc, e_phi dG, roc.
  std::string to_csv() const;
};

/// Observed order between two levels.
double observed_rate(double e0, double e1, double p0, double p1);

struct SweepConfig {
  SweepKind kind = SweepKind::kMeshSize;
  std::vector<int> elements{100, 200, 400, 800};
  std::vector<int> degrees{1, 2, 3, 4};
  std::vector<double> dts{0.01, 0.005, 0.0025, 0.00125};
  std::vector<double> nu_phis{1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6};

  // Values held fixed by sweeps that do not vary them.
  int n_elements = 100;
  int degree = 3;
  double dt = 5e-5;
  double t_final = 0.1;

  std::string case_name = "trig";
  double nu_u = 1.0;
  double nu_phi = 1.0;
  Material material = convergence_material(1.0);
  Rect domain{0.0, 0.0, 1.0, 1.0};
  int lloyd_iters = 200;
  std::uint64_t seed = 1;
  double beta = 0.25, gamma = 0.5, theta = 0.5;
  PenaltyConstants penalties;

  /// Called after each completed level.
  std::function<void(const ErrorRow&)> progress;
};

/// One manufactured-solution run on the given mesh.
ErrorRow manufactured_run(const PolyMesh& mesh, int degree, double dt, const SweepConfig& cfg,
                          double nu_phi);

/// Runs all levels. Throws ConfigError with fewer than three levels;
/// numerical failures end the sweep with `failure` set.
ErrorReport convergence_sweep(const SweepConfig& cfg);

// --- Energy -------------------------------------------------------------------

struct EnergyRow {
  double t = 0.0;
  double kinetic = 0.0;     // |sqrt(rho) du/dt|^2
  double elastic = 0.0;     // |u|_{dG,e}^2
  double viscous = 0.0;     // |du/dt|_{dG,delta}^2
  double relaxation = 0.0;  // |sqrt(tau2 tau1 d0) phi|^2
  double pressure = 0.0;    // |phi|_{dG,phi}^2
  double total = 0.0;       // (Z^T M_u Z + U^T A_u U + Phi^T M_phi Phi) / 2
};

/// Per-step energy summands. `total` is the quadratic form that the
/// newmark-theta scheme with theta = 1/2, trapezoidal newmark parameters and
/// tau2 = 0 provably does not increase without forcing.
class EnergyTrace {
 public:
  explicit EnergyTrace(const Discretization& d);

  void record(const State& s);
  StepObserver observer();

  const std::vector<EnergyRow>& rows() const { return rows_; }
  /// Steps n with total_n - total_{n-1} > rel_tol * total_{n-1}.
  std::vector<int> growth_steps(double rel_tol = 1e-8) const;
  /// Largest |total_n - total_{n-1}| / total_{n-1}.
  double max_relative_change() const;
  std::string to_csv() const;

 private:
  const Discretization* d_;
  NormMatrices norms_;
  SparseMatrix relax_mass_, Au_;
  std::vector<EnergyRow> rows_;
};

// --- Filtration ------------------------------------------------------------------

struct FiltrationField {
  std::vector<Vec2> mean;     // element average of w = D grad phi
  std::vector<double> norm;   // |w|_{L2(K)}
  std::vector<double> magnitude;  // |mean|
  double global_norm = 0.0;   // |w|_{L2(Omega)}
};

FiltrationField filtration_field(const DgSpace& space, const Vector& Phi, const CoefficientField& coeffs);

/// |w_a - w_b|_{L2(K)} / |w_ref|_{L2(Omega)} per element. A zero reference
/// norm yields NaN and a warning.
std::vector<double> relative_flow_difference(const DgSpace& space, const CoefficientField& ca, const Vector& Pa,
                                             const CoefficientField& cb, const Vector& Pb,
                                             const CoefficientField& cref, const Vector& Pref,
                                             std::vector<std::string>* warnings = nullptr);

/// Global version: |w_a - w_b|_{L2(Omega)} / |w_ref|_{L2(Omega)}.
double relative_flow_difference_global(const DgSpace& space, const CoefficientField& ca, const Vector& Pa,
                                       const CoefficientField& cb, const Vector& Pb, const CoefficientField& cref,
                                       const Vector& Pref, std::vector<std::string>* warnings = nullptr);

// --- Symmetry --------------------------------------------------------------------

/// Sampled reflection defect of a scalar field about the line x = c.x
/// (axis 0) or y = c.y (axis 1):
///   max_p |f(p) - sign f(R p)| / max_p |f(p)|
/// over the n-by-n grid of cell centres of `box`. sign = 1 measures
/// asymmetry, sign = -1 departure from antisymmetry. Zero fields give 0.
double reflection_defect(const std::function<double(const Vec2&)>& f, const Rect& box, int n, const Vec2& c,
                         int axis, double sign);

}  // namespace kvdg
