#pragma once

#include "kvdg/assembly.hpp"
#include "kvdg/common.hpp"

#include <Eigen/SparseLU>

#include <memory>
#include <string>

namespace kvdg {

enum class Scheme { kNewmark, kNewmarkTheta };

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

/// newmark when every element has tau1 > 0, newmark-theta when tau1 = 0
/// everywhere; mixed fields are rejected.
Scheme select_scheme(const CoefficientField& coeffs);

struct IntegratorConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  double beta = 0.25;
  double gamma = 0.5;
  double theta = 0.5;
  Scheme scheme = Scheme::kNewmarkTheta;

  /// Throws ConfigError("timestepping", ...) on invalid values.
  void validate() const;
  /// round(t_final / dt); t_final must be a multiple of dt to 1e-9.
  int num_steps() const;
};

/// Sparse LU with a residual check. The factorization is kept until
/// factorize() is called again.
class LinearSolver {
 public:
  void factorize(const SparseMatrix& A);
  bool factorized() const { return static_cast<bool>(lu_); }
  /// Solves with up to three steps of iterative refinement; throws
  /// NumericalError if the relative residual stays above the tolerance.
  Vector solve(const Vector& b) const;

  double tolerance = 1e-10;
  mutable double last_residual = 0.0;

 private:
  SparseMatrix A_;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>> lu_;
};

/// One-shot factor and solve.
Vector solve_linear(const SparseMatrix& A, const Vector& b, double tolerance = 1e-10);

/// Discrete state. Phid and Phidd are only used by the Newmark scheme.
struct State {
  double t = 0.0;
  Vector U, Z, A;
  Vector Phi, Phid, Phidd;
};

/// Advances the monolithic system
///   M_u U'' + A_ud U' + A_u U - C^T Phi = F
///   C_tau2 U'' + M_tau1 Phi'' + C U' + M_phi Phi' + A_phi Phi = G.
/// Loads are stacked vectors [F; G].
class Integrator {
 public:
  Integrator(const BlockOperators& ops, IntegratorConfig cfg, bool cache_factorization = true);

  const IntegratorConfig& config() const { return cfg_; }

  /// Completes an initial state (U, Z, Phi and, for newmark, Phid) with
  /// consistent accelerations from the equations at t = 0.
  void initialize(State& s, const Vector& load0) const;

  /// One step from s.t to s.t + dt. `load_now` is the load at s.t and
  /// `load_next` at s.t + dt.
  void step(State& s, const Vector& load_now, const Vector& load_next) const;

  const SparseMatrix& step_matrix() const { return step_matrix_; }
  double last_residual() const { return solver_.last_residual; }

 private:
  void step_newmark(State& s, const Vector& load_next) const;
  void step_theta(State& s, const Vector& load_now, const Vector& load_next) const;
  Vector solve_step(const Vector& rhs) const;

  BlockOperators ops_;
  IntegratorConfig cfg_;
  bool cache_;
  SparseMatrix Au_, Aud_, Ct_;  // A_u, A_u,delta, C^T
  SparseMatrix step_matrix_;
  LinearSolver solver_;
};

/// Block matrices of the first-order form A X'' + B X' + K X = F (newmark).
struct SecondOrderBlocks {
  SparseMatrix A, B, K;
};
SecondOrderBlocks second_order_blocks(const BlockOperators& ops);

/// Stacks [top; bottom] and [[a, b], [c, d]].
Vector stack(const Vector& top, const Vector& bottom);
SparseMatrix block2x2(const SparseMatrix& a, const SparseMatrix& b, const SparseMatrix& c,
                      const SparseMatrix& d);

}  // namespace kvdg
