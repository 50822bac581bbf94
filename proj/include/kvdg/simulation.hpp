#pragma once

#include "kvdg/assembly.hpp"
#include "kvdg/basis.hpp"
#include "kvdg/dg_forms.hpp"
#include "kvdg/models.hpp"
#include "kvdg/timestepping.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace kvdg {

/// Everything needed to time-step one problem on one space.
struct Discretization {
  std::shared_ptr<const DgSpace> space;
  CoefficientField coeffs;
  BoundaryConditions bcs;
  PenaltyTable penalties;
  BlockOperators ops;

  const DgSpace& sp() const { return *space; }
};

/// Validates the coefficients and boundary conditions and assembles.
/// Non-fatal coefficient warnings are appended to `warnings` when given.
Discretization discretize(std::shared_ptr<const DgSpace> space, CoefficientField coeffs,
                          BoundaryConditions bcs, const PenaltyConstants& pc = {},
                          std::vector<std::string>* warnings = nullptr);

State zero_state(const BlockOperators& ops);

/// Called after initialization (step 0) and after every step.
using StepObserver = std::function<void(int step, const State& s)>;

struct RunSummary {
  State final_state;
  int steps = 0;
  double max_residual = 0.0;
};

/// Completes `initial` (accelerations) and advances it to cfg.t_final.
/// Throws ConfigError when cfg.scheme does not match the tau1 field.
RunSummary run_simulation(const Discretization& d, const LoadSeries& loads, const IntegratorConfig& cfg,
                          State initial, const StepObserver& observer = {}, bool cache_factorization = true);

/// Named sample point; the element is located once.
struct Probe {
  std::string name;
  Vec2 x = Vec2::Zero();
};

struct ProbeSample {
  Vec2 u = Vec2::Zero();
  Vec2 v = Vec2::Zero();  // du/dt
  double phi = 0.0;
  double w = 0.0;  // |D grad phi|
};

/// Time series at probe points, one row per recorded state.
class ProbeRecorder {
 public:
  /// Throws ConfigError("cli", ...) when a probe lies outside the mesh.
  ProbeRecorder(const Discretization& d, std::vector<Probe> probes);

  void record(const State& s);
  StepObserver observer();

  const std::vector<Probe>& probes() const { return probes_; }
  const std::vector<double>& times() const { return times_; }
  /// samples()[row][probe]
  const std::vector<std::vector<ProbeSample>>& samples() const { return samples_; }

  /// Long format: t,probe,ux,uy,vx,vy,phi,w.
  std::string to_csv() const;

 private:
  const Discretization* d_;
  std::vector<Probe> probes_;
  std::vector<int> elements_;
  std::vector<double> times_;
  std::vector<std::vector<ProbeSample>> samples_;
};

ProbeSample sample_state(const Discretization& d, const State& s, int element, const Vec2& x);

}  // namespace kvdg
