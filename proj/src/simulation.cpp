#include "kvdg/simulation.hpp"

#include <iomanip>
#include <sstream>

namespace kvdg {

Discretization discretize(std::shared_ptr<const DgSpace> space, CoefficientField coeffs, BoundaryConditions bcs,
                          const PenaltyConstants& pc, std::vector<std::string>* warnings) {
  if (!space) throw ConfigError("assembly", "no discrete space");
  if (coeffs.size() != space->num_elements())
    throw ConfigError("models", "coefficient field has " + std::to_string(coeffs.size()) + " entries for " +
                                    std::to_string(space->num_elements()) + " elements");
  auto w = validate(coeffs);
  if (warnings) warnings->insert(warnings->end(), w.begin(), w.end());
  bcs.check(space->mesh());
  Discretization d;
  d.space = std::move(space);
  d.coeffs = std::move(coeffs);
  d.bcs = std::move(bcs);
  d.penalties = compute_penalties(*d.space, d.coeffs, pc);
  d.ops = assemble_operators(*d.space, d.coeffs, d.penalties, d.bcs);
  return d;
}

State zero_state(const BlockOperators& ops) {
  State s;
  s.U = Vector::Zero(ops.nu);
  s.Z = Vector::Zero(ops.nu);
  s.A = Vector::Zero(ops.nu);
  s.Phi = Vector::Zero(ops.nphi);
  s.Phid = Vector::Zero(ops.nphi);
  s.Phidd = Vector::Zero(ops.nphi);
  return s;
}

RunSummary run_simulation(const Discretization& d, const LoadSeries& loads, const IntegratorConfig& cfg,
                          State initial, const StepObserver& observer, bool cache_factorization) {
  if (select_scheme(d.coeffs) != cfg.scheme)
    throw ConfigError("timestepping", "scheme " + scheme_name(cfg.scheme) + " does not match the tau1 field (use " +
                                          scheme_name(select_scheme(d.coeffs)) + ")");
  if (loads.nu() != d.ops.nu || loads.nphi() != d.ops.nphi)
    throw ConfigError("assembly", "load series does not match the discretization");
  Integrator integ(d.ops, cfg, cache_factorization);
  RunSummary out;
  State& s = out.final_state;
  s = std::move(initial);
  s.t = 0.0;
  if (s.Phid.size() == 0) s.Phid = Vector::Zero(d.ops.nphi);
  Vector load_now = loads.at(0.0);
  integ.initialize(s, load_now);
  if (observer) observer(0, s);
  const int n = cfg.num_steps();
  for (int k = 0; k < n; ++k) {
    const double t_next = (k + 1) * cfg.dt;
    Vector load_next = loads.at(t_next);
    integ.step(s, load_now, load_next);
    s.t = t_next;  // no accumulated drift
    out.max_residual = std::max(out.max_residual, integ.last_residual());
    load_now = std::move(load_next);
    if (!s.U.allFinite() || !s.Phi.allFinite())
      throw NumericalError("timestepping", "non-finite solution at t = " + std::to_string(t_next));
    if (observer) observer(k + 1, s);
  }
  out.steps = n;
  return out;
}

ProbeSample sample_state(const Discretization& d, const State& s, int k, const Vec2& x) {
  const DgSpace& sp = d.sp();
  Vector phi, dx, dy;
  sp.eval_basis(k, x, phi, dx, dy);
  const int n = sp.local_dim(k), v0 = sp.vector_index(k, 0, 0), v1 = sp.vector_index(k, 1, 0);
  const int s0 = sp.scalar_offset(k);
  ProbeSample p;
  p.u = Vec2(phi.dot(s.U.segment(v0, n)), phi.dot(s.U.segment(v1, n)));
  p.v = Vec2(phi.dot(s.Z.segment(v0, n)), phi.dot(s.Z.segment(v1, n)));
  p.phi = phi.dot(s.Phi.segment(s0, n));
  const Vec2 g(dx.dot(s.Phi.segment(s0, n)), dy.dot(s.Phi.segment(s0, n)));
  p.w = (d.coeffs[k].D * g).norm();
  return p;
}

ProbeRecorder::ProbeRecorder(const Discretization& d, std::vector<Probe> probes)
    : d_(&d), probes_(std::move(probes)) {
  for (const auto& p : probes_) {
    const int k = d.sp().mesh().locate(p.x);
    if (k < 0) throw ConfigError("cli", "probe '" + p.name + "' lies outside the domain");
    elements_.push_back(k);
  }
}

void ProbeRecorder::record(const State& s) {
  std::vector<ProbeSample> row;
  row.reserve(probes_.size());
  for (std::size_t i = 0; i < probes_.size(); ++i) row.push_back(sample_state(*d_, s, elements_[i], probes_[i].x));
  times_.push_back(s.t);
  samples_.push_back(std::move(row));
}

StepObserver ProbeRecorder::observer() {
  return [this](int, const State& s) { record(s); };
}

std::string ProbeRecorder::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "t,probe,ux,uy,vx,vy,phi,w\n";
  for (std::size_t r = 0; r < times_.size(); ++r)
    for (std::size_t i = 0; i < probes_.size(); ++i) {
      const auto& p = samples_[r][i];
      os << times_[r] << ',' << probes_[i].name << ',' << p.u.x() << ',' << p.u.y() << ',' << p.v.x() << ','
         << p.v.y() << ',' << p.phi << ',' << p.w << '\n';
    }
  return os.str();
}

}  // namespace kvdg
