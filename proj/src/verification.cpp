#include "kvdg/verification.hpp"

#include "kvdg/parallel.hpp"

#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

namespace kvdg {

ExactFields ExactFields::zero() {
  return {[](const Vec2&) { return Vec2(Vec2::Zero()); }, [](const Vec2&) { return Mat2(Mat2::Zero()); },
          [](const Vec2&) { return 0.0; }, [](const Vec2&) { return Vec2(Vec2::Zero()); }};
}

ExactFields ExactFields::from(const ManufacturedCase& mc, double t) {
  const ManufacturedCase* m = &mc;
  return {[m, t](const Vec2& x) { return m->u(x, t); }, [m, t](const Vec2& x) { return m->grad_u(x, t); },
          [m, t](const Vec2& x) { return m->phi(x, t); }, [m, t](const Vec2& x) { return m->grad_phi(x, t); }};
}

namespace {

struct LocalValue {
  Vec2 u;
  Mat2 grad;
  double phi;
  Vec2 gphi;
};

LocalValue local_value(const DgSpace& sp, const Vector& U, const Vector& Phi, int k, const Vec2& x) {
  Vector b, bx, by;
  sp.eval_basis(k, x, b, bx, by);
  const int n = sp.local_dim(k), s0 = sp.scalar_offset(k);
  LocalValue v;
  for (int c = 0; c < 2; ++c) {
    const auto seg = U.segment(sp.vector_index(k, c, 0), n);
    v.u[c] = b.dot(seg);
    v.grad(c, 0) = bx.dot(seg);
    v.grad(c, 1) = by.dot(seg);
  }
  const auto p = Phi.segment(s0, n);
  v.phi = b.dot(p);
  v.gphi = Vec2(bx.dot(p), by.dot(p));
  return v;
}

// Per-thread partial sums, one slot per element or face.
struct Sums {
  double ul2 = 0, udg = 0, pl2 = 0, pdg = 0;
};

}  // namespace

ErrorNorms compute_errors(const Discretization& d, const Vector& U, const Vector& Phi, const ExactFields& ex) {
  const DgSpace& sp = d.sp();
  const PolyMesh& mesh = sp.mesh();
  if (U.size() != sp.vector_dofs() || Phi.size() != sp.scalar_dofs())
    throw ConfigError("verification", "state does not match the discrete space");
  const int ne = sp.num_elements();
  const int ni = static_cast<int>(mesh.interior_faces().size());
  const int nb = static_cast<int>(mesh.boundary_faces().size());
  std::vector<Sums> parts(static_cast<std::size_t>(ne + ni + nb));

  parallel_for(parts.size(), [&](std::size_t idx) {
    Sums& s = parts[idx];
    const int i = static_cast<int>(idx);
    if (i < ne) {
      const Material& m = d.coeffs[i];
      const PointSet ps = sp.volume_points(i, 2 * sp.degree(i) + 4);
      for (std::size_t p = 0; p < ps.size(); ++p) {
        const Vec2& x = ps.x[p];
        const LocalValue h = local_value(sp, U, Phi, i, x);
        const Vec2 eu = h.u - ex.u(x);
        const Mat2 eg = h.grad - ex.grad_u(x);
        const Mat2 eps = 0.5 * (eg + eg.transpose());
        const double ep = h.phi - ex.phi(x);
        const Vec2 egp = h.gphi - ex.grad_phi(x);
        const double w = ps.w[p];
        s.ul2 += w * eu.squaredNorm();
        s.udg += w * (2.0 * m.mu * eps.squaredNorm() + m.lambda * eg.trace() * eg.trace());
        s.pl2 += w * ep * ep;
        s.pdg += w * egp.dot(m.D * egp);
      }
      return;
    }
    if (i < ne + ni) {
      const int f = i - ne;
      const auto& F = mesh.interior_faces()[static_cast<std::size_t>(f)];
      const auto& fp = d.penalties.interior[static_cast<std::size_t>(f)];
      const int deg = std::max(sp.degree(F.plus), sp.degree(F.minus));
      const PointSet ps = map_segment(line_rule(2 * deg + 4), F.a, F.b);
      for (std::size_t p = 0; p < ps.size(); ++p) {
        const LocalValue a = local_value(sp, U, Phi, F.plus, ps.x[p]);
        const LocalValue b = local_value(sp, U, Phi, F.minus, ps.x[p]);
        const Vec2 ju = a.u - b.u;
        const double jn = ju.dot(F.normal);
        const double jp = a.phi - b.phi;
        s.udg += ps.w[p] * (fp.penalty[kMu] * ju.squaredNorm() + fp.penalty[kLambda] * jn * jn);
        s.pdg += ps.w[p] * fp.penalty[kDiffusion] * jp * jp;
      }
      return;
    }
    const int f = i - ne - ni;
    const auto& F = mesh.boundary_faces()[static_cast<std::size_t>(f)];
    const auto& fp = d.penalties.boundary[static_cast<std::size_t>(f)];
    const bool du = d.bcs.u_type(F.tag) == BcType::kDirichlet;
    const bool dp = d.bcs.phi_type(F.tag) == BcType::kDirichlet;
    if (!du && !dp) return;
    const PointSet ps = map_segment(line_rule(2 * sp.degree(F.element) + 4), F.a, F.b);
    for (std::size_t p = 0; p < ps.size(); ++p) {
      const Vec2& x = ps.x[p];
      const LocalValue a = local_value(sp, U, Phi, F.element, x);
      if (du) {
        const Vec2 ju = a.u - ex.u(x);
        const double jn = ju.dot(F.normal);
        s.udg += ps.w[p] * (fp.penalty[kMu] * ju.squaredNorm() + fp.penalty[kLambda] * jn * jn);
      }
      if (dp) {
        const double jp = a.phi - ex.phi(x);
        s.pdg += ps.w[p] * fp.penalty[kDiffusion] * jp * jp;
      }
    }
  });

  Sums t;
  for (const auto& s : parts) {
    t.ul2 += s.ul2;
    t.udg += s.udg;
    t.pl2 += s.pl2;
    t.pdg += s.pdg;
  }
  auto root = [](double v) { return std::sqrt(std::max(v, 0.0)); };
  return {root(t.ul2), root(t.udg), root(t.pl2), root(t.pdg)};
}

ErrorNorms compute_errors(const Discretization& d, const State& s, const ManufacturedCase& mc) {
  return compute_errors(d, s.U, s.Phi, ExactFields::from(mc, s.t));
}

SweepKind parse_sweep_kind(const std::string& name) {
  if (name == "h") return SweepKind::kMeshSize;
  if (name == "p" || name == "l") return SweepKind::kDegree;
  if (name == "dt") return SweepKind::kTimeStep;
  if (name == "nu") return SweepKind::kNu;
  throw ConfigError("verification", "unknown sweep kind '" + name + "' (expected h, p, dt or nu)");
}

std::string sweep_kind_name(SweepKind k) {
  switch (k) {
    case SweepKind::kMeshSize: return "h";
    case SweepKind::kDegree: return "p";
    case SweepKind::kTimeStep: return "dt";
    case SweepKind::kNu: return "nu";
  }
  return "?";
}

double observed_rate(double e0, double e1, double p0, double p1) {
  return std::log(e0 / e1) / std::log(p0 / p1);
}

std::vector<ErrorNorms> ErrorReport::rates() const {
  std::vector<ErrorNorms> out;
  if (kind != SweepKind::kMeshSize && kind != SweepKind::kTimeStep) return out;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto& a = rows[i];
    const auto& b = rows[i + 1];
    const double p0 = a.parameter, p1 = b.parameter;
    out.push_back({observed_rate(a.err.u_l2, b.err.u_l2, p0, p1), observed_rate(a.err.u_dg, b.err.u_dg, p0, p1),
                   observed_rate(a.err.phi_l2, b.err.phi_l2, p0, p1),
                   observed_rate(a.err.phi_dg, b.err.phi_dg, p0, p1)});
  }
  return out;
}

namespace {

// Slope and r^2 of the least-squares line through (x_i, log y_i).
std::pair<double, double> log_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += std::log(y[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = std::log(y[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  const double r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return {slope, r2};
}

template <typename Pick>
ErrorNorms fit_all(const std::vector<ErrorRow>& rows, Pick pick) {
  std::vector<double> x;
  std::vector<double> y[4];
  for (const auto& r : rows) {
    x.push_back(r.parameter);
    y[0].push_back(r.err.u_l2);
    y[1].push_back(r.err.u_dg);
    y[2].push_back(r.err.phi_l2);
    y[3].push_back(r.err.phi_dg);
  }
  return {pick(log_fit(x, y[0])), pick(log_fit(x, y[1])), pick(log_fit(x, y[2])), pick(log_fit(x, y[3]))};
}

}  // namespace

ErrorNorms ErrorReport::log_slopes() const {
  if (rows.size() < 2) return {};
  return fit_all(rows, [](const std::pair<double, double>& f) { return f.first; });
}

ErrorNorms ErrorReport::log_fit_r2() const {
  if (rows.size() < 2) return {};
  return fit_all(rows, [](const std::pair<double, double>& f) { return f.second; });
}

std::string ErrorReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(6);
  const auto r = rates();
  switch (kind) {
    case SweepKind::kMeshSize: os << "1/h"; break;
    case SweepKind::kDegree: os << "l"; break;
    case SweepKind::kTimeStep: os << "dt"; break;
    case SweepKind::kNu: os << "nu_phi"; break;
  }
  const bool with_rates = kind == SweepKind::kMeshSize || kind == SweepKind::kTimeStep;
  if (with_rates)
    os << ",e_u_L2,roc_u_L2,e_u_dG,roc_u_dG,e_phi_L2,roc_phi_L2,e_phi_dG,roc_phi_dG\n";
  else
    os << ",e_u_L2,e_u_dG,e_phi_L2,e_phi_dG\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    os << (kind == SweepKind::kMeshSize ? 1.0 / row.parameter : row.parameter);
    if (with_rates) {
      auto rate = [&](double ErrorNorms::*f) {
        if (i == 0) return std::string("-");
        std::ostringstream s;
        s << std::fixed << std::setprecision(2) << r[i - 1].*f;
        return s.str();
      };
      os << ',' << row.err.u_l2 << ',' << rate(&ErrorNorms::u_l2) << ',' << row.err.u_dg << ','
         << rate(&ErrorNorms::u_dg) << ',' << row.err.phi_l2 << ',' << rate(&ErrorNorms::phi_l2) << ','
         << row.err.phi_dg << ',' << rate(&ErrorNorms::phi_dg) << '\n';
    } else {
      os << ',' << row.err.u_l2 << ',' << row.err.u_dg << ',' << row.err.phi_l2 << ',' << row.err.phi_dg << '\n';
    }
  }
  if (kind == SweepKind::kDegree && rows.size() >= 2) {
    const auto s = log_slopes();
    os << "slope," << s.u_l2 << ',' << s.u_dg << ',' << s.phi_l2 << ',' << s.phi_dg << '\n';
  }
  return os.str();
}

ErrorRow manufactured_run(const PolyMesh& mesh, int degree, double dt, const SweepConfig& cfg, double nu_phi) {
  auto space = std::make_shared<const DgSpace>(mesh, degree);
  const auto coeffs = CoefficientField::uniform(mesh.num_elements(), cfg.material);
  const Discretization d = discretize(space, coeffs, BoundaryConditions::all_dirichlet(), cfg.penalties);
  const ManufacturedCase mc = manufactured_case(cfg.case_name, cfg.nu_u, nu_phi);
  const LoadSeries loads = manufactured_loads(mc, *space, d.coeffs, d.penalties, d.bcs);

  State s = zero_state(d.ops);
  s.U = space->project_vector([&](const Vec2& x) { return mc.u(x, 0.0); });
  s.Z = space->project_vector([&](const Vec2& x) { return mc.u_t(x, 0.0); });
  s.Phi = space->project_scalar([&](const Vec2& x) { return mc.phi(x, 0.0); });
  s.Phid = space->project_scalar([&](const Vec2& x) { return mc.phi_t(x, 0.0); });

  IntegratorConfig ic;
  ic.dt = dt;
  ic.t_final = cfg.t_final;
  ic.beta = cfg.beta;
  ic.gamma = cfg.gamma;
  ic.theta = cfg.theta;
  ic.scheme = select_scheme(d.coeffs);
  const auto run = run_simulation(d, loads, ic, std::move(s));

  ErrorRow row;
  row.h = mesh.mesh_size();
  row.degree = degree;
  row.dt = dt;
  row.elements = mesh.num_elements();
  row.dofs = d.ops.nu + d.ops.nphi;
  row.err = compute_errors(d, run.final_state, mc);
  return row;
}

ErrorReport convergence_sweep(const SweepConfig& cfg) {
  ErrorReport rep;
  rep.kind = cfg.kind;
  std::size_t levels = 0;
  switch (cfg.kind) {
    case SweepKind::kMeshSize: levels = cfg.elements.size(); break;
    case SweepKind::kDegree: levels = cfg.degrees.size(); break;
    case SweepKind::kTimeStep: levels = cfg.dts.size(); break;
    case SweepKind::kNu: levels = cfg.nu_phis.size(); break;
  }
  if (levels < 3)
    throw ConfigError("verification", "insufficient levels: a sweep needs at least 3, got " + std::to_string(levels));

  std::unique_ptr<PolyMesh> fixed;
  if (cfg.kind != SweepKind::kMeshSize)
    fixed = std::make_unique<PolyMesh>(generate_voronoi(cfg.domain, cfg.n_elements, cfg.lloyd_iters, cfg.seed).mesh);

  for (std::size_t i = 0; i < levels; ++i) {
    try {
      ErrorRow row;
      switch (cfg.kind) {
        case SweepKind::kMeshSize: {
          const auto vr = generate_voronoi(cfg.domain, cfg.elements[i], cfg.lloyd_iters, cfg.seed);
          row = manufactured_run(vr.mesh, cfg.degree, cfg.dt, cfg, cfg.nu_phi);
          row.parameter = row.h;
          break;
        }
        case SweepKind::kDegree:
          row = manufactured_run(*fixed, cfg.degrees[i], cfg.dt, cfg, cfg.nu_phi);
          row.parameter = cfg.degrees[i];
          break;
        case SweepKind::kTimeStep:
          row = manufactured_run(*fixed, cfg.degree, cfg.dts[i], cfg, cfg.nu_phi);
          row.parameter = cfg.dts[i];
          break;
        case SweepKind::kNu:
          row = manufactured_run(*fixed, cfg.degree, cfg.dt, cfg, cfg.nu_phis[i]);
          row.parameter = cfg.nu_phis[i];
          break;
      }
      rep.rows.push_back(row);
      if (cfg.progress) cfg.progress(row);
    } catch (const NumericalError& e) {
      rep.failure = "level " + std::to_string(i + 1) + ": " + e.what();
      break;
    }
  }
  return rep;
}

// --- Energy ---------------------------------------------------------------------

EnergyTrace::EnergyTrace(const Discretization& d) : d_(&d) {
  norms_ = assemble_norm_matrices(d.sp(), d.coeffs, d.penalties, d.bcs);
  std::vector<double> w(static_cast<std::size_t>(d.coeffs.size()));
  for (int k = 0; k < d.coeffs.size(); ++k) w[static_cast<std::size_t>(k)] = d.coeffs[k].tau2 * d.coeffs[k].tau1 * d.coeffs[k].d0;
  relax_mass_ = assemble_mass(d.sp(), w, 1);
  Au_ = d.ops.Au();
}

void EnergyTrace::record(const State& s) {
  EnergyRow r;
  r.t = s.t;
  r.kinetic = s.Z.dot(d_->ops.Mu * s.Z);
  r.elastic = s.U.dot(norms_.e * s.U);
  r.viscous = s.Z.dot(norms_.delta * s.Z);
  r.relaxation = s.Phi.dot(relax_mass_ * s.Phi);
  r.pressure = s.Phi.dot(norms_.phi * s.Phi);
  r.total = 0.5 * (r.kinetic + s.U.dot(Au_ * s.U) + s.Phi.dot(d_->ops.Mphi * s.Phi));
  rows_.push_back(r);
}

StepObserver EnergyTrace::observer() {
  return [this](int, const State& s) { record(s); };
}

std::vector<int> EnergyTrace::growth_steps(double rel_tol) const {
  std::vector<int> out;
  for (std::size_t n = 1; n < rows_.size(); ++n) {
    const double prev = rows_[n - 1].total;
    if (rows_[n].total - prev > rel_tol * std::max(prev, std::numeric_limits<double>::min()))
      out.push_back(static_cast<int>(n));
  }
  return out;
}

double EnergyTrace::max_relative_change() const {
  double m = 0.0;
  for (std::size_t n = 1; n < rows_.size(); ++n) {
    const double prev = rows_[n - 1].total;
    if (prev > 0) m = std::max(m, std::abs(rows_[n].total - prev) / prev);
  }
  return m;
}

std::string EnergyTrace::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "t,kinetic,elastic_dG,viscous_dG,relaxation,pressure_dG,total\n";
  for (const auto& r : rows_)
    os << r.t << ',' << r.kinetic << ',' << r.elastic << ',' << r.viscous << ',' << r.relaxation << ','
       << r.pressure << ',' << r.total << '\n';
  return os.str();
}

// --- Filtration -------------------------------------------------------------------

FiltrationField filtration_field(const DgSpace& sp, const Vector& Phi, const CoefficientField& coeffs) {
  if (Phi.size() != sp.scalar_dofs() || coeffs.size() != sp.num_elements())
    throw ConfigError("verification", "pressure vector or coefficients do not match the space");
  const int ne = sp.num_elements();
  FiltrationField out;
  out.mean.assign(static_cast<std::size_t>(ne), Vec2::Zero());
  out.norm.assign(static_cast<std::size_t>(ne), 0.0);
  out.magnitude.assign(static_cast<std::size_t>(ne), 0.0);
  parallel_for(static_cast<std::size_t>(ne), [&](std::size_t kk) {
    const int k = static_cast<int>(kk);
    const PointSet ps = sp.volume_points(k, 2 * sp.degree(k) + 2);
    const auto p = Phi.segment(sp.scalar_offset(k), sp.local_dim(k));
    Vector b, bx, by;
    Vec2 sum = Vec2::Zero();
    double sq = 0.0;
    for (std::size_t q = 0; q < ps.size(); ++q) {
      sp.eval_basis(k, ps.x[q], b, bx, by);
      const Vec2 w = coeffs[k].D * Vec2(bx.dot(p), by.dot(p));
      sum += ps.w[q] * w;
      sq += ps.w[q] * w.squaredNorm();
    }
    out.mean[kk] = sum / sp.mesh().geometry(k).area;
    out.magnitude[kk] = out.mean[kk].norm();
    out.norm[kk] = std::sqrt(sq);
  });
  double total = 0.0;
  for (double n : out.norm) total += n * n;
  out.global_norm = std::sqrt(total);
  return out;
}

namespace {

std::vector<double> difference_sq(const DgSpace& sp, const CoefficientField& ca, const Vector& Pa,
                                  const CoefficientField& cb, const Vector& Pb) {
  if (Pa.size() != sp.scalar_dofs() || Pb.size() != sp.scalar_dofs() || ca.size() != sp.num_elements() ||
      cb.size() != sp.num_elements())
    throw ConfigError("verification", "runs do not share the discrete space");
  std::vector<double> out(static_cast<std::size_t>(sp.num_elements()), 0.0);
  parallel_for(out.size(), [&](std::size_t kk) {
    const int k = static_cast<int>(kk);
    const PointSet ps = sp.volume_points(k, 2 * sp.degree(k) + 2);
    const auto a = Pa.segment(sp.scalar_offset(k), sp.local_dim(k));
    const auto b = Pb.segment(sp.scalar_offset(k), sp.local_dim(k));
    Vector v, vx, vy;
    for (std::size_t q = 0; q < ps.size(); ++q) {
      sp.eval_basis(k, ps.x[q], v, vx, vy);
      const Vec2 wa = ca[k].D * Vec2(vx.dot(a), vy.dot(a));
      const Vec2 wb = cb[k].D * Vec2(vx.dot(b), vy.dot(b));
      out[kk] += ps.w[q] * (wa - wb).squaredNorm();
    }
  });
  return out;
}

double reference_norm(const DgSpace& sp, const CoefficientField& cref, const Vector& Pref,
                      std::vector<std::string>* warnings) {
  const double n = filtration_field(sp, Pref, cref).global_norm;
  if (n == 0.0) {
    const std::string msg = "verification: reference filtration norm is zero; relative difference undefined";
    if (warnings)
      warnings->push_back(msg);
    else
      std::cerr << "warning: " << msg << '\n';
  }
  return n;
}

}  // namespace

std::vector<double> relative_flow_difference(const DgSpace& sp, const CoefficientField& ca, const Vector& Pa,
                                             const CoefficientField& cb, const Vector& Pb,
                                             const CoefficientField& cref, const Vector& Pref,
                                             std::vector<std::string>* warnings) {
  auto sq = difference_sq(sp, ca, Pa, cb, Pb);
  const double ref = reference_norm(sp, cref, Pref, warnings);
  for (double& v : sq) v = ref == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::sqrt(v) / ref;
  return sq;
}

double relative_flow_difference_global(const DgSpace& sp, const CoefficientField& ca, const Vector& Pa,
                                       const CoefficientField& cb, const Vector& Pb, const CoefficientField& cref,
                                       const Vector& Pref, std::vector<std::string>* warnings) {
  const auto sq = difference_sq(sp, ca, Pa, cb, Pb);
  const double ref = reference_norm(sp, cref, Pref, warnings);
  if (ref == 0.0) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double v : sq) s += v;
  return std::sqrt(s) / ref;
}

double reflection_defect(const std::function<double(const Vec2&)>& f, const Rect& box, int n, const Vec2& c,
                         int axis, double sign) {
  if (n < 1 || !box.valid()) throw ConfigError("verification", "invalid sampling grid");
  if (axis != 0 && axis != 1) throw ConfigError("verification", "axis must be 0 or 1");
  double num = 0.0, den = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 p(box.xmin + (i + 0.5) * box.width() / n, box.ymin + (j + 0.5) * box.height() / n);
      Vec2 q = p;
      q[axis] = 2.0 * c[axis] - p[axis];
      const double fp = f(p);
      num = std::max(num, std::abs(fp - sign * f(q)));
      den = std::max(den, std::abs(fp));
    }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace kvdg
