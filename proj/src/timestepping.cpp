#include "kvdg/timestepping.hpp"

#include <cmath>
#include <sstream>

namespace kvdg {

std::string scheme_name(Scheme s) { return s == Scheme::kNewmark ? "newmark" : "newmark-theta"; }

Scheme parse_scheme(const std::string& name) {
  if (name == "newmark") return Scheme::kNewmark;
  if (name == "newmark-theta") return Scheme::kNewmarkTheta;
  throw ConfigError("timestepping", "unknown scheme '" + name + "' (expected newmark or newmark-theta)");
}

Scheme select_scheme(const CoefficientField& coeffs) {
  if (coeffs.all_tau1_positive()) return Scheme::kNewmark;
  if (!coeffs.has_tau1()) return Scheme::kNewmarkTheta;
  throw ConfigError("timestepping", "tau1 must be either positive on every element or zero everywhere");
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("timestepping", "dt must be > 0");
  if (!(t_final > 0.0)) throw ConfigError("timestepping", "t_final must be > 0");
  if (!(beta >= 0.0 && 2.0 * beta <= 1.0)) throw ConfigError("timestepping", "beta_N must satisfy 0 <= 2 beta_N <= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("timestepping", "gamma_N must lie in [0, 1]");
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("timestepping", "theta must lie in [0, 1]");
  if (scheme == Scheme::kNewmarkTheta && !(beta > 0.0))
    throw ConfigError("timestepping", "newmark-theta needs beta_N > 0");
  const double n = t_final / dt;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
    throw ConfigError("timestepping", "t_final must be an integer multiple of dt");
}

int IntegratorConfig::num_steps() const { return static_cast<int>(std::lround(t_final / dt)); }

void LinearSolver::factorize(const SparseMatrix& A) {
  if (A.rows() != A.cols()) throw NumericalError("timestepping", "cannot factorize a non-square matrix");
  A_ = A;
  A_.makeCompressed();
  auto lu = std::make_shared<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>();
  lu->analyzePattern(A_);
  lu->factorize(A_);
  if (lu->info() != Eigen::Success)
    throw NumericalError("timestepping", "sparse LU factorization failed: " + lu->lastErrorMessage());
  lu_ = std::move(lu);
}

Vector LinearSolver::solve(const Vector& b) const {
  if (!lu_) throw NumericalError("timestepping", "solve called before factorize");
  if (b.size() != A_.rows()) throw NumericalError("timestepping", "right-hand side has the wrong size");
  const double bn = b.norm();
  if (bn == 0.0) {
    last_residual = 0.0;
    return Vector::Zero(b.size());
  }
  Vector x = lu_->solve(b);
  Vector r = b - A_ * x;
  last_residual = r.norm() / bn;
  for (int it = 0; it < 3 && last_residual > tolerance; ++it) {
    x += lu_->solve(r);
    r = b - A_ * x;
    last_residual = r.norm() / bn;
  }
  if (!std::isfinite(last_residual) || last_residual > tolerance) {
    std::ostringstream os;
    os << "linear solve residual " << last_residual << " exceeds tolerance " << tolerance
       << " (matrix is numerically singular or badly scaled)";
    throw NumericalError("timestepping", os.str());
  }
  return x;
}

Vector solve_linear(const SparseMatrix& A, const Vector& b, double tolerance) {
  LinearSolver s;
  s.tolerance = tolerance;
  s.factorize(A);
  return s.solve(b);
}

Vector stack(const Vector& top, const Vector& bottom) {
  Vector out(top.size() + bottom.size());
  out << top, bottom;
  return out;
}

SparseMatrix block2x2(const SparseMatrix& a, const SparseMatrix& b, const SparseMatrix& c,
                      const SparseMatrix& d) {
  const Eigen::Index n0 = a.rows(), n1 = c.rows();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() + b.nonZeros() + c.nonZeros() + d.nonZeros()));
  auto put = [&](const SparseMatrix& m, Eigen::Index r0, Eigen::Index c0) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it)
        t.emplace_back(static_cast<int>(it.row() + r0), static_cast<int>(it.col() + c0), it.value());
  };
  put(a, 0, 0);
  put(b, 0, a.cols());
  put(c, n0, 0);
  put(d, n0, a.cols());
  SparseMatrix out(n0 + n1, a.cols() + b.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SecondOrderBlocks second_order_blocks(const BlockOperators& ops) {
  SparseMatrix zu(ops.nu, ops.nphi), zp(ops.nphi, ops.nu);
  SecondOrderBlocks b;
  b.A = block2x2(ops.Mu, zu, ops.C_tau2, ops.Mphi_tau1);
  b.B = block2x2(ops.Au_delta(), zu, ops.C, ops.Mphi);
  b.K = block2x2(ops.Au(), SparseMatrix(-SparseMatrix(ops.C.transpose())), zp, ops.Aphi);
  return b;
}

Integrator::Integrator(const BlockOperators& ops, IntegratorConfig cfg, bool cache_factorization)
    : ops_(ops), cfg_(cfg), cache_(cache_factorization) {
  cfg_.validate();
  Au_ = ops.Au();
  Aud_ = ops.Au_delta();
  Ct_ = ops.C.transpose();
  const double dt = cfg_.dt, b = cfg_.beta, g = cfg_.gamma;
  if (cfg_.scheme == Scheme::kNewmark) {
    const auto blocks = second_order_blocks(ops);
    step_matrix_ = blocks.A + (g * dt) * blocks.B + (b * dt * dt) * blocks.K;
  } else {
    const double a = 1.0 / (b * dt * dt);
    const double c = g / (b * dt);
    const double th = cfg_.theta;
    SparseMatrix uu = a * ops.Mu + c * Aud_ + Au_;
    SparseMatrix pu = th * (a * ops.C_tau2 + c * ops.C);
    SparseMatrix pp = (1.0 / dt) * ops.Mphi + th * ops.Aphi;
    step_matrix_ = block2x2(uu, SparseMatrix(-Ct_), pu, pp);
  }
  if (cache_) solver_.factorize(step_matrix_);
}

Vector Integrator::solve_step(const Vector& rhs) const {
  if (cache_) return solver_.solve(rhs);
  LinearSolver fresh;
  fresh.factorize(step_matrix_);
  Vector x = fresh.solve(rhs);
  solver_.last_residual = fresh.last_residual;
  return x;
}

void Integrator::initialize(State& s, const Vector& load0) const {
  const int nu = ops_.nu, np = ops_.nphi;
  if (s.U.size() != nu || s.Z.size() != nu || s.Phi.size() != np)
    throw ConfigError("timestepping", "initial state has the wrong size");
  if (load0.size() != nu + np) throw ConfigError("timestepping", "load vector has the wrong size");
  if (cfg_.scheme == Scheme::kNewmark) {
    if (s.Phid.size() != np) throw ConfigError("timestepping", "newmark needs an initial pressure rate");
    const auto blocks = second_order_blocks(ops_);
    const Vector X = stack(s.U, s.Phi), Y = stack(s.Z, s.Phid);
    const Vector L = solve_linear(blocks.A, load0 - blocks.B * Y - blocks.K * X);
    s.A = L.head(nu);
    s.Phidd = L.tail(np);
  } else {
    const Vector r = load0.head(nu) - Aud_ * s.Z - Au_ * s.U + Ct_ * s.Phi;
    s.A = solve_linear(ops_.Mu, r);
    s.Phid = Vector::Zero(np);
    s.Phidd = Vector::Zero(np);
  }
}

void Integrator::step(State& s, const Vector& load_now, const Vector& load_next) const {
  if (cfg_.scheme == Scheme::kNewmark)
    step_newmark(s, load_next);
  else
    step_theta(s, load_now, load_next);
  s.t += cfg_.dt;
}

void Integrator::step_newmark(State& s, const Vector& load_next) const {
  const int nu = ops_.nu, np = ops_.nphi;
  const double dt = cfg_.dt, b = cfg_.beta, g = cfg_.gamma;
  const Vector X = stack(s.U, s.Phi), Y = stack(s.Z, s.Phid), L = stack(s.A, s.Phidd);
  const Vector Xp = X + dt * Y + (dt * dt * (0.5 - b)) * L;
  const Vector Yp = Y + (dt * (1.0 - g)) * L;
  // B Yp and K Xp without forming the stacked blocks.
  Vector rhs = load_next;
  rhs.head(nu) -= Aud_ * Yp.head(nu) + Au_ * Xp.head(nu) - Ct_ * Xp.tail(np);
  rhs.tail(np) -= ops_.C * Yp.head(nu) + ops_.Mphi * Yp.tail(np) + ops_.Aphi * Xp.tail(np);
  const Vector Ln = solve_step(rhs);
  const Vector Xn = Xp + (b * dt * dt) * Ln;
  const Vector Yn = Yp + (g * dt) * Ln;
  s.U = Xn.head(nu);
  s.Phi = Xn.tail(np);
  s.Z = Yn.head(nu);
  s.Phid = Yn.tail(np);
  s.A = Ln.head(nu);
  s.Phidd = Ln.tail(np);
}

void Integrator::step_theta(State& s, const Vector& load_now, const Vector& load_next) const {
  const int nu = ops_.nu, np = ops_.nphi;
  const double dt = cfg_.dt, b = cfg_.beta, g = cfg_.gamma, th = cfg_.theta, tht = 1.0 - th;
  const double a = 1.0 / (b * dt * dt);
  const Vector Ahat = -a * s.U - s.Z / (b * dt) - ((1.0 - 2.0 * b) / (2.0 * b)) * s.A;
  const Vector Zp = s.Z + (dt * (1.0 - g)) * s.A;
  const Vector Zhat = Zp + (g * dt) * Ahat;

  Vector rhs(nu + np);
  rhs.head(nu) = load_next.head(nu) - ops_.Mu * Ahat - Aud_ * Zhat;
  rhs.tail(np) = th * load_next.tail(np) + tht * load_now.tail(np) + (ops_.Mphi * s.Phi) / dt -
                 tht * (ops_.C_tau2 * s.A + ops_.C * s.Z + ops_.Aphi * s.Phi) -
                 th * (ops_.C_tau2 * Ahat + ops_.C * Zhat);
  const Vector x = solve_step(rhs);
  s.U = x.head(nu);
  s.Phi = x.tail(np);
  s.A = a * s.U + Ahat;
  s.Z = Zp + (g * dt) * s.A;
}

}  // namespace kvdg
