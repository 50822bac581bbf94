#include "kvdg/assembly.hpp"

#include "kvdg/parallel.hpp"

#include <array>
#include <cmath>

namespace kvdg {

BoundaryConditions BoundaryConditions::all_dirichlet() {
  BoundaryConditions bc;
  for (int tag : {kBottom, kRight, kTop, kLeft}) {
    bc.u[tag] = BcType::kDirichlet;
    bc.phi[tag] = BcType::kDirichlet;
  }
  return bc;
}

BcType BoundaryConditions::u_type(int tag) const {
  auto it = u.find(tag);
  if (it == u.end())
    throw ConfigError("assembly", "no displacement condition for boundary tag " + std::to_string(tag));
  return it->second;
}

BcType BoundaryConditions::phi_type(int tag) const {
  auto it = phi.find(tag);
  if (it == phi.end())
    throw ConfigError("assembly", "no pressure condition for boundary tag " + std::to_string(tag));
  return it->second;
}

void BoundaryConditions::check(const PolyMesh& mesh) const {
  for (const BoundaryFace& f : mesh.boundary_faces()) {
    if (f.tag == 0) throw ConfigError("assembly", "untagged boundary face");
    u_type(f.tag);
    phi_type(f.tag);
  }
}

namespace {

enum Op : int { kMu_, kMphiTau1, kMphi_, kAe, kAed, kAdiv, kAdivd, kAphi, kC, kCt, kNumOps };

// A dense block whose rows and columns are contiguous global ranges.
struct Contribution {
  int op;
  int row0, col0;
  Dense block;
};

struct OpSizes {
  int nu, nphi;
  std::pair<int, int> of(int op) const {
    switch (op) {
      case kMphiTau1: case kMphi_: case kAphi: return {nphi, nphi};
      case kC: case kCt: return {nphi, nu};
      default: return {nu, nu};
    }
  }
};

bool vector_rows(int op) { return !(op == kMphiTau1 || op == kMphi_ || op == kAphi || op == kC || op == kCt); }
bool vector_cols(int op) { return !(op == kMphiTau1 || op == kMphi_ || op == kAphi); }

Vector weights_of(const PointSet& q) {
  return Eigen::Map<const Vector>(q.w.data(), static_cast<Eigen::Index>(q.w.size()));
}

void check_sizes(const DgSpace& space, const CoefficientField& coeffs) {
  if (coeffs.size() != space.num_elements())
    throw ConfigError("assembly", "coefficient field size does not match the mesh");
}

void check_penalties(const DgSpace& space, const PenaltyTable& p) {
  const PolyMesh& mesh = space.mesh();
  if (p.interior.size() != mesh.interior_faces().size() ||
      p.boundary.size() != mesh.boundary_faces().size())
    throw ConfigError("assembly", "penalty table does not match the mesh");
}

std::vector<Contribution> element_blocks(const DgSpace& space, const CoefficientField& coeffs, int k) {
  const Material& m = coeffs[k];
  const ElementQuadrature& V = space.volume(k);
  const int n = space.local_dim(k);
  const Vector w = weights_of(V.q);
  const Dense* G[2] = {&V.dx, &V.dy};

  const Dense mass = V.phi.transpose() * w.asDiagonal() * V.phi;
  Dense K[2][2];
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) K[p][q] = G[p]->transpose() * w.asDiagonal() * (*G[q]);
  const Dense lap = K[0][0] + K[1][1];

  auto elastic = [&](double c) {
    Dense E = Dense::Zero(2 * n, 2 * n);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        Dense blk = K[b][a];
        if (a == b) blk += lap;
        E.block(a * n, b * n, n, n) = c * blk;
      }
    return E;
  };
  auto divdiv = [&](double c) {
    Dense E(2 * n, 2 * n);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) E.block(a * n, b * n, n, n) = c * K[a][b];
    return E;
  };
  auto coupling = [&](double c) {
    Dense E(n, 2 * n);
    for (int b = 0; b < 2; ++b) E.block(0, b * n, n, n) = c * (V.phi.transpose() * w.asDiagonal() * (*G[b]));
    return E;
  };

  Dense vmass = Dense::Zero(2 * n, 2 * n);
  vmass.block(0, 0, n, n) = m.rho * mass;
  vmass.block(n, n, n, n) = m.rho * mass;
  Dense diff = Dense::Zero(n, n);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) diff += m.D(p, q) * K[p][q];

  const int vr = space.vector_index(k, 0, 0);
  const int sr = space.scalar_offset(k);
  std::vector<Contribution> out;
  out.push_back({kMu_, vr, vr, std::move(vmass)});
  out.push_back({kMphiTau1, sr, sr, m.d0 * m.tau1 * mass});
  out.push_back({kMphi_, sr, sr, m.d0 * mass});
  out.push_back({kAe, vr, vr, elastic(m.mu)});
  out.push_back({kAed, vr, vr, elastic(m.mu * m.delta1)});
  out.push_back({kAdiv, vr, vr, divdiv(m.lambda)});
  out.push_back({kAdivd, vr, vr, divdiv(m.lambda * m.delta2)});
  out.push_back({kAphi, sr, sr, std::move(diff)});
  out.push_back({kC, sr, vr, coupling(m.gamma)});
  out.push_back({kCt, sr, vr, coupling(m.gamma * m.tau2)});
  return out;
}

// Traces of one side at one face point.
struct SideTrace {
  int n = 0;
  double sg = 1.0;
  const Material* m = nullptr;
  Eigen::VectorXd psi, fl;          // scalar value, omega (D grad psi).n
  Dense vec;                        // 2n x 2: phi_i e_a
  Dense tr_mu, tr_mud;              // 2n x 2: omega c (e_a d_n phi + grad phi n_a)
  Vector nn, dv_l, dv_ld;           // 2n: phi n_a, omega c d_a phi
};

SideTrace make_trace(const FaceQuadrature& fq, int side, int p, int n, double sg, const Material& m,
                     const Vec2& normal, const FacePenalty& fp) {
  SideTrace t;
  t.n = n;
  t.sg = sg;
  t.m = &m;
  const double om_mu = side == 0 ? fp.weight[kMu].plus : fp.weight[kMu].minus;
  const double om_mud = side == 0 ? fp.weight[kMuDelta1].plus : fp.weight[kMuDelta1].minus;
  const double om_l = side == 0 ? fp.weight[kLambda].plus : fp.weight[kLambda].minus;
  const double om_ld = side == 0 ? fp.weight[kLambdaDelta2].plus : fp.weight[kLambdaDelta2].minus;
  const double om_d = side == 0 ? fp.weight[kDiffusion].plus : fp.weight[kDiffusion].minus;

  t.psi = fq.phi[side].row(p).transpose();
  const Vector gx = fq.dx[side].row(p).transpose();
  const Vector gy = fq.dy[side].row(p).transpose();
  const Vec2 Dn = m.D * normal;
  t.fl = om_d * (Dn.x() * gx + Dn.y() * gy);
  const Vector dn = normal.x() * gx + normal.y() * gy;

  t.vec = Dense::Zero(2 * n, 2);
  t.vec.block(0, 0, n, 1) = t.psi;
  t.vec.block(n, 1, n, 1) = t.psi;

  Dense tr = Dense::Zero(2 * n, 2);
  const Vector* g[2] = {&gx, &gy};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Vector col = normal[a] * (*g[b]);
      if (a == b) col += dn;
      tr.block(a * n, b, n, 1) = col;
    }
  t.tr_mu = om_mu * m.mu * tr;
  t.tr_mud = om_mud * m.mu * m.delta1 * tr;

  t.nn.resize(2 * n);
  t.nn.head(n) = normal.x() * t.psi;
  t.nn.tail(n) = normal.y() * t.psi;
  Vector dv(2 * n);
  dv.head(n) = gx;
  dv.tail(n) = gy;
  t.dv_l = om_l * m.lambda * dv;
  t.dv_ld = om_ld * m.lambda * m.delta2 * dv;
  return t;
}

struct FaceFlags {
  bool u = true;         // displacement face terms
  bool phi = true;       // diffusion face terms
  bool coupling = true;  // face term of C
  bool consistency = true;
  double avg = 0.5;      // plain average of psi in C
};

// Accumulates the face blocks between sides s (test) and t (trial).
void face_point(const SideTrace& S, const SideTrace& T, double w, const FacePenalty& fp,
                const FaceFlags& fl, Dense blocks[kNumOps]) {
  const double ss = S.sg * T.sg;
  const double cons = fl.consistency ? 1.0 : 0.0;
  if (fl.u) {
    const Dense vv = S.vec * T.vec.transpose();
    blocks[kAe] += w * (fp.penalty[kMu] * ss * vv -
                        cons * (S.sg * S.vec * T.tr_mu.transpose() + T.sg * S.tr_mu * T.vec.transpose()));
    blocks[kAed] += w * (fp.penalty[kMuDelta1] * ss * vv -
                         cons * (S.sg * S.vec * T.tr_mud.transpose() + T.sg * S.tr_mud * T.vec.transpose()));
    const Dense nn = S.nn * T.nn.transpose();
    blocks[kAdiv] += w * (fp.penalty[kLambda] * ss * nn -
                          cons * (S.sg * S.nn * T.dv_l.transpose() + T.sg * S.dv_l * T.nn.transpose()));
    blocks[kAdivd] += w * (fp.penalty[kLambdaDelta2] * ss * nn -
                           cons * (S.sg * S.nn * T.dv_ld.transpose() + T.sg * S.dv_ld * T.nn.transpose()));
  }
  if (fl.phi) {
    blocks[kAphi] += w * (fp.penalty[kDiffusion] * ss * S.psi * T.psi.transpose() -
                          cons * (S.sg * S.psi * T.fl.transpose() + T.sg * S.fl * T.psi.transpose()));
  }
  if (fl.coupling && fl.consistency) {
    blocks[kC] -= (w * fl.avg * T.sg * T.m->gamma) * S.psi * T.nn.transpose();
    blocks[kCt] -= (w * fl.avg * T.sg * T.m->gamma * T.m->tau2) * S.psi * T.nn.transpose();
  }
}

void init_blocks(Dense blocks[kNumOps], int ns, int nt) {
  for (int op = 0; op < kNumOps; ++op) {
    const int r = vector_rows(op) ? 2 * ns : ns;
    const int c = vector_cols(op) ? 2 * nt : nt;
    blocks[op] = Dense::Zero(r, c);
  }
}

void emit_blocks(const DgSpace& space, int ks, int kt, Dense blocks[kNumOps], std::vector<Contribution>& out) {
  for (int op = 0; op < kNumOps; ++op) {
    if (op == kMu_ || op == kMphiTau1 || op == kMphi_) continue;
    const int r0 = vector_rows(op) ? space.vector_index(ks, 0, 0) : space.scalar_offset(ks);
    const int c0 = vector_cols(op) ? space.vector_index(kt, 0, 0) : space.scalar_offset(kt);
    out.push_back({op, r0, c0, std::move(blocks[op])});
  }
}

std::vector<Contribution> interior_blocks(const DgSpace& space, const CoefficientField& coeffs,
                                          const PenaltyTable& pen, int f, bool consistency) {
  const InteriorFace& face = space.mesh().interior_faces()[static_cast<std::size_t>(f)];
  const FaceQuadrature& fq = space.interior_face(f);
  const FacePenalty& fp = pen.interior[static_cast<std::size_t>(f)];
  const int k[2] = {face.plus, face.minus};
  const int n[2] = {space.local_dim(face.plus), space.local_dim(face.minus)};
  const double sg[2] = {1.0, -1.0};

  Dense blocks[2][2][kNumOps];
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t) init_blocks(blocks[s][t], n[s], n[t]);

  FaceFlags flags;
  flags.consistency = consistency;
  for (std::size_t p = 0; p < fq.q.size(); ++p) {
    SideTrace tr[2];
    for (int s = 0; s < 2; ++s)
      tr[s] = make_trace(fq, s, static_cast<int>(p), n[s], sg[s], coeffs[k[s]], face.normal, fp);
    for (int s = 0; s < 2; ++s)
      for (int t = 0; t < 2; ++t) face_point(tr[s], tr[t], fq.q.w[p], fp, flags, blocks[s][t]);
  }
  std::vector<Contribution> out;
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t) emit_blocks(space, k[s], k[t], blocks[s][t], out);
  return out;
}

std::vector<Contribution> boundary_blocks(const DgSpace& space, const CoefficientField& coeffs,
                                          const PenaltyTable& pen, const BoundaryConditions& bcs, int f,
                                          bool consistency) {
  const BoundaryFace& face = space.mesh().boundary_faces()[static_cast<std::size_t>(f)];
  const FaceQuadrature& fq = space.boundary_face(f);
  const FacePenalty& fp = pen.boundary[static_cast<std::size_t>(f)];
  const int k = face.element;
  const int n = space.local_dim(k);

  FaceFlags flags;
  flags.consistency = consistency;
  flags.u = bcs.u_type(face.tag) == BcType::kDirichlet;
  flags.coupling = flags.u;
  flags.phi = bcs.phi_type(face.tag) == BcType::kDirichlet;
  flags.avg = 1.0;
  std::vector<Contribution> out;
  if (!flags.u && !flags.phi) return out;

  Dense blocks[kNumOps];
  init_blocks(blocks, n, n);
  for (std::size_t p = 0; p < fq.q.size(); ++p) {
    const SideTrace tr = make_trace(fq, 0, static_cast<int>(p), n, 1.0, coeffs[k], face.normal, fp);
    face_point(tr, tr, fq.q.w[p], fp, flags, blocks);
  }
  emit_blocks(space, k, k, blocks, out);
  return out;
}

std::array<SparseMatrix, kNumOps> assemble_all(const DgSpace& space, const CoefficientField& coeffs,
                                               const PenaltyTable& pen, const BoundaryConditions& bcs,
                                               bool consistency) {
  check_sizes(space, coeffs);
  check_penalties(space, pen);
  bcs.check(space.mesh());

  const std::size_t ne = static_cast<std::size_t>(space.num_elements());
  const std::size_t ni = space.mesh().interior_faces().size();
  const std::size_t nb = space.mesh().boundary_faces().size();
  std::vector<std::vector<Contribution>> parts(ne + ni + nb);
  parallel_for(parts.size(), [&](std::size_t i) {
    if (i < ne)
      parts[i] = element_blocks(space, coeffs, static_cast<int>(i));
    else if (i < ne + ni)
      parts[i] = interior_blocks(space, coeffs, pen, static_cast<int>(i - ne), consistency);
    else
      parts[i] = boundary_blocks(space, coeffs, pen, bcs, static_cast<int>(i - ne - ni), consistency);
  });

  const OpSizes sizes{space.vector_dofs(), space.scalar_dofs()};
  std::array<std::vector<Triplet>, kNumOps> trip;
  for (const auto& part : parts)
    for (const Contribution& c : part)
      for (Eigen::Index j = 0; j < c.block.cols(); ++j)
        for (Eigen::Index i = 0; i < c.block.rows(); ++i) {
          const double v = c.block(i, j);
          if (v != 0.0)
            trip[static_cast<std::size_t>(c.op)].emplace_back(c.row0 + static_cast<int>(i),
                                                               c.col0 + static_cast<int>(j), v);
        }

  std::array<SparseMatrix, kNumOps> out;
  for (int op = 0; op < kNumOps; ++op) {
    const auto [r, c] = sizes.of(op);
    out[static_cast<std::size_t>(op)].resize(r, c);
    out[static_cast<std::size_t>(op)].setFromTriplets(trip[static_cast<std::size_t>(op)].begin(),
                                                      trip[static_cast<std::size_t>(op)].end());
  }
  return out;
}

}  // namespace

BlockOperators assemble_operators(const DgSpace& space, const CoefficientField& coeffs,
                                  const PenaltyTable& penalties, const BoundaryConditions& bcs,
                                  const AssemblyOptions& opts) {
  auto m = assemble_all(space, coeffs, penalties, bcs, opts.consistency);
  BlockOperators ops;
  ops.Mu = std::move(m[kMu_]);
  ops.Mphi_tau1 = std::move(m[kMphiTau1]);
  ops.Mphi = std::move(m[kMphi_]);
  ops.Ae = std::move(m[kAe]);
  ops.Ae_delta1 = std::move(m[kAed]);
  ops.Adiv = std::move(m[kAdiv]);
  ops.Adiv_delta2 = std::move(m[kAdivd]);
  ops.Aphi = std::move(m[kAphi]);
  ops.C = std::move(m[kC]);
  ops.C_tau2 = std::move(m[kCt]);
  ops.nu = space.vector_dofs();
  ops.nphi = space.scalar_dofs();
  return ops;
}

SparseMatrix assemble_mass(const DgSpace& space, const std::vector<double>& weight, int components) {
  if (static_cast<int>(weight.size()) != space.num_elements())
    throw ConfigError("assembly", "mass weight size does not match the mesh");
  if (components != 1 && components != 2) throw ConfigError("assembly", "components must be 1 or 2");
  std::vector<Triplet> trip;
  const int N = components * space.scalar_dofs();
  for (int k = 0; k < space.num_elements(); ++k) {
    const ElementQuadrature& V = space.volume(k);
    const Vector w = weights_of(V.q);
    const Dense M = weight[static_cast<std::size_t>(k)] * (V.phi.transpose() * w.asDiagonal() * V.phi);
    const int n = space.local_dim(k);
    for (int c = 0; c < components; ++c) {
      const int r0 = components == 2 ? space.vector_index(k, c, 0) : space.scalar_offset(k);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          if (M(i, j) != 0.0) trip.emplace_back(r0 + i, r0 + j, M(i, j));
    }
  }
  SparseMatrix out(N, N);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SparseMatrix assemble_elasticity(const DgSpace& space, const CoefficientField& coeffs,
                                 const PenaltyTable& penalties, const BoundaryConditions& bcs,
                                 bool viscous) {
  auto m = assemble_all(space, coeffs, penalties, bcs, true);
  return std::move(m[viscous ? kAed : kAe]);
}

SparseMatrix assemble_div(const DgSpace& space, const CoefficientField& coeffs,
                          const PenaltyTable& penalties, const BoundaryConditions& bcs, bool viscous) {
  auto m = assemble_all(space, coeffs, penalties, bcs, true);
  return std::move(m[viscous ? kAdivd : kAdiv]);
}

SparseMatrix assemble_diffusion(const DgSpace& space, const CoefficientField& coeffs,
                                const PenaltyTable& penalties, const BoundaryConditions& bcs) {
  auto m = assemble_all(space, coeffs, penalties, bcs, true);
  return std::move(m[kAphi]);
}

std::pair<SparseMatrix, SparseMatrix> assemble_coupling(const DgSpace& space,
                                                        const CoefficientField& coeffs,
                                                        const BoundaryConditions& bcs) {
  auto pen = compute_penalties(space, coeffs);
  auto m = assemble_all(space, coeffs, pen, bcs, true);
  return {std::move(m[kC]), std::move(m[kCt])};
}

NormMatrices assemble_norm_matrices(const DgSpace& space, const CoefficientField& coeffs,
                                    const PenaltyTable& penalties, const BoundaryConditions& bcs) {
  auto m = assemble_all(space, coeffs, penalties, bcs, false);
  NormMatrices out;
  out.e = m[kAe] + m[kAdiv];
  out.delta = m[kAed] + m[kAdivd];
  out.phi = std::move(m[kAphi]);
  return out;
}

Vector load_vector(const DgSpace& space, const VectorFn& f) {
  Vector F = Vector::Zero(space.vector_dofs());
  parallel_for(static_cast<std::size_t>(space.num_elements()), [&](std::size_t kk) {
    const int k = static_cast<int>(kk);
    const PointSet ps = space.volume_points(k, 2 * space.degree(k) + 4);
    const int n = space.local_dim(k);
    Vector phi;
    for (std::size_t p = 0; p < ps.size(); ++p) {
      space.eval_basis(k, ps.x[p], phi);
      const Vec2 v = f(ps.x[p]);
      F.segment(space.vector_index(k, 0, 0), n) += ps.w[p] * v.x() * phi;
      F.segment(space.vector_index(k, 1, 0), n) += ps.w[p] * v.y() * phi;
    }
  });
  return F;
}

Vector load_vector(const DgSpace& space, const ScalarFn& g) {
  Vector G = Vector::Zero(space.scalar_dofs());
  parallel_for(static_cast<std::size_t>(space.num_elements()), [&](std::size_t kk) {
    const int k = static_cast<int>(kk);
    const PointSet ps = space.volume_points(k, 2 * space.degree(k) + 4);
    const int n = space.local_dim(k);
    Vector phi;
    for (std::size_t p = 0; p < ps.size(); ++p) {
      space.eval_basis(k, ps.x[p], phi);
      G.segment(space.scalar_offset(k), n) += ps.w[p] * g(ps.x[p]) * phi;
    }
  });
  return G;
}

namespace {

double point_segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (x - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * d - x).norm();
}

bool point_in_triangle(const Vec2& x, const std::array<Vec2, 3>& v) {
  auto cross = [](const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); };
  const double d1 = cross(v[1] - v[0], x - v[0]);
  const double d2 = cross(v[2] - v[1], x - v[1]);
  const double d3 = cross(v[0] - v[2], x - v[2]);
  const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(neg && pos);
}

// Calls visit(points) for pieces of the triangle that meet the disc.
template <typename Visit>
void cover_disc(const std::array<Vec2, 3>& v, const Vec2& c, double r, int depth, const TriangleRule& rule,
                Visit&& visit) {
  bool all_inside = true;
  for (const Vec2& p : v) all_inside = all_inside && (p - c).norm() <= r;
  if (!all_inside) {
    double dist = std::min({point_segment_distance(c, v[0], v[1]), point_segment_distance(c, v[1], v[2]),
                            point_segment_distance(c, v[2], v[0])});
    if (point_in_triangle(c, v)) dist = 0.0;
    if (dist >= r) return;
    if (depth > 0) {
      const Vec2 m01 = 0.5 * (v[0] + v[1]), m12 = 0.5 * (v[1] + v[2]), m20 = 0.5 * (v[2] + v[0]);
      cover_disc({v[0], m01, m20}, c, r, depth - 1, rule, visit);
      cover_disc({m01, v[1], m12}, c, r, depth - 1, rule, visit);
      cover_disc({m20, m12, v[2]}, c, r, depth - 1, rule, visit);
      cover_disc({m01, m12, m20}, c, r, depth - 1, rule, visit);
      return;
    }
  }
  visit(map_triangle(rule, v[0], v[1], v[2]));
}

template <typename Accumulate>
void supported_loop(const DgSpace& space, const Vec2& center, double radius, int max_depth,
                    Accumulate&& acc) {
  if (!(radius > 0.0)) throw ConfigError("assembly", "support radius must be > 0");
  const PolyMesh& mesh = space.mesh();
  for (int k = 0; k < space.num_elements(); ++k) {
    const ElementGeometry& g = mesh.geometry(k);
    const Vec2 nearest = center.cwiseMax(g.bbox_min).cwiseMin(g.bbox_max);
    if ((nearest - center).norm() >= radius) continue;
    const TriangleRule rule = triangle_rule(space.degree(k) + 8);
    Vector phi;
    for (const SubTriangle& t : g.triangles)
      cover_disc(t.v, center, radius, max_depth, rule, [&](const PointSet& ps) {
        for (std::size_t p = 0; p < ps.size(); ++p) {
          space.eval_basis(k, ps.x[p], phi);
          acc(k, ps.x[p], ps.w[p], phi);
        }
      });
  }
}

}  // namespace

Vector load_vector_supported(const DgSpace& space, const VectorFn& f, const Vec2& center, double radius,
                             int max_depth) {
  Vector F = Vector::Zero(space.vector_dofs());
  supported_loop(space, center, radius, max_depth, [&](int k, const Vec2& x, double w, const Vector& phi) {
    const Vec2 v = f(x);
    const int n = space.local_dim(k);
    F.segment(space.vector_index(k, 0, 0), n) += w * v.x() * phi;
    F.segment(space.vector_index(k, 1, 0), n) += w * v.y() * phi;
  });
  return F;
}

Vector load_vector_supported(const DgSpace& space, const ScalarFn& g, const Vec2& center, double radius,
                             int max_depth) {
  Vector G = Vector::Zero(space.scalar_dofs());
  supported_loop(space, center, radius, max_depth, [&](int k, const Vec2& x, double w, const Vector& phi) {
    G.segment(space.scalar_offset(k), space.local_dim(k)) += w * g(x) * phi;
  });
  return G;
}

DirichletLift assemble_lifting(const DgSpace& space, const CoefficientField& coeffs,
                               const PenaltyTable& penalties, const BoundaryConditions& bcs,
                               const VectorFn& u_data, const ScalarFn& phi_data) {
  check_sizes(space, coeffs);
  check_penalties(space, penalties);
  bcs.check(space.mesh());
  DirichletLift L;
  L.elastic = Vector::Zero(space.vector_dofs());
  L.viscous = Vector::Zero(space.vector_dofs());
  L.coupling = Vector::Zero(space.scalar_dofs());
  L.coupling_tau2 = Vector::Zero(space.scalar_dofs());
  L.diffusion = Vector::Zero(space.scalar_dofs());

  const auto& faces = space.mesh().boundary_faces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const BoundaryFace& face = faces[f];
    const bool du = bcs.u_type(face.tag) == BcType::kDirichlet;
    const bool dphi = bcs.phi_type(face.tag) == BcType::kDirichlet;
    if (!du && !dphi) continue;
    const FaceQuadrature& fq = space.boundary_face(static_cast<int>(f));
    const FacePenalty& fp = penalties.boundary[f];
    const int k = face.element;
    const int n = space.local_dim(k);
    const Material& m = coeffs[k];
    const int vr = space.vector_index(k, 0, 0);
    const int sr = space.scalar_offset(k);
    for (std::size_t p = 0; p < fq.q.size(); ++p) {
      const SideTrace t = make_trace(fq, 0, static_cast<int>(p), n, 1.0, m, face.normal, fp);
      const double w = fq.q.w[p];
      const Vec2& x = fq.q.x[p];
      if (du) {
        const Vec2 g = u_data(x);
        const double gn = g.dot(face.normal);
        L.elastic.segment(vr, 2 * n) += w * (fp.penalty[kMu] * t.vec * g - t.tr_mu * g +
                                             fp.penalty[kLambda] * gn * t.nn - gn * t.dv_l);
        L.viscous.segment(vr, 2 * n) += w * (fp.penalty[kMuDelta1] * t.vec * g - t.tr_mud * g +
                                             fp.penalty[kLambdaDelta2] * gn * t.nn - gn * t.dv_ld);
        L.coupling.segment(sr, n) -= (w * m.gamma * gn) * t.psi;
        L.coupling_tau2.segment(sr, n) -= (w * m.gamma * m.tau2 * gn) * t.psi;
      }
      if (dphi) {
        const double g = phi_data(x);
        L.diffusion.segment(sr, n) += w * g * (fp.penalty[kDiffusion] * t.psi - t.fl);
      }
    }
  }
  return L;
}

void LoadSeries::add(LoadTerm term) {
  if (term.F.size() != 0 && term.F.size() != nu_)
    throw ConfigError("assembly", "load term '" + term.label + "' has wrong displacement size");
  if (term.G.size() != 0 && term.G.size() != nphi_)
    throw ConfigError("assembly", "load term '" + term.label + "' has wrong pressure size");
  if (!term.profile) throw ConfigError("assembly", "load term '" + term.label + "' has no time profile");
  terms_.push_back(std::move(term));
}

Vector LoadSeries::at(double t) const {
  Vector out = Vector::Zero(nu_ + nphi_);
  for (const LoadTerm& term : terms_) {
    const double a = term.profile(t);
    if (a == 0.0) continue;
    if (term.F.size() != 0) out.head(nu_) += a * term.F;
    if (term.G.size() != 0) out.tail(nphi_) += a * term.G;
  }
  return out;
}

}  // namespace kvdg
