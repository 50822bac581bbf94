#pragma once

#include "kvdg/basis.hpp"
#include "kvdg/common.hpp"
#include "kvdg/dg_forms.hpp"
#include "kvdg/models.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace kvdg {

enum class BcType { kDirichlet, kNeumann };

/// Condition per boundary tag, separately for displacement and pressure.
/// Neumann means homogeneous natural data: the face terms of the forms
/// acting on that unknown are omitted.
struct BoundaryConditions {
  std::map<int, BcType> u;
  std::map<int, BcType> phi;

  static BoundaryConditions all_dirichlet();
  BcType u_type(int tag) const;
  BcType phi_type(int tag) const;
  /// Throws ConfigError if a boundary face carries a tag without condition.
  void check(const PolyMesh& mesh) const;
};

/// Assembled operators of the semi-discrete system. Vector operators act on
/// the displacement numbering of DgSpace, scalar ones on the pressure
/// numbering; C and C_tau2 map displacement trial to pressure test.
struct BlockOperators {
  SparseMatrix Mu, Mphi_tau1, Mphi;
  SparseMatrix Ae, Ae_delta1, Adiv, Adiv_delta2, Aphi;
  SparseMatrix C, C_tau2;

  int nu = 0, nphi = 0;

  SparseMatrix Au() const { return Ae + Adiv; }
  SparseMatrix Au_delta() const { return Ae_delta1 + Adiv_delta2; }
};

struct AssemblyOptions {
  /// Off: volume and penalty terms only (the dG-norm quadratic forms).
  bool consistency = true;
};

BlockOperators assemble_operators(const DgSpace& space, const CoefficientField& coeffs,
                                  const PenaltyTable& penalties, const BoundaryConditions& bcs,
                                  const AssemblyOptions& opts = {});

SparseMatrix assemble_mass(const DgSpace& space, const std::vector<double>& weight, int components);
SparseMatrix assemble_elasticity(const DgSpace& space, const CoefficientField& coeffs,
                                 const PenaltyTable& penalties, const BoundaryConditions& bcs,
                                 bool viscous = false);
SparseMatrix assemble_div(const DgSpace& space, const CoefficientField& coeffs,
                          const PenaltyTable& penalties, const BoundaryConditions& bcs,
                          bool viscous = false);
SparseMatrix assemble_diffusion(const DgSpace& space, const CoefficientField& coeffs,
                                const PenaltyTable& penalties, const BoundaryConditions& bcs);
/// Returns {C, C_tau2}.
std::pair<SparseMatrix, SparseMatrix> assemble_coupling(const DgSpace& space,
                                                        const CoefficientField& coeffs,
                                                        const BoundaryConditions& bcs);

/// Quadratic forms of the dG norms: U^T e U = ||u||_{dG,e}^2 and so on.
struct NormMatrices {
  SparseMatrix e, delta, phi;
};
NormMatrices assemble_norm_matrices(const DgSpace& space, const CoefficientField& coeffs,
                                    const PenaltyTable& penalties, const BoundaryConditions& bcs);

/// (f, v) and (g, psi) with rules exact to 2 l + 4.
Vector load_vector(const DgSpace& space, const VectorFn& f);
Vector load_vector(const DgSpace& space, const ScalarFn& g);

/// Load vector of a density supported in the disc B(center, radius); cut
/// sub-triangles are bisected recursively so the disc edge is resolved.
Vector load_vector_supported(const DgSpace& space, const VectorFn& f, const Vec2& center,
                             double radius, int max_depth = 7);
Vector load_vector_supported(const DgSpace& space, const ScalarFn& g, const Vec2& center,
                             double radius, int max_depth = 7);

/// Right-hand-side contributions of nonhomogeneous Dirichlet data through
/// symmetric Nitsche lifting, one vector per operator family. With
/// u = a(t) u_D and phi = b(t) phi_D on the boundary the full lifting is
/// a elastic + a' viscous + b diffusion (momentum / pressure) and
/// a' coupling + a'' coupling_tau2 (pressure).
struct DirichletLift {
  Vector elastic;        // A_e + A_div, displacement test
  Vector viscous;        // A_e,delta1 + A_div,delta2, displacement test
  Vector coupling;       // C, pressure test
  Vector coupling_tau2;  // C_tau2, pressure test
  Vector diffusion;      // A_phi, pressure test
};

DirichletLift assemble_lifting(const DgSpace& space, const CoefficientField& coeffs,
                               const PenaltyTable& penalties, const BoundaryConditions& bcs,
                               const VectorFn& u_data, const ScalarFn& phi_data);

/// F(t) = sum_i p_i(t) F_i, G(t) = sum_i p_i(t) G_i.
struct LoadTerm {
  std::string label;
  std::function<double(double)> profile;
  Vector F;  // empty means zero
  Vector G;
};

class LoadSeries {
 public:
  LoadSeries() = default;
  LoadSeries(int nu, int nphi) : nu_(nu), nphi_(nphi) {}

  void add(LoadTerm term);
  const std::vector<LoadTerm>& terms() const { return terms_; }
  int nu() const { return nu_; }
  int nphi() const { return nphi_; }
  bool empty() const { return terms_.empty(); }

  /// Stacked [F; G] at time t.
  Vector at(double t) const;

 private:
  int nu_ = 0, nphi_ = 0;
  std::vector<LoadTerm> terms_;
};

}  // namespace kvdg
