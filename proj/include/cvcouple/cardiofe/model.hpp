#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "cvcouple/cardiofe/mesh.hpp"

namespace cvcouple::cardiofe {

using SpMat = Eigen::SparseMatrix<double>;
using Eigen::VectorXd;

/// Omni-directional springs on the base faces and normal springs on the epicardium whose stiffness
/// ramps linearly along the long axis from zero at the apex to k_epi at the base.
struct BoundarySprings {
  double k_base = 5e6;  // Pa/m
  double k_epi = 1e5;   // Pa/m
};

struct LVModelParams {
  PassiveLaw law;
  ActiveParams active;
  BoundarySprings springs;
  std::vector<double> t_a;        // per element, s; empty means no activation
  double period = 0.0;            // activation repeats every period when > 0
  std::vector<int> fixed_dofs;    // homogeneous Dirichlet constraints
};

/// Quasi-static operators of the left-ventricle model at displacement u. Pressure loads act on the
/// closed cavity surface (endocardium plus closure cap) as follower loads.
class LVModel {
 public:
  /// Throws TopologyError when the cavity surface is not closed, ValidationError on bad parameters.
  LVModel(TetMesh mesh, LVModelParams params);

  const TetMesh& mesh() const { return mesh_; }
  const LVModelParams& params() const { return params_; }
  Eigen::Index n_dofs() const { return 3 * static_cast<Eigen::Index>(mesh_.nodes.size()); }
  const std::vector<Tri>& cavity() const { return cavity_; }

  /// f_int + f_spring - p B_p. Constrained entries are zeroed unless raw is set.
  VectorXd residual(const VectorXd& u, double p, double t, bool raw = false) const;
  /// Residual and consistent tangent (material, geometric, spring and follower-load terms).
  void assemble(const VectorXd& u, double p, double t, VectorXd& R, SpMat& K) const;

  /// (1/3) closed-surface integral of x.n over the deformed cavity surface.
  double cavity_volume(const VectorXd& u) const;
  /// dV/du.
  VectorXd volume_gradient(const VectorXd& u) const;
  /// d(pressure load)/dp, from the follower-load assembly.
  VectorXd pressure_column(const VectorXd& u) const;

  const VectorXd& lumped_mass() const { return mass_; }
  /// Unconstrained tangent at u = 0, p = 0 without activation.
  const SpMat& reference_stiffness() const { return K0_; }
  /// Zeroes constrained rows and columns, unit diagonal.
  void constrain(SpMat& K) const;
  void constrain(VectorXd& v) const;

  /// Time within the current beat when a period is set.
  double beat_time(double t) const;

 private:
  struct Element {
    Eigen::Matrix<double, 4, 3> dN;  // reference shape gradients
    double volume = 0.0;
  };
  struct NodalSpring {
    int node;
    Mat3 k;  // Pa/m times lumped area
  };

  void build_pattern();
  void assemble_impl(const VectorXd& u, double p, double t, VectorXd& R, SpMat* K, bool with_active) const;

  TetMesh mesh_;
  LVModelParams params_;
  std::vector<Tri> cavity_;
  std::vector<Element> elems_;
  std::vector<NodalSpring> springs_;
  VectorXd mass_unit_;  // lumped mass per unit density
  VectorXd mass_;
  SpMat pattern_;
  std::vector<std::array<int, 48>> elem_slots_;  // per tet: (a, b, column) -> first value index
  std::vector<std::array<int, 27>> tri_slots_;
  std::vector<int> fixed_value_slots_;
  std::vector<int> fixed_diag_slots_;
  std::vector<int> diag_slots_;
  std::vector<char> is_fixed_;
  SpMat K0_;

  friend class DynamicSolid;
};

/// Chung-Hulbert parameters.
struct GeneralizedAlpha {
  double alpha_m = -1.0;
  double alpha_f = 0.0;
  double gamma = 1.5;
  double beta = 1.0;
  static GeneralizedAlpha from_rho_inf(double rho_inf);
};

struct DynamicsParams {
  bool enabled = true;
  double rho0 = 1060.0;
  double rho_inf = 0.0;
  double beta_mass = 0.1;   // 1/s
  double beta_stiff = 0.1;  // s
};

struct FEState {
  VectorXd u, v, a;
  double time = 0.0;
  double p = 0.0;  // cavity pressure at this state
};

FEState rest_state(const LVModel& model);

/// Residual of the discrete equation of motion for a trial end-of-step displacement, with lumped
/// mass and Rayleigh damping beta_mass M + beta_stiff K0. Falls back to the quasi-static residual
/// when dynamics are disabled.
class DynamicSolid {
 public:
  DynamicSolid(const LVModel& model, DynamicsParams dyn);

  const LVModel& model() const { return model_; }
  const DynamicsParams& dynamics() const { return dyn_; }
  const GeneralizedAlpha& scheme() const { return ga_; }

  /// R(u, p) at t_prev + dt, the tangent dR/du and the column dR/dp.
  void assemble(const FEState& prev, double dt, const VectorXd& u, double p, VectorXd& R, SpMat& K,
                VectorXd& dR_dp) const;
  VectorXd residual(const FEState& prev, double dt, const VectorXd& u, double p) const;
  /// Newmark update of velocity and acceleration for the accepted displacement.
  FEState advance(const FEState& prev, double dt, const VectorXd& u, double p) const;

 private:
  const LVModel& model_;
  DynamicsParams dyn_;
  GeneralizedAlpha ga_;
  VectorXd mass_;
  SpMat damping_;
};

struct StaticSolveReport {
  int iterations = 0;
  std::vector<double> residuals;
};

/// Newton on the quasi-static residual at fixed pressure with a direct sparse solve. Steps that
/// would invert an element or give a non-finite residual are halved. Throws NewtonDivergence when tol is not reached within max_iter.
StaticSolveReport solve_static(const LVModel& model, VectorXd& u, double p, double t, double tol = 1e-9,
                               int max_iter = 25);

}  // namespace cvcouple::cardiofe
