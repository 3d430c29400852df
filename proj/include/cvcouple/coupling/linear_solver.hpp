#pragma once

#include <Eigen/Sparse>
#include <memory>

namespace cvcouple::coupling {

using SpMat = Eigen::SparseMatrix<double>;
using Eigen::VectorXd;

struct LinearSolverConfig {
  enum class Kind { krylov, direct } kind = Kind::krylov;
  double rel_tol = 1e-8;
  int max_iter = 300;
  int restart = 60;
  /// Krylov only: refactor the preconditioner once a solve needs more iterations than this.
  int refactor_after = 25;
};

/// Sparse solver for the displacement block. The Krylov variant runs GMRES preconditioned by a
/// factorization of an earlier operator, refreshed when the iteration count grows; the direct
/// variant refactors on every new operator.
class LinearSolver {
 public:
  explicit LinearSolver(LinearSolverConfig cfg = {});
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  const LinearSolverConfig& config() const { return cfg_; }
  /// Operator for subsequent solves; the matrix is copied.
  void set_operator(const SpMat& K);
  /// Throws LinearSolveError when the tolerance is not reached after a fresh factorization.
  VectorXd solve(const VectorXd& rhs);

  int last_iterations() const { return last_iterations_; }
  int factorizations() const { return factorizations_; }

  struct Factor;

 private:
  void refactor();

  LinearSolverConfig cfg_;
  SpMat K_;
  std::unique_ptr<Factor> factor_;
  bool fresh_ = false;
  int last_iterations_ = 0;
  int factorizations_ = 0;
};

/// [K a; b^T c][du; dp] = [f; g] for one cavity.
struct BlockSystem {
  SpMat K;
  VectorXd a;      // dR_u/dp
  VectorXd b;      // dR_p/du
  double c = 0.0;  // dR_p/dp
  VectorXd f;
  double g = 0.0;
};

struct SchurSolution {
  VectorXd du;
  double dp = 0.0;
};

/// Eliminates du with two solves (K r = f, K s = a), then dp = (c - b.s)^-1 (g - b.r) and
/// du = r - s dp. Throws SingularCouplingError when the reduced scalar vanishes.
SchurSolution schur_solve(const BlockSystem& sys, LinearSolver& solver);

/// Norm of the substituted block residual over the norm of the right-hand side, with the scalar
/// row multiplied by `row_scale` so both rows carry the same units.
double block_residual(const BlockSystem& sys, const SchurSolution& x, double row_scale = 1.0);

}  // namespace cvcouple::coupling
