#include "cvcouple/coupling/linear_solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <unsupported/Eigen/IterativeSolvers>

#include "cvcouple/errors.hpp"

namespace cvcouple::coupling {

// LDL^T of the symmetric part when it factors, LU of the full operator otherwise.
struct LinearSolver::Factor {
  Eigen::SimplicialLDLT<SpMat> ldlt;
  Eigen::SparseLU<SpMat> lu;
  bool use_lu = false;

  VectorXd solve(const VectorXd& b) const { return use_lu ? VectorXd(lu.solve(b)) : VectorXd(ldlt.solve(b)); }
};

namespace {

// Adapter exposing an externally owned factorization to Eigen's GMRES.
struct LaggedPreconditioner {
  const LinearSolver::Factor* factor = nullptr;

  template <class M>
  LaggedPreconditioner& analyzePattern(const M&) { return *this; }
  template <class M>
  LaggedPreconditioner& factorize(const M&) { return *this; }
  template <class M>
  LaggedPreconditioner& compute(const M&) { return *this; }
  template <class Rhs>
  VectorXd solve(const Rhs& b) const { return factor->solve(b); }
  Eigen::ComputationInfo info() const { return Eigen::Success; }
};

}  // namespace

LinearSolver::LinearSolver(LinearSolverConfig cfg) : cfg_(cfg) {
  if (!(cfg_.rel_tol > 0.0) || cfg_.max_iter < 1 || cfg_.restart < 1)
    throw ConfigError("linear solver: tolerance and iteration limits must be positive");
}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

void LinearSolver::set_operator(const SpMat& K) {
  if (K.rows() != K.cols()) throw LinearSolveError("linear solver: operator must be square");
  const bool same_shape = factor_ && K.rows() == K_.rows() && K.nonZeros() == K_.nonZeros();
  K_ = K;
  K_.makeCompressed();
  fresh_ = false;
  if (cfg_.kind == LinearSolverConfig::Kind::direct || !same_shape) refactor();
}

void LinearSolver::refactor() {
  auto f = std::make_unique<Factor>();
  if (cfg_.kind == LinearSolverConfig::Kind::krylov) {
    const SpMat sym = 0.5 * (K_ + SpMat(K_.transpose()));
    f->ldlt.compute(sym);
    f->use_lu = f->ldlt.info() != Eigen::Success || !f->ldlt.vectorD().allFinite() ||
                (f->ldlt.vectorD().array() == 0.0).any();
  } else {
    f->use_lu = true;
  }
  if (f->use_lu) {
    f->lu.compute(K_);
    if (f->lu.info() != Eigen::Success) throw LinearSolveError("linear solver: factorization failed (singular operator)");
  }
  factor_ = std::move(f);
  fresh_ = true;
  ++factorizations_;
}

VectorXd LinearSolver::solve(const VectorXd& rhs) {
  if (!factor_) throw LinearSolveError("linear solver: no operator set");
  if (rhs.size() != K_.rows()) throw LinearSolveError("linear solver: right-hand side size mismatch");
  if (cfg_.kind == LinearSolverConfig::Kind::direct) {
    last_iterations_ = 0;
    VectorXd x = factor_->solve(rhs);
    if (!x.allFinite()) throw LinearSolveError("linear solver: non-finite solution");
    return x;
  }
  for (int attempt = 0;; ++attempt) {
    Eigen::GMRES<SpMat, LaggedPreconditioner> gmres;
    gmres.preconditioner().factor = factor_.get();
    gmres.compute(K_);
    gmres.setTolerance(cfg_.rel_tol);
    gmres.setMaxIterations(cfg_.max_iter);
    gmres.set_restart(cfg_.restart);
    VectorXd x = gmres.solve(rhs);
    last_iterations_ = static_cast<int>(gmres.iterations());
    const bool ok = gmres.info() == Eigen::Success && x.allFinite();
    if (ok && (fresh_ || last_iterations_ <= cfg_.refactor_after)) return x;
    if (fresh_ && !ok)
      throw LinearSolveError("linear solver: GMRES did not reach the tolerance (" + std::to_string(last_iterations_) +
                             " iterations, error " + std::to_string(gmres.error()) + ")");
    refactor();
    if (ok) return x;
  }
}

SchurSolution schur_solve(const BlockSystem& sys, LinearSolver& solver) {
  const Eigen::Index n = sys.K.rows();
  if (sys.a.size() != n || sys.b.size() != n || sys.f.size() != n)
    throw LinearSolveError("schur: block dimensions are inconsistent");
  solver.set_operator(sys.K);
  const VectorXd r = solver.solve(sys.f);
  const VectorXd s = sys.a.isZero(0.0) ? VectorXd::Zero(n) : solver.solve(sys.a);
  const double S = sys.c - sys.b.dot(s);
  const double scale = std::abs(sys.c) + sys.b.cwiseAbs().dot(s.cwiseAbs());
  if (!(std::abs(S) > 1e-14 * scale) || !std::isfinite(S))
    throw SingularCouplingError("schur: reduced coupling scalar is singular");
  SchurSolution x;
  x.dp = (sys.g - sys.b.dot(r)) / S;
  x.du = r - s * x.dp;
  return x;
}

double block_residual(const BlockSystem& sys, const SchurSolution& x, double row_scale) {
  const VectorXd ru = sys.K * x.du + sys.a * x.dp - sys.f;
  const double rp = row_scale * (sys.b.dot(x.du) + sys.c * x.dp - sys.g);
  const double g = row_scale * sys.g;
  const double rhs = std::sqrt(sys.f.squaredNorm() + g * g);
  const double res = std::sqrt(ru.squaredNorm() + rp * rp);
  return rhs > 0.0 ? res / rhs : res;
}

}  // namespace cvcouple::coupling
