#pragma once

#include <Eigen/Sparse>
#include <json.hpp>
#include <memory>

#include "cvcouple/arterial/waveform.hpp"
#include "cvcouple/cardiofe/model.hpp"

namespace cvcouple::coupling {

using SpMat = Eigen::SparseMatrix<double>;
using Eigen::VectorXd;

/// Cavity equations at a trial end-of-step state (u, p).
struct CavityLinearization {
  VectorXd R;        // residual
  SpMat K;           // dR/du
  VectorXd a;        // dR/dp
  VectorXd b;        // dV/du
  double V = 0.0;    // cavity volume, m^3
};

/// A cavity model the coupled Newton step can drive. Holds the accepted state at the start of the
/// next step; trial states are passed in explicitly.
class CavityBackend {
 public:
  virtual ~CavityBackend() = default;

  virtual Eigen::Index n_dofs() const = 0;
  virtual const VectorXd& u() const = 0;
  virtual double pressure() const = 0;
  virtual double time() const = 0;
  virtual double volume(const VectorXd& u) const = 0;

  /// Starting guess for the end-of-step unknowns.
  virtual VectorXd predict(double dt) const = 0;
  virtual void linearize(double dt, const VectorXd& u, double p, CavityLinearization& out) const = 0;
  /// Accepts (u, p) as the state at time() + dt.
  virtual void commit(double dt, const VectorXd& u, double p) = 0;
  /// Quasi-static fill to pressure p at the current time, in equal increments; the state is at rest.
  virtual void inflate(double p, int increments) = 0;

  virtual nlohmann::json checkpoint() const = 0;
  /// Throws StateError when the document does not match this backend.
  virtual void restore(const nlohmann::json& j) = 0;
};

/// Finite-element ventricle. Owns the model so the dynamic solver's reference stays valid.
class FECavity : public CavityBackend {
 public:
  FECavity(cardiofe::TetMesh mesh, cardiofe::LVModelParams params, cardiofe::DynamicsParams dyn);

  const cardiofe::LVModel& model() const { return *model_; }
  const cardiofe::FEState& state() const { return state_; }

  Eigen::Index n_dofs() const override { return model_->n_dofs(); }
  const VectorXd& u() const override { return state_.u; }
  double pressure() const override { return state_.p; }
  double time() const override { return state_.time; }
  double volume(const VectorXd& u) const override { return model_->cavity_volume(u); }
  VectorXd predict(double dt) const override;
  void linearize(double dt, const VectorXd& u, double p, CavityLinearization& out) const override;
  void commit(double dt, const VectorXd& u, double p) override;
  void inflate(double p, int increments) override;
  nlohmann::json checkpoint() const override;
  void restore(const nlohmann::json& j) override;

 private:
  std::unique_ptr<cardiofe::LVModel> model_;
  std::unique_ptr<cardiofe::DynamicSolid> solid_;
  cardiofe::FEState state_;
};

/// Lumped cavity V = V0 + (p - p0) / E(t) with a periodic piecewise-linear elastance.
struct ElastanceCavity {
  double V0 = 0.0;       // m^3
  double p0 = 0.0;       // Pa
  arterial::Waveform E;  // Pa/m^3
};

/// Throws ValidationError unless every tabulated elastance is positive.
void validate(const ElastanceCavity& c);
double elastance_volume(const ElastanceCavity& c, double p, double t);

/// One unknown, the volume: R = E(t) (V - V0) + p0 - p.
class ElastanceBackend : public CavityBackend {
 public:
  explicit ElastanceBackend(ElastanceCavity cavity, double t0 = 0.0);

  const ElastanceCavity& cavity() const { return cavity_; }

  Eigen::Index n_dofs() const override { return 1; }
  const VectorXd& u() const override { return u_; }
  double pressure() const override { return p_; }
  double time() const override { return t_; }
  double volume(const VectorXd& u) const override { return u(0); }
  VectorXd predict(double) const override { return u_; }
  void linearize(double dt, const VectorXd& u, double p, CavityLinearization& out) const override;
  void commit(double dt, const VectorXd& u, double p) override;
  void inflate(double p, int increments) override;
  nlohmann::json checkpoint() const override;
  void restore(const nlohmann::json& j) override;

 private:
  ElastanceCavity cavity_;
  VectorXd u_;
  double p_ = 0.0;
  double t_ = 0.0;
};

}  // namespace cvcouple::coupling
