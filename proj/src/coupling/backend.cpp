#include "cvcouple/coupling/backend.hpp"

#include "cvcouple/errors.hpp"

namespace cvcouple::coupling {

using json = nlohmann::json;

namespace {

json vec_to_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd vec_from_json(const json& j, Eigen::Index n, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
    throw StateError(std::string("checkpoint: ") + what + " has the wrong size");
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

FECavity::FECavity(cardiofe::TetMesh mesh, cardiofe::LVModelParams params, cardiofe::DynamicsParams dyn)
    : model_(std::make_unique<cardiofe::LVModel>(std::move(mesh), std::move(params))),
      solid_(std::make_unique<cardiofe::DynamicSolid>(*model_, dyn)),
      state_(cardiofe::rest_state(*model_)) {}

VectorXd FECavity::predict(double dt) const {
  if (!solid_->dynamics().enabled) return state_.u;
  return state_.u + dt * state_.v;
}

void FECavity::linearize(double dt, const VectorXd& u, double p, CavityLinearization& out) const {
  solid_->assemble(state_, dt, u, p, out.R, out.K, out.a);
  out.b = model_->volume_gradient(u);
  out.V = model_->cavity_volume(u);
}

void FECavity::commit(double dt, const VectorXd& u, double p) { state_ = solid_->advance(state_, dt, u, p); }

void FECavity::inflate(double p, int increments) {
  if (increments < 1) throw ValidationError("inflate: increments must be >= 1");
  const double p0 = state_.p;
  for (int k = 1; k <= increments; ++k)
    cardiofe::solve_static(*model_, state_.u, p0 + (p - p0) * k / increments, state_.time);
  state_.p = p;
  state_.v.setZero();
  state_.a.setZero();
}

json FECavity::checkpoint() const {
  return {{"kind", "fe"},    {"n_dofs", n_dofs()},      {"time", state_.time}, {"p", state_.p},
          {"u", vec_to_json(state_.u)}, {"v", vec_to_json(state_.v)}, {"a", vec_to_json(state_.a)}};
}

void FECavity::restore(const json& j) {
  if (j.value("kind", "") != "fe" || j.value("n_dofs", -1) != n_dofs())
    throw StateError("checkpoint: cavity state does not match the finite-element model");
  state_.time = j.at("time").get<double>();
  state_.p = j.at("p").get<double>();
  state_.u = vec_from_json(j.at("u"), n_dofs(), "u");
  state_.v = vec_from_json(j.at("v"), n_dofs(), "v");
  state_.a = vec_from_json(j.at("a"), n_dofs(), "a");
}

void validate(const ElastanceCavity& c) {
  if (!(c.V0 > 0.0)) throw ValidationError("elastance: V0 must be positive");
  if (c.E.kind() == arterial::Waveform::Kind::table) {
    for (double e : c.E.values())
      if (!(e > 0.0)) throw ValidationError("elastance: E(t) must be positive");
  } else if (!(c.E.peak() > 0.0) || c.E.kind() != arterial::Waveform::Kind::constant) {
    throw ValidationError("elastance: E(t) must be a positive constant or table");
  }
}

double elastance_volume(const ElastanceCavity& c, double p, double t) {
  const double E = c.E(t);
  if (!(E > 0.0)) throw DomainError("elastance: E(t) must be positive");
  return c.V0 + (p - c.p0) / E;
}

ElastanceBackend::ElastanceBackend(ElastanceCavity cavity, double t0) : cavity_(std::move(cavity)), t_(t0) {
  validate(cavity_);
  p_ = cavity_.p0;
  u_ = VectorXd::Constant(1, cavity_.V0);
}

void ElastanceBackend::linearize(double dt, const VectorXd& u, double p, CavityLinearization& out) const {
  const double E = cavity_.E(t_ + dt);
  out.R = VectorXd::Constant(1, E * (u(0) - cavity_.V0) + cavity_.p0 - p);
  out.K.resize(1, 1);
  out.K.setZero();
  out.K.insert(0, 0) = E;
  out.K.makeCompressed();
  out.a = VectorXd::Constant(1, -1.0);
  out.b = VectorXd::Constant(1, 1.0);
  out.V = u(0);
}

void ElastanceBackend::commit(double dt, const VectorXd& u, double p) {
  u_ = u;
  p_ = p;
  t_ += dt;
}

void ElastanceBackend::inflate(double p, int) {
  p_ = p;
  u_(0) = elastance_volume(cavity_, p, t_);
}

json ElastanceBackend::checkpoint() const { return {{"kind", "elastance"}, {"time", t_}, {"p", p_}, {"V", u_(0)}}; }

void ElastanceBackend::restore(const json& j) {
  if (j.value("kind", "") != "elastance") throw StateError("checkpoint: cavity state is not an elastance cavity");
  t_ = j.at("time").get<double>();
  p_ = j.at("p").get<double>();
  u_(0) = j.at("V").get<double>();
}

}  // namespace cvcouple::coupling
