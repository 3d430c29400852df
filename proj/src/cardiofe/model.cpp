#include "cvcouple/cardiofe/model.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "cvcouple/errors.hpp"

namespace cvcouple::cardiofe {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return S;
}

Eigen::Matrix<double, 6, 3> strain_matrix(const Mat3& F, const Vec3& g) {
  Eigen::Matrix<double, 6, 3> B;
  for (int i = 0; i < 3; ++i) {
    B(0, i) = F(i, 0) * g(0);
    B(1, i) = F(i, 1) * g(1);
    B(2, i) = F(i, 2) * g(2);
    B(3, i) = F(i, 0) * g(1) + F(i, 1) * g(0);
    B(4, i) = F(i, 1) * g(2) + F(i, 2) * g(1);
    B(5, i) = F(i, 0) * g(2) + F(i, 2) * g(0);
  }
  return B;
}

}  // namespace

LVModel::LVModel(TetMesh mesh, LVModelParams params) : mesh_(std::move(mesh)), params_(std::move(params)) {
  validate(mesh_);
  validate(params_.law);
  if (!params_.t_a.empty()) {
    validate(params_.active);
    if (params_.t_a.size() != mesh_.tets.size())
      throw ValidationError("lv model: activation times must be given per element");
  }
  if (!(params_.springs.k_base >= 0.0) || !(params_.springs.k_epi >= 0.0))
    throw ValidationError("lv model: spring stiffnesses must be non-negative");
  if (!(params_.period >= 0.0)) throw ValidationError("lv model: period must be non-negative");
  cavity_ = cavity_surface(mesh_);

  const Eigen::Index n = n_dofs();
  Eigen::Matrix<double, 4, 3> grad_ref;
  grad_ref << -1, -1, -1, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  mass_unit_ = VectorXd::Zero(n);
  for (const auto& t : mesh_.tets) {
    Mat3 J;
    for (int k = 0; k < 3; ++k) J.col(k) = mesh_.nodes[t[k + 1]] - mesh_.nodes[t[0]];
    Element el;
    el.volume = J.determinant() / 6.0;
    el.dN = grad_ref * J.inverse();
    for (int a = 0; a < 4; ++a) mass_unit_.segment<3>(3 * t[a]).array() += 0.25 * el.volume;
    elems_.push_back(el);
  }

  std::vector<Mat3> k_node(mesh_.nodes.size(), Mat3::Zero());
  for (const auto& f : mesh_.base) {
    const double area = 0.5 * (mesh_.nodes[f[1]] - mesh_.nodes[f[0]]).cross(mesh_.nodes[f[2]] - mesh_.nodes[f[0]]).norm();
    for (int i : f) k_node[i] += params_.springs.k_base * area / 3.0 * Mat3::Identity();
  }
  if (params_.springs.k_epi > 0.0 && !mesh_.epi.empty()) {
    const LongAxis ax = long_axis(mesh_);
    double axis_len = 0.0;
    for (const auto& x : mesh_.nodes) axis_len = std::max(axis_len, (x - ax.apex).dot(ax.dir));
    std::vector<Vec3> normal(mesh_.nodes.size(), Vec3::Zero());
    std::vector<double> area(mesh_.nodes.size(), 0.0);
    for (const auto& f : mesh_.epi) {
      const Vec3 av = 0.5 * (mesh_.nodes[f[1]] - mesh_.nodes[f[0]]).cross(mesh_.nodes[f[2]] - mesh_.nodes[f[0]]);
      for (int i : f) {
        normal[i] += av;
        area[i] += av.norm() / 3.0;
      }
    }
    for (std::size_t i = 0; i < mesh_.nodes.size(); ++i) {
      if (area[i] == 0.0) continue;
      const Vec3 nn = normal[i].normalized();
      const double ramp = std::clamp((mesh_.nodes[i] - ax.apex).dot(ax.dir) / axis_len, 0.0, 1.0);
      k_node[i] += params_.springs.k_epi * ramp * area[i] * nn * nn.transpose();
    }
  }
  for (std::size_t i = 0; i < k_node.size(); ++i)
    if (!k_node[i].isZero(0.0)) springs_.push_back({static_cast<int>(i), k_node[i]});

  is_fixed_.assign(static_cast<std::size_t>(n), 0);
  for (int d : params_.fixed_dofs) {
    if (d < 0 || d >= n) throw ValidationError("lv model: fixed dof out of range");
    is_fixed_[d] = 1;
  }
  build_pattern();

  VectorXd R;
  K0_ = pattern_;
  assemble_impl(VectorXd::Zero(n), 0.0, 0.0, R, &K0_, false);
}

void LVModel::build_pattern() {
  const std::size_t nn = mesh_.nodes.size();
  std::vector<std::vector<int>> nbrs(nn);
  for (std::size_t i = 0; i < nn; ++i) nbrs[i].push_back(static_cast<int>(i));
  for (const auto& t : mesh_.tets)
    for (int a : t)
      for (int b : t) nbrs[b].push_back(a);
  for (const auto& t : cavity_)
    for (int a : t)
      for (int b : t) nbrs[b].push_back(a);
  for (auto& v : nbrs) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  const Eigen::Index n = n_dofs();
  std::vector<int> outer(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t j = 0; j < nn; ++j)
    for (int c = 0; c < 3; ++c) outer[3 * j + c + 1] = outer[3 * j + c] + 3 * static_cast<int>(nbrs[j].size());
  pattern_.resize(n, n);
  pattern_.resizeNonZeros(outer.back());
  std::copy(outer.begin(), outer.end(), pattern_.outerIndexPtr());
  for (std::size_t j = 0; j < nn; ++j)
    for (int c = 0; c < 3; ++c) {
      int k = outer[3 * j + c];
      for (int i : nbrs[j])
        for (int r = 0; r < 3; ++r) pattern_.innerIndexPtr()[k++] = 3 * i + r;
    }
  std::fill(pattern_.valuePtr(), pattern_.valuePtr() + outer.back(), 0.0);

  auto slot = [&](int row_node, int col_node, int c) {
    const auto& v = nbrs[col_node];
    const auto pos = std::lower_bound(v.begin(), v.end(), row_node) - v.begin();
    return outer[3 * col_node + c] + 3 * static_cast<int>(pos);
  };
  elem_slots_.resize(mesh_.tets.size());
  for (std::size_t e = 0; e < mesh_.tets.size(); ++e)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 3; ++c) elem_slots_[e][(a * 4 + b) * 3 + c] = slot(mesh_.tets[e][a], mesh_.tets[e][b], c);
  tri_slots_.resize(cavity_.size());
  for (std::size_t e = 0; e < cavity_.size(); ++e)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) tri_slots_[e][(a * 3 + b) * 3 + c] = slot(cavity_[e][a], cavity_[e][b], c);
  diag_slots_.resize(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < nn; ++j)
    for (int c = 0; c < 3; ++c) diag_slots_[3 * j + c] = slot(static_cast<int>(j), static_cast<int>(j), c) + c;
  for (Eigen::Index col = 0; col < n; ++col)
    for (int k = outer[col]; k < outer[col + 1]; ++k) {
      const int row = pattern_.innerIndexPtr()[k];
      if (is_fixed_[row] || is_fixed_[col]) fixed_value_slots_.push_back(k);
      if (row == col && is_fixed_[row]) fixed_diag_slots_.push_back(k);
    }
}

double LVModel::beat_time(double t) const {
  if (params_.period > 0.0) {
    const double r = std::fmod(t, params_.period);
    return r < 0.0 ? r + params_.period : r;
  }
  return t;
}

void LVModel::assemble_impl(const VectorXd& u, double p, double t, VectorXd& R, SpMat* K, bool with_active) const {
  const Eigen::Index n = n_dofs();
  if (u.size() != n) throw ValidationError("lv model: displacement size mismatch");
  R = VectorXd::Zero(n);
  double* val = K ? K->valuePtr() : nullptr;
  if (K) std::fill(val, val + K->nonZeros(), 0.0);
  const bool active = with_active && !params_.t_a.empty();
  const double tb = beat_time(t);

  for (std::size_t e = 0; e < mesh_.tets.size(); ++e) {
    const auto& tet = mesh_.tets[e];
    const auto& el = elems_[e];
    Mat3 F = Mat3::Identity();
    for (int a = 0; a < 4; ++a) F += u.segment<3>(3 * tet[a]) * el.dN.row(a);
    if (!(F.determinant() > 0.0)) throw InvertedElementError("inverted element " + std::to_string(e));
    const Mat3 C = F.transpose() * F;
    StressTangent st = passive_stress(C, mesh_.fibers[e], params_.law);
    if (active) {
      const auto act = active_stress(tb, params_.t_a[e], C, mesh_.fibers[e], params_.active);
      st.S += act.S;
      st.D += act.D;
    }
    const Mat3 P = F * st.S;
    std::array<Eigen::Matrix<double, 6, 3>, 4> B;
    for (int a = 0; a < 4; ++a) {
      const Vec3 g = el.dN.row(a).transpose();
      R.segment<3>(3 * tet[a]) += el.volume * P * g;
      if (K) B[a] = strain_matrix(F, g);
    }
    if (!K) continue;
    for (int a = 0; a < 4; ++a) {
      const Vec3 ga = el.dN.row(a).transpose();
      const Eigen::Matrix<double, 3, 6> BtD = B[a].transpose() * st.D;
      for (int b = 0; b < 4; ++b) {
        const Vec3 gb = el.dN.row(b).transpose();
        Mat3 Kab = BtD * B[b];
        Kab.diagonal().array() += ga.dot(st.S * gb);
        Kab *= el.volume;
        for (int c = 0; c < 3; ++c) {
          double* col = val + elem_slots_[e][(a * 4 + b) * 3 + c];
          for (int r = 0; r < 3; ++r) col[r] += Kab(r, c);
        }
      }
    }
  }

  for (const auto& s : springs_) {
    R.segment<3>(3 * s.node) += s.k * u.segment<3>(3 * s.node);
    if (K)
      for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) val[diag_slots_[3 * s.node + c] - c + r] += s.k(r, c);
  }

  if (p != 0.0) {
    for (std::size_t e = 0; e < cavity_.size(); ++e) {
      const auto& tri = cavity_[e];
      std::array<Vec3, 3> x;
      for (int a = 0; a < 3; ++a) x[a] = mesh_.nodes[tri[a]] + u.segment<3>(3 * tri[a]);
      const Vec3 av = 0.5 * (x[1] - x[0]).cross(x[2] - x[0]);
      for (int a = 0; a < 3; ++a) R.segment<3>(3 * tri[a]) -= p / 3.0 * av;
      if (!K) continue;
      for (int b = 0; b < 3; ++b) {
        const Mat3 dA = 0.5 * skew(x[(b + 2) % 3] - x[(b + 1) % 3]);
        for (int a = 0; a < 3; ++a)
          for (int c = 0; c < 3; ++c) {
            double* col = val + tri_slots_[e][(a * 3 + b) * 3 + c];
            for (int r = 0; r < 3; ++r) col[r] -= p / 3.0 * dA(r, c);
          }
      }
    }
  }
}

void LVModel::constrain(SpMat& K) const {
  double* val = K.valuePtr();
  for (int k : fixed_value_slots_) val[k] = 0.0;
  for (int k : fixed_diag_slots_) val[k] = 1.0;
}

void LVModel::constrain(VectorXd& v) const {
  for (int d : params_.fixed_dofs) v(d) = 0.0;
}

VectorXd LVModel::residual(const VectorXd& u, double p, double t, bool raw) const {
  VectorXd R;
  assemble_impl(u, p, t, R, nullptr, true);
  if (!raw) constrain(R);
  return R;
}

void LVModel::assemble(const VectorXd& u, double p, double t, VectorXd& R, SpMat& K) const {
  K = pattern_;
  assemble_impl(u, p, t, R, &K, true);
  constrain(R);
  constrain(K);
}

double LVModel::cavity_volume(const VectorXd& u) const {
  double V = 0.0;
  for (const auto& tri : cavity_) {
    const Vec3 x0 = mesh_.nodes[tri[0]] + u.segment<3>(3 * tri[0]);
    const Vec3 x1 = mesh_.nodes[tri[1]] + u.segment<3>(3 * tri[1]);
    const Vec3 x2 = mesh_.nodes[tri[2]] + u.segment<3>(3 * tri[2]);
    V += x0.dot(x1.cross(x2));
  }
  return V / 6.0;
}

VectorXd LVModel::volume_gradient(const VectorXd& u) const {
  VectorXd b = VectorXd::Zero(n_dofs());
  for (const auto& tri : cavity_) {
    std::array<Vec3, 3> x;
    for (int a = 0; a < 3; ++a) x[a] = mesh_.nodes[tri[a]] + u.segment<3>(3 * tri[a]);
    for (int a = 0; a < 3; ++a) b.segment<3>(3 * tri[a]) += x[(a + 1) % 3].cross(x[(a + 2) % 3]) / 6.0;
  }
  constrain(b);
  return b;
}

VectorXd LVModel::pressure_column(const VectorXd& u) const {
  VectorXd col = VectorXd::Zero(n_dofs());
  for (const auto& tri : cavity_) {
    std::array<Vec3, 3> x;
    for (int a = 0; a < 3; ++a) x[a] = mesh_.nodes[tri[a]] + u.segment<3>(3 * tri[a]);
    const Vec3 av = 0.5 * (x[1] - x[0]).cross(x[2] - x[0]);
    for (int a = 0; a < 3; ++a) col.segment<3>(3 * tri[a]) += av / 3.0;
  }
  constrain(col);
  return col;
}

GeneralizedAlpha GeneralizedAlpha::from_rho_inf(double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("generalised-alpha: rho_inf must lie in [0, 1]");
  GeneralizedAlpha g;
  g.alpha_m = (2.0 * r - 1.0) / (r + 1.0);
  g.alpha_f = r / (r + 1.0);
  g.gamma = 0.5 - g.alpha_m + g.alpha_f;
  g.beta = 0.25 * (1.0 - g.alpha_m + g.alpha_f) * (1.0 - g.alpha_m + g.alpha_f);
  return g;
}

FEState rest_state(const LVModel& model) {
  FEState s;
  s.u = s.v = s.a = VectorXd::Zero(model.n_dofs());
  return s;
}

DynamicSolid::DynamicSolid(const LVModel& model, DynamicsParams dyn)
    : model_(model), dyn_(dyn), ga_(GeneralizedAlpha::from_rho_inf(dyn.rho_inf)) {
  if (!(dyn_.rho0 > 0.0)) throw ValidationError("dynamics: rho0 must be positive");
  if (!(dyn_.beta_mass >= 0.0) || !(dyn_.beta_stiff >= 0.0))
    throw ValidationError("dynamics: Rayleigh coefficients must be non-negative");
  mass_ = dyn_.rho0 * model_.mass_unit_;
  damping_ = dyn_.beta_stiff * model_.K0_;
  for (Eigen::Index d = 0; d < model_.n_dofs(); ++d)
    damping_.valuePtr()[model_.diag_slots_[d]] += dyn_.beta_mass * mass_(d);
}

void DynamicSolid::assemble(const FEState& prev, double dt, const VectorXd& u, double p, VectorXd& R, SpMat& K,
                            VectorXd& dR_dp) const {
  if (!(dt > 0.0)) throw DomainError("dynamics: dt must be positive");
  const double t = prev.time + dt;
  if (!dyn_.enabled) {
    model_.assemble(u, p, t, R, K);
    dR_dp = -model_.pressure_column(u);
    return;
  }
  const auto& g = ga_;
  const VectorXd a_new = (u - prev.u - dt * prev.v - dt * dt * (0.5 - g.beta) * prev.a) / (g.beta * dt * dt);
  const VectorXd v_new = prev.v + dt * ((1.0 - g.gamma) * prev.a + g.gamma * a_new);
  const VectorXd a_m = (1.0 - g.alpha_m) * a_new + g.alpha_m * prev.a;
  const VectorXd v_f = (1.0 - g.alpha_f) * v_new + g.alpha_f * prev.v;
  const VectorXd u_f = (1.0 - g.alpha_f) * u + g.alpha_f * prev.u;
  const double p_f = (1.0 - g.alpha_f) * p + g.alpha_f * prev.p;
  const double t_f = prev.time + (1.0 - g.alpha_f) * dt;

  K = model_.pattern_;
  model_.assemble_impl(u_f, p_f, t_f, R, &K, true);
  R += mass_.cwiseProduct(a_m) + damping_ * v_f;
  const double cm = (1.0 - g.alpha_m) / (g.beta * dt * dt);
  const double cc = (1.0 - g.alpha_f) * g.gamma / (g.beta * dt);
  double* val = K.valuePtr();
  const double* dval = damping_.valuePtr();
  for (Eigen::Index k = 0; k < K.nonZeros(); ++k) val[k] = (1.0 - g.alpha_f) * val[k] + cc * dval[k];
  for (Eigen::Index d = 0; d < model_.n_dofs(); ++d) val[model_.diag_slots_[d]] += cm * mass_(d);
  dR_dp = -(1.0 - g.alpha_f) * model_.pressure_column(u_f);
  model_.constrain(R);
  model_.constrain(K);
}

VectorXd DynamicSolid::residual(const FEState& prev, double dt, const VectorXd& u, double p) const {
  if (!(dt > 0.0)) throw DomainError("dynamics: dt must be positive");
  const double t = prev.time + dt;
  if (!dyn_.enabled) return model_.residual(u, p, t);
  const auto& g = ga_;
  const VectorXd a_new = (u - prev.u - dt * prev.v - dt * dt * (0.5 - g.beta) * prev.a) / (g.beta * dt * dt);
  const VectorXd v_new = prev.v + dt * ((1.0 - g.gamma) * prev.a + g.gamma * a_new);
  const VectorXd a_m = (1.0 - g.alpha_m) * a_new + g.alpha_m * prev.a;
  const VectorXd v_f = (1.0 - g.alpha_f) * v_new + g.alpha_f * prev.v;
  const VectorXd u_f = (1.0 - g.alpha_f) * u + g.alpha_f * prev.u;
  const double p_f = (1.0 - g.alpha_f) * p + g.alpha_f * prev.p;
  VectorXd R = model_.residual(u_f, p_f, prev.time + (1.0 - g.alpha_f) * dt, true);
  R += mass_.cwiseProduct(a_m) + damping_ * v_f;
  model_.constrain(R);
  return R;
}

FEState DynamicSolid::advance(const FEState& prev, double dt, const VectorXd& u, double p) const {
  if (!(dt > 0.0)) throw DomainError("dynamics: dt must be positive");
  FEState s;
  s.u = u;
  s.time = prev.time + dt;
  s.p = p;
  if (!dyn_.enabled) {
    s.v = (u - prev.u) / dt;
    s.a = VectorXd::Zero(u.size());
    return s;
  }
  const auto& g = ga_;
  s.a = (u - prev.u - dt * prev.v - dt * dt * (0.5 - g.beta) * prev.a) / (g.beta * dt * dt);
  s.v = prev.v + dt * ((1.0 - g.gamma) * prev.a + g.gamma * s.a);
  return s;
}

StaticSolveReport solve_static(const LVModel& model, VectorXd& u, double p, double t, double tol, int max_iter) {
  StaticSolveReport rep;
  Eigen::SparseLU<SpMat> lu;
  VectorXd R;
  SpMat K;
  for (int k = 0; k <= max_iter; ++k) {
    model.assemble(u, p, t, R, K);
    rep.residuals.push_back(R.norm());
    if (!std::isfinite(rep.residuals.back())) throw NewtonDivergence("static solve: non-finite residual");
    if (rep.residuals.back() < tol) {
      rep.iterations = k;
      return rep;
    }
    if (k == max_iter) break;
    if (k == 0) lu.analyzePattern(K);
    lu.factorize(K);
    if (lu.info() != Eigen::Success) throw LinearSolveError("static solve: factorization failed");
    const VectorXd du = lu.solve(R);
    // Halve steps that would invert an element or overflow the exponential law.
    double alpha = 1.0;
    for (int cut = 0;; ++cut) {
      bool ok = false;
      try {
        ok = std::isfinite(model.residual(u - alpha * du, p, t).norm());
      } catch (const InvertedElementError&) {
        if (cut == 10) throw;
      }
      if (ok) break;
      if (cut == 10) throw NewtonDivergence("static solve: no admissible step");
      alpha *= 0.5;
    }
    u -= alpha * du;
  }
  throw NewtonDivergence("static solve: residual " + std::to_string(rep.residuals.back()) + " after " +
                         std::to_string(max_iter) + " iterations");
}

}  // namespace cvcouple::cardiofe
