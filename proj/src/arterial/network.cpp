#include "cvcouple/arterial/network.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numbers>
#include <set>

#include "cvcouple/errors.hpp"

namespace cvcouple::arterial {

namespace {

constexpr double kFrictionZeta = 9.0;
constexpr double kQref = 1e-6;
// Measured AB2 + upwind DG limits: advective c dt / (h_e / (p+1)^2) ~ 0.76 (p=1) to 0.98 (p=3);
// lagged visco-elastic D dt / (h_e / (2p+1))^2 ~ 0.19. The viscous bound uses 0.3 * cfl.
constexpr double kViscousPerCfl = 0.3;

double vertex_value(const std::vector<double>& v, double x, double L, int ne, const char* what,
                    const std::string& id) {
  if (v.size() == 1) return v[0];
  if (v.size() != static_cast<std::size_t>(ne) + 1)
    throw ValidationError("segment '" + id + "': " + what + " needs 1 or n_elems+1 values");
  const double s = std::clamp(x / L * ne, 0.0, static_cast<double>(ne));
  const int e = std::min(static_cast<int>(s), ne - 1);
  const double w = s - e;
  return (1.0 - w) * v[e] + w * v[e + 1];
}

void require_positive(const std::vector<double>& v, const char* what, const std::string& id,
                      bool allow_zero = false) {
  if (v.empty()) throw ValidationError("segment '" + id + "': missing " + what);
  for (double x : v)
    if (!std::isfinite(x) || (allow_zero ? x < 0.0 : x <= 0.0))
      throw ValidationError("segment '" + id + "': " + what + " must be " +
                            (allow_zero ? "non-negative" : "positive"));
}

std::uint64_t fnv(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

// Area at which the backward characteristic u - 4c matches W2 and A u = Q.
double inlet_area_for_flow(double Q, double W2, double A_guess, const PointParams& p) {
  double A = A_guess;
  for (int it = 0; it < 60; ++it) {
    const double c = wave_speed(A, p);
    const double f = Q / A - 4.0 * c - W2;
    const double df = -Q / (A * A) - c / A;
    double dA = -f / df;
    while (A + dA <= 0.0) dA *= 0.5;
    A += dA;
    if (std::abs(dA) <= 1e-13 * A) {
      const double c1 = wave_speed(A, p);
      return A - (Q / A - 4.0 * c1 - W2) / (-Q / (A * A) - c1 / A);
    }
  }
  throw SolverBlowup("inlet flow boundary: characteristic solve did not converge");
}

}  // namespace

double stenosis_factor(double x, const Stenosis& s) {
  const double d = x - s.center;
  if (std::abs(d) >= 0.5 * s.width) return 1.0;
  const double depth = 1.0 - (1.0 - s.severity) * (1.0 - s.severity);
  return 1.0 - depth * 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * d / s.width));
}

double stenosis_factor_slope(double x, const Stenosis& s) {
  const double d = x - s.center;
  if (std::abs(d) >= 0.5 * s.width) return 0.0;
  const double depth = 1.0 - (1.0 - s.severity) * (1.0 - s.severity);
  return depth * 0.5 * std::sin(2.0 * std::numbers::pi * d / s.width) * 2.0 * std::numbers::pi /
         s.width;
}

VesselSegment apply_stenosis_profile(const VesselSegment& segment, double severity, double center,
                                     double width) {
  if (!(severity > 0.0 && severity < 1.0))
    throw ValidationError("stenosis severity must lie in (0, 1)");
  if (!(width > 0.0)) throw ValidationError("stenosis width must be positive");
  if (center - 0.5 * width < 0.0 || center + 0.5 * width > segment.length)
    throw ValidationError("stenosis taper must lie inside segment '" + segment.id + "'");
  VesselSegment out = segment;
  out.stenosis = Stenosis{severity, center, width};
  return out;
}

Network::Network(NetworkDescription desc) : desc_(std::move(desc)), ref_(desc_.order) { build(); }

Network build_network(const NetworkDescription& desc) { return Network(desc); }

void Network::build() {
  if (desc_.segments.empty()) throw TopologyError("network has no segments");
  if (!(desc_.cfl > 0.0)) throw ValidationError("cfl must be positive");
  if (desc_.coriolis != 1.0)
    std::cerr << "warning: Coriolis coefficient " << desc_.coriolis
              << " ignored; the flat-profile system uses 1\n";

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < desc_.segments.size(); ++i) {
    const auto& s = desc_.segments[i];
    if (s.id.empty()) throw ValidationError("segment with empty id");
    if (!index.emplace(s.id, i).second) throw ValidationError("duplicate segment id '" + s.id + "'");
  }
  auto find = [&](const std::string& id, const std::string& ctx) {
    auto it = index.find(id);
    if (it == index.end()) throw TopologyError(ctx + " references unknown segment '" + id + "'");
    return it->second;
  };

  const int nn = ref_.n_nodes;
  const int nq = ref_.n_quad();
  segs_.assign(desc_.segments.size(), Seg{});
  for (std::size_t i = 0; i < desc_.segments.size(); ++i) {
    const auto& d = desc_.segments[i];
    if (!(d.length > 0.0)) throw ValidationError("segment '" + d.id + "': length must be positive");
    if (d.n_elems < 1) throw ValidationError("segment '" + d.id + "': n_elems must be >= 1");
    require_positive(d.A0, "A0", d.id);
    require_positive(d.E, "E", d.id);
    require_positive(d.h, "h", d.id);
    if (!d.gamma_wall.empty()) require_positive(d.gamma_wall, "gamma_wall", d.id, true);
    if (!(d.rho > 0.0)) throw ValidationError("segment '" + d.id + "': rho must be positive");
    if (!(d.mu >= 0.0)) throw ValidationError("segment '" + d.id + "': mu must be non-negative");
    if (d.stenosis) {
      const auto& st = *d.stenosis;
      apply_stenosis_profile(d, st.severity, st.center, st.width);  // validates
    }

    Seg& s = segs_[i];
    s.ne = d.n_elems;
    s.he = d.length / d.n_elems;
    s.p_ext = d.p_ext;
    s.rho = d.rho;
    s.kr = 2.0 * (kFrictionZeta + 2.0) * std::numbers::pi * d.mu / d.rho;
    const std::size_t n = static_cast<std::size_t>(s.ne) * nn;
    s.x.resize(n);
    s.A0.resize(n);
    s.sqA0.resize(n);
    s.K.resize(n);
    s.G.resize(n);
    for (int e = 0; e < s.ne; ++e) {
      const double xl = d.length * e / s.ne;
      const double xr = d.length * (e + 1) / s.ne;
      for (int j = 0; j < nn; ++j) {
        double x;
        if (j == 0)
          x = xl;
        else if (j == nn - 1)
          x = xr;
        else
          x = xl + 0.5 * (ref_.nodes[j] + 1.0) * (xr - xl);
        const std::size_t k = static_cast<std::size_t>(e) * nn + j;
        s.x[k] = x;
        double a0 = vertex_value(d.A0, x, d.length, s.ne, "A0", d.id);
        if (d.stenosis) a0 *= stenosis_factor(x, *d.stenosis);
        s.A0[k] = a0;
        s.sqA0[k] = std::sqrt(a0);
        s.K[k] = stiffness_from_wall(vertex_value(d.E, x, d.length, s.ne, "E", d.id),
                                     vertex_value(d.h, x, d.length, s.ne, "h", d.id));
        s.G[k] = d.gamma_wall.empty()
                     ? 0.0
                     : vertex_value(d.gamma_wall, x, d.length, s.ne, "gamma_wall", d.id);
      }
    }
    const std::size_t m = static_cast<std::size_t>(s.ne) * nq;
    s.A0q.assign(m, 0.0);
    s.Kq.assign(m, 0.0);
    s.Gq.assign(m, 0.0);
    s.sqA0q.resize(m);
    for (int e = 0; e < s.ne; ++e)
      for (int q = 0; q < nq; ++q) {
        const std::size_t iq = static_cast<std::size_t>(e) * nq + q;
        for (int j = 0; j < nn; ++j) {
          const double ph = ref_.phi[q * nn + j];
          const std::size_t k = static_cast<std::size_t>(e) * nn + j;
          s.A0q[iq] += ph * s.A0[k];
          s.Kq[iq] += ph * s.K[k];
          s.Gq[iq] += ph * s.G[k];
        }
        s.sqA0q[iq] = std::sqrt(s.A0q[iq]);
      }
  }

  // Topology: every end connected exactly once.
  std::vector<int> prox_used(segs_.size(), 0), dist_used(segs_.size(), 0);
  if (!desc_.inlet) throw TopologyError("network has no inlet");
  inlet_seg_ = find(desc_.inlet->segment, "inlet");
  segs_[inlet_seg_].inlet = true;
  prox_used[inlet_seg_]++;
  junctions_.clear();
  for (std::size_t j = 0; j < desc_.junctions.size(); ++j) {
    const auto& js = desc_.junctions[j];
    if (js.daughters.empty())
      throw TopologyError("junction at '" + js.parent + "' has no daughters");
    JunctionTopo t;
    t.parent = find(js.parent, "junction");
    dist_used[t.parent]++;
    segs_[t.parent].dist_junction = static_cast<int>(j);
    for (const auto& dname : js.daughters) {
      const std::size_t di = find(dname, "junction");
      prox_used[di]++;
      segs_[di].prox_junction = static_cast<int>(j);
      t.daughters.push_back(di);
    }
    junctions_.push_back(std::move(t));
  }
  terminal_seg_.clear();
  for (std::size_t k = 0; k < desc_.terminals.size(); ++k) {
    const auto& t = desc_.terminals[k];
    const std::size_t si = find(t.segment, "terminal");
    if (!(t.Z >= 0.0) || !(t.R > 0.0) || !(t.C > 0.0))
      throw ValidationError("terminal on '" + t.segment + "': need Z >= 0, R > 0, C > 0");
    dist_used[si]++;
    segs_[si].terminal = static_cast<int>(k);
    terminal_seg_.push_back(si);
  }
  for (std::size_t i = 0; i < segs_.size(); ++i) {
    const auto& id = desc_.segments[i].id;
    if (prox_used[i] == 0)
      throw TopologyError("segment '" + id + "': proximal end has no inlet or junction");
    if (dist_used[i] == 0)
      throw TopologyError("segment '" + id + "': distal end has no junction or terminal");
    if (prox_used[i] > 1) throw TopologyError("segment '" + id + "': proximal end connected twice");
    if (dist_used[i] > 1) throw TopologyError("segment '" + id + "': distal end connected twice");
  }
  // Reachability from the inlet rules out detached cycles.
  std::vector<char> seen(segs_.size(), 0);
  std::vector<std::size_t> stack{inlet_seg_};
  while (!stack.empty()) {
    const std::size_t s = stack.back();
    stack.pop_back();
    if (seen[s]) continue;
    seen[s] = 1;
    if (segs_[s].dist_junction >= 0)
      for (std::size_t d : junctions_[segs_[s].dist_junction].daughters) stack.push_back(d);
  }
  for (std::size_t i = 0; i < segs_.size(); ++i)
    if (!seen[i])
      throw TopologyError("segment '" + desc_.segments[i].id + "' is not reachable from the inlet");

  std::uint64_t key = 1469598103934665603ull;
  key = fnv(key, &desc_.order, sizeof desc_.order);
  for (std::size_t i = 0; i < segs_.size(); ++i) {
    key = fnv(key, desc_.segments[i].id.data(), desc_.segments[i].id.size());
    key = fnv(key, &segs_[i].ne, sizeof segs_[i].ne);
  }
  for (const auto& j : junctions_) {
    key = fnv(key, &j.parent, sizeof j.parent);
    for (auto d : j.daughters) key = fnv(key, &d, sizeof d);
  }
  for (auto t : terminal_seg_) key = fnv(key, &t, sizeof t);
  topology_key_ = key;

  state_.assign(segs_.size(), SegmentState{});
  rhs_.assign(segs_.size(), {});
  for (std::size_t i = 0; i < segs_.size(); ++i) {
    const std::size_t n = segs_[i].A0.size();
    state_[i].A = segs_[i].A0;
    state_[i].u.assign(n, 0.0);
    state_[i].dA_dt.assign(n, 0.0);
    state_[i].rhs_prev.assign(2 * n, 0.0);
    rhs_[i].assign(2 * n, 0.0);
  }
  pc_.clear();
  for (const auto& t : desc_.terminals) pc_.push_back(t.p_c0.value_or(t.p_out));
  terminal_q_.assign(desc_.terminals.size(), 0.0);
  junction_res_.assign(junctions_.size(), 0.0);
  left_bc_.assign(segs_.size(), BoundaryState{});
  right_bc_.assign(segs_.size(), BoundaryState{});
  time_ = 0.0;
  has_history_ = false;
}

std::size_t Network::segment_index(const std::string& id) const {
  for (std::size_t i = 0; i < desc_.segments.size(); ++i)
    if (desc_.segments[i].id == id) return i;
  throw TopologyError("unknown segment '" + id + "'");
}

PointParams Network::params_at(const Seg& s, std::size_t node) const {
  return PointParams{s.A0[node], s.K[node], s.G[node], s.p_ext, s.rho};
}

PointParams Network::node_params(std::size_t seg, std::size_t node) const {
  return params_at(segs_.at(seg), node);
}

std::vector<double> Network::node_positions(std::size_t seg) const { return segs_.at(seg).x; }

void Network::set_inlet(InletMode mode, Waveform w) {
  desc_.inlet->mode = mode;
  desc_.inlet->waveform = std::move(w);
}

void Network::set_segment_state(std::size_t seg, const std::vector<double>& A,
                                const std::vector<double>& u) {
  auto& st = state_.at(seg);
  if (A.size() != st.A.size() || u.size() != st.u.size())
    throw StateError("set_segment_state: field size mismatch");
  st.A = A;
  st.u = u;
  std::fill(st.dA_dt.begin(), st.dA_dt.end(), 0.0);
  has_history_ = false;
}

double Network::max_stable_dt() const {
  const int p = ref_.order;
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < segs_.size(); ++i) {
    const Seg& s = segs_[i];
    const double dx = s.he / ((p + 1) * (p + 1));
    const double dxv = s.he / (2 * p + 1);
    const auto& st = state_[i];
    for (std::size_t k = 0; k < s.A0.size(); ++k) {
      const double A = st.A[k];
      if (!(A > 0.0)) return 0.0;
      const double c = std::sqrt(s.K[k] * std::sqrt(A) / (2.0 * s.rho * s.A0[k]));
      dt = std::min(dt, desc_.cfl * dx / (std::abs(st.u[k]) + c));
      if (s.G[k] > 0.0) {
        const double D = s.G[k] * std::sqrt(A) / (s.rho * s.A0[k]);
        dt = std::min(dt, kViscousPerCfl * desc_.cfl * dxv * dxv / D);
      }
    }
  }
  return dt;
}

Network::BoundaryState Network::inlet_state(double value, InletMode mode) const {
  const Seg& s = segs_[inlet_seg_];
  const auto& st = state_[inlet_seg_];
  const PointParams pp = params_at(s, 0);
  const double W2 = st.u[0] - 4.0 * wave_speed(st.A[0], pp);
  if (mode == InletMode::prescribed_pressure) {
    const double A = area_from_pressure(value, pp);
    return {A, W2 + 4.0 * wave_speed(A, pp)};
  }
  const double A = inlet_area_for_flow(value, W2, st.A[0], pp);
  return {A, value / A};
}

double Network::inlet_pressure_for_flow(double Q) const {
  const auto bs = inlet_state(Q, InletMode::prescribed_flow);
  return elastic_pressure(bs.A, params_at(segs_[inlet_seg_], 0));
}

double Network::inlet_pressure() const {
  const auto& st = state_[inlet_seg_];
  return elastic_pressure(st.A[0], params_at(segs_[inlet_seg_], 0));
}

std::vector<EndState> solve_junction(const std::vector<JunctionEnd>& ends) {
  const std::size_t n = ends.size();
  if (n < 2) throw JunctionError("junction needs at least two ends");
  std::vector<double> W(n), A(n), u(n), c(n);
  double cref = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& e = ends[k];
    W[k] = e.u + e.sign * 4.0 * wave_speed(e.A, e.params);
    A[k] = e.A;
    cref = std::max(cref, wave_speed(e.A, e.params));
  }
  const double rho = ends[0].params.rho;
  Eigen::MatrixXd J(n, n);
  Eigen::VectorXd F(n);
  double res = 0.0;
  bool stagnated = false;
  for (int it = 0; it <= 50; ++it) {
    for (std::size_t k = 0; k < n; ++k) {
      c[k] = wave_speed(A[k], ends[k].params);
      u[k] = W[k] - ends[k].sign * 4.0 * c[k];
    }
    // Mass: sum sign * A u = 0. Total pressure continuity against the parent.
    F(0) = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      F(0) += ends[k].sign * A[k] * u[k];
      J(0, k) = ends[k].sign * u[k] - c[k];
    }
    const double H0 = elastic_pressure(A[0], ends[0].params) + 0.5 * rho * u[0] * u[0];
    auto dH = [&](std::size_t k) {
      const auto& p = ends[k].params;
      const double dP = p.K / (2.0 * p.A0 * std::sqrt(A[k]));
      const double du = -ends[k].sign * c[k] / A[k];
      return dP + rho * u[k] * du;
    };
    const double dH0 = dH(0);
    for (std::size_t k = 1; k < n; ++k) {
      const double Hk = elastic_pressure(A[k], ends[k].params) + 0.5 * rho * u[k] * u[k];
      F(k) = H0 - Hk;
      J.row(k).setZero();
      J(k, 0) = dH0;
      J(k, k) = -dH(k);
    }
    const double qscale = std::max(std::abs(A[0] * u[0]), kQref);
    res = std::abs(F(0)) / qscale;
    for (std::size_t k = 1; k < n; ++k) res = std::max(res, std::abs(F(k)) / (rho * cref * cref));
    if (res < 1e-12 || stagnated) {
      if (res > 1e-10) break;
      std::vector<EndState> out(n);
      for (std::size_t k = 0; k < n; ++k) out[k] = {A[k], u[k]};
      return out;
    }
    if (it == 50) break;
    Eigen::VectorXd dA = J.partialPivLu().solve(-F);
    double lam = 1.0;
    for (std::size_t k = 0; k < n; ++k)
      while (A[k] + lam * dA(k) <= 0.0) lam *= 0.5;
    stagnated = true;
    for (std::size_t k = 0; k < n; ++k) {
      A[k] += lam * dA(k);
      if (std::abs(lam * dA(k)) > 1e-14 * A[k]) stagnated = false;
    }
  }
  throw JunctionError("junction Newton did not converge in 50 iterations, scaled residual " +
                      std::to_string(res));
}

TerminalUpdate terminal_rcr(const TerminalRCR& t, double p_c, double A_end, double u_end,
                            const PointParams& pp, double dt) {
  const double W1 = u_end + 4.0 * wave_speed(A_end, pp);
  double A = A_end;
  bool ok = false;
  for (int it = 0; it < 60; ++it) {
    const double c = wave_speed(A, pp);
    const double u = W1 - 4.0 * c;
    const double g = elastic_pressure(A, pp) - t.Z * A * u - p_c;
    const double dg = pp.K / (2.0 * pp.A0 * std::sqrt(A)) - t.Z * u + t.Z * c;
    double dA = -g / dg;
    while (A + dA <= 0.0) dA *= 0.5;
    A += dA;
    if (std::abs(dA) <= 1e-13 * A) {
      ok = true;
      const double c1 = wave_speed(A, pp);
      const double u1 = W1 - 4.0 * c1;
      A -= (elastic_pressure(A, pp) - t.Z * A * u1 - p_c) /
           (pp.K / (2.0 * pp.A0 * std::sqrt(A)) - t.Z * u1 + t.Z * c1);
      break;
    }
  }
  if (!ok) throw SolverBlowup("terminal boundary: characteristic solve did not converge");
  const double u = W1 - 4.0 * wave_speed(A, pp);
  const double Q = A * u;
  const double pc = (p_c + dt / t.C * (Q + t.p_out / t.R)) / (1.0 + dt / (t.R * t.C));
  return {A, u, pc};
}

void Network::update_junction(std::size_t j) {
  const auto& topo = junctions_[j];
  std::vector<JunctionEnd> ends;
  ends.reserve(topo.daughters.size() + 1);
  {
    const Seg& s = segs_[topo.parent];
    const std::size_t last = s.A0.size() - 1;
    ends.push_back({state_[topo.parent].A[last], state_[topo.parent].u[last], params_at(s, last), 1});
  }
  for (auto d : topo.daughters)
    ends.push_back({state_[d].A[0], state_[d].u[0], params_at(segs_[d], 0), -1});
  const auto sol = arterial::solve_junction(ends);
  right_bc_[topo.parent] = {sol[0].A, sol[0].u};
  double qd = 0.0;
  for (std::size_t k = 0; k < topo.daughters.size(); ++k) {
    left_bc_[topo.daughters[k]] = {sol[k + 1].A, sol[k + 1].u};
    qd += sol[k + 1].A * sol[k + 1].u;
  }
  const double qp = sol[0].A * sol[0].u;
  junction_res_[j] = std::abs(qp - qd) / std::max(std::abs(qp), kQref);
  max_junction_res_ = std::max(max_junction_res_, junction_res_[j]);
}

void Network::compute_boundaries(double t) {
  const auto& in = *desc_.inlet;
  const double value = in.mode == InletMode::coupled_valve ? coupled_inflow_ : in.waveform(t);
  left_bc_[inlet_seg_] = inlet_state(value, in.mode);
  for (std::size_t j = 0; j < junctions_.size(); ++j) update_junction(j);
}

void Network::compute_rhs(std::size_t i, std::vector<double>& out) {
  const Seg& s = segs_[i];
  const auto& st = state_[i];
  const int nn = ref_.n_nodes;
  const int nq = ref_.n_quad();
  const int ne = s.ne;
  const double rho = s.rho;

  // Interface fluxes, index e is the left face of element e.
  flux1_.resize(ne + 1);
  flux2_.resize(ne + 1);
  auto boundary_flux = [&](const BoundaryState& b, std::size_t node, int f) {
    const PointParams pp = params_at(s, node);
    flux1_[f] = b.A * b.u;
    flux2_[f] = 0.5 * b.u * b.u + elastic_pressure(b.A, pp) / rho;
  };
  boundary_flux(left_bc_[i], 0, 0);
  for (int f = 1; f < ne; ++f) {
    const std::size_t l = static_cast<std::size_t>(f) * nn - 1;
    const std::size_t r = l + 1;
    const PointParams pp = params_at(s, l);
    const double cL = std::sqrt(s.K[l] * std::sqrt(st.A[l]) / (2.0 * rho * s.A0[l]));
    const double cR = std::sqrt(s.K[r] * std::sqrt(st.A[r]) / (2.0 * rho * s.A0[r]));
    const double W1 = st.u[l] + 4.0 * cL;
    const double W2 = st.u[r] - 4.0 * cR;
    const double us = 0.5 * (W1 + W2);
    const double cs = 0.125 * (W1 - W2);
    if (!(cs > 0.0)) throw SolverBlowup("non-physical interface state in segment '" +
                                        desc_.segments[i].id + "'");
    const double As = area_from_wave_speed(cs, pp);
    double P = elastic_pressure(As, pp);
    if (s.G[l] > 0.0)
      P += s.G[l] * 0.5 * (st.dA_dt[l] + st.dA_dt[r]) / (s.A0[l] * std::sqrt(As));
    flux1_[f] = As * us;
    flux2_[f] = 0.5 * us * us + P / rho;
  }
  if (s.terminal >= 0 || s.dist_junction >= 0) {
    boundary_flux(right_bc_[i], s.A0.size() - 1, ne);
  }

  const std::size_t n = s.A0.size();
  double r1[4], r2[4];
  for (int e = 0; e < ne; ++e) {
    const std::size_t b = static_cast<std::size_t>(e) * nn;
    for (int j = 0; j < nn; ++j) r1[j] = r2[j] = 0.0;
    for (int q = 0; q < nq; ++q) {
      const double* ph = &ref_.phi[q * nn];
      const double* dph = &ref_.dphi[q * nn];
      double A = 0, u = 0, Ad = 0;
      for (int j = 0; j < nn; ++j) {
        A += ph[j] * st.A[b + j];
        u += ph[j] * st.u[b + j];
        Ad += ph[j] * st.dA_dt[b + j];
      }
      if (!(A > 0.0)) throw SolverBlowup("non-positive area in segment '" + desc_.segments[i].id + "'");
      const std::size_t iq = static_cast<std::size_t>(e) * nq + q;
      const double sqA = std::sqrt(A);
      double P = s.p_ext + s.Kq[iq] * (sqA - s.sqA0q[iq]) / s.A0q[iq];
      if (s.Gq[iq] > 0.0) P += s.Gq[iq] * Ad / (s.A0q[iq] * sqA);
      const double w = ref_.quad.weights[q];
      const double F1 = A * u;
      const double F2 = 0.5 * u * u + P / rho;
      const double S2 = -s.kr * u / A * 0.5 * s.he;
      for (int j = 0; j < nn; ++j) {
        r1[j] += w * F1 * dph[j];
        r2[j] += w * (F2 * dph[j] + S2 * ph[j]);
      }
    }
    r1[0] += flux1_[e];
    r2[0] += flux2_[e];
    r1[nn - 1] -= flux1_[e + 1];
    r2[nn - 1] -= flux2_[e + 1];
    const double sc = 2.0 / s.he;
    for (int j = 0; j < nn; ++j) {
      double a = 0.0, v = 0.0;
      for (int k = 0; k < nn; ++k) {
        a += ref_.mass_inv[j * nn + k] * r1[k];
        v += ref_.mass_inv[j * nn + k] * r2[k];
      }
      out[b + j] = sc * a;
      out[n + b + j] = sc * v;
    }
  }
}

void Network::step(double dt) {
  if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
  const double lim = max_stable_dt();
  if (dt > lim * (1.0 + 1e-12))
    throw StabilityError("dt1D = " + std::to_string(dt) + " s exceeds the stability bound " +
                         std::to_string(lim) + " s");
  compute_boundaries(time_);
  std::vector<TerminalUpdate> tu(terminal_seg_.size());
  for (std::size_t k = 0; k < terminal_seg_.size(); ++k) {
    const std::size_t si = terminal_seg_[k];
    const std::size_t last = segs_[si].A0.size() - 1;
    tu[k] = terminal_rcr(desc_.terminals[k], pc_[k], state_[si].A[last], state_[si].u[last],
                         params_at(segs_[si], last), dt);
    right_bc_[si] = {tu[k].A, tu[k].u};
    terminal_q_[k] = tu[k].A * tu[k].u;
  }
  for (std::size_t i = 0; i < segs_.size(); ++i) compute_rhs(i, rhs_[i]);

  const double r = has_history_ ? dt / dt_prev_ : 0.0;
  const double c0 = has_history_ ? 1.0 + 0.5 * r : 1.0;
  const double c1 = has_history_ ? -0.5 * r : 0.0;
  for (std::size_t i = 0; i < segs_.size(); ++i) {
    auto& st = state_[i];
    const std::size_t n = st.A.size();
    const auto& L = rhs_[i];
    for (std::size_t k = 0; k < n; ++k) {
      const double dA = dt * (c0 * L[k] + c1 * st.rhs_prev[k]);
      const double An = st.A[k] + dA;
      st.u[k] += dt * (c0 * L[n + k] + c1 * st.rhs_prev[n + k]);
      st.dA_dt[k] = (An - st.A[k]) / dt;
      st.A[k] = An;
      if (!(An > 0.0) || !std::isfinite(st.u[k]))
        throw SolverBlowup("segment '" + desc_.segments[i].id + "' left the admissible state at t = " +
                           std::to_string(time_ + dt) + " s");
    }
    st.rhs_prev = L;
  }
  for (std::size_t k = 0; k < tu.size(); ++k) pc_[k] = tu[k].p_c;
  has_history_ = true;
  dt_prev_ = dt;
  time_ += dt;
  for (auto& st : state_) st.time = time_;
}

NetworkState Network::snapshot() const {
  NetworkState s;
  s.segments = state_;
  s.terminal_pc = pc_;
  s.time = time_;
  s.has_history = has_history_;
  s.dt_prev = dt_prev_;
  s.coupled_inflow = coupled_inflow_;
  s.topology_key = topology_key_;
  return s;
}

void Network::restore(const NetworkState& s) {
  if (s.topology_key != topology_key_ || s.segments.size() != state_.size() ||
      s.terminal_pc.size() != pc_.size())
    throw StateError("snapshot belongs to a different network topology");
  for (std::size_t i = 0; i < state_.size(); ++i) {
    const auto& g = s.segments[i];
    const std::size_t n = state_[i].A.size();
    if (g.A.size() != n || g.u.size() != n || g.dA_dt.size() != n || g.rhs_prev.size() != 2 * n)
      throw StateError("snapshot field sizes do not match the network");
  }
  state_ = s.segments;
  pc_ = s.terminal_pc;
  time_ = s.time;
  has_history_ = s.has_history;
  dt_prev_ = s.dt_prev;
  coupled_inflow_ = s.coupled_inflow;
}

ProbeResult Network::probe(std::size_t seg, double x) const {
  const Seg& s = segs_.at(seg);
  const double L = desc_.segments[seg].length;
  if (!(x >= 0.0 && x <= L)) throw DomainError("probe position outside segment");
  const int nn = ref_.n_nodes;
  int e = std::min(static_cast<int>(x / s.he), s.ne - 1);
  const double xl = L * e / s.ne;
  const double xr = L * (e + 1) / s.ne;
  double xi = 2.0 * (x - xl) / (xr - xl) - 1.0;
  if (x == xl) xi = -1.0;
  if (x == xr) xi = 1.0;
  xi = std::clamp(xi, -1.0, 1.0);
  double ph[4];
  ref_.eval(xi, ph);
  const auto& st = state_[seg];
  const std::size_t b = static_cast<std::size_t>(e) * nn;
  double A = 0, u = 0, Ad = 0, A0 = 0, K = 0, G = 0;
  for (int j = 0; j < nn; ++j) {
    A += ph[j] * st.A[b + j];
    u += ph[j] * st.u[b + j];
    Ad += ph[j] * st.dA_dt[b + j];
    A0 += ph[j] * s.A0[b + j];
    K += ph[j] * s.K[b + j];
    G += ph[j] * s.G[b + j];
  }
  const PointParams pp{A0, K, G, s.p_ext, s.rho};
  return {tube_pressure(A, Ad, pp), A * u, A};
}

PeriodicInitReport init_periodic(Network& net, const Waveform& inlet, int n_cycles, double period,
                                 double dt, double tolerance) {
  if (n_cycles < 1) throw ConfigError("init_periodic: n_cycles must be >= 1");
  if (!(period > 0.0) || !(dt > 0.0)) throw ConfigError("init_periodic: period and dt must be positive");
  const double ratio = period / dt;
  const long steps = std::lround(ratio);
  if (std::abs(ratio - steps) > 1e-9 * ratio)
    throw ConfigError("init_periodic: period must be an integer multiple of dt");
  net.set_inlet(net.description().inlet->mode, inlet);
  const std::size_t in = net.segment_index(net.description().inlet->segment);
  std::vector<double> prev, cur;
  PeriodicInitReport rep;
  for (int c = 0; c < n_cycles; ++c) {
    prev.swap(cur);
    cur.clear();
    cur.reserve(steps);
    for (long k = 0; k < steps; ++k) {
      net.step(dt);
      cur.push_back(net.probe(in, 0.0).P);
    }
    rep.cycles = c + 1;
    const auto [mn, mx] = std::minmax_element(cur.begin(), cur.end());
    rep.pulse_pressure = *mx - *mn;
    rep.drift = 0.0;
    if (prev.size() == cur.size())
      for (std::size_t k = 0; k < cur.size(); ++k) rep.drift = std::max(rep.drift, std::abs(cur[k] - prev[k]));
    if (tolerance > 0.0 && !prev.empty() && rep.drift <= tolerance * rep.pulse_pressure) break;
  }
  rep.state = net.snapshot();
  return rep;
}

}  // namespace cvcouple::arterial
