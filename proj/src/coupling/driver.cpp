#include "cvcouple/coupling/driver.hpp"

#include <cmath>
#include <sstream>

#include "cvcouple/errors.hpp"

namespace cvcouple::coupling {

using json = nlohmann::json;

void validate(const SolverConfig& c) {
  if (!(c.dt3D > 0.0) || !(c.dt1D > 0.0)) throw ConfigError("solver: dt3D and dt1D must be positive");
  const double ratio = c.dt3D / c.dt1D;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0)
    throw ConfigError("solver: dt3D must be an integer multiple of dt1D");
  if (!(c.newton_abs_tol > 0.0)) throw ConfigError("solver: newton_abs_tol must be positive");
  if (c.k_max < 1) throw ConfigError("solver: k_max must be >= 1");
  if (!(c.reference_compliance > 0.0)) throw ConfigError("solver: reference_compliance must be positive");
  if (!(c.eps_floor > 0.0)) throw ConfigError("solver: eps_floor must be positive");
  if (!(c.linear.rel_tol > 0.0)) throw ConfigError("solver: linear tolerance must be positive");
  if (c.max_halvings < 0) throw ConfigError("solver: max_halvings must be >= 0");
}

StepReport newton_timestep(CavityBackend& cavity, CirculationAdapter& circ, LinearSolver& solver,
                           const SolverConfig& cfg) {
  const double dt = cfg.dt3D;
  circ.begin_step(dt);
  StepReport rep;
  rep.V_start = cavity.volume(cavity.u());
  VectorXd u = cavity.predict(dt);
  double p = cavity.pressure();
  const double scale = 1.0 / cfg.reference_compliance;
  CavityLinearization lin;
  BlockSystem sys;
  // Backtracking state: last accepted iterate, its norm and the pending update.
  VectorXd u_acc, du;
  double p_acc = 0.0, dp = 0.0, norm_acc = INFINITY, lambda = 1.0;

  for (int k = 1; k <= cfg.k_max; ++k) {
    double norm = NAN, Rp = NAN;
    VcsEvaluation ev;
    try {
      cavity.linearize(dt, u, p, lin);
      ev = circ.evaluate(p, rep.V_start);
      Rp = lin.V - ev.V_cs;
      norm = std::sqrt(lin.R.squaredNorm() + (Rp * scale) * (Rp * scale));
    } catch (const InvertedElementError&) {
      if (!cfg.backtracking || k == 1) throw;
    }
    rep.residuals.push_back(norm);
    rep.iterations = k;
    if (cfg.backtracking && k > 1 && !(norm < norm_acc) && rep.halvings < cfg.max_halvings) {
      ++rep.halvings;
      lambda *= 0.5;
      u = u_acc + lambda * du;
      p = p_acc + lambda * dp;
      continue;
    }
    if (!std::isfinite(norm))
      throw NewtonDivergence("newton: non-finite residual at t = " + std::to_string(cavity.time() + dt));
    if (norm < cfg.newton_abs_tol) {
      cavity.commit(dt, u, p);
      circ.commit(p, rep.V_start);
      rep.p = p;
      rep.V = lin.V;
      rep.V_cs = ev.V_cs;
      rep.isovolumetric = ev.isovolumetric;
      rep.inflow = ev.inflow;
      rep.outflow = ev.outflow;
      return rep;
    }
    if (k == cfg.k_max) break;
    rep.compliance = ev.isovolumetric ? 0.0 : circ.compliance_derivative(p, rep.V_start, ev.V_cs, cfg.eps_floor);
    if (rep.compliance > 0.0) rep.positive_compliance = true;
    sys.K = lin.K;
    sys.a = lin.a;
    sys.b = lin.b;
    sys.c = -rep.compliance;
    sys.f = -lin.R;
    sys.g = -Rp;
    const SchurSolution x = schur_solve(sys, solver);
    rep.max_block_residual = std::max(rep.max_block_residual, block_residual(sys, x, scale));
    u_acc = u;
    p_acc = p;
    norm_acc = norm;
    du = x.du;
    dp = x.dp;
    lambda = 1.0;
    u += du;
    p += dp;
  }
  std::ostringstream msg;
  msg << "newton: no convergence within " << cfg.k_max << " assemblies at t = " << cavity.time() + dt
      << "; residuals:";
  for (double r : rep.residuals) msg << ' ' << r;
  throw NewtonDivergence(msg.str());
}

SimulationResult run_simulation(CavityBackend& cavity, CirculationAdapter& circ, const SolverConfig& cfg,
                                int n_cycles, double period, const std::vector<Probe>& probes,
                                const std::function<void(const StepReport&, const TraceRow&)>& on_step) {
  validate(cfg);
  if (n_cycles < 1) throw ConfigError("simulation: cycles must be >= 1");
  if (!(period > 0.0)) throw ConfigError("simulation: period must be positive");
  const double ratio = period / cfg.dt3D;
  const long per_cycle = std::lround(ratio);
  if (std::abs(ratio - per_cycle) > 1e-9 * ratio) throw ConfigError("simulation: period must be a multiple of dt3D");
  if (std::abs(circ.params().dt1D - cfg.dt1D) > 1e-15 * cfg.dt1D)
    throw ConfigError("simulation: circulation dt1D differs from the solver configuration");

  auto& net = circ.network();
  std::vector<std::size_t> probe_seg;
  SimulationResult res;
  for (const auto& pr : probes) {
    probe_seg.push_back(net.segment_index(pr.segment));
    res.probe_names.push_back(pr.name);
  }
  LinearSolver solver(cfg.linear);
  const long total = per_cycle * n_cycles;
  res.rows.reserve(static_cast<std::size_t>(total));
  double V_phase = NAN;
  double V_cycle = 0.0, net_inflow = 0.0, V_min = INFINITY, V_max = -INFINITY;
  for (long n = 0; n < total; ++n) {
    const StepReport rep = newton_timestep(cavity, circ, solver, cfg);
    if (n % per_cycle == 0) {
      V_cycle = rep.V_start;
      net_inflow = 0.0;
      V_min = INFINITY;
      V_max = -INFINITY;
    }
    net_inflow += rep.inflow - rep.outflow;
    V_min = std::min(V_min, rep.V);
    V_max = std::max(V_max, rep.V);
    if ((n + 1) % per_cycle == 0 && V_max > V_min)
      res.max_cycle_volume_imbalance =
          std::max(res.max_cycle_volume_imbalance, std::abs(rep.V - V_cycle - net_inflow) / (V_max - V_min));
    TraceRow row;
    row.t = cavity.time();
    row.p_lv = rep.p;
    row.V_lv = rep.V;
    row.xi_ao = circ.aortic().xi;
    row.Q_ao = circ.aortic().Q;
    row.xi_mi = circ.mitral().xi;
    row.Q_mi = circ.mitral().Q;
    row.iterations = rep.iterations;
    row.isovolumetric = rep.isovolumetric;
    for (std::size_t k = 0; k < probes.size(); ++k) {
      const auto pr = net.probe(probe_seg[k], probes[k].x);
      row.probes.insert(row.probes.end(), {pr.P, pr.Q, pr.A});
    }
    res.max_iterations = std::max(res.max_iterations, rep.iterations);
    res.max_block_residual = std::max(res.max_block_residual, rep.max_block_residual);
    res.max_coupling_mismatch = std::max(res.max_coupling_mismatch, std::abs(rep.V - rep.V_cs) / std::abs(rep.V));
    if (rep.positive_compliance) ++res.positive_compliance_steps;
    if (rep.isovolumetric) {
      if (std::isnan(V_phase)) V_phase = rep.V_start;
      res.max_isovolumetric_drift = std::max(res.max_isovolumetric_drift, std::abs(rep.V - V_phase) / V_phase);
    } else {
      V_phase = NAN;
    }
    if (on_step) on_step(rep, row);
    res.rows.push_back(std::move(row));
  }
  res.max_junction_residual = net.max_junction_residual();
  return res;
}

json checkpoint(const CavityBackend& cavity, const CirculationAdapter& circ) {
  return {{"format", "cvcouple-checkpoint"}, {"version", 1}, {"cavity", cavity.checkpoint()},
          {"circulation", to_json(circ.state())}};
}

void restore(CavityBackend& cavity, CirculationAdapter& circ, const json& j) {
  if (!j.is_object() || j.value("format", "") != "cvcouple-checkpoint")
    throw StateError("checkpoint: not a cvcouple checkpoint");
  cavity.restore(j.at("cavity"));
  circ.set_state(circulation_state_from_json(j.at("circulation")));
}

}  // namespace cvcouple::coupling
