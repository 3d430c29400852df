#pragma once

#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

#include "cvcouple/coupling/backend.hpp"
#include "cvcouple/coupling/circulation.hpp"
#include "cvcouple/coupling/linear_solver.hpp"

namespace cvcouple::coupling {

struct SolverConfig {
  double dt3D = 1e-3;            // s
  double dt1D = 1e-4;            // s
  double newton_abs_tol = 1e-6;  // on the scaled residual norm
  int k_max = 10;                // assemblies per step
  /// The volume residual enters the norm divided by this reference compliance, m^3/Pa.
  double reference_compliance = 1e-8;
  double eps_floor = 1e-3;  // Pa
  /// Halve the update while the residual norm grows; plain Newton when false.
  bool backtracking = false;
  int max_halvings = 6;
  LinearSolverConfig linear;
};

/// Throws ConfigError on non-positive steps or tolerances, k_max < 1, or dt3D not a multiple of dt1D.
void validate(const SolverConfig& c);

struct StepReport {
  int iterations = 0;              // assemblies
  std::vector<double> residuals;   // scaled norms, one per assembly
  double p = 0.0;
  double V = 0.0;
  double V_cs = 0.0;
  double V_start = 0.0;
  double inflow = 0.0;   // mitral volume over the step, m^3
  double outflow = 0.0;  // aortic volume over the step, m^3
  double compliance = 0.0;         // last C' = dV_cs/dp
  bool isovolumetric = false;
  bool positive_compliance = false; // C' > 0 seen during the step (non-physical V_CS(p))
  int halvings = 0;
  double max_block_residual = 0.0; // worst substituted Schur residual of the step
};

/// One coupled step of length cfg.dt3D from the backend's accepted state. Commits the cavity and
/// the circulation on success; throws NewtonDivergence with the residual history after k_max
/// assemblies.
StepReport newton_timestep(CavityBackend& cavity, CirculationAdapter& circ, LinearSolver& solver,
                           const SolverConfig& cfg);

struct Probe {
  std::string name;
  std::string segment;
  double x = 0.0;  // m from the proximal end
};

struct TraceRow {
  double t = 0.0;
  double p_lv = 0.0;
  double V_lv = 0.0;
  double xi_ao = 0.0, Q_ao = 0.0;
  double xi_mi = 0.0, Q_mi = 0.0;
  int iterations = 0;
  bool isovolumetric = false;
  std::vector<double> probes;  // P, Q, A per probe
};

struct SimulationResult {
  std::vector<std::string> probe_names;
  std::vector<TraceRow> rows;
  int max_iterations = 0;
  double max_isovolumetric_drift = 0.0;  // |V - V_start| / V_start over isovolumetric steps
  double max_block_residual = 0.0;
  double max_junction_residual = 0.0;
  double max_coupling_mismatch = 0.0;    // |V_heart - V_cs| / V_heart at convergence
  int positive_compliance_steps = 0;
  double max_cycle_volume_imbalance = 0.0;  // |dV - (mitral - aortic volume)| per cycle over its stroke volume
};

/// Advances n_cycles * period from the current state, recording one row per step. `on_step` runs
/// after every committed step.
SimulationResult run_simulation(CavityBackend& cavity, CirculationAdapter& circ, const SolverConfig& cfg,
                                int n_cycles, double period, const std::vector<Probe>& probes,
                                const std::function<void(const StepReport&, const TraceRow&)>& on_step = {});

/// Full coupled state; numbers are written in shortest round-trip form, so reloading is bit-exact.
nlohmann::json checkpoint(const CavityBackend& cavity, const CirculationAdapter& circ);
void restore(CavityBackend& cavity, CirculationAdapter& circ, const nlohmann::json& j);

}  // namespace cvcouple::coupling
