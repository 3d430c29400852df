#pragma once

#include <functional>
#include <json.hpp>

#include "cvcouple/arterial/network.hpp"
#include "cvcouple/valves/valve.hpp"

namespace cvcouple::coupling {

struct CirculationParams {
  valves::ValveParams aortic;
  valves::ValveParams mitral;
  double p_atrial = 1100.0;  // Pa, constant preload behind the mitral valve
  double dt1D = 1e-4;        // s
};

struct CirculationState {
  arterial::NetworkState network;
  valves::ValveState aortic;
  valves::ValveState mitral;
};

struct VcsEvaluation {
  double p = 0.0;
  double inflow = 0.0;   // integral of mitral flow over the step, m^3
  double outflow = 0.0;  // integral of aortic flow over the step, m^3
  bool isovolumetric = false;
  double V_cs = 0.0;
};

/// Finite-difference increment for the compliance derivative: |p| 2^-26, or `floor` when |p| < 1 Pa.
double compliance_step(double p, double floor = 1e-3);

/// Forward difference (V(p + eps) - V(p)) / eps with eps = compliance_step(p, floor).
double fd_compliance(const std::function<double(double)>& V, double p, double V_at_p, double floor = 1e-3);

/// Valves and arterial network seen from the cavity. Each trial pressure replays the whole 3D step
/// from a snapshot in dt1D substeps, so repeated evaluations are deterministic.
class CirculationAdapter {
 public:
  /// The network inlet is switched to coupled-valve mode. Throws ValidationError on bad valve data.
  CirculationAdapter(arterial::Network& net, CirculationParams params, valves::ValveState aortic,
                     valves::ValveState mitral);

  const CirculationParams& params() const { return params_; }
  arterial::Network& network() { return net_; }
  const arterial::Network& network() const { return net_; }
  const valves::ValveState& aortic() const { return aortic_; }
  const valves::ValveState& mitral() const { return mitral_; }

  /// Snapshots the circulation for a step of length dt3D. Throws ConfigError unless dt3D is an
  /// integer multiple of dt1D.
  void begin_step(double dt3D);
  /// Restores the snapshot and advances the circulation with the cavity held at p_trial. The
  /// advanced state stays live until the next evaluation or commit. With both valves at the floor
  /// for the whole step, V_cs = V_start.
  VcsEvaluation evaluate(double p_trial, double V_start);
  /// (V_cs(p + eps) - V_cs(p)) / eps. Leaves the state advanced at p + eps.
  double compliance_derivative(double p, double V_start, double V_cs_at_p, double eps_floor = 1e-3);
  /// Keeps the circulation advanced at p, replaying the step if the last evaluation used another pressure.
  void commit(double p, double V_start);

  const VcsEvaluation& last() const { return last_; }
  CirculationState state() const;
  void set_state(const CirculationState& s);

 private:
  arterial::Network& net_;
  CirculationParams params_;
  valves::ValveState aortic_, mitral_;
  CirculationState snap_;
  double dt3D_ = 0.0;
  long substeps_ = 0;
  bool in_step_ = false;
  VcsEvaluation last_;
};

nlohmann::json to_json(const CirculationState& s);
CirculationState circulation_state_from_json(const nlohmann::json& j);

}  // namespace cvcouple::coupling
