#include "cvcouple/coupling/circulation.hpp"

#include <cmath>

#include "cvcouple/errors.hpp"

namespace cvcouple::coupling {

using json = nlohmann::json;

// The floor replaces the relative step only near p = 0, where the relative rule degenerates.
double compliance_step(double p, double floor) { return std::abs(p) >= 1.0 ? std::abs(p) * std::ldexp(1.0, -26) : floor; }

CirculationAdapter::CirculationAdapter(arterial::Network& net, CirculationParams params, valves::ValveState aortic,
                                       valves::ValveState mitral)
    : net_(net), params_(params), aortic_(aortic), mitral_(mitral) {
  valves::validate(params_.aortic);
  valves::validate(params_.mitral);
  if (!(params_.dt1D > 0.0)) throw ConfigError("circulation: dt1D must be positive");
  if (!std::isfinite(params_.p_atrial)) throw ConfigError("circulation: atrial pressure must be finite");
  if (!net_.description().inlet) throw ConfigError("circulation: network has no inlet");
  net_.set_inlet(arterial::InletMode::coupled_valve, arterial::Waveform::constant(0.0));
}

void CirculationAdapter::begin_step(double dt3D) {
  const double ratio = dt3D / params_.dt1D;
  const long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - n) > 1e-9 * ratio)
    throw ConfigError("circulation: dt3D must be an integer multiple of dt1D");
  dt3D_ = dt3D;
  substeps_ = n;
  snap_ = state();
  in_step_ = true;
  last_ = {};
  last_.p = NAN;
}

VcsEvaluation CirculationAdapter::evaluate(double p_trial, double V_start) {
  if (!in_step_) throw StateError("circulation: evaluate outside a step");
  set_state(snap_);
  VcsEvaluation ev;
  ev.p = p_trial;
  bool closed = true;
  const double dt = params_.dt1D;
  const auto p_down = [this](double Q) { return net_.inlet_pressure_for_flow(Q); };
  for (long k = 0; k < substeps_; ++k) {
    aortic_ = valves::advance_valve_implicit(aortic_, p_trial, p_down, dt, params_.aortic);
    mitral_ = valves::advance_valve(mitral_, params_.p_atrial - p_trial, dt, params_.mitral);
    net_.set_coupled_inflow(aortic_.Q);
    net_.step(dt);
    ev.inflow += mitral_.Q * dt;
    ev.outflow += aortic_.Q * dt;
    closed = closed && aortic_.xi <= params_.aortic.xi_min && mitral_.xi <= params_.mitral.xi_min;
  }
  ev.isovolumetric = closed;
  ev.V_cs = closed ? V_start : V_start + ev.inflow - ev.outflow;
  last_ = ev;
  return ev;
}

double fd_compliance(const std::function<double(double)>& V, double p, double V_at_p, double floor) {
  const double eps = compliance_step(p, floor);
  return (V(p + eps) - V_at_p) / eps;
}

double CirculationAdapter::compliance_derivative(double p, double V_start, double V_cs_at_p, double eps_floor) {
  return fd_compliance([&](double q) { return evaluate(q, V_start).V_cs; }, p, V_cs_at_p, eps_floor);
}

void CirculationAdapter::commit(double p, double V_start) {
  if (!in_step_) throw StateError("circulation: commit outside a step");
  if (!(last_.p == p)) evaluate(p, V_start);
  in_step_ = false;
}

CirculationState CirculationAdapter::state() const { return {net_.snapshot(), aortic_, mitral_}; }

void CirculationAdapter::set_state(const CirculationState& s) {
  net_.restore(s.network);
  aortic_ = s.aortic;
  mitral_ = s.mitral;
}

namespace {

json segment_to_json(const arterial::SegmentState& s) {
  return {{"A", s.A}, {"u", s.u}, {"time", s.time}, {"dA_dt", s.dA_dt}, {"rhs_prev", s.rhs_prev}};
}

arterial::SegmentState segment_from_json(const json& j) {
  arterial::SegmentState s;
  s.A = j.at("A").get<std::vector<double>>();
  s.u = j.at("u").get<std::vector<double>>();
  s.time = j.at("time").get<double>();
  s.dA_dt = j.at("dA_dt").get<std::vector<double>>();
  s.rhs_prev = j.at("rhs_prev").get<std::vector<double>>();
  return s;
}

}  // namespace

json to_json(const CirculationState& s) {
  json segs = json::array();
  for (const auto& seg : s.network.segments) segs.push_back(segment_to_json(seg));
  return {{"network",
           {{"segments", segs},
            {"terminal_pc", s.network.terminal_pc},
            {"time", s.network.time},
            {"has_history", s.network.has_history},
            {"dt_prev", s.network.dt_prev},
            {"coupled_inflow", s.network.coupled_inflow},
            {"topology_key", s.network.topology_key}}},
          {"aortic", {{"xi", s.aortic.xi}, {"Q", s.aortic.Q}}},
          {"mitral", {{"xi", s.mitral.xi}, {"Q", s.mitral.Q}}}};
}

CirculationState circulation_state_from_json(const json& j) {
  try {
    CirculationState s;
    const auto& n = j.at("network");
    for (const auto& seg : n.at("segments")) s.network.segments.push_back(segment_from_json(seg));
    s.network.terminal_pc = n.at("terminal_pc").get<std::vector<double>>();
    s.network.time = n.at("time").get<double>();
    s.network.has_history = n.at("has_history").get<bool>();
    s.network.dt_prev = n.at("dt_prev").get<double>();
    s.network.coupled_inflow = n.at("coupled_inflow").get<double>();
    s.network.topology_key = n.at("topology_key").get<std::uint64_t>();
    s.aortic = {j.at("aortic").at("xi").get<double>(), j.at("aortic").at("Q").get<double>()};
    s.mitral = {j.at("mitral").at("xi").get<double>(), j.at("mitral").at("Q").get<double>()};
    return s;
  } catch (const json::exception& e) {
    throw StateError(std::string("checkpoint: malformed circulation state: ") + e.what());
  }
}

}  // namespace cvcouple::coupling
