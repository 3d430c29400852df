#include "cvcouple/scenarios/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cvcouple/arterial/network_json.hpp"
#include "cvcouple/arterial/tube_law.hpp"
#include "cvcouple/json_fields.hpp"
#include "cvcouple/scenarios/importer.hpp"

namespace cvcouple::scenarios {

using json = nlohmann::json;
using namespace cvcouple::jsonf;
namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_relative() ? base / p : p; }

cardiofe::LVGeometry parse_geometry(const json& j, const std::string& path) {
  check_keys(j, {"a_endo_m", "c_endo_m", "a_epi_m", "c_epi_m", "z_base_m", "element_size_m", "layers",
                 "helix_endo_deg", "helix_epi_deg"},
             path);
  cardiofe::LVGeometry g;
  g.a_endo = positive_or(j, "a_endo_m", g.a_endo, path);
  g.c_endo = positive_or(j, "c_endo_m", g.c_endo, path);
  g.a_epi = positive_or(j, "a_epi_m", g.a_epi, path);
  g.c_epi = positive_or(j, "c_epi_m", g.c_epi, path);
  if (j.contains("z_base_m")) {
    if (j.at("z_base_m").is_null())
      g.z_base.reset();
    else
      g.z_base = number(j, "z_base_m", path);
  }
  g.element_size = positive_or(j, "element_size_m", g.element_size, path);
  g.layers = integer_or(j, "layers", g.layers, path);
  if (g.layers < 0) throw ConfigError(join(path, "layers") + ": must be >= 0");
  g.helix_endo_deg = number_or(j, "helix_endo_deg", g.helix_endo_deg, path);
  g.helix_epi_deg = number_or(j, "helix_epi_deg", g.helix_epi_deg, path);
  return g;
}

cardiofe::PassiveLaw parse_passive(const json& j, const std::string& path) {
  const std::string law = string_or(j, "law", "fung", path);
  if (law == "fung") {
    check_keys(j, {"law", "kappa_Pa", "a_Pa", "b_ff", "b_ss", "b_nn", "b_fs", "b_fn", "b_ns"}, path);
    cardiofe::FungParams p;
    p.kappa = positive_or(j, "kappa_Pa", p.kappa, path);
    p.a = positive_or(j, "a_Pa", p.a, path);
    p.b_ff = non_negative_or(j, "b_ff", p.b_ff, path);
    p.b_ss = non_negative_or(j, "b_ss", p.b_ss, path);
    p.b_nn = non_negative_or(j, "b_nn", p.b_nn, path);
    p.b_fs = non_negative_or(j, "b_fs", p.b_fs, path);
    p.b_fn = non_negative_or(j, "b_fn", p.b_fn, path);
    p.b_ns = non_negative_or(j, "b_ns", p.b_ns, path);
    return cardiofe::PassiveLaw::fung(p);
  }
  if (law == "guccione") {
    check_keys(j, {"law", "kappa_Pa", "C_Pa", "b_f", "b_t", "b_fs"}, path);
    cardiofe::GuccioneParams p;
    p.kappa = positive_or(j, "kappa_Pa", p.kappa, path);
    p.C_guc = positive_or(j, "C_Pa", p.C_guc, path);
    p.b_f = non_negative_or(j, "b_f", p.b_f, path);
    p.b_t = non_negative_or(j, "b_t", p.b_t, path);
    p.b_fs = non_negative_or(j, "b_fs", p.b_fs, path);
    return cardiofe::PassiveLaw::guccione(p);
  }
  throw ConfigError(join(path, "law") + ": unknown law '" + law + "' (fung, guccione)");
}

cardiofe::ActiveParams parse_active(const json& j, const std::string& path) {
  check_keys(j, {"S_peak_Pa", "t_dur_s", "tau_c0_s", "tau_r_s", "ld", "ld_up_s", "lambda_0", "t_emd_s",
                 "sheet_fraction"},
             path);
  cardiofe::ActiveParams a;
  a.S_peak = non_negative_or(j, "S_peak_Pa", a.S_peak, path);
  a.t_dur = positive_or(j, "t_dur_s", a.t_dur, path);
  a.tau_c0 = positive_or(j, "tau_c0_s", a.tau_c0, path);
  a.tau_r = positive_or(j, "tau_r_s", a.tau_r, path);
  a.ld = non_negative_or(j, "ld", a.ld, path);
  a.ld_up = non_negative_or(j, "ld_up_s", a.ld_up, path);
  a.lambda_0 = positive_or(j, "lambda_0", a.lambda_0, path);
  a.t_emd = non_negative_or(j, "t_emd_s", a.t_emd, path);
  a.sheet_fraction = non_negative_or(j, "sheet_fraction", a.sheet_fraction, path);
  try {
    cardiofe::validate(a);
  } catch (const ValidationError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return a;
}

valves::ValveParams parse_valve(const json& j, const std::string& path, valves::ValveParams v) {
  check_keys(j, {"K_vo", "K_vc", "dP_open_Pa", "dP_close_Pa", "M_st", "M_rg", "A_ann_m2", "rho_kg_m3", "xi_min"},
             path);
  v.K_vo = positive_or(j, "K_vo", v.K_vo, path);
  v.K_vc = positive_or(j, "K_vc", v.K_vc, path);
  v.dP_open = number_or(j, "dP_open_Pa", v.dP_open, path);
  v.dP_close = number_or(j, "dP_close_Pa", v.dP_close, path);
  v.M_st = number_or(j, "M_st", v.M_st, path);
  v.M_rg = number_or(j, "M_rg", v.M_rg, path);
  v.A_ann = positive_or(j, "A_ann_m2", v.A_ann, path);
  v.rho = positive_or(j, "rho_kg_m3", v.rho, path);
  v.xi_min = positive_or(j, "xi_min", v.xi_min, path);
  try {
    valves::validate(v);
  } catch (const ValidationError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return v;
}

// Default valve parameters.
valves::ValveParams default_aortic() {
  valves::ValveParams v;
  v.K_vo = 2.0;
  v.K_vc = 1.2;
  v.A_ann = 4.5e-4;
  return v;
}

valves::ValveParams default_mitral() {
  valves::ValveParams v;
  v.K_vo = 0.2;
  v.K_vc = 0.2;
  v.A_ann = 5.0e-4;
  return v;
}

HeartConfig parse_heart(const json& j, const fs::path& base, const std::string& path) {
  check_keys(j, {"backend", "geometry", "mesh_file", "passive", "active", "activation", "springs", "dynamics",
                 "end_diastolic_pressure_Pa", "inflation_increments", "elastance"},
             path);
  HeartConfig h;
  const std::string backend = string_or(j, "backend", "fe", path);
  if (backend == "fe")
    h.backend = HeartConfig::Backend::fe;
  else if (backend == "elastance")
    h.backend = HeartConfig::Backend::elastance;
  else
    throw ConfigError(join(path, "backend") + ": unknown backend '" + backend + "' (fe, elastance)");

  if (j.contains("geometry")) h.geometry = parse_geometry(j.at("geometry"), join(path, "geometry"));
  if (j.contains("mesh_file")) {
    h.mesh_file = resolve(string(j, "mesh_file", path), base);
    if (!fs::exists(*h.mesh_file)) throw ConfigError(join(path, "mesh_file") + ": not found: " + h.mesh_file->string());
  }
  h.model.law = j.contains("passive") ? parse_passive(j.at("passive"), join(path, "passive"))
                                      : cardiofe::PassiveLaw::fung({});
  if (j.contains("active")) h.model.active = parse_active(j.at("active"), join(path, "active"));
  if (j.contains("activation")) {
    const auto& a = j.at("activation");
    const std::string p = join(path, "activation");
    check_keys(a, {"mode", "t0_s", "velocity_m_s"}, p);
    const std::string mode = string_or(a, "mode", "apex_to_base", p);
    if (mode == "uniform")
      h.activation.mode = cardiofe::ActivationSpec::Mode::uniform;
    else if (mode == "apex_to_base")
      h.activation.mode = cardiofe::ActivationSpec::Mode::apex_to_base;
    else
      throw ConfigError(join(p, "mode") + ": unknown mode '" + mode + "' (uniform, apex_to_base)");
    h.activation.t0 = number_or(a, "t0_s", 0.0, p);
    h.activation.velocity = positive_or(a, "velocity_m_s", h.activation.velocity, p);
  }
  if (j.contains("springs")) {
    const auto& s = j.at("springs");
    const std::string p = join(path, "springs");
    check_keys(s, {"k_base_Pa_per_m", "k_epi_Pa_per_m"}, p);
    h.model.springs.k_base = non_negative_or(s, "k_base_Pa_per_m", h.model.springs.k_base, p);
    h.model.springs.k_epi = non_negative_or(s, "k_epi_Pa_per_m", h.model.springs.k_epi, p);
  }
  if (j.contains("dynamics")) {
    const auto& d = j.at("dynamics");
    const std::string p = join(path, "dynamics");
    check_keys(d, {"enabled", "rho_kg_m3", "rho_inf", "beta_mass", "beta_stiff"}, p);
    h.dynamics.enabled = boolean_or(d, "enabled", true, p);
    h.dynamics.rho0 = positive_or(d, "rho_kg_m3", h.dynamics.rho0, p);
    h.dynamics.rho_inf = number_or(d, "rho_inf", h.dynamics.rho_inf, p);
    if (!(h.dynamics.rho_inf >= 0.0 && h.dynamics.rho_inf <= 1.0))
      throw ConfigError(join(p, "rho_inf") + ": must lie in [0, 1]");
    h.dynamics.beta_mass = non_negative_or(d, "beta_mass", h.dynamics.beta_mass, p);
    h.dynamics.beta_stiff = non_negative_or(d, "beta_stiff", h.dynamics.beta_stiff, p);
  }
  h.end_diastolic_pressure = non_negative_or(j, "end_diastolic_pressure_Pa", h.end_diastolic_pressure, path);
  h.inflation_increments = integer_or(j, "inflation_increments", h.inflation_increments, path);
  if (h.inflation_increments < 1) throw ConfigError(join(path, "inflation_increments") + ": must be >= 1");

  if (h.backend == HeartConfig::Backend::elastance) {
    const std::string p = join(path, "elastance");
    const auto& e = require(j, "elastance", path);
    check_keys(e, {"V0_m3", "p0_Pa", "E_Pa_per_m3"}, p);
    h.elastance.V0 = positive(e, "V0_m3", p);
    h.elastance.p0 = number_or(e, "p0_Pa", 0.0, p);
    h.elastance.E = arterial::waveform_from_json(require(e, "E_Pa_per_m3", p), base, join(p, "E_Pa_per_m3"));
    try {
      coupling::validate(h.elastance);
    } catch (const ValidationError& ex) {
      throw ConfigError(p + ": " + ex.what());
    }
  } else if (j.contains("elastance")) {
    throw ConfigError(join(path, "elastance") + ": only valid with backend 'elastance'");
  }
  return h;
}

coupling::SolverConfig parse_solver(const json& j, const std::string& path) {
  check_keys(j, {"dt3D_s", "dt1D_s", "newton_abs_tol", "k_max", "reference_compliance_m3_per_Pa", "eps_floor_Pa",
                 "backtracking", "max_halvings", "linear"},
             path);
  coupling::SolverConfig s;
  s.dt3D = positive_or(j, "dt3D_s", s.dt3D, path);
  s.dt1D = positive_or(j, "dt1D_s", s.dt1D, path);
  s.newton_abs_tol = positive_or(j, "newton_abs_tol", s.newton_abs_tol, path);
  s.k_max = integer_or(j, "k_max", s.k_max, path);
  s.reference_compliance = positive_or(j, "reference_compliance_m3_per_Pa", s.reference_compliance, path);
  s.eps_floor = positive_or(j, "eps_floor_Pa", s.eps_floor, path);
  s.backtracking = boolean_or(j, "backtracking", s.backtracking, path);
  s.max_halvings = integer_or(j, "max_halvings", s.max_halvings, path);
  if (j.contains("linear")) {
    const auto& l = j.at("linear");
    const std::string p = join(path, "linear");
    check_keys(l, {"kind", "rel_tol", "max_iter", "restart", "refactor_after"}, p);
    const std::string kind = string_or(l, "kind", "krylov", p);
    if (kind == "krylov")
      s.linear.kind = coupling::LinearSolverConfig::Kind::krylov;
    else if (kind == "direct")
      s.linear.kind = coupling::LinearSolverConfig::Kind::direct;
    else
      throw ConfigError(join(p, "kind") + ": unknown solver '" + kind + "' (krylov, direct)");
    s.linear.rel_tol = positive_or(l, "rel_tol", s.linear.rel_tol, p);
    s.linear.max_iter = integer_or(l, "max_iter", s.linear.max_iter, p);
    s.linear.restart = integer_or(l, "restart", s.linear.restart, p);
    s.linear.refactor_after = integer_or(l, "refactor_after", s.linear.refactor_after, p);
    if (s.linear.max_iter < 1 || s.linear.restart < 1 || s.linear.refactor_after < 0)
      throw ConfigError(p + ": iteration limits must be positive");
  }
  try {
    coupling::validate(s);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return s;
}

// Gamma from the wall viscosity phi for segments without an explicit coefficient.
void apply_wall_viscosity(arterial::NetworkDescription& d, double phi) {
  for (auto& s : d.segments) {
    if (!s.gamma_wall.empty()) continue;
    for (double h : s.h) s.gamma_wall.push_back(arterial::viscosity_from_wall(phi, h));
  }
}

const arterial::VesselSegment* find_segment(const arterial::NetworkDescription& d, const std::string& id) {
  for (const auto& s : d.segments)
    if (s.id == id) return &s;
  return nullptr;
}

void check_point(const CaseConfig& c, const std::string& label) {
  const std::string where = c.id + (label.empty() ? "" : " [" + label + "]");
  const double r = c.period / c.solver.dt3D;
  if (std::abs(r - std::round(r)) > 1e-9 * r)
    throw ConfigError(where + ": period_s must be an integer multiple of solver.dt3D_s");
  const double rp = c.period / c.solver.dt1D;
  if (std::abs(rp - std::round(rp)) > 1e-9 * rp)
    throw ConfigError(where + ": period_s must be an integer multiple of solver.dt1D_s");
  try {
    const arterial::Network net(c.network);
    if (c.solver.dt1D > net.max_stable_dt())
      throw ConfigError(where + ": solver.dt1D_s = " + std::to_string(c.solver.dt1D) +
                        " s exceeds the 1D stability bound " + std::to_string(net.max_stable_dt()) + " s");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where + ": circulation.network: " + e.what());
  }
}

std::string format_value(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

CaseConfig config_from_json(const json& j, const fs::path& base_dir) {
  check_keys(j, {"id", "description", "period_s", "cycles", "heart", "circulation", "solver", "probes", "metrics",
                 "sweeps", "output_dir"},
             "");
  CaseConfig c;
  c.source = j;
  c.id = string(j, "id", "");
  if (c.id.empty() || c.id.find_first_of("/\\ ") != std::string::npos)
    throw ConfigError("id: must be a non-empty name without spaces or path separators");
  c.description = string_or(j, "description", "", "");
  c.period = positive_or(j, "period_s", c.period, "");
  c.cycles = integer_or(j, "cycles", c.cycles, "");
  if (c.cycles < 1) throw ConfigError("cycles: must be >= 1");
  c.heart = parse_heart(j.value("heart", json::object()), base_dir, "heart");

  const auto& circ = require(j, "circulation", "");
  check_keys(circ, {"atrial_pressure_Pa", "aortic_valve", "mitral_valve", "wall_viscosity_Pa_s", "network",
                    "network_file", "network_import", "precycle"},
             "circulation");
  c.atrial_pressure = number_or(circ, "atrial_pressure_Pa", c.atrial_pressure, "circulation");
  c.aortic = circ.contains("aortic_valve")
                 ? parse_valve(circ.at("aortic_valve"), "circulation.aortic_valve", default_aortic())
                 : default_aortic();
  c.mitral = circ.contains("mitral_valve")
                 ? parse_valve(circ.at("mitral_valve"), "circulation.mitral_valve", default_mitral())
                 : default_mitral();
  const int sources = circ.contains("network") + circ.contains("network_file") + circ.contains("network_import");
  if (sources != 1)
    throw ConfigError("circulation: exactly one of 'network', 'network_file' or 'network_import' is required");
  if (circ.contains("network")) {
    c.network = arterial::network_from_json(circ.at("network"), base_dir, "circulation.network");
  } else if (circ.contains("network_file")) {
    const fs::path f = resolve(string(circ, "network_file", "circulation"), base_dir);
    if (!fs::exists(f)) throw ConfigError("circulation.network_file: not found: " + f.string());
    c.network = arterial::load_network(f);
  } else {
    const auto& im = circ.at("network_import");
    const std::string p = "circulation.network_import";
    check_keys(im, {"file", "format", "element_length_m"}, p);
    const fs::path f = resolve(string(im, "file", p), base_dir);
    if (!fs::exists(f)) throw ConfigError(join(p, "file") + ": not found: " + f.string());
    ImportOptions opt;
    opt.element_length = positive_or(im, "element_length_m", opt.element_length, p);
    c.network = import_network(f, string_or(im, "format", "pwdb", p), opt).network;
  }
  if (!c.network.inlet) throw ConfigError("circulation.network.inlet: missing");
  c.network.inlet->mode = arterial::InletMode::coupled_valve;
  if (circ.contains("wall_viscosity_Pa_s"))
    apply_wall_viscosity(c.network, non_negative_or(circ, "wall_viscosity_Pa_s", 0.0, "circulation"));

  c.precycle.inflow = arterial::Waveform::half_sine(3e-4, 0.3, c.period);
  if (circ.contains("precycle")) {
    const auto& p = circ.at("precycle");
    check_keys(p, {"max_cycles", "tolerance", "inflow"}, "circulation.precycle");
    c.precycle.max_cycles = integer_or(p, "max_cycles", c.precycle.max_cycles, "circulation.precycle");
    if (c.precycle.max_cycles < 0) throw ConfigError("circulation.precycle.max_cycles: must be >= 0");
    c.precycle.tolerance = positive_or(p, "tolerance", c.precycle.tolerance, "circulation.precycle");
    if (p.contains("inflow"))
      c.precycle.inflow = arterial::waveform_from_json(p.at("inflow"), base_dir, "circulation.precycle.inflow");
  }

  if (j.contains("solver")) c.solver = parse_solver(j.at("solver"), "solver");

  if (j.contains("probes")) {
    const auto& ps = j.at("probes");
    if (!ps.is_array()) throw ConfigError("probes: expected an array");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string p = "probes[" + std::to_string(i) + "]";
      check_keys(ps[i], {"name", "segment", "x_m"}, p);
      coupling::Probe pr;
      pr.name = string(ps[i], "name", p);
      pr.segment = string(ps[i], "segment", p);
      const auto* seg = find_segment(c.network, pr.segment);
      if (!seg) throw ConfigError(join(p, "segment") + ": unknown segment '" + pr.segment + "'");
      const auto& x = require(ps[i], "x_m", p);
      if (x.is_string() && x.get<std::string>() == "end")
        pr.x = seg->length;
      else
        pr.x = number(x, join(p, "x_m"));
      if (!(pr.x >= 0.0 && pr.x <= seg->length))
        throw ConfigError(join(p, "x_m") + ": must lie in [0, segment length] or be \"end\"");
      for (const auto& q : c.probes)
        if (q.name == pr.name) throw ConfigError(join(p, "name") + ": duplicate probe '" + pr.name + "'");
      c.probes.push_back(pr);
    }
  }
  const auto probe_by_name = [&](const std::string& name, const std::string& field) -> const coupling::Probe& {
    for (const auto& q : c.probes)
      if (q.name == name) return q;
    throw ConfigError(field + ": unknown probe '" + name + "'");
  };

  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    check_keys(m, {"root_probe", "distal_probe", "pwv"}, "metrics");
    c.metrics.root_probe = string_or(m, "root_probe", "", "metrics");
    c.metrics.distal_probe = string_or(m, "distal_probe", "", "metrics");
    if (!c.metrics.root_probe.empty()) probe_by_name(c.metrics.root_probe, "metrics.root_probe");
    if (!c.metrics.distal_probe.empty()) probe_by_name(c.metrics.distal_probe, "metrics.distal_probe");
    if (m.contains("pwv")) {
      const auto& w = m.at("pwv");
      check_keys(w, {"proximal", "distal", "distance_m"}, "metrics.pwv");
      c.metrics.pwv_proximal = string(w, "proximal", "metrics.pwv");
      c.metrics.pwv_distal = string(w, "distal", "metrics.pwv");
      const auto& a = probe_by_name(c.metrics.pwv_proximal, "metrics.pwv.proximal");
      const auto& b = probe_by_name(c.metrics.pwv_distal, "metrics.pwv.distal");
      if (w.contains("distance_m")) {
        c.metrics.pwv_distance = positive(w, "distance_m", "metrics.pwv");
      } else if (a.segment == b.segment && a.x != b.x) {
        c.metrics.pwv_distance = std::abs(b.x - a.x);
      } else {
        throw ConfigError("metrics.pwv.distance_m: required when the probes are on different segments");
      }
    }
  }

  if (j.contains("sweeps")) {
    const auto& ss = j.at("sweeps");
    if (!ss.is_array()) throw ConfigError("sweeps: expected an array");
    for (std::size_t i = 0; i < ss.size(); ++i) {
      const std::string p = "sweeps[" + std::to_string(i) + "]";
      check_keys(ss[i], {"parameter", "values"}, p);
      SweepSpec s{string(ss[i], "parameter", p), numbers(ss[i], "values", p)};
      with_parameter(c, s.parameter, s.values.front());  // rejects unknown parameters early
      c.sweeps.push_back(std::move(s));
    }
  }
  c.output_dir = resolve(string_or(j, "output_dir", "out", ""), base_dir);
  for (const auto& pt : expand_sweeps(c)) check_point(pt.config, pt.label == "base" ? "" : pt.label);
  return c;
}

CaseConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open case file: " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return config_from_json(j, file.parent_path());
}

CaseConfig with_parameter(const CaseConfig& c, const std::string& parameter, double value) {
  CaseConfig out = c;
  const std::string where = "sweeps: " + parameter + " = " + format_value(value);
  if (parameter == "E_Pa" || parameter == "E_scale") {
    if (!(value > 0.0)) throw ConfigError(where + ": must be positive");
    for (auto& s : out.network.segments)
      for (double& e : s.E) e = parameter == "E_Pa" ? value : e * value;
  } else if (parameter == "stenosis_severity") {
    if (!(value > 0.0 && value < 1.0)) throw ConfigError(where + ": must lie in (0, 1)");
    bool any = false;
    for (auto& s : out.network.segments) {
      if (!s.stenosis) continue;
      s.stenosis->severity = value;
      any = true;
    }
    if (!any) throw ConfigError(where + ": no segment carries a stenosis");
  } else if (parameter == "dt1D_s") {
    out.solver.dt1D = value;
  } else if (parameter == "dt3D_s") {
    out.solver.dt3D = value;
  } else if (parameter == "S_peak_Pa") {
    if (!(value >= 0.0)) throw ConfigError(where + ": must be non-negative");
    out.heart.model.active.S_peak = value;
  } else {
    throw ConfigError("sweeps: unknown parameter '" + parameter +
                      "' (E_Pa, E_scale, stenosis_severity, dt1D_s, dt3D_s, S_peak_Pa)");
  }
  if (parameter == "dt1D_s" || parameter == "dt3D_s") {
    try {
      coupling::validate(out.solver);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  out.sweeps.clear();
  return out;
}

std::vector<SweepPoint> expand_sweeps(const CaseConfig& c) {
  std::vector<SweepPoint> pts;
  if (c.sweeps.empty()) {
    CaseConfig base = c;
    base.sweeps.clear();
    pts.push_back({"base", std::move(base)});
    return pts;
  }
  for (const auto& s : c.sweeps)
    for (double v : s.values) pts.push_back({s.parameter + "=" + format_value(v), with_parameter(c, s.parameter, v)});
  return pts;
}

}  // namespace cvcouple::scenarios
