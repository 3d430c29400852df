#include "cvcouple/arterial/network_json.hpp"

#include <fstream>

#include "cvcouple/json_fields.hpp"

namespace cvcouple::arterial {

using json = nlohmann::json;
using namespace cvcouple::jsonf;

InletMode inlet_mode_from_string(const std::string& s, const std::string& path) {
  if (s == "prescribed_flow") return InletMode::prescribed_flow;
  if (s == "prescribed_pressure") return InletMode::prescribed_pressure;
  if (s == "coupled_valve") return InletMode::coupled_valve;
  throw ConfigError(path + ": unknown inlet mode '" + s +
                    "' (prescribed_flow, prescribed_pressure, coupled_valve)");
}

std::string to_string(InletMode m) {
  switch (m) {
    case InletMode::prescribed_flow: return "prescribed_flow";
    case InletMode::prescribed_pressure: return "prescribed_pressure";
    case InletMode::coupled_valve: return "coupled_valve";
  }
  return "";
}

Waveform waveform_from_json(const json& j, const std::filesystem::path& base_dir,
                            const std::string& path) {
  if (j.is_number()) return Waveform::constant(j.get<double>());
  if (j.is_string()) {
    std::filesystem::path f = j.get<std::string>();
    if (f.is_relative()) f = base_dir / f;
    return Waveform::from_csv(f.string(), false);
  }
  require_object(j, path);
  const std::string type = string(j, "type", path);
  if (type == "constant") {
    check_keys(j, {"type", "value"}, path);
    return Waveform::constant(number(j, "value", path));
  }
  if (type == "half_sine") {
    check_keys(j, {"type", "peak", "duration", "period"}, path);
    return Waveform::half_sine(number(j, "peak", path), positive(j, "duration", path),
                               positive(j, "period", path));
  }
  if (type == "table") {
    check_keys(j, {"type", "t", "values", "periodic"}, path);
    return Waveform::table(numbers(j, "t", path), numbers(j, "values", path),
                           boolean_or(j, "periodic", false, path));
  }
  if (type == "csv") {
    check_keys(j, {"type", "file", "periodic"}, path);
    std::filesystem::path f = string(j, "file", path);
    if (f.is_relative()) f = base_dir / f;
    if (!std::filesystem::exists(f)) throw ConfigError(join(path, "file") + ": not found: " + f.string());
    return Waveform::from_csv(f.string(), boolean_or(j, "periodic", false, path));
  }
  throw ConfigError(join(path, "type") + ": unknown waveform type '" + type + "'");
}

json waveform_to_json(const Waveform& w) {
  switch (w.kind()) {
    case Waveform::Kind::constant: return {{"type", "constant"}, {"value", w.peak()}};
    case Waveform::Kind::half_sine:
      return {{"type", "half_sine"}, {"peak", w.peak()}, {"duration", w.duration()}, {"period", w.period()}};
    case Waveform::Kind::table:
      return {{"type", "table"}, {"t", w.times()}, {"values", w.values()}, {"periodic", w.periodic()}};
  }
  return {};
}

NetworkDescription network_from_json(const json& j, const std::filesystem::path& base_dir,
                                     const std::string& path) {
  check_keys(j, {"segments", "junctions", "terminals", "inlet", "rho", "mu", "order", "cfl", "coriolis"},
             path);
  NetworkDescription d;
  const double rho = positive_or(j, "rho", 1060.0, path);
  const double mu = non_negative_or(j, "mu", 4e-3, path);
  d.order = integer_or(j, "order", 1, path);
  if (d.order < 1 || d.order > 3) throw ConfigError(join(path, "order") + ": must be 1, 2 or 3");
  d.cfl = positive_or(j, "cfl", 0.5, path);
  d.coriolis = positive_or(j, "coriolis", 1.0, path);

  const auto& segs = require(j, "segments", path);
  const std::string sp = join(path, "segments");
  if (!segs.is_array() || segs.empty()) throw ConfigError(sp + ": expected a non-empty array");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string p = sp + "[" + std::to_string(i) + "]";
    const auto& s = segs[i];
    check_keys(s, {"id", "length_m", "n_elems", "A0_m2", "E_Pa", "h_m", "gamma_wall", "p_ext_Pa",
                   "stenosis"},
               p);
    VesselSegment v;
    v.id = string(s, "id", p);
    v.length = positive(s, "length_m", p);
    v.n_elems = integer_or(s, "n_elems", 4, p);
    if (v.n_elems < 1) throw ConfigError(join(p, "n_elems") + ": must be >= 1");
    auto positive_list = [&](const char* key) {
      auto vals = numbers(s, key, p);
      for (double x : vals)
        if (!(x > 0.0)) throw ConfigError(join(p, key) + ": must be positive");
      if (vals.size() != 1 && vals.size() != static_cast<std::size_t>(v.n_elems) + 1)
        throw ConfigError(join(p, key) + ": needs 1 or n_elems+1 values");
      return vals;
    };
    v.A0 = positive_list("A0_m2");
    v.E = positive_list("E_Pa");
    v.h = positive_list("h_m");
    if (s.contains("gamma_wall")) {
      v.gamma_wall = numbers(s, "gamma_wall", p);
      for (double x : v.gamma_wall)
        if (!(x >= 0.0)) throw ConfigError(join(p, "gamma_wall") + ": must be non-negative");
    }
    v.p_ext = number_or(s, "p_ext_Pa", 0.0, p);
    v.rho = rho;
    v.mu = mu;
    if (s.contains("stenosis")) {
      const auto& st = s.at("stenosis");
      const std::string q = join(p, "stenosis");
      check_keys(st, {"severity", "center_m", "width_m"}, q);
      const double sev = number(st, "severity", q);
      if (!(sev > 0.0 && sev < 1.0)) throw ConfigError(join(q, "severity") + ": must lie in (0, 1)");
      const double center = number_or(st, "center_m", 0.5 * v.length, q);
      const double width = positive_or(st, "width_m", 0.2 * v.length, q);
      try {
        v = apply_stenosis_profile(v, sev, center, width);
      } catch (const ValidationError& e) {
        throw ConfigError(q + ": " + e.what());
      }
    }
    d.segments.push_back(std::move(v));
  }

  if (j.contains("junctions")) {
    const auto& js = j.at("junctions");
    const std::string jp = join(path, "junctions");
    if (!js.is_array()) throw ConfigError(jp + ": expected an array");
    for (std::size_t i = 0; i < js.size(); ++i) {
      const std::string p = jp + "[" + std::to_string(i) + "]";
      check_keys(js[i], {"parent", "daughters"}, p);
      JunctionSpec jn;
      jn.parent = string(js[i], "parent", p);
      const auto& ds = require(js[i], "daughters", p);
      if (!ds.is_array() || ds.empty()) throw ConfigError(join(p, "daughters") + ": expected a non-empty array");
      for (const auto& dn : ds) {
        if (!dn.is_string()) throw ConfigError(join(p, "daughters") + ": expected segment ids");
        jn.daughters.push_back(dn.get<std::string>());
      }
      d.junctions.push_back(std::move(jn));
    }
  }

  const auto& ts = require(j, "terminals", path);
  const std::string tp = join(path, "terminals");
  if (!ts.is_array() || ts.empty()) throw ConfigError(tp + ": expected a non-empty array");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const std::string p = tp + "[" + std::to_string(i) + "]";
    check_keys(ts[i], {"segment", "Z", "R", "C", "p_out", "p_c0"}, p);
    TerminalRCR t;
    t.segment = string(ts[i], "segment", p);
    t.Z = non_negative_or(ts[i], "Z", 0.0, p);
    t.R = positive(ts[i], "R", p);
    t.C = positive(ts[i], "C", p);
    t.p_out = number_or(ts[i], "p_out", 0.0, p);
    if (ts[i].contains("p_c0")) t.p_c0 = number(ts[i], "p_c0", p);
    d.terminals.push_back(std::move(t));
  }

  const auto& in = require(j, "inlet", path);
  const std::string ip = join(path, "inlet");
  check_keys(in, {"segment", "mode", "waveform", "periodic"}, ip);
  InletSpec inlet;
  inlet.segment = string(in, "segment", ip);
  inlet.mode = inlet_mode_from_string(string_or(in, "mode", "prescribed_flow", ip), join(ip, "mode"));
  if (in.contains("waveform")) {
    const auto& w = in.at("waveform");
    if (w.is_string()) {
      std::filesystem::path f = w.get<std::string>();
      if (f.is_relative()) f = base_dir / f;
      if (!std::filesystem::exists(f))
        throw ConfigError(join(ip, "waveform") + ": not found: " + f.string());
      inlet.waveform = Waveform::from_csv(f.string(), boolean_or(in, "periodic", false, ip));
    } else {
      inlet.waveform = waveform_from_json(w, base_dir, join(ip, "waveform"));
    }
  } else if (inlet.mode != InletMode::coupled_valve) {
    throw ConfigError(join(ip, "waveform") + ": missing");
  }
  d.inlet = std::move(inlet);
  return d;
}

NetworkDescription load_network(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open network file: " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return network_from_json(j, file.parent_path(), "network");
}

json network_to_json(const NetworkDescription& d) {
  json j;
  const double rho = d.segments.empty() ? 1060.0 : d.segments.front().rho;
  const double mu = d.segments.empty() ? 4e-3 : d.segments.front().mu;
  j["rho"] = rho;
  j["mu"] = mu;
  j["order"] = d.order;
  j["cfl"] = d.cfl;
  j["coriolis"] = d.coriolis;
  auto scalar_or_list = [](const std::vector<double>& v) -> json {
    if (v.size() == 1) return v[0];
    return v;
  };
  j["segments"] = json::array();
  for (const auto& s : d.segments) {
    json o = {{"id", s.id},
              {"length_m", s.length},
              {"n_elems", s.n_elems},
              {"A0_m2", scalar_or_list(s.A0)},
              {"E_Pa", scalar_or_list(s.E)},
              {"h_m", scalar_or_list(s.h)},
              {"p_ext_Pa", s.p_ext}};
    if (!s.gamma_wall.empty()) o["gamma_wall"] = scalar_or_list(s.gamma_wall);
    if (s.stenosis)
      o["stenosis"] = {{"severity", s.stenosis->severity},
                       {"center_m", s.stenosis->center},
                       {"width_m", s.stenosis->width}};
    j["segments"].push_back(std::move(o));
  }
  j["junctions"] = json::array();
  for (const auto& jn : d.junctions) j["junctions"].push_back({{"parent", jn.parent}, {"daughters", jn.daughters}});
  j["terminals"] = json::array();
  for (const auto& t : d.terminals) {
    json o = {{"segment", t.segment}, {"Z", t.Z}, {"R", t.R}, {"C", t.C}, {"p_out", t.p_out}};
    if (t.p_c0) o["p_c0"] = *t.p_c0;
    j["terminals"].push_back(std::move(o));
  }
  if (d.inlet) {
    j["inlet"] = {{"segment", d.inlet->segment}, {"mode", to_string(d.inlet->mode)}};
    if (d.inlet->mode != InletMode::coupled_valve) j["inlet"]["waveform"] = waveform_to_json(d.inlet->waveform);
  }
  return j;
}

}  // namespace cvcouple::arterial
