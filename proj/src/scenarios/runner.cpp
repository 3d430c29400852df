#include "cvcouple/scenarios/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>

#include "cvcouple/arterial/network_json.hpp"
#include "cvcouple/cardiofe/mesh.hpp"
#include "cvcouple/coupling/backend.hpp"
#include "cvcouple/coupling/circulation.hpp"
#include "cvcouple/errors.hpp"
#include "cvcouple/scenarios/io.hpp"

namespace cvcouple::scenarios {

namespace fs = std::filesystem;
using json = nlohmann::json;

bool CaseResult::ok() const {
  return std::all_of(points.begin(), points.end(), [](const PointResult& p) { return p.ok; });
}

const PointResult& CaseResult::point(const std::string& label) const {
  for (const auto& p : points)
    if (p.label == label) return p;
  throw ConfigError("case " + id + ": no point '" + label + "'");
}

MetricColumns metric_columns(const CaseConfig& c) {
  MetricColumns m;
  const auto col = [](const std::string& probe) { return probe.empty() ? probe : probe + ".P"; };
  m.root_pressure = col(c.metrics.root_probe);
  m.distal_pressure = col(c.metrics.distal_probe);
  m.pwv_proximal = col(c.metrics.pwv_proximal);
  m.pwv_distal = col(c.metrics.pwv_distal);
  m.pwv_distance = c.metrics.pwv_distance;
  return m;
}

namespace {

std::mutex log_mutex;

void say(const RunOptions& opt, const std::string& msg) {
  if (!opt.log) return;
  std::lock_guard lock(log_mutex);
  *opt.log << msg << std::endl;
}

std::unique_ptr<coupling::CavityBackend> make_heart(const CaseConfig& c) {
  if (c.heart.backend == HeartConfig::Backend::elastance)
    return std::make_unique<coupling::ElastanceBackend>(c.heart.elastance);
  cardiofe::TetMesh mesh =
      c.heart.mesh_file ? cardiofe::read_mesh(*c.heart.mesh_file) : cardiofe::generate_idealized_lv(c.heart.geometry);
  cardiofe::LVModelParams model = c.heart.model;
  model.t_a = cardiofe::prescribe_activation(mesh, c.heart.activation);
  model.period = c.period;
  return std::make_unique<coupling::FECavity>(std::move(mesh), std::move(model), c.heart.dynamics);
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

json diagnostics_json(const coupling::SimulationResult& d) {
  return {{"max_iterations", d.max_iterations},
          {"max_isovolumetric_drift", d.max_isovolumetric_drift},
          {"max_block_residual", d.max_block_residual},
          {"max_junction_residual", d.max_junction_residual},
          {"max_coupling_mismatch", d.max_coupling_mismatch},
          {"positive_compliance_steps", d.positive_compliance_steps},
          {"max_cycle_volume_imbalance", d.max_cycle_volume_imbalance}};
}

json point_manifest(const CaseConfig& c, const PointResult& r, int threads) {
  return {{"case", c.id},
          {"point", r.label},
          {"description", c.description},
          {"config_sha256", config_hash({{"case", c.source}, {"point", r.label}})},
          {"case_config_sha256", config_hash(c.source)},
          {"versions", version_info()},
          {"started_utc", utc_now()},
          {"wall_time_s", r.wall_time},
          {"threads", threads},
          {"period_s", c.period},
          {"cycles", c.cycles},
          {"dt3D_s", c.solver.dt3D},
          {"dt1D_s", c.solver.dt1D},
          {"precycle", {{"cycles", r.precycle.cycles}, {"drift_Pa", r.precycle.drift},
                        {"pulse_pressure_Pa", r.precycle.pulse_pressure}}},
          {"diagnostics", diagnostics_json(r.diagnostics)},
          {"metric_columns", {{"root_pressure", metric_columns(c).root_pressure},
                              {"distal_pressure", metric_columns(c).distal_pressure},
                              {"pwv_proximal", metric_columns(c).pwv_proximal},
                              {"pwv_distal", metric_columns(c).pwv_distal},
                              {"pwv_distance_m", c.metrics.pwv_distance}}}};
}

int thread_count(const RunOptions& opt) {
  if (opt.threads > 0) return opt.threads;
  if (const char* env = std::getenv("CVCOUPLE_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) throw ConfigError("CVCOUPLE_THREADS must be a positive integer");
    return static_cast<int>(n);
  }
  return 1;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

PointResult run_point(const CaseConfig& cfg, const std::string& label, const RunOptions& opt, const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  CaseConfig c = cfg;
  if (opt.cycles) c.cycles = *opt.cycles;
  PointResult res;
  res.label = label;
  res.dir = dir;
  const std::string tag = "[" + c.id + "/" + label + "] ";

  arterial::NetworkDescription desc = c.network;
  desc.inlet->mode = arterial::InletMode::prescribed_flow;
  desc.inlet->waveform = c.precycle.inflow;
  arterial::Network net(desc);
  if (c.precycle.max_cycles > 0) {
    const auto pre =
        arterial::init_periodic(net, c.precycle.inflow, c.precycle.max_cycles, c.period, c.solver.dt1D, c.precycle.tolerance);
    res.precycle = {pre.cycles, pre.drift, pre.pulse_pressure};
    say(opt, tag + "precycle: " + std::to_string(pre.cycles) + " cycles, inlet drift " + fmt(pre.drift) +
                 " Pa of pulse " + fmt(pre.pulse_pressure) + " Pa");
  }
  coupling::CirculationParams cp{c.aortic, c.mitral, c.atrial_pressure, c.solver.dt1D};
  coupling::CirculationAdapter circ(net, cp, {}, {});

  auto heart = make_heart(c);
  heart->inflate(c.heart.end_diastolic_pressure, c.heart.inflation_increments);
  say(opt, tag + "inflated to " + fmt(c.heart.end_diastolic_pressure) + " Pa, V = " +
               fmt(heart->volume(heart->u()) / kM3PerMl) + " ml");

  std::unique_ptr<EventLog> events;
  if (opt.verbose && opt.write) events = std::make_unique<EventLog>(dir / "events.ndjson");
  long step = 0;
  const long per_cycle = std::lround(c.period / c.solver.dt3D);
  const auto on_step = [&](const coupling::StepReport& rep, const coupling::TraceRow& row) {
    if (events) events->step(step, rep, row);
    ++step;
    if (opt.verbose && step % per_cycle == 0)
      say(opt, tag + "cycle " + std::to_string(step / per_cycle) + " done, t = " + fmt(row.t) + " s");
  };
  res.diagnostics = coupling::run_simulation(*heart, circ, c.solver, c.cycles, c.period, c.probes, on_step);
  res.traces = trace_set(res.diagnostics);
  res.diagnostics.rows.clear();
  res.diagnostics.rows.shrink_to_fit();
  res.metrics = compute_metrics(res.traces, c.period, metric_columns(c));
  for (const auto& w : res.metrics.warnings) say(opt, tag + "warning: " + w);
  res.ok = true;
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (opt.write) write_traces(res.traces, res.metrics, point_manifest(c, res, 1), dir);
  say(opt, tag + "done in " + fmt(res.wall_time) + " s: EDV " + fmt(res.metrics.EDV / kM3PerMl) + " ml, ESV " +
               fmt(res.metrics.ESV / kM3PerMl) + " ml, peak p_LV " + fmt(res.metrics.peak_lv_pressure / 1e3) +
               " kPa, max Newton iterations " + std::to_string(res.diagnostics.max_iterations));
  return res;
}

std::string point_fingerprint(const CaseConfig& c) {
  const json j = {{"network", arterial::network_to_json(c.network)},
                  {"dt3D", c.solver.dt3D},
                  {"dt1D", c.solver.dt1D},
                  {"S_peak", c.heart.model.active.S_peak},
                  {"cycles", c.cycles}};
  return j.dump();
}

double relative_linf(const TraceSet& a, const TraceSet& b, const std::string& column) {
  const std::size_t ia = a.index(column), ib = b.index(column);
  std::map<long long, double> bt;
  for (const auto& r : b.rows) bt[std::llround(r[0] * 1e9)] = r[ib];
  double diff = 0.0, scale = 0.0;
  std::size_t shared = 0;
  for (const auto& r : a.rows) {
    const auto it = bt.find(std::llround(r[0] * 1e9));
    if (it == bt.end()) continue;
    ++shared;
    diff = std::max(diff, std::abs(r[ia] - it->second));
    scale = std::max({scale, std::abs(r[ia]), std::abs(it->second)});
  }
  if (shared == 0) throw MetricsError("traces share no sample times");
  return scale > 0.0 ? diff / scale : 0.0;
}

json monotonicity_report(const std::vector<double>& values, const std::vector<Metrics>& m) {
  std::vector<std::size_t> order(values.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  bool p_up = true, esv_up = true, sv_down = true;
  double edv_min = INFINITY, edv_max = -INFINITY;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Metrics& cur = m[order[k]];
    edv_min = std::min(edv_min, cur.EDV);
    edv_max = std::max(edv_max, cur.EDV);
    if (k == 0) continue;
    const Metrics& prev = m[order[k - 1]];
    p_up = p_up && cur.peak_lv_pressure > prev.peak_lv_pressure;
    esv_up = esv_up && cur.ESV > prev.ESV;
    sv_down = sv_down && cur.SV < prev.SV;
  }
  const double edv_spread = (edv_max - edv_min) / edv_min;
  json rows = json::array();
  for (std::size_t k : order)
    rows.push_back({{"value", values[k]},
                    {"peak_lv_pressure_Pa", m[k].peak_lv_pressure},
                    {"EDV_m3", m[k].EDV},
                    {"ESV_m3", m[k].ESV},
                    {"SV_m3", m[k].SV}});
  return {{"points", rows},
          {"peak_lv_pressure_increasing", p_up},
          {"ESV_increasing", esv_up},
          {"SV_decreasing", sv_down},
          {"EDV_relative_spread", edv_spread},
          {"pass", p_up && esv_up && sv_down && edv_spread < 0.01}};
}

CaseResult run_case(const CaseConfig& c, const RunOptions& opt) {
  CaseResult out;
  out.id = c.id;
  const fs::path root = (opt.out_dir ? *opt.out_dir : c.output_dir) / c.id;
  auto pts = expand_sweeps(c);
  const int threads = thread_count(opt);

  // Identical points (two sweeps can reach the same configuration) run once.
  std::vector<std::size_t> source(pts.size());
  std::map<std::string, std::size_t> first;
  std::vector<std::size_t> unique;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto [it, inserted] = first.emplace(point_fingerprint(pts[k].config), k);
    source[k] = it->second;
    if (inserted) unique.push_back(k);
  }

  out.points.resize(pts.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t n; (n = next++) < unique.size();) {
      const std::size_t k = unique[n];
      const fs::path dir = root / pts[k].label;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        out.points[k] = run_point(pts[k].config, pts[k].label, opt, dir);
      } catch (const std::exception& e) {
        PointResult& r = out.points[k];
        r.label = pts[k].label;
        r.dir = dir;
        r.ok = false;
        r.input_error = is_input_error(e);
        r.error = e.what();
        r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        say(opt, "[" + c.id + "/" + r.label + "] failed: " + r.error);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::min<int>(threads, static_cast<int>(unique.size())); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (source[k] == k) continue;
    out.points[k] = out.points[source[k]];
    out.points[k].label = pts[k].label;
    out.points[k].duplicate_of = pts[source[k]].label;
    out.points[k].dir = root / pts[k].label;
    if (opt.write && out.points[k].ok)
      write_traces(out.points[k].traces, out.points[k].metrics, point_manifest(pts[k].config, out.points[k], threads),
                   out.points[k].dir);
  }

  // Reports per sweep.
  json sweeps = json::array();
  std::size_t offset = 0;
  for (const auto& s : c.sweeps) {
    json rep = {{"parameter", s.parameter}, {"values", s.values}};
    std::vector<const PointResult*> sp;
    for (std::size_t k = 0; k < s.values.size(); ++k) sp.push_back(&out.points[offset + k]);
    offset += s.values.size();
    const bool complete = std::all_of(sp.begin(), sp.end(), [](const PointResult* p) { return p->ok; });
    rep["complete"] = complete;
    if (complete && (s.parameter == "E_Pa" || s.parameter == "E_scale") && sp.size() > 1) {
      std::vector<Metrics> m;
      for (const auto* p : sp) m.push_back(p->metrics);
      rep["monotonicity"] = monotonicity_report(s.values, m);
    }
    if (complete && (s.parameter == "dt1D_s" || s.parameter == "dt3D_s") && sp.size() > 1) {
      double dp = 0.0, dv = 0.0;
      json pairs = json::array();
      for (std::size_t i = 0; i < sp.size(); ++i)
        for (std::size_t j = i + 1; j < sp.size(); ++j) {
          const double a = relative_linf(sp[i]->traces, sp[j]->traces, "p_lv");
          const double b = relative_linf(sp[i]->traces, sp[j]->traces, "V_lv");
          pairs.push_back({{"a", sp[i]->label}, {"b", sp[j]->label}, {"p_lv", a}, {"V_lv", b}});
          dp = std::max(dp, a);
          dv = std::max(dv, b);
        }
      rep["convergence"] = {{"pairs", pairs}, {"max_p_lv", dp}, {"max_pv_loop", std::max(dp, dv)}};
    }
    sweeps.push_back(std::move(rep));
  }
  out.report = {{"case", c.id}, {"sweeps", sweeps}};

  if (opt.write) {
    json points = json::array();
    for (const auto& p : out.points) {
      json e = {{"label", p.label}, {"ok", p.ok}, {"wall_time_s", p.wall_time}};
      if (!p.duplicate_of.empty()) e["duplicate_of"] = p.duplicate_of;
      if (p.ok) {
        e["metrics"] = to_json(p.metrics);
        e["diagnostics"] = diagnostics_json(p.diagnostics);
      } else {
        e["error"] = p.error;
      }
      points.push_back(std::move(e));
    }
    json summary = out.report;
    summary["points"] = points;
    summary["config_sha256"] = config_hash(c.source);
    write_json(summary, root / "summary.json");
  }
  return out;
}

}  // namespace cvcouple::scenarios
