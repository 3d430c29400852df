#include "cvcouple/scenarios/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cvcouple/errors.hpp"

namespace cvcouple::scenarios {

using json = nlohmann::json;

std::size_t TraceSet::index(const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw MetricsError("traces: no column '" + column + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

bool TraceSet::has(const std::string& column) const {
  return std::find(columns.begin(), columns.end(), column) != columns.end();
}

std::vector<double> TraceSet::column(const std::string& name) const {
  const std::size_t k = index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

TraceSet trace_set(const coupling::SimulationResult& r) {
  TraceSet t;
  t.columns = {"t", "p_lv", "V_lv", "xi_ao", "Q_ao", "xi_mi", "Q_mi", "iterations", "isovolumetric"};
  for (const auto& n : r.probe_names)
    for (const char* q : {".P", ".Q", ".A"}) t.columns.push_back(n + q);
  t.rows.reserve(r.rows.size());
  for (const auto& row : r.rows) {
    std::vector<double> v = {row.t,     row.p_lv,  row.V_lv,
                             row.xi_ao, row.Q_ao,  row.xi_mi,
                             row.Q_mi,  static_cast<double>(row.iterations), row.isovolumetric ? 1.0 : 0.0};
    v.insert(v.end(), row.probes.begin(), row.probes.end());
    t.rows.push_back(std::move(v));
  }
  return t;
}

void validate(const TraceSet& t) {
  if (t.columns.empty() || t.columns.front() != "t") throw MetricsError("traces: first column must be 't'");
  for (const auto& r : t.rows)
    if (r.size() != t.columns.size()) throw MetricsError("traces: ragged row");
  if (t.rows.size() < 2) return;
  const double dt = t.rows[1][0] - t.rows[0][0];
  if (!(dt > 0.0)) throw MetricsError("traces: t must be strictly increasing");
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    const double d = t.rows[k][0] - t.rows[k - 1][0];
    if (!(d > 0.0)) throw MetricsError("traces: t must be strictly increasing");
    if (std::abs(d - dt) > 1e-6 * dt) throw MetricsError("traces: sampling interval is not constant");
  }
}

double foot_time(const std::vector<double>& t, const std::vector<double>& p) {
  const std::size_t n = p.size();
  if (n < 2 || t.size() != n) throw MetricsError("foot_time: need at least two matching samples");
  const auto [mn, mx] = std::minmax_element(p.begin(), p.end());
  if (!(*mx > *mn)) return NAN;
  const double thr = *mn + 0.2 * (*mx - *mn);
  const std::size_t i0 = static_cast<std::size_t>(mn - p.begin());
  const double dt = t[1] - t[0];
  const double span = t.back() - t.front() + dt;
  const auto time_at = [&](std::size_t j) { return t[(i0 + j) % n] + ((i0 + j) >= n ? span : 0.0); };
  for (std::size_t j = 1; j < n; ++j) {
    const double a = p[(i0 + j - 1) % n], b = p[(i0 + j) % n];
    if (a < thr && b >= thr) {
      const double ta = time_at(j - 1), tb = time_at(j);
      return ta + (thr - a) / (b - a) * (tb - ta);
    }
  }
  return NAN;
}

namespace {

struct Window {
  std::size_t begin = 0, end = 0;
};

double max_in(const std::vector<double>& v, Window w) { return *std::max_element(v.begin() + w.begin, v.begin() + w.end); }
double min_in(const std::vector<double>& v, Window w) { return *std::min_element(v.begin() + w.begin, v.begin() + w.end); }

std::vector<double> slice(const std::vector<double>& v, Window w) {
  return {v.begin() + static_cast<long>(w.begin), v.begin() + static_cast<long>(w.end)};
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

}  // namespace

Metrics compute_metrics(const TraceSet& t, double period, const MetricColumns& cols) {
  validate(t);
  if (!(period > 0.0)) throw MetricsError("metrics: period must be positive");
  if (t.rows.size() < 2) throw MetricsError("metrics: trace is shorter than one period");
  const double dt = t.rows[1][0] - t.rows[0][0];
  const double ratio = period / dt;
  const auto per = static_cast<std::size_t>(std::lround(ratio));
  if (std::abs(ratio - static_cast<double>(per)) > 1e-6 * ratio)
    throw MetricsError("metrics: period " + fmt(period) + " s is not a multiple of the sampling interval");
  if (t.rows.size() < per) throw MetricsError("metrics: trace is shorter than one period");
  const Window last{t.rows.size() - per, t.rows.size()};

  Metrics m;
  const auto time = t.column("t");
  const auto V = t.column("V_lv");
  const auto p = t.column("p_lv");
  m.EDV = max_in(V, last);
  m.ESV = min_in(V, last);
  m.SV = m.EDV - m.ESV;
  m.peak_lv_pressure = max_in(p, last);
  if (t.rows.size() >= 2 * per) {
    const Window prev{last.begin - per, last.begin};
    const double dEDV = std::abs(m.EDV - max_in(V, prev)) / m.EDV;
    const double dESV = std::abs(m.ESV - min_in(V, prev)) / m.ESV;
    const double dp = std::abs(m.peak_lv_pressure - max_in(p, prev)) / m.peak_lv_pressure;
    m.cycle_drift = std::max({dEDV, dESV, dp});
  }

  double pp_root = NAN;
  if (!cols.root_pressure.empty()) {
    const auto pa = t.column(cols.root_pressure);
    m.peak_aortic_pressure = max_in(pa, last);
    pp_root = m.peak_aortic_pressure - min_in(pa, last);
    m.pulse_pressure = pp_root;
  }
  if (!cols.distal_pressure.empty() && pp_root > 0.0) {
    const auto pd = t.column(cols.distal_pressure);
    m.amplification = (max_in(pd, last) - min_in(pd, last)) / pp_root;
  }
  if (!cols.pwv_proximal.empty() && !cols.pwv_distal.empty()) {
    if (!(cols.pwv_distance > 0.0)) throw MetricsError("metrics: PWV probe distance must be positive");
    const auto tw = slice(time, last);
    const double f0 = foot_time(tw, slice(t.column(cols.pwv_proximal), last));
    const double f1 = foot_time(tw, slice(t.column(cols.pwv_distal), last));
    double delay = std::fmod(f1 - f0, period);
    if (delay < 0.0) delay += period;
    if (std::isfinite(delay) && delay > 0.0)
      m.pwv = cols.pwv_distance / delay;
    else
      m.warnings.push_back("PWV undefined: no positive foot-to-foot delay");
  }

  const double edv_ml = m.EDV / kM3PerMl;
  if (!(edv_ml >= 50.0 && edv_ml <= 300.0))
    m.warnings.push_back("EDV " + fmt(edv_ml) + " ml outside the physiological range [50, 300] ml");
  const double pk = m.peak_lv_pressure / 1e3;
  if (!(pk >= 5.0 && pk <= 40.0))
    m.warnings.push_back("peak LV pressure " + fmt(pk) + " kPa outside the physiological range [5, 40] kPa");
  return m;
}

json to_json(const Metrics& m) {
  const auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"EDV_m3", num(m.EDV)},
          {"ESV_m3", num(m.ESV)},
          {"SV_m3", num(m.SV)},
          {"peak_lv_pressure_Pa", num(m.peak_lv_pressure)},
          {"peak_aortic_pressure_Pa", num(m.peak_aortic_pressure)},
          {"pulse_pressure_Pa", num(m.pulse_pressure)},
          {"pwv_m_s", num(m.pwv)},
          {"amplification", num(m.amplification)},
          {"cycle_drift", num(m.cycle_drift)},
          {"EDV_ml", num(m.EDV / kM3PerMl)},
          {"ESV_ml", num(m.ESV / kM3PerMl)},
          {"SV_ml", num(m.SV / kM3PerMl)},
          {"peak_lv_pressure_mmHg", num(m.peak_lv_pressure / kPaPerMmHg)},
          {"peak_aortic_pressure_mmHg", num(m.peak_aortic_pressure / kPaPerMmHg)},
          {"pulse_pressure_mmHg", num(m.pulse_pressure / kPaPerMmHg)},
          {"warnings", m.warnings}};
}

}  // namespace cvcouple::scenarios
