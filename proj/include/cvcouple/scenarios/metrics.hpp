#pragma once

#include <cmath>
#include <json.hpp>
#include <string>
#include <vector>

#include "cvcouple/coupling/driver.hpp"

namespace cvcouple::scenarios {

inline constexpr double kPaPerMmHg = 133.322387415;
inline constexpr double kM3PerMl = 1e-6;

/// Time-indexed columns: t, p_lv, V_lv, valve xi and Q, Newton iterations, the isovolumetric flag,
/// then <probe>.P, <probe>.Q and <probe>.A for every probe.
struct TraceSet {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t index(const std::string& column) const;  // throws MetricsError when absent
  bool has(const std::string& column) const;
  std::vector<double> column(const std::string& name) const;
};

TraceSet trace_set(const coupling::SimulationResult& r);

/// Throws MetricsError unless t is strictly increasing with constant spacing.
void validate(const TraceSet& t);

/// Trace columns the metrics read; empty names skip the dependent metrics.
struct MetricColumns {
  std::string root_pressure;    // aortic-root pressure column
  std::string distal_pressure;  // for amplification
  std::string pwv_proximal;     // pressure columns for foot-to-foot PWV
  std::string pwv_distal;
  double pwv_distance = 0.0;  // m
};

struct Metrics {
  double EDV = NAN;  // m^3
  double ESV = NAN;
  double SV = NAN;
  double peak_lv_pressure = NAN;      // Pa
  double peak_aortic_pressure = NAN;  // Pa
  double pulse_pressure = NAN;        // Pa, aortic root
  double pwv = NAN;                   // m/s
  double amplification = NAN;         // distal over root pulse pressure
  double cycle_drift = NAN;           // relative change of EDV, ESV and peak p_lv over the last two cycles
  std::vector<std::string> warnings;  // physiological guardrails
};

/// Metrics from the last `period` of the traces. Throws MetricsError for a trace shorter than one
/// period or a missing column.
Metrics compute_metrics(const TraceSet& t, double period, const MetricColumns& cols = {});

/// Time at which p first rises through min + 0.2 (max - min) after its minimum, interpolated
/// linearly between samples. The search wraps once around the window.
double foot_time(const std::vector<double>& t, const std::vector<double>& p);

/// Flat document; SI values plus ml and mmHg copies for reading.
nlohmann::json to_json(const Metrics& m);

}  // namespace cvcouple::scenarios
