#pragma once

#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "cvcouple/coupling/driver.hpp"
#include "cvcouple/scenarios/config.hpp"
#include "cvcouple/scenarios/metrics.hpp"

namespace cvcouple::scenarios {

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // replaces the case output directory
  std::optional<int> cycles;                     // replaces the case cycle count
  bool verbose = false;                          // events.ndjson per point
  bool write = true;                             // false keeps results in memory only
  int threads = 0;                               // 0 reads CVCOUPLE_THREADS, default 1
  std::ostream* log = nullptr;                   // progress and warnings
};

struct PrecycleReport {
  int cycles = 0;
  double drift = 0.0;           // Pa, inlet pressure difference of the last two cycles
  double pulse_pressure = 0.0;  // Pa
};

struct PointResult {
  std::string label;
  std::string duplicate_of;  // label of the identical point whose results were reused
  bool ok = false;
  bool input_error = false;
  std::string error;
  TraceSet traces;
  Metrics metrics;
  coupling::SimulationResult diagnostics;  // rows moved into traces
  PrecycleReport precycle;
  double wall_time = 0.0;  // s
  std::filesystem::path dir;
};

struct CaseResult {
  std::string id;
  std::vector<PointResult> points;
  nlohmann::json report;  // sweep monotonicity and time-step convergence
  bool ok() const;
  const PointResult& point(const std::string& label) const;
};

MetricColumns metric_columns(const CaseConfig& c);

/// Precycles the 1D model, inflates the ventricle, runs the coupled cycles and computes metrics.
/// Errors propagate.
PointResult run_point(const CaseConfig& c, const std::string& label, const RunOptions& opt,
                      const std::filesystem::path& dir);

/// Every sweep point in isolation: a failing point is recorded and its siblings still run.
/// Identical points run once. Writes out_dir/<id>/<label>/ and out_dir/<id>/summary.json.
CaseResult run_case(const CaseConfig& c, const RunOptions& opt = {});

/// max |a - b| / max(|a|, |b|) over the sample times the two traces share.
double relative_linf(const TraceSet& a, const TraceSet& b, const std::string& column);

/// Strict trends of an increasing stiffness sweep: peak LV pressure and ESV rise, SV falls and EDV
/// stays within 1%.
nlohmann::json monotonicity_report(const std::vector<double>& values, const std::vector<Metrics>& m);

std::string point_fingerprint(const CaseConfig& c);

}  // namespace cvcouple::scenarios
