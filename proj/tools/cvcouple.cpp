// Command-line entry point. Exit codes: 0 success, 2 bad input or configuration, 3 solver failure.
#include <CLI11.hpp>
#include <cmath>
#include <iostream>

#include "cvcouple/arterial/network_json.hpp"
#include "cvcouple/errors.hpp"
#include "cvcouple/scenarios/config.hpp"
#include "cvcouple/scenarios/importer.hpp"
#include "cvcouple/scenarios/io.hpp"
#include "cvcouple/scenarios/metrics.hpp"
#include "cvcouple/scenarios/runner.hpp"

namespace fs = std::filesystem;
using namespace cvcouple;
using namespace cvcouple::scenarios;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kSolverError = 3;

int simulate(const fs::path& config, const std::string& out, int cycles, bool verbose) {
  const CaseConfig c = load_config(config);
  RunOptions opt;
  if (!out.empty()) opt.out_dir = out;
  if (cycles > 0) opt.cycles = cycles;
  opt.verbose = verbose;
  opt.log = &std::cerr;
  const CaseResult r = run_case(c, opt);
  int code = kOk;
  for (const auto& p : r.points) {
    if (p.ok) continue;
    std::cerr << "error: " << c.id << "/" << p.label << ": " << p.error << "\n";
    code = std::max(code, p.input_error ? kInputError : kSolverError);
  }
  for (const auto& s : r.report.at("sweeps"))
    if (s.contains("monotonicity") && !s["monotonicity"]["pass"].get<bool>())
      std::cerr << "note: sweep over " << s["parameter"].get<std::string>() << " is not monotone\n";
  std::cout << ((opt.out_dir ? *opt.out_dir : c.output_dir) / c.id / "summary.json").string() << "\n";
  return code;
}

int import(const fs::path& in, const std::string& format, const fs::path& out, double element_length) {
  ImportOptions opt;
  opt.element_length = element_length;
  const ImportReport rep = import_network(in, format, opt);
  write_json(arterial::network_to_json(rep.network), out);
  std::cout << "segments: " << rep.segments << "\nterminals: " << rep.terminals
            << "\ntotal volume: " << rep.total_volume / kM3PerMl << " ml\n";
  return kOk;
}

int metrics(const fs::path& traces, double period) {
  const TraceSet t = read_csv(traces);
  MetricColumns cols;
  const fs::path manifest = traces.parent_path() / "manifest.json";
  if (fs::exists(manifest)) {
    const auto m = read_json(manifest);
    if (!(period > 0.0)) period = m.at("period_s").get<double>();
    const auto& mc = m.at("metric_columns");
    cols.root_pressure = mc.at("root_pressure").get<std::string>();
    cols.distal_pressure = mc.at("distal_pressure").get<std::string>();
    cols.pwv_proximal = mc.at("pwv_proximal").get<std::string>();
    cols.pwv_distal = mc.at("pwv_distal").get<std::string>();
    cols.pwv_distance = mc.at("pwv_distance_m").get<double>();
  }
  if (!(period > 0.0)) throw ConfigError("metrics: --period is required without a manifest.json beside the traces");
  const Metrics m = compute_metrics(t, period, cols);
  for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << to_json(m).dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled left-ventricle and 1D arterial network simulator"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run a case file (all sweep points)");
  std::string config, out;
  int cycles = 0;
  bool verbose = false;
  sim->add_option("--config", config, "Case JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out, "Output directory (replaces the case setting)");
  sim->add_option("--cycles", cycles, "Coupled cycles (replaces the case setting)")->check(CLI::PositiveNumber);
  sim->add_flag("--verbose", verbose, "Per-step NDJSON event log and progress");

  auto* imp = app.add_subcommand("import-network", "Convert a tabular network to network JSON");
  std::string in, format = "pwdb", net_out;
  double element_length = 0.04;
  imp->add_option("--in", in, "Network table (CSV)")->required()->check(CLI::ExistingFile);
  imp->add_option("--format", format, "Table layout")->capture_default_str();
  imp->add_option("--out", net_out, "Network JSON to write")->required();
  imp->add_option("--element-length", element_length, "Target 1D element length, m")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* met = app.add_subcommand("metrics", "Metrics from a written traces.csv");
  std::string traces;
  double period = 0.0;
  met->add_option("--traces", traces, "traces.csv")->required()->check(CLI::ExistingFile);
  met->add_option("--period", period, "Cycle length, s (default: from manifest.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*sim) return simulate(config, out, cycles, verbose);
    if (*imp) return import(in, format, net_out, element_length);
    if (*met) return metrics(traces, period);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool bad_trace = *met && dynamic_cast<const MetricsError*>(&e);
    return is_input_error(e) || bad_trace || dynamic_cast<const IoError*>(&e) ||
                   dynamic_cast<const nlohmann::json::exception*>(&e)
               ? kInputError
               : kSolverError;
  }
  return kOk;
}
