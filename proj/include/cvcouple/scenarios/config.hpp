#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "cvcouple/arterial/network.hpp"
#include "cvcouple/cardiofe/mesh.hpp"
#include "cvcouple/cardiofe/model.hpp"
#include "cvcouple/coupling/backend.hpp"
#include "cvcouple/coupling/driver.hpp"
#include "cvcouple/valves/valve.hpp"

namespace cvcouple::scenarios {

struct HeartConfig {
  enum class Backend { fe, elastance } backend = Backend::fe;
  cardiofe::LVGeometry geometry;
  std::optional<std::filesystem::path> mesh_file;  // replaces the generator when set
  cardiofe::LVModelParams model;                   // t_a and period are filled at run time
  cardiofe::ActivationSpec activation{cardiofe::ActivationSpec::Mode::apex_to_base};
  cardiofe::DynamicsParams dynamics;
  double end_diastolic_pressure = 1000.0;  // Pa, initial static inflation
  int inflation_increments = 8;
  coupling::ElastanceCavity elastance{1e-5, 0.0, arterial::Waveform::constant(1e8)};
};

/// The 1D model runs alone under a prescribed inflow before coupling, until the inlet pressure of
/// two consecutive periods agrees within `tolerance` (relative to its pulse) or max_cycles is reached.
struct PrecycleConfig {
  int max_cycles = 20;
  double tolerance = 1e-3;
  arterial::Waveform inflow = arterial::Waveform::half_sine(3e-4, 0.3, 1.231);
};

struct MetricsSpec {
  std::string root_probe;    // aortic-root pressure for peak/pulse pressure
  std::string distal_probe;  // amplification = distal / root pulse pressure
  std::string pwv_proximal;
  std::string pwv_distal;
  double pwv_distance = 0.0;  // m; 0 derives it when both probes sit on one segment
};

struct SweepSpec {
  std::string parameter;  // E_Pa, E_scale, stenosis_severity, dt1D_s, dt3D_s, S_peak_Pa
  std::vector<double> values;
};

struct CaseConfig {
  std::string id;
  std::string description;
  double period = 1.231;  // s
  int cycles = 3;         // coupled cycles; metrics come from the last one
  HeartConfig heart;
  valves::ValveParams aortic;
  valves::ValveParams mitral;
  double atrial_pressure = 1100.0;  // Pa
  arterial::NetworkDescription network;
  PrecycleConfig precycle;
  coupling::SolverConfig solver;
  std::vector<coupling::Probe> probes;
  MetricsSpec metrics;
  std::vector<SweepSpec> sweeps;
  std::filesystem::path output_dir = "out";
  nlohmann::json source;  // validated input document, hashed into the run manifest
};

/// Parses and validates a case document; unknown keys and schema violations raise ConfigError
/// naming the field path. Relative file references resolve against base_dir.
CaseConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
CaseConfig load_config(const std::filesystem::path& file);

struct SweepPoint {
  std::string label;  // "base" or "<parameter>=<value>"
  CaseConfig config;
};

/// One point per sweep value (each sweep varies one parameter of the base case), or the base
/// case alone when no sweep is given. Throws ConfigError for unknown parameters.
std::vector<SweepPoint> expand_sweeps(const CaseConfig& c);

/// Applies one sweep value to a copy of the case.
CaseConfig with_parameter(const CaseConfig& c, const std::string& parameter, double value);

}  // namespace cvcouple::scenarios
