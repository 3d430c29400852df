#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "cvcouple/coupling/driver.hpp"
#include "cvcouple/scenarios/metrics.hpp"

namespace cvcouple::scenarios {

/// Header row then one row per step, every value with 17 significant digits.
void write_csv(const TraceSet& t, const std::filesystem::path& file);
/// Throws IoError when unreadable, MetricsError on a malformed table.
TraceSet read_csv(const std::filesystem::path& file);

void write_json(const nlohmann::json& j, const std::filesystem::path& file);
nlohmann::json read_json(const std::filesystem::path& file);

/// SHA-256 of the canonical serialization (sorted keys, no whitespace), hex encoded.
std::string config_hash(const nlohmann::json& j);

/// Build and dependency versions for the run manifest.
nlohmann::json version_info();

/// traces.csv, metrics.json and manifest.json under dir, created if needed. Throws IoError naming
/// the path on failure.
void write_traces(const TraceSet& t, const Metrics& m, const nlohmann::json& manifest,
                  const std::filesystem::path& dir);

/// One JSON object per committed step.
class EventLog {
 public:
  explicit EventLog(const std::filesystem::path& file);
  void step(long n, const coupling::StepReport& rep, const coupling::TraceRow& row);

 private:
  std::filesystem::path file_;
  std::ofstream out_;
};

}  // namespace cvcouple::scenarios
