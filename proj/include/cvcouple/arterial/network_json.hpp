#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>

#include "cvcouple/arterial/network.hpp"

namespace cvcouple::arterial {

/// Parses a network document. Relative waveform paths resolve against base_dir.
/// Schema problems raise ConfigError naming the field path under `path`.
NetworkDescription network_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                     const std::string& path = "network");

NetworkDescription load_network(const std::filesystem::path& file);

/// Inverse of network_from_json. Table waveforms are written inline.
nlohmann::json network_to_json(const NetworkDescription& d);

Waveform waveform_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                            const std::string& path);
nlohmann::json waveform_to_json(const Waveform& w);

InletMode inlet_mode_from_string(const std::string& s, const std::string& path);
std::string to_string(InletMode m);

}  // namespace cvcouple::arterial
