#pragma once

#include <filesystem>
#include <string>

#include "cvcouple/arterial/network.hpp"

namespace cvcouple::scenarios {

struct ImportOptions {
  double element_length = 0.04;  // m, target 1D element length
  double rho = 1060.0;
  double mu = 4e-3;
};

struct ImportReport {
  arterial::NetworkDescription network;
  std::size_t segments = 0;
  std::size_t terminals = 0;
  double total_volume = 0.0;  // m^3, reference lumen volume
};

/// Format "pwdb": one row per segment with a header naming the columns
///   Segment No, Name (optional), Inlet node, Outlet node, Length [m], Inlet radius [m],
///   Outlet radius [m], Wall thickness [m], Young's modulus [Pa],
///   Peripheral R [Pa s/m3], Peripheral C [m3/Pa], Peripheral Z [Pa s/m3] (optional).
/// Matching ignores case, units in brackets and punctuation. Segments connect through shared node
/// numbers; a segment whose outlet node starts no other segment is terminal and needs R and C.
/// A missing Z becomes the characteristic impedance at the outlet. The root segment carries the
/// coupled inlet.
/// Throws FormatError for missing columns or bad values, TopologyError for a node without a parent,
/// several roots, merging segments or cycles, ConfigError for an unknown format.
ImportReport import_network(const std::filesystem::path& file, const std::string& format,
                            const ImportOptions& opt = {});

}  // namespace cvcouple::scenarios
