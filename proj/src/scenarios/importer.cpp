#include "cvcouple/scenarios/importer.hpp"

#include <algorithm>
#include <boost/tokenizer.hpp>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>

#include "cvcouple/arterial/tube_law.hpp"
#include "cvcouple/errors.hpp"

namespace cvcouple::scenarios {

namespace {

using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

// "Young's modulus [Pa]" -> "youngsmodulus"
std::string normalize(const std::string& header) {
  std::string out;
  int depth = 0;
  for (char ch : header) {
    if (ch == '[' || ch == '(') ++depth;
    else if (ch == ']' || ch == ')') depth = std::max(0, depth - 1);
    else if (depth == 0 && std::isalnum(static_cast<unsigned char>(ch)))
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return out;
}

struct Row {
  std::size_t line = 0;
  std::string number, name, in_node, out_node;
  double length = 0, r_in = 0, r_out = 0, h = 0, E = 0;
  std::optional<double> R, C, Z;
};

struct Table {
  std::map<std::string, std::size_t> col;
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> lines;
};

Table read_table(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  Table t;
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    std::vector<std::string> cells;
    try {
      for (const auto& c : Tokenizer(line)) cells.push_back(trim(c));
    } catch (const boost::escaped_list_error& e) {
      throw FormatError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (header) {
      for (std::size_t k = 0; k < cells.size(); ++k) t.col[normalize(cells[k])] = k;
      header = false;
      continue;
    }
    t.cells.push_back(std::move(cells));
    t.lines.push_back(lineno);
  }
  if (header) throw FormatError(file.string() + ": empty file");
  return t;
}

double parse_number(const std::string& s, const std::string& what, std::size_t line) {
  std::size_t used = 0;
  double v = NAN;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v))
    throw FormatError("line " + std::to_string(line) + ": " + what + ": not a number: '" + s + "'");
  return v;
}

std::vector<Row> parse_pwdb(const Table& t) {
  const std::vector<std::pair<const char*, const char*>> required = {
      {"segmentno", "Segment No"},           {"inletnode", "Inlet node"},
      {"outletnode", "Outlet node"},         {"length", "Length"},
      {"inletradius", "Inlet radius"},       {"outletradius", "Outlet radius"},
      {"wallthickness", "Wall thickness"},   {"youngsmodulus", "Young's modulus"}};
  for (const auto& [key, label] : required)
    if (!t.col.count(key)) throw FormatError(std::string("missing column '") + label + "'");
  const auto cell = [&](const std::vector<std::string>& r, const char* key) -> std::optional<std::string> {
    const auto it = t.col.find(key);
    if (it == t.col.end() || it->second >= r.size() || r[it->second].empty()) return std::nullopt;
    return r[it->second];
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < t.cells.size(); ++i) {
    const auto& c = t.cells[i];
    Row r;
    r.line = t.lines[i];
    const auto need = [&](const char* key, const char* label) {
      const auto v = cell(c, key);
      if (!v) throw FormatError("line " + std::to_string(r.line) + ": missing value for '" + label + "'");
      return *v;
    };
    const auto positive = [&](const char* key, const char* label) {
      const double v = parse_number(need(key, label), label, r.line);
      if (!(v > 0.0)) throw FormatError("line " + std::to_string(r.line) + ": " + label + " must be positive");
      return v;
    };
    const auto optional_number = [&](const char* key, const char* label) -> std::optional<double> {
      const auto v = cell(c, key);
      if (!v) return std::nullopt;
      return parse_number(*v, label, r.line);
    };
    r.number = need("segmentno", "Segment No");
    r.name = cell(c, "name").value_or("");
    r.in_node = need("inletnode", "Inlet node");
    r.out_node = need("outletnode", "Outlet node");
    r.length = positive("length", "Length");
    r.r_in = positive("inletradius", "Inlet radius");
    r.r_out = positive("outletradius", "Outlet radius");
    r.h = positive("wallthickness", "Wall thickness");
    r.E = positive("youngsmodulus", "Young's modulus");
    r.R = optional_number("peripheralr", "Peripheral R");
    r.C = optional_number("peripheralc", "Peripheral C");
    r.Z = optional_number("peripheralz", "Peripheral Z");
    if (r.in_node == r.out_node) throw TopologyError("line " + std::to_string(r.line) + ": segment starts and ends at one node");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw FormatError("no segment rows");
  return rows;
}

}  // namespace

ImportReport import_network(const std::filesystem::path& file, const std::string& format, const ImportOptions& opt) {
  if (format != "pwdb") throw ConfigError("import: unknown format '" + format + "' (pwdb)");
  if (!(opt.element_length > 0.0)) throw ConfigError("import: element length must be positive");
  const Table table = read_table(file);
  std::vector<Row> rows;
  try {
    rows = parse_pwdb(table);
  } catch (const FormatError& e) {
    throw FormatError(file.string() + ": " + e.what());
  }

  // Segment ids: the name when present and unique, otherwise the number.
  std::map<std::string, int> name_count;
  for (const auto& r : rows)
    if (!r.name.empty()) ++name_count[r.name];
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& r : rows) {
    std::string id = !r.name.empty() && name_count[r.name] == 1 ? r.name : "segment_" + r.number;
    if (!seen.insert(id).second) throw FormatError(file.string() + ": duplicate segment '" + id + "'");
    ids.push_back(id);
  }

  std::map<std::string, std::vector<std::size_t>> starting, ending;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    starting[rows[k].in_node].push_back(k);
    ending[rows[k].out_node].push_back(k);
  }
  std::vector<std::size_t> roots;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (!ending.count(rows[k].in_node)) roots.push_back(k);
    const auto it = ending.find(rows[k].out_node);
    if (it != ending.end() && it->second.size() > 1)
      throw TopologyError("node " + rows[k].out_node + ": several segments end here (merging flow is not supported)");
  }
  if (roots.size() > 1) {
    std::string list;
    for (std::size_t k : roots) list += (list.empty() ? "" : ", ") + ids[k] + " (inlet node " + rows[k].in_node + ")";
    throw TopologyError("several segments have no parent: " + list);
  }

  // Every node has at most one incoming segment, so segments unreachable from the root lie on cycles.
  std::vector<bool> reached(rows.size(), false);
  std::vector<std::size_t> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    if (reached[k]) continue;
    reached[k] = true;
    const auto it = starting.find(rows[k].out_node);
    if (it != starting.end())
      for (std::size_t d : it->second) stack.push_back(d);
  }
  for (std::size_t k = 0; k < rows.size(); ++k)
    if (!reached[k]) throw TopologyError("segment " + ids[k] + " lies on a cycle");

  ImportReport rep;
  auto& d = rep.network;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& r = rows[k];
    arterial::VesselSegment s;
    s.id = ids[k];
    s.length = r.length;
    s.n_elems = std::max(1, static_cast<int>(std::ceil(r.length / opt.element_length - 1e-9)));
    for (int v = 0; v <= s.n_elems; ++v) {
      const double radius = r.r_in + (r.r_out - r.r_in) * v / s.n_elems;
      s.A0.push_back(std::numbers::pi * radius * radius);
    }
    s.E = {r.E};
    s.h = {r.h};
    s.rho = opt.rho;
    s.mu = opt.mu;
    rep.total_volume += std::numbers::pi * r.length * (r.r_in * r.r_in + r.r_in * r.r_out + r.r_out * r.r_out) / 3.0;
    d.segments.push_back(std::move(s));

    const auto it = starting.find(r.out_node);
    if (it != starting.end()) {
      arterial::JunctionSpec j;
      j.parent = ids[k];
      for (std::size_t c : it->second) j.daughters.push_back(ids[c]);
      d.junctions.push_back(std::move(j));
      continue;
    }
    if (!r.R || !r.C || !(*r.R > 0.0) || !(*r.C > 0.0))
      throw FormatError(file.string() + ":" + std::to_string(r.line) + ": terminal segment " + ids[k] +
                        " needs positive Peripheral R and Peripheral C");
    arterial::TerminalRCR t;
    t.segment = ids[k];
    t.R = *r.R;
    t.C = *r.C;
    if (r.Z) {
      if (!(*r.Z >= 0.0)) throw FormatError(file.string() + ":" + std::to_string(r.line) + ": Peripheral Z must be non-negative");
      t.Z = *r.Z;
    } else {
      arterial::PointParams pp;
      pp.A0 = std::numbers::pi * r.r_out * r.r_out;
      pp.K = arterial::stiffness_from_wall(r.E, r.h);
      pp.rho = opt.rho;
      t.Z = 1.0 / arterial::admittance(pp.A0, pp);
    }
    d.terminals.push_back(std::move(t));
  }
  d.inlet = arterial::InletSpec{ids[roots.front()], arterial::InletMode::coupled_valve,
                                arterial::Waveform::constant(0.0)};
  rep.segments = d.segments.size();
  rep.terminals = d.terminals.size();
  try {
    const arterial::Network check(d);
  } catch (const ValidationError& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
  return rep;
}

}  // namespace cvcouple::scenarios
