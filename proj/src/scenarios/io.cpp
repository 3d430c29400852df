#include "cvcouple/scenarios/io.hpp"

#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "cvcouple/errors.hpp"

#ifndef CVCOUPLE_VERSION
#define CVCOUPLE_VERSION "unknown"
#endif

namespace cvcouple::scenarios {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& file) {
  std::error_code ec;
  if (file.has_parent_path()) fs::create_directories(file.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + file.parent_path().string() + ": " + ec.message());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string() + ": " + std::strerror(errno));
  return out;
}

void close_checked(std::ofstream& out, const fs::path& file) {
  out.close();
  if (!out) throw IoError("write failed: " + file.string());
}

}  // namespace

void write_csv(const TraceSet& t, const fs::path& file) {
  auto out = open_out(file);
  for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << t.columns[k];
  out << '\n';
  char buf[32];
  for (const auto& r : t.rows) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", r[k]);
      if (k) out << ',';
      out << buf;
    }
    out << '\n';
  }
  close_checked(out, file);
}

TraceSet read_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  TraceSet t;
  std::string line;
  if (!std::getline(in, line)) throw MetricsError(file.string() + ": empty file");
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) t.columns.push_back(c);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.c_str();
    while (true) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) throw MetricsError(file.string() + ":" + std::to_string(lineno) + ": not a number");
      row.push_back(v);
      if (*end == '\0') break;
      if (*end != ',') throw MetricsError(file.string() + ":" + std::to_string(lineno) + ": bad separator");
      p = end + 1;
    }
    if (row.size() != t.columns.size())
      throw MetricsError(file.string() + ":" + std::to_string(lineno) + ": expected " +
                         std::to_string(t.columns.size()) + " values");
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_json(const json& j, const fs::path& file) {
  auto out = open_out(file);
  out << j.dump(2) << '\n';
  close_checked(out, file);
}

json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
}

std::string config_hash(const json& j) {
  const std::string s = j.dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  if (!EVP_Digest(s.data(), s.size(), md, &n, EVP_sha256(), nullptr)) throw IoError("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < n; ++k) {
    out += hex[md[k] >> 4];
    out += hex[md[k] & 15];
  }
  return out;
}

json version_info() {
  return {{"cvcouple", CVCOUPLE_VERSION},
          {"compiler", __VERSION__},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                        std::to_string(BOOST_VERSION % 100)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"openssl", OPENSSL_VERSION_TEXT}};
}

void write_traces(const TraceSet& t, const Metrics& m, const json& manifest, const fs::path& dir) {
  write_csv(t, dir / "traces.csv");
  write_json(to_json(m), dir / "metrics.json");
  write_json(manifest, dir / "manifest.json");
}

EventLog::EventLog(const fs::path& file) : file_(file), out_(open_out(file)) {}

void EventLog::step(long n, const coupling::StepReport& rep, const coupling::TraceRow& row) {
  const json e = {{"step", n},
                  {"t", row.t},
                  {"p_lv", rep.p},
                  {"V_lv", rep.V},
                  {"iterations", rep.iterations},
                  {"residuals", rep.residuals},
                  {"isovolumetric", rep.isovolumetric},
                  {"compliance", rep.compliance},
                  {"halvings", rep.halvings}};
  out_ << e.dump() << '\n';
  out_.flush();
  if (!out_) throw IoError("write failed: " + file_.string());
}

}  // namespace cvcouple::scenarios
