#include "cvcouple/arterial/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "cvcouple/errors.hpp"

namespace cvcouple::arterial {

Waveform Waveform::constant(double value) {
  Waveform w;
  w.kind_ = Kind::constant;
  w.peak_ = value;
  return w;
}

Waveform Waveform::table(std::vector<double> t, std::vector<double> v, bool periodic) {
  if (t.size() != v.size() || t.size() < 2)
    throw ConfigError("waveform table needs at least two (t, value) rows");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw ConfigError("waveform times must be strictly increasing");
  for (double x : v)
    if (!std::isfinite(x)) throw ConfigError("waveform values must be finite");
  Waveform w;
  w.kind_ = Kind::table;
  w.periodic_ = periodic;
  w.period_ = t.back() - t.front();
  w.t_ = std::move(t);
  w.v_ = std::move(v);
  return w;
}

Waveform Waveform::half_sine(double peak, double duration, double period) {
  if (!(duration > 0.0) || !(period >= duration))
    throw ConfigError("half-sine waveform needs 0 < duration <= period");
  Waveform w;
  w.kind_ = Kind::half_sine;
  w.periodic_ = true;
  w.peak_ = peak;
  w.duration_ = duration;
  w.period_ = period;
  return w;
}

Waveform Waveform::from_csv(const std::string& path, bool periodic) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open waveform file: " + path);
  std::vector<double> t, v;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double a, b;
    if (!(ss >> a >> b)) {
      if (t.empty() && lineno == 1) continue;  // header
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected two numeric columns");
    }
    t.push_back(a);
    v.push_back(b);
  }
  return table(std::move(t), std::move(v), periodic);
}

double Waveform::operator()(double t) const {
  switch (kind_) {
    case Kind::constant:
      return peak_;
    case Kind::half_sine: {
      double tc = std::fmod(t, period_);
      if (tc < 0) tc += period_;
      return tc < duration_ ? peak_ * std::sin(std::numbers::pi * tc / duration_) : 0.0;
    }
    case Kind::table: {
      double tt = t;
      if (periodic_) {
        tt = std::fmod(t - t_.front(), period_);
        if (tt < 0) tt += period_;
        tt += t_.front();
      } else if (t > t_.back() * (1.0 + 1e-12) + 1e-15 || t < t_.front() - 1e-15) {
        throw ConfigError("waveform does not cover t = " + std::to_string(t) + " s");
      }
      if (tt <= t_.front()) return v_.front();
      if (tt >= t_.back()) return v_.back();
      const auto it = std::upper_bound(t_.begin(), t_.end(), tt);
      const std::size_t i = static_cast<std::size_t>(it - t_.begin());
      const double w = (tt - t_[i - 1]) / (t_[i] - t_[i - 1]);
      return (1.0 - w) * v_[i - 1] + w * v_[i];
    }
  }
  return 0.0;
}

double Waveform::coverage_end() const {
  if (kind_ == Kind::table && !periodic_) return t_.back();
  return std::numeric_limits<double>::infinity();
}

}  // namespace cvcouple::arterial
