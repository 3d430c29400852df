#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cvcouple/arterial/network.hpp"

namespace fixtures {

using namespace cvcouple::arterial;

inline constexpr double kRho = 1060.0;
inline constexpr double kA0 = 4.52e-4;
inline constexpr double kE = 0.25e6;
inline constexpr double kH = 1.5e-3;

inline VesselSegment segment(const std::string& id, double L, int ne, double A0 = kA0, double E = kE,
                             double h = kH) {
  VesselSegment s;
  s.id = id;
  s.length = L;
  s.n_elems = ne;
  s.A0 = {A0};
  s.E = {E};
  s.h = {h};
  s.rho = kRho;
  return s;
}

inline double c0(double A0 = kA0, double E = kE, double h = kH) {
  return std::sqrt(stiffness_from_wall(E, h) / (2.0 * kRho * std::sqrt(A0)));
}

/// Characteristic impedance rho c / A of a segment at rest.
inline double z_char(double A0 = kA0, double E = kE, double h = kH) { return kRho * c0(A0, E, h) / A0; }

inline NetworkDescription single(const VesselSegment& s, TerminalRCR t, InletMode mode, Waveform w) {
  NetworkDescription d;
  d.segments = {s};
  t.segment = s.id;
  d.terminals = {t};
  d.inlet = InletSpec{s.id, mode, std::move(w)};
  return d;
}

inline TerminalRCR rcr(double Z, double R, double C, double p_out = 0.0) {
  TerminalRCR t;
  t.Z = Z;
  t.R = R;
  t.C = C;
  t.p_out = p_out;
  return t;
}

/// Time at which a rising signal first crosses lo + frac * (hi - lo), linearly interpolated.
inline double foot_time(const std::vector<double>& t, const std::vector<double>& v, double frac) {
  double lo = v.front(), hi = v.front();
  std::size_t imax = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > hi) {
      hi = v[i];
      imax = i;
    }
  }
  for (std::size_t i = 0; i < imax; ++i) lo = std::min(lo, v[i]);
  const double thr = lo + frac * (hi - lo);
  for (std::size_t i = 1; i <= imax; ++i)
    if (v[i - 1] < thr && v[i] >= thr) return t[i - 1] + (thr - v[i - 1]) / (v[i] - v[i - 1]) * (t[i] - t[i - 1]);
  return NAN;
}

}  // namespace fixtures
