#pragma once

#include <cmath>
#include <numbers>

#include "cvcouple/errors.hpp"

namespace cvcouple::arterial {

/// Wall and fluid parameters of the tube law at one point of a segment.
struct PointParams {
  double A0 = 0.0;     ///< reference lumen area, m^2
  double K = 0.0;      ///< elastic stiffness (4/3)sqrt(pi) E h, Pa*m
  double gamma = 0.0;  ///< visco-elastic coefficient multiplying dA/dt / (A0 sqrt(A)), Pa*m*s
  double p_ext = 0.0;  ///< external pressure, Pa
  double rho = 1060.0; ///< blood density, kg/m^3
};

inline double stiffness_from_wall(double E, double h) {
  return 4.0 / 3.0 * std::sqrt(std::numbers::pi) * E * h;
}

/// Visco-elastic coefficient from the wall viscosity phi (Pa*s) and thickness h (m).
inline double viscosity_from_wall(double phi, double h) {
  return 2.0 / 3.0 * std::sqrt(std::numbers::pi) * phi * h;
}

inline double elastic_pressure(double A, const PointParams& p) {
  return p.p_ext + p.K * (std::sqrt(A) - std::sqrt(p.A0)) / p.A0;
}

/// Full tube law: p_ext + K (sqrt(A) - sqrt(A0)) / A0 + gamma dA/dt / (A0 sqrt(A)).
inline double tube_pressure(double A, double dA_dt, const PointParams& p) {
  if (!(A > 0.0)) throw DomainError("tube_pressure: area must be positive");
  const double sqA = std::sqrt(A);
  return p.p_ext + p.K * (sqA - std::sqrt(p.A0)) / p.A0 + p.gamma * dA_dt / (p.A0 * sqA);
}

/// c = sqrt(K sqrt(A) / (2 rho A0)), from c^2 = (A/rho) dP/dA of the elastic law.
inline double wave_speed(double A, const PointParams& p) {
  if (!(A > 0.0)) throw DomainError("wave_speed: area must be positive");
  return std::sqrt(p.K * std::sqrt(A) / (2.0 * p.rho * p.A0));
}

/// Inverse of the elastic law.
inline double area_from_pressure(double P, const PointParams& p) {
  const double sqA = std::sqrt(p.A0) + (P - p.p_ext) * p.A0 / p.K;
  if (!(sqA > 0.0)) throw DomainError("area_from_pressure: pressure collapses the lumen");
  return sqA * sqA;
}

/// Area with wave speed c: sqrt(A) = 2 rho A0 c^2 / K.
inline double area_from_wave_speed(double c, const PointParams& p) {
  const double sqA = 2.0 * p.rho * p.A0 * c * c / p.K;
  return sqA * sqA;
}

/// Characteristic variable u + sign * 4c (sign=+1 forward, -1 backward).
inline double characteristic(double A, double u, int sign, const PointParams& p) {
  return u + sign * 4.0 * wave_speed(A, p);
}

/// Linear characteristic admittance A / (rho c).
inline double admittance(double A, const PointParams& p) {
  return A / (p.rho * wave_speed(A, p));
}

}  // namespace cvcouple::arterial
