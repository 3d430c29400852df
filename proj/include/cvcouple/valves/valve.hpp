#pragma once

#include <functional>

namespace cvcouple::valves {

struct ValveParams {
  double K_vo = 0.0;      // 1/(Pa s)
  double K_vc = 0.0;      // 1/(Pa s)
  double dP_open = 0.0;   // Pa
  double dP_close = 0.0;  // Pa
  double M_st = 1.0;
  double M_rg = 0.0;
  double A_ann = 0.0;     // m^2
  double rho = 1060.0;    // kg/m^3
  double xi_min = 1e-6;
};

struct ValveState {
  double xi = 1e-6;
  double Q = 0.0;  // m^3/s, positive downstream
};

struct BernoulliCoeffs {
  double B = 0.0;  // Pa s^2 / m^6
  double L = 0.0;  // Pa s^2 / m^3
};

/// Throws ValidationError on inadmissible parameters.
void validate(const ValveParams& p);

/// (M_st - M_rg) A_ann xi + M_rg A_ann. Throws AtreticValveError when not positive.
double effective_area(double xi, const ValveParams& p);

/// Diameter of a circle of area A_eff.
double effective_length(double A_eff);

/// B = rho / (2 A^2), L = rho l_eff / A. Throws AtreticValveError for A_eff <= 0.
BernoulliCoeffs bernoulli_coeffs(double A_eff, const ValveParams& p);

/// Exact solution of the opening/closing law over dt at constant dP, clamped to [xi_min, 1].
double advance_xi(double xi, double dP, double dt, const ValveParams& p);

/// xi update, then L dQ/dt = dP - B Q|Q| with B |Q^n| Q^{n+1} and the updated coefficients.
ValveState advance_valve(const ValveState& s, double dP, double dt, const ValveParams& p);

/// As advance_valve, with the downstream pressure a non-decreasing function of the new flow.
/// The opening law sees dP = p_up - p_down(Q^n).
ValveState advance_valve_implicit(const ValveState& s, double p_up,
                                  const std::function<double(double)>& p_down, double dt,
                                  const ValveParams& p);

}  // namespace cvcouple::valves
