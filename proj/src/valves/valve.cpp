#include "cvcouple/valves/valve.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>

#include "cvcouple/errors.hpp"

namespace cvcouple::valves {

void validate(const ValveParams& p) {
  if (!(p.K_vo > 0.0) || !(p.K_vc > 0.0)) throw ValidationError("valve: K_vo and K_vc must be positive");
  if (!(p.A_ann > 0.0)) throw ValidationError("valve: A_ann must be positive");
  if (!(p.rho > 0.0)) throw ValidationError("valve: rho must be positive");
  if (!(p.M_st >= 0.0 && p.M_st <= 1.0) || !(p.M_rg >= 0.0 && p.M_rg <= 1.0))
    throw ValidationError("valve: M_st and M_rg must lie in [0, 1]");
  if (p.M_st == 0.0 && p.M_rg == 0.0)
    throw ValidationError("valve: M_st = M_rg = 0 describes an atretic valve without leak");
  if (!(p.xi_min > 0.0 && p.xi_min < 1e-2)) throw ValidationError("valve: xi_min must lie in (0, 0.01)");
  if (!std::isfinite(p.dP_open) || !std::isfinite(p.dP_close))
    throw ValidationError("valve: opening thresholds must be finite");
}

double effective_area(double xi, const ValveParams& p) {
  const double A = (p.M_st * p.A_ann - p.M_rg * p.A_ann) * xi + p.M_rg * p.A_ann;
  if (!(A > 0.0)) throw AtreticValveError("valve effective area is not positive");
  return A;
}

double effective_length(double A_eff) { return 2.0 * std::sqrt(A_eff / std::numbers::pi); }

BernoulliCoeffs bernoulli_coeffs(double A_eff, const ValveParams& p) {
  if (!(A_eff > 0.0)) throw AtreticValveError("valve effective area is not positive");
  return {p.rho / (2.0 * A_eff * A_eff), p.rho * effective_length(A_eff) / A_eff};
}

double advance_xi(double xi, double dP, double dt, const ValveParams& p) {
  if (!(dt > 0.0)) throw DomainError("valve: dt must be positive");
  double out = xi;
  if (dP > p.dP_open) {
    out = 1.0 - (1.0 - xi) * std::exp(-p.K_vo * (dP - p.dP_open) * dt);
  } else if (dP < p.dP_close) {
    out = xi * std::exp(p.K_vc * (dP - p.dP_close) * dt);
  }
  return std::clamp(out, p.xi_min, 1.0);
}

ValveState advance_valve(const ValveState& s, double dP, double dt, const ValveParams& p) {
  ValveState out;
  out.xi = advance_xi(s.xi, dP, dt, p);
  const auto bc = bernoulli_coeffs(effective_area(out.xi, p), p);
  out.Q = (bc.L / dt * s.Q + dP) / (bc.L / dt + bc.B * std::abs(s.Q));
  return out;
}

ValveState advance_valve_implicit(const ValveState& s, double p_up,
                                  const std::function<double(double)>& p_down, double dt,
                                  const ValveParams& p) {
  ValveState out;
  out.xi = advance_xi(s.xi, p_up - p_down(s.Q), dt, p);
  const auto bc = bernoulli_coeffs(effective_area(out.xi, p), p);
  const double a = bc.L / dt + bc.B * std::abs(s.Q);
  const double b = bc.L / dt * s.Q + p_up;
  // G(Q) = a Q - b + p_down(Q) is strictly increasing.
  auto G = [&](double Q) { return a * Q - b + p_down(Q); };
  const double q0 = (b - p_down(s.Q)) / a;
  const double g0 = G(q0);
  if (g0 == 0.0) {
    out.Q = q0;
    return out;
  }
  double step = std::max(std::abs(q0 - s.Q), 1e-9);
  double lo = q0, hi = q0, glo = g0, ghi = g0;
  if (g0 > 0.0) {
    for (int i = 0; i < 200 && glo > 0.0; ++i) {
      hi = lo;
      ghi = glo;
      lo -= step;
      glo = G(lo);
      step *= 2.0;
    }
  } else {
    for (int i = 0; i < 200 && ghi < 0.0; ++i) {
      lo = hi;
      glo = ghi;
      hi += step;
      ghi = G(hi);
      step *= 2.0;
    }
  }
  if (!(glo <= 0.0 && ghi >= 0.0)) throw SolverBlowup("valve flow: could not bracket the implicit update");
  std::uintmax_t iters = 200;
  auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-15 * std::max(std::abs(x), 1e-12); };
  const auto r = boost::math::tools::toms748_solve(G, lo, hi, glo, ghi, tol, iters);
  out.Q = 0.5 * (r.first + r.second);
  return out;
}

}  // namespace cvcouple::valves
