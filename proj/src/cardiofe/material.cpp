#include "cvcouple/cardiofe/material.hpp"

#include <cmath>

#include "cvcouple/errors.hpp"

namespace cvcouple::cardiofe {

namespace {

// Contraction weight of a Voigt slot when summing over a symmetric index pair.
constexpr double kPairWeight[6] = {1, 1, 1, 2, 2, 2};

Vec6 contract(const Mat6& D, const Mat3& A) {
  const Vec6 a = to_voigt(A);
  Vec6 out = Vec6::Zero();
  for (int I = 0; I < 6; ++I)
    for (int K = 0; K < 6; ++K) out(I) += D(I, K) * kPairWeight[K] * a(K);
  return out;
}

}  // namespace

Vec6 to_voigt(const Mat3& A) {
  Vec6 v;
  for (int I = 0; I < 6; ++I) v(I) = A(kVoigt[I][0], kVoigt[I][1]);
  return v;
}

Mat3 from_voigt(const Vec6& v) {
  Mat3 A;
  for (int I = 0; I < 6; ++I) {
    A(kVoigt[I][0], kVoigt[I][1]) = v(I);
    A(kVoigt[I][1], kVoigt[I][0]) = v(I);
  }
  return A;
}

Mat6 outer(const Mat3& A, const Mat3& B) { return to_voigt(A) * to_voigt(B).transpose(); }

Mat6 odot(const Mat3& A) {
  Mat6 D;
  for (int I = 0; I < 6; ++I) {
    const int i = kVoigt[I][0], j = kVoigt[I][1];
    for (int J = 0; J < 6; ++J) {
      const int k = kVoigt[J][0], l = kVoigt[J][1];
      D(I, J) = 0.5 * (A(i, k) * A(j, l) + A(i, l) * A(j, k));
    }
  }
  return D;
}

Mat3 FiberFrame::matrix() const {
  Mat3 R;
  R.col(0) = f;
  R.col(1) = s;
  R.col(2) = n;
  return R;
}

PassiveLaw PassiveLaw::guccione(const GuccioneParams& p) {
  PassiveLaw law;
  law.kappa = p.kappa;
  law.C = p.C_guc;
  law.W << p.b_f, p.b_fs, p.b_fs,
           p.b_fs, p.b_t, p.b_t,
           p.b_fs, p.b_t, p.b_t;
  return law;
}

PassiveLaw PassiveLaw::fung(const FungParams& p) {
  PassiveLaw law;
  law.kappa = p.kappa;
  law.C = p.a;
  law.W << p.b_ff, p.b_fs, p.b_fn,
           p.b_fs, p.b_ss, p.b_ns,
           p.b_fn, p.b_ns, p.b_nn;
  return law;
}

void validate(const PassiveLaw& law) {
  if (!(law.kappa > 0.0)) throw ValidationError("material: kappa must be positive");
  if (!(law.C > 0.0)) throw ValidationError("material: stiffness scale must be positive");
  if (!(law.W.minCoeff() >= 0.0)) throw ValidationError("material: exponent weights must be non-negative");
}

double strain_energy(const Mat3& C, const FiberFrame& frame, const PassiveLaw& law) {
  const double detC = C.determinant();
  if (!(detC > 0.0)) throw InvertedElementError("det C <= 0");
  const double lnJ = 0.5 * std::log(detC);
  const double g = std::cbrt(1.0 / detC);
  const Mat3 R = frame.matrix();
  const Mat3 El = R.transpose() * (0.5 * (g * C - Mat3::Identity())) * R;
  const double Q = law.W.cwiseProduct(El).cwiseProduct(El).sum();
  return 0.5 * law.kappa * lnJ * lnJ + 0.5 * law.C * std::expm1(Q);
}

StressTangent passive_stress(const Mat3& C, const FiberFrame& frame, const PassiveLaw& law) {
  const double detC = C.determinant();
  if (!(detC > 0.0)) throw InvertedElementError("det C <= 0");
  const double lnJ = 0.5 * std::log(detC);
  const double g = std::cbrt(1.0 / detC);  // J^(-2/3)
  const Mat3 Ci = C.inverse();
  const Mat3 R = frame.matrix();
  const Mat3 El = R.transpose() * (0.5 * (g * C - Mat3::Identity())) * R;
  const double Q = law.W.cwiseProduct(El).cwiseProduct(El).sum();
  const Mat3 G = R * (2.0 * law.W.cwiseProduct(El)) * R.transpose();  // dQ/dEbar
  const double e = std::exp(Q);

  Mat6 Hq;  // d2Q/dEbar2
  for (int I = 0; I < 6; ++I) {
    const int a = kVoigt[I][0], b = kVoigt[I][1];
    for (int J = 0; J < 6; ++J) {
      const int c = kVoigt[J][0], d = kVoigt[J][1];
      double h = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          h += law.W(i, j) * R(a, i) * R(b, j) * (R(c, i) * R(d, j) + R(d, i) * R(c, j));
      Hq(I, J) = h;
    }
  }
  const Mat3 Sbar = 0.5 * law.C * e * G;
  const Mat6 Hbar = 0.5 * law.C * e * (outer(G, G) + Hq);
  const double T = Sbar.cwiseProduct(C).sum();
  const Mat3 HC = from_voigt(contract(Hbar, C));
  const double CHC = HC.cwiseProduct(C).sum();

  StressTangent out;
  out.S = g * (Sbar - T / 3.0 * Ci) + law.kappa * lnJ * Ci;
  const Mat3 dgT = -2.0 / 3.0 * g * T * Ci + g * g * (HC - CHC / 3.0 * Ci) + 2.0 * g * Sbar;
  out.D = -2.0 / 3.0 * g * outer(Sbar, Ci) + g * g * (Hbar - outer(HC, Ci) / 3.0) - outer(Ci, dgT) / 3.0 +
          2.0 / 3.0 * g * T * odot(Ci) + law.kappa * outer(Ci, Ci) - 2.0 * law.kappa * lnJ * odot(Ci);
  return out;
}

void validate(const ActiveParams& p) {
  if (!(p.S_peak >= 0.0)) throw ValidationError("active: S_peak must be non-negative");
  if (!(p.t_dur > 0.0)) throw ValidationError("active: t_dur must be positive");
  if (!(p.tau_c0 > 0.0) || !(p.tau_r > 0.0)) throw ValidationError("active: time constants must be positive");
  if (!(p.ld_up >= 0.0) || !(p.ld >= 0.0)) throw ValidationError("active: length dependence must be non-negative");
  if (!(p.t_emd >= 0.0)) throw ValidationError("active: t_emd must be non-negative");
  if (!(p.sheet_fraction >= 0.0)) throw ValidationError("active: sheet_fraction must be non-negative");
}

ActiveTension active_tension(double t_s, double lambda, const ActiveParams& p) {
  if (!(t_s > 0.0 && t_s < p.t_dur)) return {};
  const double x = std::tanh(p.ld * (lambda - p.lambda_0));
  const double phi = std::max(x, 0.0);
  const double dphi = x > 0.0 ? p.ld * (1.0 - x * x) : 0.0;
  const double tau_c = p.tau_c0 + p.ld_up * (1.0 - phi);
  const double y = std::tanh(t_s / tau_c);
  const double z = std::tanh((p.t_dur - t_s) / p.tau_r);
  const double T1 = y * y, T2 = z * z;
  const double dT1_dtau = 2.0 * y * (1.0 - y * y) * (-t_s / (tau_c * tau_c));
  ActiveTension a;
  a.S_a = p.S_peak * phi * T1 * T2;
  a.dS_dlambda = p.S_peak * T2 * (dphi * T1 + phi * dT1_dtau * (-p.ld_up * dphi));
  return a;
}

StressTangent active_stress(double t, double t_a, const Mat3& C, const FiberFrame& frame,
                            const ActiveParams& p) {
  StressTangent out;
  const double t_s = t - t_a - p.t_emd;
  if (!(t_s > 0.0 && t_s < p.t_dur)) return out;
  const double l2 = frame.f.dot(C * frame.f);
  const double m2 = frame.s.dot(C * frame.s);
  if (!(l2 > 0.0) || !(m2 > 0.0)) throw InvertedElementError("non-positive fiber stretch");
  const double lambda = std::sqrt(l2);
  const auto a = active_tension(t_s, lambda, p);
  if (a.S_a == 0.0 && a.dS_dlambda == 0.0) return out;
  const Mat3 ff = frame.f * frame.f.transpose();
  const Mat3 ss = frame.s * frame.s.transpose();
  const double k = p.sheet_fraction;
  out.S = a.S_a / l2 * ff + k * a.S_a / m2 * ss;
  out.D = (a.dS_dlambda / (l2 * lambda) - 2.0 * a.S_a / (l2 * l2)) * outer(ff, ff) +
          k * a.dS_dlambda / (lambda * m2) * outer(ss, ff) - 2.0 * k * a.S_a / (m2 * m2) * outer(ss, ss);
  return out;
}

}  // namespace cvcouple::cardiofe
