#pragma once

#include <Eigen/Dense>

namespace cvcouple::cardiofe {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Voigt order 11, 22, 33, 12, 23, 13. Stresses are stored as tensor components, strain
/// increments with engineering shears, so that dS = D * dE_voigt.
inline constexpr int kVoigt[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 2}, {0, 2}};

Vec6 to_voigt(const Mat3& A);
Mat3 from_voigt(const Vec6& v);
/// (A (x) B)_ijkl = A_ij B_kl
Mat6 outer(const Mat3& A, const Mat3& B);
/// (A (.) A)_ijkl = (A_ik A_jl + A_il A_jk) / 2
Mat6 odot(const Mat3& A);

/// Columns f0, s0, n0.
struct FiberFrame {
  Vec3 f = Vec3::UnitX();
  Vec3 s = Vec3::UnitY();
  Vec3 n = Vec3::UnitZ();
  Mat3 matrix() const;
};

struct GuccioneParams {
  double kappa = 650e3;
  double C_guc = 1e3;
  double b_f = 18.48;
  double b_t = 3.58;
  double b_fs = 1.627;
};

/// Six-weight variant: a/2 (exp(Q) - 1) with Q = sum of weighted squared frame strains.
struct FungParams {
  double kappa = 650e3;
  double a = 0.8e3;
  double b_ff = 5.0;
  double b_ss = 6.0;
  double b_nn = 3.0;
  double b_fs = 10.0;
  double b_fn = 2.0;
  double b_ns = 2.0;
};

/// Psi = kappa/2 (ln J)^2 + C/2 (exp(Q) - 1), Q = sum_ij W_ij (R^T Ebar R)_ij^2 in the fiber frame R.
struct PassiveLaw {
  double kappa = 650e3;
  double C = 1e3;
  Mat3 W = Mat3::Zero();

  static PassiveLaw guccione(const GuccioneParams& p);
  static PassiveLaw fung(const FungParams& p);
};

/// Throws ValidationError on non-positive moduli or negative weights.
void validate(const PassiveLaw& law);

struct StressTangent {
  Mat3 S = Mat3::Zero();
  Mat6 D = Mat6::Zero();  // dS/dE
};

/// Throws InvertedElementError when det C <= 0.
double strain_energy(const Mat3& C, const FiberFrame& frame, const PassiveLaw& law);
StressTangent passive_stress(const Mat3& C, const FiberFrame& frame, const PassiveLaw& law);

struct ActiveParams {
  double S_peak = 60e3;
  double t_dur = 0.575;
  double tau_c0 = 0.105;
  double tau_r = 0.090;
  double ld = 35.0;
  double ld_up = 0.100;
  double lambda_0 = 0.7;
  double t_emd = 0.015;
  double sheet_fraction = 0.4;
};

void validate(const ActiveParams& p);

struct ActiveTension {
  double S_a = 0.0;
  double dS_dlambda = 0.0;
};

/// Scalar tension at t_s = t - t_a - t_emd; zero outside (0, t_dur). phi is clamped at zero below lambda_0.
ActiveTension active_tension(double t_s, double lambda, const ActiveParams& p);

/// S_a (f.Cf)^-1 f(x)f + sheet_fraction S_a (s.Cs)^-1 s(x)s with lambda = sqrt(f.Cf).
StressTangent active_stress(double t, double t_a, const Mat3& C, const FiberFrame& frame,
                            const ActiveParams& p);

}  // namespace cvcouple::cardiofe
