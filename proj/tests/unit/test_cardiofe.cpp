#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "cvcouple/cardiofe/model.hpp"
#include "cvcouple/errors.hpp"

using namespace cvcouple;
using namespace cvcouple::cardiofe;

namespace {

Mat3 random_small_strain_C(std::mt19937_64& rng, double amp) {
  std::uniform_real_distribution<double> U(-amp, amp);
  Mat3 F = Mat3::Identity();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) F(i, j) += U(rng);
  return F.transpose() * F;
}

FiberFrame tilted_frame() {
  FiberFrame fr;
  const double a = 0.7;
  fr.f = Vec3(std::cos(a), std::sin(a), 0.0);
  fr.n = Vec3(0.0, 0.0, 1.0);
  fr.s = fr.n.cross(fr.f);
  return fr;
}

// dE with engineering shear for Voigt slot J.
Mat3 unit_strain(int J) {
  Mat3 E = Mat3::Zero();
  const int i = kVoigt[J][0], j = kVoigt[J][1];
  if (i == j) E(i, i) = 1.0;
  else E(i, j) = E(j, i) = 0.5;
  return E;
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / b.norm(); }

/// Outward boundary faces of a tet mesh.
std::vector<Tri> boundary_faces(const TetMesh& m) {
  std::map<std::array<int, 3>, Tri> faces;
  for (const auto& t : m.tets) {
    const Tri local[4] = {{t[1], t[2], t[3]}, {t[0], t[3], t[2]}, {t[0], t[1], t[3]}, {t[0], t[2], t[1]}};
    for (const auto& f : local) {
      std::array<int, 3> key = f;
      std::sort(key.begin(), key.end());
      if (!faces.erase(key)) faces.emplace(key, f);
    }
  }
  std::vector<Tri> out;
  for (const auto& [k, f] : faces) out.push_back(f);
  return out;
}

/// Two tets glued along a face; the whole boundary is tagged as a closed pressure surface.
TetMesh two_tets() {
  TetMesh m;
  m.nodes = {Vec3(0, 0, 0), Vec3(0.01, 0, 0), Vec3(0, 0.01, 0), Vec3(0, 0, 0.01), Vec3(0.008, 0.008, 0.009)};
  m.tets = {{0, 1, 2, 3}, {1, 2, 3, 4}};
  if (tet_volume(m, 1) < 0) std::swap(m.tets[1][0], m.tets[1][1]);
  m.fibers = {tilted_frame(), tilted_frame()};
  m.closure = boundary_faces(m);
  return m;
}

TetMesh coarse_lv(double h = 0.02) {
  LVGeometry g;
  g.element_size = h;
  return generate_idealized_lv(g);
}

VectorXd random_vector(Eigen::Index n, double amp, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-amp, amp);
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = U(rng);
  return v;
}

LVModelParams plain_params() {
  LVModelParams p;
  p.law = PassiveLaw::guccione({});
  return p;
}

double max_abs_J_minus_1(const TetMesh& m, const VectorXd& u) {
  double worst = 0.0;
  for (std::size_t e = 0; e < m.tets.size(); ++e) {
    const auto& t = m.tets[e];
    Mat3 dX, dx;
    for (int k = 0; k < 3; ++k) {
      dX.col(k) = m.nodes[t[k + 1]] - m.nodes[t[0]];
      dx.col(k) = dX.col(k) + u.segment<3>(3 * t[k + 1]) - u.segment<3>(3 * t[0]);
    }
    worst = std::max(worst, std::abs(dx.determinant() / dX.determinant() - 1.0));
  }
  return worst;
}

/// Static inflation in equal pressure increments; returns the report of the last increment.
StaticSolveReport inflate(const LVModel& model, VectorXd& u, double p, int steps, double tol = 1e-10) {
  StaticSolveReport rep;
  for (int k = 1; k <= steps; ++k) rep = solve_static(model, u, p * k / steps, 0.0, tol);
  return rep;
}

}  // namespace

// ---------------------------------------------------------------- material

TEST(PassiveLaw, ReferenceIsStressFree) {
  for (const auto& law : {PassiveLaw::guccione({}), PassiveLaw::fung({})}) {
    const auto st = passive_stress(Mat3::Identity(), tilted_frame(), law);
    EXPECT_EQ(st.S.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(strain_energy(Mat3::Identity(), tilted_frame(), law), 0.0);
  }
}

TEST(PassiveLaw, StressMatchesEnergyDerivative) {
  std::mt19937_64 rng(11);
  for (const auto& law : {PassiveLaw::guccione({}), PassiveLaw::fung({})}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Mat3 C = random_small_strain_C(rng, 0.08);
      const Mat3 S = passive_stress(C, tilted_frame(), law).S;
      Mat3 S_fd;
      const double eps = 1e-6;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          Mat3 dE = Mat3::Zero();
          dE(i, j) += 0.5;
          dE(j, i) += 0.5;
          S_fd(i, j) = (strain_energy(C + 2 * eps * dE, tilted_frame(), law) -
                        strain_energy(C - 2 * eps * dE, tilted_frame(), law)) /
                       (2 * eps);
        }
      EXPECT_LT(rel_err(S, S_fd), 1e-6);
    }
  }
}

TEST(PassiveLaw, TangentMatchesStressDerivative) {
  std::mt19937_64 rng(12);
  for (const auto& law : {PassiveLaw::guccione({}), PassiveLaw::fung({})}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Mat3 C = random_small_strain_C(rng, 0.08);
      const Mat6 D = passive_stress(C, tilted_frame(), law).D;
      Mat6 D_fd;
      const double eps = 1e-6;
      for (int J = 0; J < 6; ++J) {
        const Mat3 dC = 2 * eps * unit_strain(J);
        D_fd.col(J) = to_voigt(passive_stress(C + dC, tilted_frame(), law).S -
                               passive_stress(C - dC, tilted_frame(), law).S) /
                      (2 * eps);
      }
      EXPECT_LT(rel_err(D, D_fd), 1e-6);
      EXPECT_LT((D - D.transpose()).norm(), 1e-9 * D.norm());
    }
  }
}

TEST(PassiveLaw, PureDilatationLoadsOnlyTheBulkTerm) {
  const auto law = PassiveLaw::guccione({});
  const double lam = 1.03;
  const Mat3 C = lam * lam * Mat3::Identity();
  const double lnJ = 3.0 * std::log(lam);
  EXPECT_NEAR(strain_energy(C, tilted_frame(), law), 0.5 * law.kappa * lnJ * lnJ, 1e-9);
  const Mat3 S_expected = law.kappa * lnJ / (lam * lam) * Mat3::Identity();
  EXPECT_LT((passive_stress(C, tilted_frame(), law).S - S_expected).norm(), 1e-10 * S_expected.norm());
}

TEST(PassiveLaw, InvertedDeformationThrows) {
  Mat3 C = Mat3::Identity();
  C(2, 2) = -1.0;
  EXPECT_THROW(passive_stress(C, tilted_frame(), PassiveLaw::guccione({})), InvertedElementError);
  EXPECT_THROW(strain_energy(Mat3::Zero(), tilted_frame(), PassiveLaw::guccione({})), InvertedElementError);
}

TEST(PassiveLaw, RejectsBadParameters) {
  GuccioneParams g;
  g.kappa = 0;
  EXPECT_THROW(validate(PassiveLaw::guccione(g)), ValidationError);
  g = {};
  g.b_t = -1;
  EXPECT_THROW(validate(PassiveLaw::guccione(g)), ValidationError);
  FungParams f;
  f.a = -5;
  EXPECT_THROW(validate(PassiveLaw::fung(f)), ValidationError);
}

TEST(ActiveTension, ZeroOutsideSupport) {
  ActiveParams p;
  for (double ts : {-0.1, 0.0, p.t_dur, p.t_dur + 0.2}) EXPECT_EQ(active_tension(ts, 1.0, p).S_a, 0.0);
}

TEST(ActiveTension, NoTensionAtOrBelowLowerStretch) {
  ActiveParams p;
  EXPECT_EQ(active_tension(0.2, p.lambda_0, p).S_a, 0.0);
  EXPECT_EQ(active_tension(0.2, 0.6, p).S_a, 0.0);
}

TEST(ActiveTension, MidTransientMatchesScalarFormula) {
  using big = boost::multiprecision::cpp_bin_float_50;
  ActiveParams p;
  const double ts = p.t_dur / 2;
  const big phi = tanh(big(35) * (big(1) - big("0.7")));
  const big tau_c = big("0.105") + big("0.100") * (1 - phi);
  const big T1 = tanh(big(ts) / tau_c), T2 = tanh((big("0.575") - big(ts)) / big("0.090"));
  const double expected = static_cast<double>(big(60000) * phi * T1 * T1 * T2 * T2);
  EXPECT_NEAR(active_tension(ts, 1.0, p).S_a, expected, 1e-12 * expected);
}

TEST(ActiveTension, NonNegativeAndDerivativeConsistent) {
  ActiveParams p;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> T(-0.1, 0.7), L(0.72, 1.4);
  for (int i = 0; i < 2000; ++i) {
    const double ts = T(rng), lam = L(rng);
    const auto a = active_tension(ts, lam, p);
    EXPECT_GE(a.S_a, 0.0);
    if (ts > 0 && ts < p.t_dur) {
      const double h = 1e-5;
      const double fd = (active_tension(ts, lam + h, p).S_a - active_tension(ts, lam - h, p).S_a) / (2 * h);
      EXPECT_NEAR(a.dS_dlambda, fd, 1e-6 * (std::abs(fd) + p.S_peak));
    }
  }
}

TEST(ActiveStress, TangentMatchesStressDerivative) {
  ActiveParams p;
  std::mt19937_64 rng(9);
  const FiberFrame fr = tilted_frame();
  for (int trial = 0; trial < 5; ++trial) {
    const Mat3 C = random_small_strain_C(rng, 0.05);
    const double t = 0.2;
    const auto st = active_stress(t, 0.0, C, fr, p);
    ASSERT_GT(st.S.norm(), 0.0);
    Mat6 D_fd;
    const double eps = 1e-7;
    for (int J = 0; J < 6; ++J) {
      const Mat3 dC = 2 * eps * unit_strain(J);
      D_fd.col(J) = to_voigt(active_stress(t, 0.0, C + dC, fr, p).S - active_stress(t, 0.0, C - dC, fr, p).S) / (2 * eps);
    }
    EXPECT_LT(rel_err(st.D, D_fd), 1e-6);
  }
}

TEST(ActiveStress, SheetCarriesFixedFraction) {
  ActiveParams p;
  const auto st = active_stress(0.3, 0.0, Mat3::Identity(), FiberFrame{}, p);
  const double Sa = active_tension(0.3 - p.t_emd, 1.0, p).S_a;
  EXPECT_NEAR(st.S(0, 0), Sa, 1e-12 * Sa);
  EXPECT_NEAR(st.S(1, 1), 0.4 * Sa, 1e-12 * Sa);
  EXPECT_EQ(st.S(2, 2), 0.0);
}

// ---------------------------------------------------------------- mesh

TEST(LVMesh, SphericalShellCavityVolume) {
  LVGeometry g;
  g.a_endo = g.c_endo = 1.0;
  g.a_epi = g.c_epi = 1.2;
  g.z_base.reset();
  g.layers = 1;
  g.element_size = 0.12;
  const TetMesh m = generate_idealized_lv(g);
  EXPECT_GT(m.tets.size(), 4000u);
  LVModel model(m, plain_params());
  const double V = model.cavity_volume(VectorXd::Zero(model.n_dofs()));
  EXPECT_LT(std::abs(V / (4.0 / 3.0 * M_PI) - 1.0), 0.005);
}

TEST(LVMesh, DefaultGeometryIsValid) {
  const TetMesh m = generate_idealized_lv({});
  EXPECT_NO_THROW(validate(m));
  for (std::size_t e = 0; e < m.tets.size(); ++e) {
    EXPECT_GT(tet_volume(m, e), 0.0);
    EXPECT_NEAR(m.fibers[e].f.norm(), 1.0, 1e-12);
    EXPECT_NEAR(m.fibers[e].s.norm(), 1.0, 1e-12);
    EXPECT_NEAR(m.fibers[e].n.norm(), 1.0, 1e-12);
  }
  EXPECT_GT(min_dihedral_angle(m), 10.0);
  EXPECT_FALSE(m.endo.empty());
  EXPECT_FALSE(m.epi.empty());
  EXPECT_FALSE(m.base.empty());
  EXPECT_FALSE(m.closure.empty());
  EXPECT_NO_THROW(cavity_surface(m));
}

TEST(LVMesh, FibersRotateThroughTheWall) {
  const TetMesh m = generate_idealized_lv({});
  // Helix angle relative to the local circumferential direction, positive towards the base.
  double endo_mean = 0, epi_mean = 0;
  int n_endo = 0, n_epi = 0;
  const double r_mid = 0.030;
  for (std::size_t e = 0; e < m.tets.size(); ++e) {
    const Vec3 c = tet_centroid(m, e);
    if (c.z() < -0.02 || c.z() > 0.0) continue;
    const Vec3 ec = Vec3(-c.y(), c.x(), 0).normalized();
    const double angle = std::atan2(m.fibers[e].f.z(), m.fibers[e].f.dot(ec)) * 180 / M_PI;
    const double r = std::hypot(c.x(), c.y());
    if (r < r_mid - 0.002) endo_mean += angle, ++n_endo;
    if (r > r_mid + 0.002) epi_mean += angle, ++n_epi;
  }
  ASSERT_GT(n_endo, 0);
  ASSERT_GT(n_epi, 0);
  EXPECT_GT(endo_mean / n_endo, 20.0);
  EXPECT_LT(epi_mean / n_epi, -20.0);
}

TEST(LVMesh, RejectsInconsistentGeometry) {
  LVGeometry g;
  g.a_epi = g.a_endo * 0.9;
  EXPECT_THROW(generate_idealized_lv(g), GeometryError);
  g = {};
  g.z_base = 0.2;
  EXPECT_THROW(generate_idealized_lv(g), GeometryError);
  g = {};
  g.element_size = 0;
  EXPECT_THROW(generate_idealized_lv(g), GeometryError);
}

TEST(LVMesh, FileRoundTripIsExact) {
  const TetMesh m = coarse_lv(0.012);
  const auto path = std::filesystem::temp_directory_path() / "cvcouple_roundtrip.mesh";
  write_mesh(m, path);
  const TetMesh r = read_mesh(path);
  std::filesystem::remove(path);
  ASSERT_EQ(r.nodes.size(), m.nodes.size());
  for (std::size_t i = 0; i < m.nodes.size(); ++i) EXPECT_TRUE(r.nodes[i] == m.nodes[i]);
  EXPECT_EQ(r.tets, m.tets);
  for (std::size_t e = 0; e < m.tets.size(); ++e) {
    EXPECT_TRUE(r.fibers[e].f == m.fibers[e].f);
    EXPECT_TRUE(r.fibers[e].s == m.fibers[e].s);
    EXPECT_TRUE(r.fibers[e].n == m.fibers[e].n);
  }
  EXPECT_EQ(r.endo, m.endo);
  EXPECT_EQ(r.epi, m.epi);
  EXPECT_EQ(r.base, m.base);
  EXPECT_EQ(r.closure, m.closure);
}

TEST(LVMesh, MalformedFileRejected) {
  const auto path = std::filesystem::temp_directory_path() / "cvcouple_bad.mesh";
  {
    std::ofstream f(path);
    f << "cvcouple-tetmesh 1\nnodes 2\n0 0 0\n";
  }
  EXPECT_THROW(read_mesh(path), FormatError);
  std::filesystem::remove(path);
  EXPECT_THROW(read_mesh(path), IoError);
}

TEST(Activation, UniformIsConstant) {
  const TetMesh m = coarse_lv();
  ActivationSpec spec;
  spec.t0 = 0.0;
  for (double t : prescribe_activation(m, spec)) EXPECT_EQ(t, 0.0);
}

TEST(Activation, ApexToBaseLatestTimeIsFarthestDistanceOverVelocity) {
  const TetMesh m = coarse_lv(0.01);
  ActivationSpec spec;
  spec.mode = ActivationSpec::Mode::apex_to_base;
  const auto t = prescribe_activation(m, spec);
  Vec3 apex = m.nodes[0];
  for (const auto& x : m.nodes)
    if (x.z() < apex.z()) apex = x;
  double d_max = 0;
  for (const auto& tet : m.tets) {
    const Vec3 c = (m.nodes[tet[0]] + m.nodes[tet[1]] + m.nodes[tet[2]] + m.nodes[tet[3]]) / 4.0;
    d_max = std::max(d_max, (c - apex).norm());
  }
  EXPECT_NEAR(*std::max_element(t.begin(), t.end()), d_max / 0.6, 1e-12);
}

TEST(Activation, DoublingVelocityHalvesTimes) {
  const TetMesh m = coarse_lv();
  ActivationSpec spec;
  spec.mode = ActivationSpec::Mode::apex_to_base;
  const auto t1 = prescribe_activation(m, spec);
  spec.velocity *= 2;
  const auto t2 = prescribe_activation(m, spec);
  for (std::size_t e = 0; e < t1.size(); ++e) EXPECT_NEAR(t2[e], 0.5 * t1[e], 1e-15);
  spec.velocity = 0;
  EXPECT_THROW(prescribe_activation(m, spec), ValidationError);
}

// ---------------------------------------------------------------- model

TEST(LVModel, ReferenceIsResidualFree) {
  LVModel model(coarse_lv(), plain_params());
  const VectorXd R = model.residual(VectorXd::Zero(model.n_dofs()), 0.0, 0.0);
  EXPECT_EQ(R.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LVModel, OpenCavityRejected) {
  TetMesh m = coarse_lv();
  m.closure.clear();
  EXPECT_THROW(LVModel(m, plain_params()), TopologyError);
}

TEST(LVModel, ActivationSizeChecked) {
  auto p = plain_params();
  p.t_a = {0.0};
  EXPECT_THROW(LVModel(coarse_lv(), p), ValidationError);
}

TEST(LVModel, JacobianMatchesFiniteDifferencesOnTwoElements) {
  const TetMesh m = two_tets();
  auto params = plain_params();
  params.t_a = {0.0, 0.0};
  LVModel model(m, params);
  const VectorXd u = random_vector(model.n_dofs(), 4e-4, 3);
  for (double t : {0.0, 0.2}) {
    const double p = 800.0;
    VectorXd R;
    SpMat K;
    model.assemble(u, p, t, R, K);
    const Eigen::MatrixXd Kd(K);
    Eigen::MatrixXd Kfd(model.n_dofs(), model.n_dofs());
    const double h = 1e-8;
    for (Eigen::Index j = 0; j < model.n_dofs(); ++j) {
      VectorXd up = u, um = u;
      up(j) += h;
      um(j) -= h;
      Kfd.col(j) = (model.residual(up, p, t) - model.residual(um, p, t)) / (2 * h);
    }
    for (Eigen::Index j = 0; j < model.n_dofs(); ++j) EXPECT_LT(rel_err(Kd.col(j), Kfd.col(j)), 1e-5) << j;
  }
}

TEST(LVModel, DirectionalDerivativeMatchesTangent) {
  const TetMesh m = coarse_lv();
  auto params = plain_params();
  params.t_a = prescribe_activation(m, {ActivationSpec::Mode::apex_to_base, 0.0, 0.6});
  LVModel model(m, params);
  const VectorXd u = random_vector(model.n_dofs(), 3e-4, 4);
  const VectorXd d = random_vector(model.n_dofs(), 1.0, 5);
  const double eps = 1e-6 * u.cwiseAbs().maxCoeff();
  for (double t : {0.0, 0.15}) {
    VectorXd R;
    SpMat K;
    model.assemble(u, 1200.0, t, R, K);
    const VectorXd fd = (model.residual(u + eps * d, 1200.0, t) - R) / eps;
    EXPECT_LT(rel_err(K * d, fd), 1e-6);
  }
}

TEST(LVModel, TangentSymmetricWithoutPressure) {
  LVModel model(coarse_lv(), plain_params());
  const VectorXd u = random_vector(model.n_dofs(), 3e-4, 6);
  VectorXd R;
  SpMat K;
  model.assemble(u, 0.0, 0.0, R, K);
  const SpMat asym = K - SpMat(K.transpose());
  EXPECT_LT(asym.norm(), 1e-10 * K.norm());
}

TEST(LVModel, PressureResultantVanishesOnClosedCavity) {
  const TetMesh m = coarse_lv(0.012);
  auto params = plain_params();
  params.springs = {0.0, 0.0};
  const Vec3 apex = apex_point(m);
  int A = 0, B = 0, C = 0;
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    if (m.nodes[i] == apex) A = static_cast<int>(i);
    if (m.nodes[i].x() > m.nodes[B].x()) B = static_cast<int>(i);
    if (m.nodes[i].y() > m.nodes[C].y()) C = static_cast<int>(i);
  }
  params.fixed_dofs = {3 * A, 3 * A + 1, 3 * A + 2, 3 * B, 3 * B + 1, 3 * C};
  LVModel model(m, params);
  const double p = 200.0;
  VectorXd u = VectorXd::Zero(model.n_dofs());
  inflate(model, u, p, 4);
  const VectorXd Rraw = model.residual(u, p, 0.0, true);
  Vec3 reaction = Vec3::Zero();
  for (std::size_t i = 0; i < m.nodes.size(); ++i) reaction += Rraw.segment<3>(3 * i);
  double area = 0.0;
  for (const auto& t : model.cavity())
    area += 0.5 * (m.nodes[t[1]] - m.nodes[t[0]]).cross(m.nodes[t[2]] - m.nodes[t[0]]).norm();
  EXPECT_GT(u.norm(), 1e-4);
  EXPECT_LT(reaction.norm(), 1e-8 * p * area);
}

TEST(LVModel, VolumeGradientMatchesFiniteDifferences) {
  LVModel model(coarse_lv(), plain_params());
  const VectorXd u = random_vector(model.n_dofs(), 5e-4, 7);
  const VectorXd b = model.volume_gradient(u);
  for (unsigned seed : {8u, 9u, 10u}) {
    const VectorXd d = random_vector(model.n_dofs(), 1.0, seed);
    const double eps = 1e-7;
    const double fd = (model.cavity_volume(u + eps * d) - model.cavity_volume(u - eps * d)) / (2 * eps);
    EXPECT_NEAR(b.dot(d), fd, 1e-6 * std::abs(fd));
  }
}

TEST(LVModel, VolumeGradientOrthogonalToTranslation) {
  LVModel model(coarse_lv(), plain_params());
  const VectorXd u = random_vector(model.n_dofs(), 5e-4, 11);
  const VectorXd b = model.volume_gradient(u);
  VectorXd d(model.n_dofs());
  for (Eigen::Index i = 0; i < d.size(); i += 3) d.segment<3>(i) = Vec3(0.3, -1.1, 0.7);
  EXPECT_LT(std::abs(b.dot(d)), 1e-10 * b.norm() * d.norm());
}

TEST(LVModel, PressureColumnIsVolumeGradient) {
  LVModel model(coarse_lv(0.01), plain_params());
  const VectorXd u = random_vector(model.n_dofs(), 5e-4, 12);
  const VectorXd b = model.volume_gradient(u);
  EXPECT_LT((model.pressure_column(u) - b).norm(), 1e-10 * b.norm());
  // dR/dp from the residual itself.
  const VectorXd fd = (model.residual(u, 1.0, 0.0) - model.residual(u, 0.0, 0.0));
  EXPECT_LT((fd + b).norm(), 1e-8 * b.norm());
}

TEST(LVModel, VolumeInvariantUnderTranslation) {
  LVModel model(coarse_lv(), plain_params());
  const VectorXd u0 = VectorXd::Zero(model.n_dofs());
  VectorXd d(model.n_dofs());
  for (Eigen::Index i = 0; i < d.size(); i += 3) d.segment<3>(i) = Vec3(0.013, -0.021, 0.008);
  const double V0 = model.cavity_volume(u0);
  EXPECT_NEAR(model.cavity_volume(d), V0, 1e-12 * V0);
}

TEST(LVModel, VolumeScalesCubically) {
  const TetMesh m = coarse_lv();
  LVModel model(m, plain_params());
  const double eps = 0.04;
  VectorXd u(model.n_dofs());
  for (std::size_t i = 0; i < m.nodes.size(); ++i) u.segment<3>(3 * i) = eps * m.nodes[i];
  const double V0 = model.cavity_volume(VectorXd::Zero(model.n_dofs()));
  EXPECT_NEAR(model.cavity_volume(u), std::pow(1 + eps, 3) * V0, 1e-10 * V0);
}

TEST(LVModel, StaticInflationConvergesQuadratically) {
  LVModel model(coarse_lv(0.012), plain_params());
  VectorXd u = VectorXd::Zero(model.n_dofs());
  const auto rep = inflate(model, u, 1500.0, 6, 1e-9);
  const auto& r = rep.residuals;
  ASSERT_GE(r.size(), 3u);
  const std::size_t k = r.size() - 1;
  const double order = std::log(r[k] / r[k - 1]) / std::log(r[k - 1] / r[k - 2]);
  EXPECT_GE(order, 1.8) << r[k - 2] << " " << r[k - 1] << " " << r[k];
  EXPECT_GT(model.cavity_volume(u), model.cavity_volume(VectorXd::Zero(model.n_dofs())));
}

TEST(LVModel, RigidRotationGivesRotatedSolution) {
  const TetMesh m = coarse_lv(0.012);
  const Mat3 Q = Eigen::AngleAxisd(0.9, Vec3(1, 2, -0.5).normalized()).toRotationMatrix();
  TetMesh mr = m;
  for (auto& x : mr.nodes) x = Q * x;
  for (auto& f : mr.fibers) f = {Q * f.f, Q * f.s, Q * f.n};
  LVModel a(m, plain_params()), b(mr, plain_params());
  VectorXd ua = VectorXd::Zero(a.n_dofs()), ub = ua;
  inflate(a, ua, 1500.0, 6);
  inflate(b, ub, 1500.0, 6);
  const double Va = a.cavity_volume(ua), Vb = b.cavity_volume(ub);
  EXPECT_NEAR(Vb, Va, 1e-8 * Va);
  double diff = 0;
  for (std::size_t i = 0; i < m.nodes.size(); ++i)
    diff = std::max(diff, (Q * ua.segment<3>(3 * i) - ub.segment<3>(3 * i)).norm());
  EXPECT_LT(diff, 1e-8 * ua.cwiseAbs().maxCoeff());
}

TEST(LVModel, StifferBulkModulusLimitsVolumeChange) {
  const TetMesh m = coarse_lv(0.012);
  double worst[2];
  for (int k = 0; k < 2; ++k) {
    auto params = plain_params();
    params.law.kappa *= k == 0 ? 1.0 : 10.0;
    LVModel model(m, params);
    VectorXd u = VectorXd::Zero(model.n_dofs());
    inflate(model, u, 1000.0, 4);
    worst[k] = max_abs_J_minus_1(m, u);
  }
  EXPECT_GE(worst[0] / worst[1], 5.0);
}

TEST(LVModel, InvertedElementDetected) {
  const TetMesh m = two_tets();
  LVModel model(m, plain_params());
  VectorXd u = VectorXd::Zero(model.n_dofs());
  u.segment<3>(0) = Vec3(0.02, 0.02, 0.02);
  EXPECT_THROW(model.residual(u, 0.0, 0.0), InvertedElementError);
}

TEST(LVModel, PeriodicActivation) {
  auto params = plain_params();
  params.period = 0.8;
  LVModel model(coarse_lv(), params);
  EXPECT_NEAR(model.beat_time(1.75), 0.15, 1e-12);
  EXPECT_NEAR(model.beat_time(0.3), 0.3, 0.0);
}

TEST(LVModel, ConstrainedDofsStayFixed) {
  auto params = plain_params();
  params.fixed_dofs = {0, 1, 2};
  LVModel model(coarse_lv(), params);
  VectorXd u = VectorXd::Zero(model.n_dofs());
  inflate(model, u, 1000.0, 4);
  EXPECT_EQ(u.head<3>().cwiseAbs().maxCoeff(), 0.0);
  params.fixed_dofs = {-1};
  EXPECT_THROW(LVModel(coarse_lv(), params), ValidationError);
}

// ---------------------------------------------------------------- dynamics

TEST(GeneralizedAlpha, SpectralRadiusLimits) {
  const auto g0 = GeneralizedAlpha::from_rho_inf(0.0);
  EXPECT_DOUBLE_EQ(g0.alpha_m, -1.0);
  EXPECT_DOUBLE_EQ(g0.alpha_f, 0.0);
  EXPECT_DOUBLE_EQ(g0.gamma, 1.5);
  EXPECT_DOUBLE_EQ(g0.beta, 1.0);
  const auto g1 = GeneralizedAlpha::from_rho_inf(1.0);
  EXPECT_DOUBLE_EQ(g1.alpha_m, 0.5);
  EXPECT_DOUBLE_EQ(g1.alpha_f, 0.5);
  EXPECT_DOUBLE_EQ(g1.gamma, 0.5);
  EXPECT_DOUBLE_EQ(g1.beta, 0.25);
  EXPECT_THROW(GeneralizedAlpha::from_rho_inf(1.5), ValidationError);
}

TEST(DynamicSolid, RestStaysAtRest) {
  LVModel model(coarse_lv(), plain_params());
  DynamicSolid solid(model, {});
  const FEState s0 = rest_state(model);
  EXPECT_EQ(solid.residual(s0, 1e-3, s0.u, 0.0).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(solid.residual(s0, 0.0, s0.u, 0.0), DomainError);
}

TEST(DynamicSolid, TangentAndPressureColumnMatchFiniteDifferences) {
  const TetMesh m = coarse_lv();
  auto params = plain_params();
  params.t_a = std::vector<double>(m.tets.size(), 0.0);
  LVModel model(m, params);
  for (double rho_inf : {0.0, 0.5}) {
    DynamicsParams dp;
    dp.rho_inf = rho_inf;
    DynamicSolid solid(model, dp);
    FEState prev = rest_state(model);
    prev.u = random_vector(model.n_dofs(), 2e-4, 13);
    prev.v = random_vector(model.n_dofs(), 1e-2, 14);
    prev.a = random_vector(model.n_dofs(), 1.0, 15);
    prev.time = 0.1;
    prev.p = 900.0;
    const double dt = 1e-3;
    const VectorXd u = prev.u + random_vector(model.n_dofs(), 5e-5, 16);
    const double p = 1100.0;
    VectorXd R, dRdp;
    SpMat K;
    solid.assemble(prev, dt, u, p, R, K, dRdp);
    EXPECT_LT((R - solid.residual(prev, dt, u, p)).norm(), 1e-12 * R.norm());
    const VectorXd d = random_vector(model.n_dofs(), 1.0, 17);
    const double eps = 1e-9;
    const VectorXd fd = (solid.residual(prev, dt, u + eps * d, p) - solid.residual(prev, dt, u - eps * d, p)) / (2 * eps);
    EXPECT_LT(rel_err(K * d, fd), 1e-6);
    const VectorXd fdp = (solid.residual(prev, dt, u, p + 1.0) - solid.residual(prev, dt, u, p - 1.0)) / 2.0;
    EXPECT_LT(rel_err(dRdp, fdp), 1e-6);
  }
}

TEST(DynamicSolid, NewmarkUpdateIsConsistent) {
  LVModel model(coarse_lv(), plain_params());
  DynamicSolid solid(model, {});
  FEState prev = rest_state(model);
  prev.v = random_vector(model.n_dofs(), 1e-2, 18);
  prev.a = random_vector(model.n_dofs(), 1.0, 19);
  const double dt = 2e-3;
  // Under beta = 1, gamma = 1.5 the update reproduces a constant acceleration field a*.
  const VectorXd a_star = random_vector(model.n_dofs(), 1.0, 20);
  const VectorXd u = prev.u + dt * prev.v + dt * dt * (-0.5 * prev.a + a_star);
  const FEState next = solid.advance(prev, dt, u, 0.0);
  EXPECT_LT((next.a - a_star).norm(), 1e-10 * a_star.norm());
  EXPECT_LT((next.v - (prev.v + dt * (-0.5 * prev.a + 1.5 * a_star))).norm(), 1e-10 * next.v.norm());
  EXPECT_DOUBLE_EQ(next.time, dt);
}
