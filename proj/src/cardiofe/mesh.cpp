#include "cvcouple/cardiofe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "cvcouple/errors.hpp"

namespace cvcouple::cardiofe {

namespace {

constexpr double kPi = std::numbers::pi;

std::array<Vec3, 4> corners(const TetMesh& m, std::size_t e) {
  const auto& t = m.tets[e];
  return {m.nodes[t[0]], m.nodes[t[1]], m.nodes[t[2]], m.nodes[t[3]]};
}

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

// Meridian arc length of an ellipse (a sin eta, -c cos eta) tabulated on [0, eta_end].
struct Meridian {
  double a, c, eta_end;
  std::vector<double> eta, arc;
  Meridian(double a_, double c_, double eta_end_) : a(a_), c(c_), eta_end(eta_end_) {
    const int n = 4000;
    eta.resize(n + 1);
    arc.resize(n + 1);
    arc[0] = 0.0;
    for (int i = 0; i <= n; ++i) eta[i] = eta_end * i / n;
    auto speed = [&](double x) { return std::hypot(a * std::cos(x), c * std::sin(x)); };
    for (int i = 1; i <= n; ++i) {
      const double h = eta[i] - eta[i - 1];
      arc[i] = arc[i - 1] + h / 6.0 * (speed(eta[i - 1]) + 4.0 * speed(eta[i - 1] + 0.5 * h) + speed(eta[i]));
    }
  }
  double length() const { return arc.back(); }
  double eta_at_fraction(double f) const {
    if (f <= 0.0) return 0.0;
    if (f >= 1.0) return eta_end;
    const double s = f * length();
    const auto it = std::upper_bound(arc.begin(), arc.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - arc.begin());
    const double w = (s - arc[i - 1]) / (arc[i] - arc[i - 1]);
    return eta[i - 1] + w * (eta[i] - eta[i - 1]);
  }
};

double ring_angle(int j, int n, int k) { return 2.0 * kPi * (j + 0.5 * (k % 2)) / n; }

// Triangulates the band between ring A (inner) and ring B (outer) by advancing on angle.
void zip(const std::vector<int>& A, const std::vector<int>& B, int kA, int kB, std::vector<Tri>& out) {
  const int n1 = static_cast<int>(A.size()), n2 = static_cast<int>(B.size());
  if (n1 == 1) {
    for (int j = 0; j < n2; ++j) out.push_back({A[0], B[(j + 1) % n2], B[j]});
    return;
  }
  if (n2 == 1) {
    for (int i = 0; i < n1; ++i) out.push_back({A[i], A[(i + 1) % n1], B[0]});
    return;
  }
  int i = 0, j = 0;
  while (i < n1 || j < n2) {
    const double a_next = ring_angle(i + 1, n1, kA);
    const double b_next = ring_angle(j + 1, n2, kB);
    if (j == n2 || (i < n1 && a_next <= b_next)) {
      out.push_back({A[i % n1], A[(i + 1) % n1], B[j % n2]});
      ++i;
    } else {
      out.push_back({A[i % n1], B[(j + 1) % n2], B[j % n2]});
      ++j;
    }
  }
}

FiberFrame frame_at(const Vec3& x, double a, double c, double helix_rad) {
  const double phi = std::atan2(x.y(), x.x());
  const double r = std::hypot(x.x(), x.y());
  const Vec3 e_c(-std::sin(phi), std::cos(phi), 0.0);
  const double tr = -x.z() / (c * c), tz = r / (a * a);
  const Vec3 e_l = Vec3(tr * std::cos(phi), tr * std::sin(phi), tz).normalized();
  const Vec3 e_r = e_c.cross(e_l).normalized();
  FiberFrame f;
  f.f = (std::cos(helix_rad) * e_c + std::sin(helix_rad) * e_l).normalized();
  f.n = e_r;
  f.s = f.n.cross(f.f).normalized();
  return f;
}

std::array<Tri, 4> outward_faces(const Tet& t) {
  return {{{t[0], t[2], t[1]}, {t[0], t[1], t[3]}, {t[0], t[3], t[2]}, {t[1], t[2], t[3]}}};
}

}  // namespace

double tet_volume(const TetMesh& m, std::size_t e) {
  const auto x = corners(m, e);
  return signed_volume(x[0], x[1], x[2], x[3]);
}

Vec3 tet_centroid(const TetMesh& m, std::size_t e) {
  const auto x = corners(m, e);
  return 0.25 * (x[0] + x[1] + x[2] + x[3]);
}

double min_dihedral_angle(const TetMesh& m) {
  static constexpr int edges[6][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2},
                                      {1, 2, 0, 3}, {1, 3, 0, 2}, {2, 3, 0, 1}};
  double best = 180.0;
  for (std::size_t e = 0; e < m.tets.size(); ++e) {
    const auto x = corners(m, e);
    for (const auto& ed : edges) {
      const Vec3 d = (x[ed[1]] - x[ed[0]]).normalized();
      Vec3 p = x[ed[2]] - x[ed[0]];
      Vec3 q = x[ed[3]] - x[ed[0]];
      p -= p.dot(d) * d;
      q -= q.dot(d) * d;
      const double cosang = std::clamp(p.dot(q) / (p.norm() * q.norm()), -1.0, 1.0);
      best = std::min(best, std::acos(cosang) * 180.0 / kPi);
    }
  }
  return best;
}

void validate(const TetMesh& m) {
  const int nn = static_cast<int>(m.nodes.size());
  if (m.fibers.size() != m.tets.size()) throw GeometryError("mesh: one fiber frame per tet required");
  for (std::size_t e = 0; e < m.tets.size(); ++e) {
    for (int i : m.tets[e])
      if (i < 0 || i >= nn) throw GeometryError("mesh: tet " + std::to_string(e) + " references a missing node");
    if (!(tet_volume(m, e) > 0.0)) throw GeometryError("mesh: tet " + std::to_string(e) + " has non-positive volume");
    const auto& f = m.fibers[e];
    const Mat3 R = f.matrix();
    if ((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-10)
      throw GeometryError("mesh: fiber frame of tet " + std::to_string(e) + " is not orthonormal");
  }
  for (const auto* list : {&m.endo, &m.epi, &m.base, &m.closure})
    for (const auto& t : *list)
      for (int i : t)
        if (i < 0 || i >= nn) throw GeometryError("mesh: surface face references a missing node");
}

std::vector<Tri> cavity_surface(const TetMesh& m) {
  std::vector<Tri> s;
  s.reserve(m.endo.size() + m.closure.size());
  for (const auto& t : m.endo) s.push_back({t[0], t[2], t[1]});
  for (const auto& t : m.closure) s.push_back(t);
  if (s.empty()) throw TopologyError("cavity surface is empty");
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : s)
    for (int k = 0; k < 3; ++k) ++directed[{t[k], t[(k + 1) % 3]}];
  for (const auto& [edge, count] : directed) {
    const auto rev = directed.find({edge.second, edge.first});
    if (count != 1 || rev == directed.end() || rev->second != 1)
      throw TopologyError("cavity surface is not closed and consistently oriented (edge " +
                          std::to_string(edge.first) + "-" + std::to_string(edge.second) + ")");
  }
  return s;
}

TetMesh generate_idealized_lv(const LVGeometry& g) {
  if (!(g.a_endo > 0.0 && g.c_endo > 0.0)) throw GeometryError("lv: cavity radii must be positive");
  if (!(g.a_epi > g.a_endo && g.c_epi > g.c_endo)) throw GeometryError("lv: epicardium must enclose the endocardium");
  if (!(g.element_size > 0.0)) throw GeometryError("lv: element size must be positive");
  if (g.z_base && !(*g.z_base > -g.c_endo && *g.z_base < g.c_endo))
    throw GeometryError("lv: base plane must cut the cavity");
  if (g.layers < 0) throw GeometryError("lv: layers must be non-negative");
  const bool closed = !g.z_base.has_value();
  const double thickness = std::min(g.a_epi - g.a_endo, g.c_epi - g.c_endo);
  const int nt = g.layers > 0 ? g.layers : std::max(1, static_cast<int>(std::lround(thickness / g.element_size)));

  auto radii = [&](double s) {
    return std::pair{g.a_endo + s * (g.a_epi - g.a_endo), g.c_endo + s * (g.c_epi - g.c_endo)};
  };
  auto eta_end = [&](double c) { return closed ? kPi : std::acos(-*g.z_base / c); };

  const auto [am, cm] = radii(0.5);
  const Meridian mid(am, cm, eta_end(cm));
  // Ring spacing is the height of an equilateral triangle of side element_size.
  const double ring_step = 0.5 * std::sqrt(3.0) * g.element_size;
  const int N = std::max(closed ? 4 : 3, static_cast<int>(std::lround(mid.length() / ring_step)));
  std::vector<int> count(N + 1);
  for (int k = 0; k <= N; ++k) {
    const double r = am * std::sin(mid.eta_at_fraction(static_cast<double>(k) / N));
    count[k] = (k == 0 || (closed && k == N)) ? 1
                                              : std::max(6, static_cast<int>(std::lround(2.0 * kPi * r / g.element_size)));
  }
  std::vector<std::vector<int>> rings(N + 1);
  int n_surf = 0;
  for (int k = 0; k <= N; ++k)
    for (int j = 0; j < count[k]; ++j) rings[k].push_back(n_surf++);
  std::vector<Tri> surf;
  for (int k = 0; k < N; ++k) zip(rings[k], rings[k + 1], k, k + 1, surf);

  TetMesh m;
  m.nodes.resize(static_cast<std::size_t>(n_surf) * (nt + 1));
  std::vector<double> depth(m.nodes.size());
  for (int l = 0; l <= nt; ++l) {
    const double s = static_cast<double>(l) / nt;
    const auto [a, c] = radii(s);
    const Meridian mer(a, c, eta_end(c));
    for (int k = 0; k <= N; ++k) {
      const double eta = mer.eta_at_fraction(static_cast<double>(k) / N);
      for (int j = 0; j < count[k]; ++j) {
        const double phi = ring_angle(j, count[k], k);
        const std::size_t id = static_cast<std::size_t>(l) * n_surf + rings[k][j];
        Vec3 x(a * std::sin(eta) * std::cos(phi), a * std::sin(eta) * std::sin(phi), -c * std::cos(eta));
        if (k == 0) x = Vec3(0, 0, -c);
        if (closed && k == N) x = Vec3(0, 0, c);
        if (!closed && k == N) x.z() = *g.z_base;
        m.nodes[id] = x;
        depth[id] = s;
      }
    }
  }

  // Prisms split into three tets. Quad diagonals start at the smaller bottom index, which keeps
  // neighbouring prisms conforming because top index = bottom index + n_surf.
  for (int l = 0; l < nt; ++l) {
    for (const auto& t : surf) {
      std::array<int, 3> b = {t[0], t[1], t[2]};
      std::sort(b.begin(), b.end());
      const int o0 = l * n_surf, o1 = (l + 1) * n_surf;
      const int i = b[0] + o0, j = b[1] + o0, k = b[2] + o0;
      const int i1 = b[0] + o1, j1 = b[1] + o1, k1 = b[2] + o1;
      for (Tet tet : {Tet{i, j, k, k1}, Tet{i, j, j1, k1}, Tet{i, i1, j1, k1}}) {
        if (signed_volume(m.nodes[tet[0]], m.nodes[tet[1]], m.nodes[tet[2]], m.nodes[tet[3]]) < 0.0)
          std::swap(tet[2], tet[3]);
        m.tets.push_back(tet);
      }
    }
  }

  const double ha = g.helix_endo_deg * kPi / 180.0, hb = g.helix_epi_deg * kPi / 180.0;
  for (std::size_t e = 0; e < m.tets.size(); ++e) {
    double s = 0.0;
    for (int i : m.tets[e]) s += 0.25 * depth[i];
    const auto [a, c] = radii(s);
    m.fibers.push_back(frame_at(tet_centroid(m, e), a, c, ha + s * (hb - ha)));
  }

  std::map<std::array<int, 3>, std::pair<Tri, int>> faces;
  for (const auto& t : m.tets)
    for (const auto& f : outward_faces(t)) {
      std::array<int, 3> key = f;
      std::sort(key.begin(), key.end());
      auto [it, inserted] = faces.try_emplace(key, f, 0);
      ++it->second.second;
    }
  std::vector<char> on_base_ring(m.nodes.size(), 0);
  if (!closed)
    for (int l = 0; l <= nt; ++l)
      for (int id : rings[N]) on_base_ring[static_cast<std::size_t>(l) * n_surf + id] = 1;
  for (const auto& [key, val] : faces) {
    if (val.second != 1) continue;
    const Tri& f = val.first;
    auto all = [&](auto pred) { return pred(f[0]) && pred(f[1]) && pred(f[2]); };
    if (all([&](int i) { return i < n_surf; })) m.endo.push_back(f);
    else if (all([&](int i) { return i >= nt * n_surf; })) m.epi.push_back(f);
    else if (all([&](int i) { return on_base_ring[i] != 0; })) m.base.push_back(f);
    else throw GeometryError("lv: unclassified boundary face");
  }
  if (!closed) {
    const auto& ring = rings[N];
    for (std::size_t i = 1; i + 1 < ring.size(); ++i) {
      Tri t{ring[0], ring[i], ring[i + 1]};
      const Vec3 nrm = (m.nodes[t[1]] - m.nodes[t[0]]).cross(m.nodes[t[2]] - m.nodes[t[0]]);
      if (nrm.z() < 0.0) std::swap(t[1], t[2]);
      m.closure.push_back(t);
    }
  }
  validate(m);
  cavity_surface(m);
  if (min_dihedral_angle(m) <= 10.0)
    throw GeometryError("lv: mesh quality bound violated (min dihedral angle <= 10 degrees)");
  return m;
}

void write_mesh(const TetMesh& m, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write mesh: " + file.string());
  out << std::setprecision(17);
  out << "cvcouple-tetmesh 1\n";
  out << "nodes " << m.nodes.size() << "\n";
  for (const auto& x : m.nodes) out << x.x() << ' ' << x.y() << ' ' << x.z() << "\n";
  out << "tets " << m.tets.size() << "\n";
  for (std::size_t e = 0; e < m.tets.size(); ++e) {
    const auto& t = m.tets[e];
    out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3];
    for (const Vec3* v : {&m.fibers[e].f, &m.fibers[e].s, &m.fibers[e].n})
      out << ' ' << v->x() << ' ' << v->y() << ' ' << v->z();
    out << "\n";
  }
  const std::size_t nf = m.endo.size() + m.epi.size() + m.base.size() + m.closure.size();
  out << "faces " << nf << "\n";
  const std::pair<const char*, const std::vector<Tri>*> tags[] = {
      {"endo", &m.endo}, {"epi", &m.epi}, {"base", &m.base}, {"closure", &m.closure}};
  for (const auto& [name, list] : tags)
    for (const auto& f : *list) out << name << ' ' << f[0] << ' ' << f[1] << ' ' << f[2] << "\n";
  if (!out) throw IoError("error writing mesh: " + file.string());
}

TetMesh read_mesh(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open mesh: " + file.string());
  const std::string where = file.string() + ": ";
  auto expect = [&](const std::string& word) {
    std::string w;
    std::size_t n = 0;
    if (!(in >> w >> n) || w != word) throw FormatError(where + "expected '" + word + " <count>'");
    return n;
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "cvcouple-tetmesh" || version != 1)
    throw FormatError(where + "not a cvcouple-tetmesh v1 file");
  TetMesh m;
  m.nodes.resize(expect("nodes"));
  for (auto& x : m.nodes)
    if (!(in >> x.x() >> x.y() >> x.z())) throw FormatError(where + "truncated node table");
  const std::size_t ne = expect("tets");
  m.tets.resize(ne);
  m.fibers.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    auto& t = m.tets[e];
    auto& f = m.fibers[e];
    if (!(in >> t[0] >> t[1] >> t[2] >> t[3] >> f.f.x() >> f.f.y() >> f.f.z() >> f.s.x() >> f.s.y() >> f.s.z() >>
          f.n.x() >> f.n.y() >> f.n.z()))
      throw FormatError(where + "truncated tet table");
  }
  const std::size_t nf = expect("faces");
  for (std::size_t i = 0; i < nf; ++i) {
    std::string tag;
    Tri f;
    if (!(in >> tag >> f[0] >> f[1] >> f[2])) throw FormatError(where + "truncated face table");
    if (tag == "endo") m.endo.push_back(f);
    else if (tag == "epi") m.epi.push_back(f);
    else if (tag == "base") m.base.push_back(f);
    else if (tag == "closure") m.closure.push_back(f);
    else throw FormatError(where + "unknown face tag '" + tag + "'");
  }
  std::string extra;
  if (in >> extra) throw FormatError(where + "trailing content");
  validate(m);
  return m;
}

LongAxis long_axis(const TetMesh& m) {
  if (m.nodes.empty()) throw GeometryError("mesh has no nodes");
  LongAxis ax;
  if (m.closure.empty()) {
    ax.apex = *std::min_element(m.nodes.begin(), m.nodes.end(),
                                [](const Vec3& a, const Vec3& b) { return a.z() < b.z(); });
    ax.dir = Vec3::UnitZ();
    return ax;
  }
  Vec3 c = Vec3::Zero();
  double area = 0.0;
  for (const auto& f : m.closure) {
    const double a = 0.5 * (m.nodes[f[1]] - m.nodes[f[0]]).cross(m.nodes[f[2]] - m.nodes[f[0]]).norm();
    c += a * (m.nodes[f[0]] + m.nodes[f[1]] + m.nodes[f[2]]) / 3.0;
    area += a;
  }
  c /= area;
  ax.apex = *std::max_element(m.nodes.begin(), m.nodes.end(),
                              [&](const Vec3& a, const Vec3& b) { return (a - c).norm() < (b - c).norm(); });
  ax.dir = (c - ax.apex).normalized();
  return ax;
}

Vec3 apex_point(const TetMesh& m) { return long_axis(m).apex; }

std::vector<double> prescribe_activation(const TetMesh& m, const ActivationSpec& spec) {
  std::vector<double> t(m.tets.size(), spec.t0);
  if (spec.mode == ActivationSpec::Mode::uniform) return t;
  if (!(spec.velocity > 0.0)) throw ValidationError("activation: velocity must be positive");
  const Vec3 apex = apex_point(m);
  for (std::size_t e = 0; e < m.tets.size(); ++e) t[e] += (tet_centroid(m, e) - apex).norm() / spec.velocity;
  return t;
}

}  // namespace cvcouple::cardiofe
