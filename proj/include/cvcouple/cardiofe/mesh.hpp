#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "cvcouple/cardiofe/material.hpp"

namespace cvcouple::cardiofe {

using Tri = std::array<int, 3>;
using Tet = std::array<int, 4>;

/// Positively oriented tets. endo/epi/base faces point out of the tissue; closure faces point out of
/// the cavity and cap the endocardial opening at the base.
struct TetMesh {
  std::vector<Vec3> nodes;
  std::vector<Tet> tets;
  std::vector<FiberFrame> fibers;
  std::vector<Tri> endo, epi, base, closure;
};

double tet_volume(const TetMesh& m, std::size_t e);
/// Smallest interior dihedral angle over all tets, degrees.
double min_dihedral_angle(const TetMesh& m);
/// Throws GeometryError on bad indices, non-positive volumes or non-orthonormal frames.
void validate(const TetMesh& m);

/// Endocardial faces reversed plus the closure cap, oriented out of the cavity.
/// Throws TopologyError unless every edge is shared by exactly two faces with opposite orientation.
std::vector<Tri> cavity_surface(const TetMesh& m);

/// Truncated prolate ellipsoidal shell centred at the origin with the long axis along z and the apex
/// at negative z. Without z_base the shell is closed.
struct LVGeometry {
  double a_endo = 0.025;
  double c_endo = 0.055;
  double a_epi = 0.035;
  double c_epi = 0.065;
  std::optional<double> z_base = 0.010;
  double element_size = 0.005;
  int layers = 0;  // through the wall; 0 picks thickness / element_size
  double helix_endo_deg = 60.0;
  double helix_epi_deg = -60.0;
};

/// Throws GeometryError for inconsistent radii, a base plane outside the cavity, or a mesh that
/// fails the quality bound (min dihedral angle > 10 degrees).
TetMesh generate_idealized_lv(const LVGeometry& g);

/// Plain-text format with 17 significant digits; the round trip is exact.
void write_mesh(const TetMesh& m, const std::filesystem::path& file);
/// Throws FormatError on malformed input and GeometryError on an invalid mesh.
TetMesh read_mesh(const std::filesystem::path& file);

/// Apex and unit apex-to-base direction. With a closure cap the apex is the node farthest from the
/// cap centroid; a closed shell falls back to the lowest node and +z.
struct LongAxis {
  Vec3 apex;
  Vec3 dir;
};
LongAxis long_axis(const TetMesh& m);
Vec3 apex_point(const TetMesh& m);
Vec3 tet_centroid(const TetMesh& m, std::size_t e);

struct ActivationSpec {
  enum class Mode { uniform, apex_to_base } mode = Mode::uniform;
  double t0 = 0.0;        // s
  double velocity = 0.6;  // m/s, apex_to_base only
};

/// Per-element activation time: t0, plus straight-line distance from the apex over velocity.
/// Throws ValidationError for a non-positive velocity.
std::vector<double> prescribe_activation(const TetMesh& m, const ActivationSpec& spec);

}  // namespace cvcouple::cardiofe
