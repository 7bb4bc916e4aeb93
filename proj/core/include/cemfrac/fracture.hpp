#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "cemfrac/material.hpp"
#include "cemfrac/mesh.hpp"
#include "cemfrac/topology.hpp"

namespace cemfrac {

/// Crack surface shapes. Tet: I quadrilateral through four edge midpoints,
/// II triangle around one node. Parallelepiped: III mid-plane (element fully
/// cracked), IV corner cut from a front on two parallel edges of a face,
/// V corner cut from a front on two edges sharing a node, VI triangle around
/// a node. IV-VI leave a triangular prism that is split into three tets.
enum class PatternKind : std::uint8_t {
  TetQuad = 0,
  TetTri = 1,
  HexOppositeA = 2,
  HexOppositeB = 3,
  HexNeighborQuad = 4,
  HexNeighborTri = 5,
};

std::string_view pattern_name(PatternKind kind) noexcept;
bool is_quad(PatternKind kind) noexcept;

struct CrackPattern {
  PatternKind kind = PatternKind::TetQuad;
  std::array<EdgeId, 2> front_edges{};
  /// Edge ids of the surface vertices in polygon order (front first).
  std::array<EdgeId, 4> surface_edges{};
  std::array<Vec3, 4> surface_vertices{};
  std::uint8_t vertex_count = 4;
  Vec3 normal = Vec3::UnitZ();
  double area = 0.0;
  double G = 0.0;
  /// Hex IV-VI: local index of the hex edge whose half is removed.
  std::int8_t removed_local_edge = -1;

  std::span<const Vec3> vertices() const noexcept { return {surface_vertices.data(), vertex_count}; }
};

/// delta = (u_j - u_i) H(|x_j - x_i| / |X_j - X_i| - 1) with H(s) = 1 for
/// s > 0 and 0 otherwise. A nonzero result always satisfies
/// delta . (x_j - x_i) > 0. Throws Error for coincident reference nodes.
Vec3 edge_stretch(const Vec3& u_i, const Vec3& u_j, const Vec3& X_i, const Vec3& X_j);

/// Stretch of every topology edge for the displacement field u.
std::vector<Vec3> compute_edge_stretches(const Mesh& mesh, const EdgeTopology& topology,
                                         std::span<const Vec3> u);

/// Maximum principal stress at every edge quadrature point.
std::vector<PrincipalStress> compute_quadrature_stresses(std::span<const Voigt6> edge_stress);

/// Unit normal of a triangle (edge cross product) or quadrilateral
/// (diagonal cross product), signed so that n . reference >= 0.
/// Throws Error for collinear vertices.
Vec3 pattern_normal(std::span<const Vec3> vertices, const Vec3& reference);

double polygon_area(std::span<const Vec3> vertices);

/// G = 1/2 [(sigma_a . n)(delta_1 . n) + (sigma_b . n)(delta_2 . n)].
double energy_release_rate_quad(const Vec3& sigma_a, const Vec3& sigma_b, const Vec3& delta_1,
                                const Vec3& delta_2, const Vec3& n);

/// G = 1/2 [(sigma_c . n)(delta_1 . n) + (sigma_c . n)(delta_2 . n)].
double energy_release_rate_tri(const Vec3& sigma_c, const Vec3& delta_1, const Vec3& delta_2,
                               const Vec3& n);

/// Mixed product [P1 - P4, P2 - P4, P3 - P4].
double coplanarity_check(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4);

/// Candidate patterns of a tet for every pair of stretched edges sharing a
/// node: quadrilateral I and triangle II. Candidates carry their G.
std::vector<CrackPattern> enumerate_tet_patterns(const Mesh& mesh, const EdgeTopology& topology,
                                                 ElementId element, std::span<const Vec3> stretches,
                                                 std::span<const PrincipalStress> stresses);

/// Candidate patterns of a hexahedron: III and IV for stretched parallel
/// edges sharing a face, V and VI for stretched edges sharing a node.
std::vector<CrackPattern> enumerate_hex_patterns(const Mesh& mesh, const EdgeTopology& topology,
                                                 ElementId element, std::span<const Vec3> stretches,
                                                 std::span<const PrincipalStress> stresses);

/// Highest-G candidate; ties go to the larger area, then the lower kind.
const CrackPattern* select_pattern(std::span<const CrackPattern> candidates);

/// The six nodes of the prism left by removing the half of a hex on the side
/// of local edge `removed_local_edge`, split into three positive tets.
std::array<Element, 3> split_remaining_prism(const Mesh& mesh, ElementId hex, int removed_local_edge);

enum class DissipationModel {
  CriticalEnergyTimesArea,  // Gc * crack area
  ElementStrainEnergy,      // strain energy stored in the removed element
};

struct FractureRecord {
  ElementId element = 0;
  PatternKind kind = PatternKind::TetQuad;
  double G = 0.0;
  double area = 0.0;
  double energy = 0.0;
  double time = 0.0;
};

struct CrackPolygon {
  ElementId element = 0;
  std::uint8_t count = 0;
  std::array<Vec3, 4> vertices{};
  Vec3 normal = Vec3::UnitZ();
  double time = 0.0;
  double G = 0.0;

  Vec3 centroid() const;
};

struct FractureState {
  std::vector<FractureRecord> records;
  std::vector<CrackPolygon> crack_surface;
  double dissipated = 0.0;
  /// Highest candidate G of each element at the last check (0 if none).
  std::vector<double> last_G;
};

struct FractureOptions {
  DissipationModel dissipation = DissipationModel::CriticalEnergyTimesArea;
  double time = 0.0;
  /// Needed for DissipationModel::ElementStrainEnergy only.
  const IsotropicElastic* material = nullptr;
  std::span<const Vec3> displacement;
};

struct FractureOutcome {
  std::vector<ElementId> deactivated;
  std::vector<ElementId> added;

  bool empty() const noexcept { return deactivated.empty(); }
};

/// Evaluates every active element against Gc (in parallel, read-only) and
/// applies the fractures serially in ascending element order: tets and
/// pattern III hexes are deactivated, hexes failing with IV-VI are replaced
/// by the three tets of their remaining prism (appended to the mesh).
FractureOutcome evaluate_and_fracture(Mesh& mesh, const EdgeTopology& topology, FractureState& state,
                                      std::span<const Vec3> stretches,
                                      std::span<const PrincipalStress> stresses, double Gc,
                                      const FractureOptions& options = {});

}  // namespace cemfrac
