#pragma once

#include <array>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "cemfrac/types.hpp"

namespace cemfrac {

enum class ElementKind : std::uint8_t { Tet4 = 4, Hex8 = 8 };

constexpr std::size_t node_count(ElementKind kind) noexcept {
  return static_cast<std::size_t>(kind);
}

/// Element connectivity. Hex ordering: bottom face counterclockwise, then the
/// top face counterclockwise with node i+4 above node i.
struct Element {
  ElementKind kind = ElementKind::Tet4;
  std::array<NodeId, 8> nodes{};

  static Element tet(NodeId a, NodeId b, NodeId c, NodeId d) {
    return Element{ElementKind::Tet4, {a, b, c, d, 0, 0, 0, 0}};
  }
  static Element hex(const std::array<NodeId, 8>& n) { return Element{ElementKind::Hex8, n}; }

  std::span<const NodeId> node_ids() const noexcept {
    return {nodes.data(), node_count(kind)};
  }
  bool operator==(const Element&) const = default;
};

/// Undeformed geometry plus per-element activity. `active` uses char so that
/// concurrent readers never touch a packed bit vector.
struct Mesh {
  std::vector<Vec3> nodes;
  std::vector<Element> elements;
  std::vector<char> active;

  ElementId add_element(const Element& e) {
    elements.push_back(e);
    active.push_back(1);
    return static_cast<ElementId>(elements.size() - 1);
  }
  std::size_t num_nodes() const noexcept { return nodes.size(); }
  std::size_t num_elements() const noexcept { return elements.size(); }
  std::size_t num_active() const noexcept;
  bool is_active(ElementId e) const noexcept { return active[e] != 0; }

  bool operator==(const Mesh&) const = default;
};

using LocalEdge = std::pair<std::uint8_t, std::uint8_t>;

/// Local node pairs of the element edges (6 for tets, 12 for hexes).
std::span<const LocalEdge> local_edges(ElementKind kind) noexcept;

/// Local faces with outward orientation; triangles leave the 4th slot unused.
struct LocalFace {
  std::uint8_t count;
  std::array<std::uint8_t, 4> nodes;
};
std::span<const LocalFace> local_faces(ElementKind kind) noexcept;

/// Reference coordinates of hex node i, each component in {-1, +1}.
Vec3 hex_local_coords(std::size_t i) noexcept;

double signed_tet_volume(const Vec3& x0, const Vec3& x1, const Vec3& x2, const Vec3& x3) noexcept;

/// Unsigned tet volume; throws DegenerateElementError below 1e-14 * bbox^3.
double tet_volume(const std::array<Vec3, 4>& coords);

/// Hex volume by 2x2x2 Gauss integration of the trilinear Jacobian.
double hex_volume(const std::array<Vec3, 8>& coords);

std::array<Vec3, 4> tet_coords(const Mesh& mesh, const Element& e);
std::array<Vec3, 8> hex_coords(const Mesh& mesh, const Element& e);

double element_volume(const Mesh& mesh, ElementId e);
Vec3 element_centroid(const Mesh& mesh, ElementId e);

/// Checks node references, tet orientation and hex ordering. Throws
/// TopologyError or DegenerateElementError.
void validate_mesh(const Mesh& mesh);

/// Sum of volumes over active elements.
double active_volume(const Mesh& mesh);

using EdgeKey = std::pair<NodeId, NodeId>;

constexpr EdgeKey make_edge_key(NodeId a, NodeId b) noexcept {
  return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

/// Edge midpoint in the reference configuration.
Vec3 edge_quadrature_point(const Mesh& mesh, EdgeKey edge);

struct BoundaryFace {
  std::uint8_t count = 3;
  std::array<NodeId, 4> nodes{};
  ElementId owner = 0;

  double area(const Mesh& mesh) const;
  Vec3 centroid(const Mesh& mesh) const;
};

/// Faces of active elements that are not shared with another active element.
std::vector<BoundaryFace> boundary_faces(const Mesh& mesh);

struct SurfaceSelection {
  std::vector<BoundaryFace> faces;
  std::vector<NodeId> nodes;  // sorted, unique

  bool empty() const noexcept { return faces.empty(); }
};

using PointPredicate = std::function<bool(const Vec3&)>;

/// Boundary faces whose nodes all satisfy `on_surface`; when `owner_side` is
/// given, the owning element's centroid must satisfy it as well (this
/// separates the two flanks of a zero-width notch). An empty selection is
/// reported on std::clog.
SurfaceSelection select_boundary(const Mesh& mesh, const PointPredicate& on_surface,
                                 const PointPredicate& owner_side = {});

}  // namespace cemfrac
