#include "cemfrac/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "cemfrac/esfem.hpp"

namespace cemfrac {

namespace {

constexpr std::array<LocalEdge, 6> kTetEdges{{{0, 1}, {1, 2}, {0, 2}, {0, 3}, {1, 3}, {2, 3}}};

constexpr std::array<LocalEdge, 12> kHexEdges{{{0, 1}, {1, 2}, {3, 2}, {0, 3},  // bottom
                                                {4, 5}, {5, 6}, {7, 6}, {4, 7},  // top
                                                {0, 4}, {1, 5}, {2, 6}, {3, 7}}};

constexpr std::array<LocalFace, 4> kTetFaces{{{3, {1, 2, 3, 0}},
                                              {3, {0, 3, 2, 0}},
                                              {3, {0, 1, 3, 0}},
                                              {3, {0, 2, 1, 0}}}};

constexpr std::array<LocalFace, 6> kHexFaces{{{4, {0, 3, 2, 1}},
                                              {4, {4, 5, 6, 7}},
                                              {4, {0, 1, 5, 4}},
                                              {4, {1, 2, 6, 5}},
                                              {4, {2, 3, 7, 6}},
                                              {4, {3, 0, 4, 7}}}};

constexpr std::array<std::array<int, 3>, 8> kHexLocal{{{-1, -1, -1},
                                                       {1, -1, -1},
                                                       {1, 1, -1},
                                                       {-1, 1, -1},
                                                       {-1, -1, 1},
                                                       {1, -1, 1},
                                                       {1, 1, 1},
                                                       {-1, 1, 1}}};

template <std::size_t N>
double bbox_extent(const std::array<Vec3, N>& pts) {
  Vec3 lo = pts[0];
  Vec3 hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).maxCoeff();
}

}  // namespace

std::size_t Mesh::num_active() const noexcept {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), char{1}));
}

std::span<const LocalEdge> local_edges(ElementKind kind) noexcept {
  if (kind == ElementKind::Tet4) return kTetEdges;
  return kHexEdges;
}

std::span<const LocalFace> local_faces(ElementKind kind) noexcept {
  if (kind == ElementKind::Tet4) return kTetFaces;
  return kHexFaces;
}

Vec3 hex_local_coords(std::size_t i) noexcept {
  return Vec3(kHexLocal[i][0], kHexLocal[i][1], kHexLocal[i][2]);
}

double signed_tet_volume(const Vec3& x0, const Vec3& x1, const Vec3& x2, const Vec3& x3) noexcept {
  return (x1 - x0).dot((x2 - x0).cross(x3 - x0)) / 6.0;
}

double tet_volume(const std::array<Vec3, 4>& c) {
  const double v = signed_tet_volume(c[0], c[1], c[2], c[3]);
  const double h = bbox_extent(c);
  if (!(std::abs(v) > 1e-14 * h * h * h)) {
    throw DegenerateElementError("degenerate tetrahedron (volume " + std::to_string(v) + ")");
  }
  return std::abs(v);
}

double hex_volume(const std::array<Vec3, 8>& c) {
  const double g = 1.0 / std::sqrt(3.0);
  double vol = 0.0;
  for (int i = 0; i < 8; ++i) {
    const Vec3 xi(kHexLocal[i][0] * g, kHexLocal[i][1] * g, kHexLocal[i][2] * g);
    vol += hex_jacobian(c, xi).determinant();
  }
  return vol;
}

std::array<Vec3, 4> tet_coords(const Mesh& mesh, const Element& e) {
  return {mesh.nodes[e.nodes[0]], mesh.nodes[e.nodes[1]], mesh.nodes[e.nodes[2]],
          mesh.nodes[e.nodes[3]]};
}

std::array<Vec3, 8> hex_coords(const Mesh& mesh, const Element& e) {
  std::array<Vec3, 8> c;
  for (std::size_t i = 0; i < 8; ++i) c[i] = mesh.nodes[e.nodes[i]];
  return c;
}

double element_volume(const Mesh& mesh, ElementId id) {
  const Element& e = mesh.elements[id];
  if (e.kind == ElementKind::Tet4) return tet_volume(tet_coords(mesh, e));
  return hex_volume(hex_coords(mesh, e));
}

Vec3 element_centroid(const Mesh& mesh, ElementId id) {
  const Element& e = mesh.elements[id];
  Vec3 c = Vec3::Zero();
  for (NodeId n : e.node_ids()) c += mesh.nodes[n];
  return c / static_cast<double>(node_count(e.kind));
}

void validate_mesh(const Mesh& mesh) {
  if (mesh.active.size() != mesh.elements.size()) {
    throw TopologyError("active flag count does not match element count");
  }
  for (ElementId id = 0; id < mesh.elements.size(); ++id) {
    const Element& e = mesh.elements[id];
    for (NodeId n : e.node_ids()) {
      if (n >= mesh.nodes.size()) {
        throw TopologyError("element " + std::to_string(id) + " references missing node " +
                            std::to_string(n));
      }
    }
    if (e.kind == ElementKind::Tet4) {
      const auto c = tet_coords(mesh, e);
      const double v = signed_tet_volume(c[0], c[1], c[2], c[3]);
      tet_volume(c);  // degeneracy check
      if (v <= 0.0) {
        throw DegenerateElementError("tet " + std::to_string(id) + " has negative orientation");
      }
    } else {
      const auto c = hex_coords(mesh, e);
      const double scale = bbox_extent(c);
      for (int i = 0; i <= 8; ++i) {
        const Vec3 xi = i < 8 ? hex_local_coords(i) : Vec3::Zero();
        if (hex_jacobian(c, xi).determinant() <= 1e-14 * scale * scale * scale) {
          throw DegenerateElementError("hex " + std::to_string(id) +
                                       " violates the canonical node ordering");
        }
      }
    }
  }
}

double active_volume(const Mesh& mesh) {
  double v = 0.0;
  for (ElementId e = 0; e < mesh.elements.size(); ++e) {
    if (mesh.is_active(e)) v += element_volume(mesh, e);
  }
  return v;
}

Vec3 edge_quadrature_point(const Mesh& mesh, EdgeKey edge) {
  return 0.5 * (mesh.nodes[edge.first] + mesh.nodes[edge.second]);
}

double BoundaryFace::area(const Mesh& mesh) const {
  const Vec3& a = mesh.nodes[nodes[0]];
  const Vec3& b = mesh.nodes[nodes[1]];
  const Vec3& c = mesh.nodes[nodes[2]];
  if (count == 3) return 0.5 * (b - a).cross(c - a).norm();
  const Vec3& d = mesh.nodes[nodes[3]];
  return 0.5 * (c - a).cross(d - b).norm();
}

Vec3 BoundaryFace::centroid(const Mesh& mesh) const {
  Vec3 c = Vec3::Zero();
  for (std::uint8_t i = 0; i < count; ++i) c += mesh.nodes[nodes[i]];
  return c / count;
}

std::vector<BoundaryFace> boundary_faces(const Mesh& mesh) {
  std::map<std::array<NodeId, 4>, std::pair<int, BoundaryFace>> seen;
  for (ElementId id = 0; id < mesh.elements.size(); ++id) {
    if (!mesh.is_active(id)) continue;
    const Element& e = mesh.elements[id];
    for (const LocalFace& lf : local_faces(e.kind)) {
      BoundaryFace f;
      f.count = lf.count;
      f.owner = id;
      std::array<NodeId, 4> key{};
      key.fill(static_cast<NodeId>(-1));
      for (std::uint8_t i = 0; i < lf.count; ++i) {
        f.nodes[i] = e.nodes[lf.nodes[i]];
        key[i] = f.nodes[i];
      }
      std::sort(key.begin(), key.begin() + lf.count);
      auto [it, inserted] = seen.try_emplace(key, 0, f);
      ++it->second.first;
    }
  }
  std::vector<BoundaryFace> out;
  for (const auto& [key, entry] : seen) {
    if (entry.first == 1) out.push_back(entry.second);
  }
  std::sort(out.begin(), out.end(), [](const BoundaryFace& a, const BoundaryFace& b) {
    return a.owner != b.owner ? a.owner < b.owner : a.nodes < b.nodes;
  });
  return out;
}

SurfaceSelection select_boundary(const Mesh& mesh, const PointPredicate& on_surface,
                                 const PointPredicate& owner_side) {
  SurfaceSelection sel;
  for (const BoundaryFace& f : boundary_faces(mesh)) {
    bool inside = true;
    for (std::uint8_t i = 0; i < f.count && inside; ++i) {
      inside = on_surface(mesh.nodes[f.nodes[i]]);
    }
    if (inside && owner_side) inside = owner_side(element_centroid(mesh, f.owner));
    if (!inside) continue;
    sel.faces.push_back(f);
    for (std::uint8_t i = 0; i < f.count; ++i) sel.nodes.push_back(f.nodes[i]);
  }
  std::sort(sel.nodes.begin(), sel.nodes.end());
  sel.nodes.erase(std::unique(sel.nodes.begin(), sel.nodes.end()), sel.nodes.end());
  if (sel.empty()) std::clog << "warning: boundary selection is empty\n";
  return sel;
}

}  // namespace cemfrac
