#include "cemfrac/fracture.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Geometry>

#include "cemfrac/esfem.hpp"
#include "cemfrac/parallel.hpp"

namespace cemfrac {

std::string_view pattern_name(PatternKind kind) noexcept {
  switch (kind) {
    case PatternKind::TetQuad: return "I";
    case PatternKind::TetTri: return "II";
    case PatternKind::HexOppositeA: return "III";
    case PatternKind::HexOppositeB: return "IV";
    case PatternKind::HexNeighborQuad: return "V";
    case PatternKind::HexNeighborTri: return "VI";
  }
  return "?";
}

bool is_quad(PatternKind kind) noexcept {
  return kind != PatternKind::TetTri && kind != PatternKind::HexNeighborTri;
}

Vec3 edge_stretch(const Vec3& u_i, const Vec3& u_j, const Vec3& X_i, const Vec3& X_j) {
  const Vec3 ref = X_j - X_i;
  const double ref_len = ref.norm();
  if (!(ref_len > 0.0)) throw Error("edge stretch of coincident reference nodes");
  const Vec3 du = u_j - u_i;
  const double ratio = (ref + du).norm() / ref_len;
  return ratio - 1.0 > 0.0 ? du : Vec3::Zero();
}

std::vector<Vec3> compute_edge_stretches(const Mesh& mesh, const EdgeTopology& topology,
                                         std::span<const Vec3> u) {
  std::vector<Vec3> out(topology.num_edges(), Vec3::Zero());
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      const auto [i, j] = topology.edge(static_cast<EdgeId>(e));
      const Vec3 ref = mesh.nodes[j] - mesh.nodes[i];
      const Vec3 du = u[j] - u[i];
      if ((ref + du).norm() / ref.norm() - 1.0 > 0.0) out[e] = du;
    }
  });
  return out;
}

std::vector<PrincipalStress> compute_quadrature_stresses(std::span<const Voigt6> edge_stress) {
  std::vector<PrincipalStress> out(edge_stress.size(), PrincipalStress{0.0, Vec3::UnitX()});
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) out[e] = max_principal_stress(edge_stress[e]);
  });
  return out;
}

namespace {

std::optional<Vec3> raw_normal(std::span<const Vec3> v) {
  Vec3 n;
  double scale;
  if (v.size() == 3) {
    n = (v[1] - v[0]).cross(v[2] - v[0]);
    scale = std::max((v[1] - v[0]).squaredNorm(), (v[2] - v[0]).squaredNorm());
  } else {
    n = (v[2] - v[0]).cross(v[3] - v[1]);
    scale = std::max((v[2] - v[0]).squaredNorm(), (v[3] - v[1]).squaredNorm());
  }
  const double len = n.norm();
  if (!(len > 1e-12 * scale)) return std::nullopt;
  return n / len;
}

}  // namespace

Vec3 pattern_normal(std::span<const Vec3> vertices, const Vec3& reference) {
  if (vertices.size() != 3 && vertices.size() != 4) throw Error("crack polygon needs 3 or 4 vertices");
  auto n = raw_normal(vertices);
  if (!n) throw Error("collinear crack polygon vertices");
  return n->dot(reference) < 0.0 ? Vec3(-*n) : *n;
}

double polygon_area(std::span<const Vec3> v) {
  if (v.size() == 3) return 0.5 * (v[1] - v[0]).cross(v[2] - v[0]).norm();
  return 0.5 * (v[2] - v[0]).cross(v[3] - v[1]).norm();
}

double energy_release_rate_quad(const Vec3& sigma_a, const Vec3& sigma_b, const Vec3& delta_1,
                                const Vec3& delta_2, const Vec3& n) {
  return 0.5 * (sigma_a.dot(n) * delta_1.dot(n) + sigma_b.dot(n) * delta_2.dot(n));
}

double energy_release_rate_tri(const Vec3& sigma_c, const Vec3& delta_1, const Vec3& delta_2,
                               const Vec3& n) {
  return 0.5 * (sigma_c.dot(n) * delta_1.dot(n) + sigma_c.dot(n) * delta_2.dot(n));
}

double coplanarity_check(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4) {
  return (p1 - p4).dot((p2 - p4).cross(p3 - p4));
}

Vec3 CrackPolygon::centroid() const {
  Vec3 c = Vec3::Zero();
  for (std::uint8_t i = 0; i < count; ++i) c += vertices[i];
  return c / count;
}

namespace {

struct PatternInputs {
  const Mesh& mesh;
  const EdgeTopology& topology;
  std::span<const Vec3> stretches;
  std::span<const PrincipalStress> stresses;
};

// Stretch of `edge` oriented from the negative to the positive side of n.
Vec3 oriented_stretch(const PatternInputs& in, EdgeId edge, const Vec3& n) {
  const auto [i, j] = in.topology.edge(edge);
  const Vec3 ref = in.mesh.nodes[j] - in.mesh.nodes[i];
  const Vec3& d = in.stretches[edge];
  return ref.dot(n) < 0.0 ? Vec3(-d) : d;
}

// Principal stress vector with its (sign-free) direction facing n.
Vec3 oriented_principal(const PatternInputs& in, EdgeId edge, const Vec3& n) {
  const PrincipalStress& p = in.stresses[edge];
  const Vec3 d = p.direction.dot(n) < 0.0 ? Vec3(-p.direction) : p.direction;
  return p.value * d;
}

// Builds a candidate from its polygon (front edges first). Quads pair
// delta_1 with the stress at vertex 3 and delta_2 with vertex 2; triangles use
// the stress at vertex 2 for both.
std::optional<CrackPattern> make_candidate(const PatternInputs& in, PatternKind kind,
                                           std::span<const EdgeId> polygon) {
  CrackPattern p;
  p.kind = kind;
  p.vertex_count = static_cast<std::uint8_t>(polygon.size());
  p.front_edges = {polygon[0], polygon[1]};
  for (std::size_t k = 0; k < polygon.size(); ++k) {
    p.surface_edges[k] = polygon[k];
    p.surface_vertices[k] = edge_quadrature_point(in.mesh, in.topology.edge(polygon[k]));
  }
  const auto n = raw_normal(p.vertices());
  if (!n) return std::nullopt;
  const Vec3 mean = in.stretches[polygon[0]] + in.stretches[polygon[1]];
  p.normal = n->dot(mean) < 0.0 ? Vec3(-*n) : *n;
  p.area = polygon_area(p.vertices());

  const Vec3 d1 = oriented_stretch(in, polygon[0], p.normal);
  const Vec3 d2 = oriented_stretch(in, polygon[1], p.normal);
  if (polygon.size() == 4) {
    p.G = energy_release_rate_quad(oriented_principal(in, polygon[3], p.normal),
                                   oriented_principal(in, polygon[2], p.normal), d1, d2, p.normal);
  } else {
    p.G = energy_release_rate_tri(oriented_principal(in, polygon[2], p.normal), d1, d2, p.normal);
  }
  return p;
}

bool stretched(std::span<const Vec3> stretches, EdgeId e) { return stretches[e] != Vec3::Zero(); }

// Local hex geometry: edge midpoints in {-1, 0, 1}^3.
struct HexLocal {
  std::array<std::array<int, 3>, 12> mid{};
  std::array<int, 12> axis{};

  HexLocal() {
    const auto edges = local_edges(ElementKind::Hex8);
    for (int e = 0; e < 12; ++e) {
      const Vec3 a = hex_local_coords(edges[e].first);
      const Vec3 b = hex_local_coords(edges[e].second);
      for (int k = 0; k < 3; ++k) {
        mid[e][k] = static_cast<int>((a[k] + b[k]) / 2.0);
        if (a[k] != b[k]) axis[e] = k;
      }
    }
  }
  int edge_at(const std::array<int, 3>& m) const {
    for (int e = 0; e < 12; ++e) {
      if (mid[e] == m) return e;
    }
    return -1;
  }
  int node_at(int x, int y, int z) const {
    for (int i = 0; i < 8; ++i) {
      const Vec3 c = hex_local_coords(i);
      if (c[0] == x && c[1] == y && c[2] == z) return i;
    }
    return -1;
  }
};

const HexLocal& hex_local() {
  static const HexLocal table;
  return table;
}

}  // namespace

std::vector<CrackPattern> enumerate_tet_patterns(const Mesh& mesh, const EdgeTopology& topology,
                                                 ElementId element, std::span<const Vec3> stretches,
                                                 std::span<const PrincipalStress> stresses) {
  const PatternInputs in{mesh, topology, stretches, stresses};
  const auto ledges = local_edges(ElementKind::Tet4);
  const std::vector<EdgeId> ids = topology.element_edges(mesh, element);
  auto edge_of = [&](int a, int b) {
    for (std::size_t k = 0; k < ledges.size(); ++k) {
      if ((ledges[k].first == a && ledges[k].second == b) ||
          (ledges[k].first == b && ledges[k].second == a)) {
        return ids[k];
      }
    }
    return ids[0];
  };

  std::vector<CrackPattern> out;
  for (std::size_t p = 0; p < ledges.size(); ++p) {
    for (std::size_t q = p + 1; q < ledges.size(); ++q) {
      if (!stretched(stretches, ids[p]) || !stretched(stretches, ids[q])) continue;
      const auto [p0, p1] = ledges[p];
      const auto [q0, q1] = ledges[q];
      int shared = -1;
      if (p0 == q0 || p0 == q1) shared = p0;
      if (p1 == q0 || p1 == q1) shared = p1;
      if (shared < 0) continue;  // opposite edges do not bound a common crack polygon side
      const int a = p0 == shared ? p1 : p0;
      const int c = q0 == shared ? q1 : q0;
      const int d = 6 - a - c - shared;
      const std::array<EdgeId, 4> quad{ids[p], ids[q], edge_of(c, d), edge_of(a, d)};
      if (auto cand = make_candidate(in, PatternKind::TetQuad, quad)) out.push_back(*cand);
      const std::array<EdgeId, 3> tri{ids[p], ids[q], edge_of(shared, d)};
      if (auto cand = make_candidate(in, PatternKind::TetTri, tri)) out.push_back(*cand);
    }
  }
  return out;
}

std::vector<CrackPattern> enumerate_hex_patterns(const Mesh& mesh, const EdgeTopology& topology,
                                                 ElementId element, std::span<const Vec3> stretches,
                                                 std::span<const PrincipalStress> stresses) {
  const PatternInputs in{mesh, topology, stretches, stresses};
  const HexLocal& hl = hex_local();
  const std::vector<EdgeId> ids = topology.element_edges(mesh, element);

  std::vector<CrackPattern> out;
  auto emit = [&](PatternKind kind, std::span<const int> local, int removed) {
    std::array<EdgeId, 4> poly{};
    for (std::size_t k = 0; k < local.size(); ++k) poly[k] = ids[local[k]];
    if (auto cand = make_candidate(in, kind, {poly.data(), local.size()})) {
      cand->removed_local_edge = static_cast<std::int8_t>(removed);
      out.push_back(*cand);
    }
  };

  for (int f1 = 0; f1 < 12; ++f1) {
    for (int f2 = f1 + 1; f2 < 12; ++f2) {
      if (!stretched(stretches, ids[f1]) || !stretched(stretches, ids[f2])) continue;
      const auto& m1 = hl.mid[f1];
      const auto& m2 = hl.mid[f2];
      if (hl.axis[f1] == hl.axis[f2]) {
        const int a = hl.axis[f1];
        int differing = 0;
        int c = -1;
        for (int k = 0; k < 3; ++k) {
          if (m1[k] != m2[k]) {
            ++differing;
            c = k;
          }
        }
        if (differing != 1) continue;  // diagonal pair, no common face
        const int b = 3 - a - c;
        // III: mid-plane through the four parallel edges.
        auto o1 = m1;
        auto o2 = m2;
        o1[b] = -m1[b];
        o2[b] = -m2[b];
        const std::array<int, 4> mid_plane{f1, f2, hl.edge_at(o2), hl.edge_at(o1)};
        emit(PatternKind::HexOppositeA, mid_plane, -1);
        // IV: corner cuts around the two axis-c edges of the shared face.
        for (int s : {-1, 1}) {
          std::array<int, 3> q1{};
          std::array<int, 3> q2{};
          std::array<int, 3> cut{};
          q1[a] = s;
          q1[c] = m1[c];
          q1[b] = 0;
          q2[a] = s;
          q2[c] = m2[c];
          q2[b] = 0;
          cut[a] = s;
          cut[b] = m1[b];
          cut[c] = 0;
          const std::array<int, 4> quad{f1, f2, hl.edge_at(q2), hl.edge_at(q1)};
          emit(PatternKind::HexOppositeB, quad, hl.edge_at(cut));
        }
        continue;
      }
      // Neighbouring edges share the node where both midpoints agree with it.
      const int a1 = hl.axis[f1];
      const int a2 = hl.axis[f2];
      const int a3 = 3 - a1 - a2;
      if (m1[a3] != m2[a3]) continue;
      std::array<int, 3> node{};
      node[a1] = m2[a1];
      node[a2] = m1[a2];
      node[a3] = m1[a3];
      std::array<int, 3> cut = node;
      cut[a3] = 0;
      std::array<int, 3> q1 = m1;
      std::array<int, 3> q2 = m2;
      q1[a3] = -node[a3];
      q2[a3] = -node[a3];
      const int removed = hl.edge_at(cut);
      const std::array<int, 4> quad{f1, f2, hl.edge_at(q2), hl.edge_at(q1)};
      emit(PatternKind::HexNeighborQuad, quad, removed);
      const std::array<int, 3> tri{f1, f2, removed};
      emit(PatternKind::HexNeighborTri, tri, removed);
    }
  }
  return out;
}

const CrackPattern* select_pattern(std::span<const CrackPattern> candidates) {
  const CrackPattern* best = nullptr;
  for (const CrackPattern& c : candidates) {
    if (!best) {
      best = &c;
      continue;
    }
    const double tol = 1e-12 * std::max(std::abs(c.G), std::abs(best->G));
    if (c.G > best->G + tol) {
      best = &c;
    } else if (std::abs(c.G - best->G) <= tol) {
      if (c.area > best->area * (1.0 + 1e-12) ||
          (std::abs(c.area - best->area) <= 1e-12 * best->area && c.kind < best->kind)) {
        best = &c;
      }
    }
  }
  return best;
}

std::array<Element, 3> split_remaining_prism(const Mesh& mesh, ElementId hex, int removed_local_edge) {
  const HexLocal& hl = hex_local();
  const Element& el = mesh.elements[hex];
  const int axis = hl.axis[removed_local_edge];
  const int u = axis == 0 ? 1 : 0;
  const int v = axis == 2 ? 1 : 2;
  const int s1 = hl.mid[removed_local_edge][u];
  const int s2 = hl.mid[removed_local_edge][v];

  auto node = [&](int su, int sv, int t) {
    std::array<int, 3> c{};
    c[u] = su;
    c[v] = sv;
    c[axis] = t;
    return el.nodes[hl.node_at(c[0], c[1], c[2])];
  };
  const std::array<NodeId, 6> pr{node(-s1, -s2, -1), node(s1, -s2, -1), node(-s1, s2, -1),
                                 node(-s1, -s2, 1),  node(s1, -s2, 1),  node(-s1, s2, 1)};
  std::array<Element, 3> tets{Element::tet(pr[0], pr[1], pr[2], pr[3]),
                              Element::tet(pr[1], pr[2], pr[3], pr[4]),
                              Element::tet(pr[2], pr[3], pr[4], pr[5])};
  for (Element& t : tets) {
    const double vol = signed_tet_volume(mesh.nodes[t.nodes[0]], mesh.nodes[t.nodes[1]],
                                         mesh.nodes[t.nodes[2]], mesh.nodes[t.nodes[3]]);
    if (vol < 0.0) std::swap(t.nodes[2], t.nodes[3]);
  }
  return tets;
}

namespace {

double element_strain_energy(const Mesh& mesh, ElementId id, const IsotropicElastic& mat,
                             std::span<const Vec3> u) {
  const Element& el = mesh.elements[id];
  Voigt6 eps = Voigt6::Zero();
  auto add = [&](NodeId n, const Vec3& g) {
    const Vec3& d = u[n];
    eps[0] += d.x() * g.x();
    eps[1] += d.y() * g.y();
    eps[2] += d.z() * g.z();
    eps[3] += d.x() * g.y() + d.y() * g.x();
    eps[4] += d.y() * g.z() + d.z() * g.y();
    eps[5] += d.x() * g.z() + d.z() * g.x();
  };
  if (el.kind == ElementKind::Tet4) {
    const TetGradients g = tet_shape_gradients(tet_coords(mesh, el));
    for (int i = 0; i < 4; ++i) add(el.nodes[i], g.col(i));
  } else {
    const HexGradients g = hex_shape_gradients_at(hex_coords(mesh, el), Vec3::Zero());
    for (int i = 0; i < 8; ++i) add(el.nodes[i], g.col(i));
  }
  return strain_energy_density(mat, eps) * element_volume(mesh, id);
}

}  // namespace

FractureOutcome evaluate_and_fracture(Mesh& mesh, const EdgeTopology& topology, FractureState& state,
                                      std::span<const Vec3> stretches,
                                      std::span<const PrincipalStress> stresses, double Gc,
                                      const FractureOptions& options) {
  const std::size_t ne = mesh.num_elements();
  std::vector<std::optional<CrackPattern>> best(ne);
  state.last_G.resize(ne, 0.0);

  parallel_for(ne, [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      if (!mesh.active[e]) continue;
      const ElementId id = static_cast<ElementId>(e);
      const auto candidates = mesh.elements[e].kind == ElementKind::Tet4
                                  ? enumerate_tet_patterns(mesh, topology, id, stretches, stresses)
                                  : enumerate_hex_patterns(mesh, topology, id, stretches, stresses);
      const CrackPattern* pick = select_pattern(candidates);
      state.last_G[e] = pick ? std::max(pick->G, 0.0) : 0.0;
      if (pick && pick->G > Gc) best[e] = *pick;
    }
  });

  FractureOutcome outcome;
  for (ElementId e = 0; e < ne; ++e) {
    if (!best[e]) continue;
    const CrackPattern& p = *best[e];
    FractureRecord rec;
    rec.element = e;
    rec.kind = p.kind;
    rec.G = p.G;
    rec.area = p.area;
    rec.time = options.time;
    if (options.dissipation == DissipationModel::ElementStrainEnergy && options.material &&
        !options.displacement.empty()) {
      rec.energy = element_strain_energy(mesh, e, *options.material, options.displacement);
    } else {
      rec.energy = Gc * p.area;
    }

    const bool split = mesh.elements[e].kind == ElementKind::Hex8 && p.removed_local_edge >= 0;
    std::array<Element, 3> prism_tets{};
    if (split) prism_tets = split_remaining_prism(mesh, e, p.removed_local_edge);
    mesh.active[e] = 0;
    outcome.deactivated.push_back(e);
    if (split) {
      for (const Element& t : prism_tets) outcome.added.push_back(mesh.add_element(t));
    }

    state.records.push_back(rec);
    state.dissipated += rec.energy;
    CrackPolygon poly;
    poly.element = e;
    poly.count = p.vertex_count;
    poly.vertices = p.surface_vertices;
    poly.normal = p.normal;
    poly.time = options.time;
    poly.G = p.G;
    state.crack_surface.push_back(poly);
  }
  state.last_G.resize(mesh.num_elements(), 0.0);
  return outcome;
}

}  // namespace cemfrac
