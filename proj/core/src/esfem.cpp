#include "cemfrac/esfem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "cemfrac/parallel.hpp"

namespace cemfrac {

TetGradients tet_shape_gradients(const std::array<Vec3, 4>& c) {
  tet_volume(c);  // throws on degenerate input
  Mat3 a;
  a.col(0) = c[1] - c[0];
  a.col(1) = c[2] - c[0];
  a.col(2) = c[3] - c[0];
  const Mat3 inv = a.inverse();
  TetGradients g;
  for (int i = 0; i < 3; ++i) g.col(i + 1) = inv.row(i).transpose();
  g.col(0) = -(g.col(1) + g.col(2) + g.col(3));
  return g;
}

HexGradients hex_local_derivatives(const Vec3& xi) {
  HexGradients d;
  for (int i = 0; i < 8; ++i) {
    const Vec3 s = hex_local_coords(i);
    const double a = 1.0 + s[0] * xi[0];
    const double b = 1.0 + s[1] * xi[1];
    const double c = 1.0 + s[2] * xi[2];
    d(0, i) = 0.125 * s[0] * b * c;
    d(1, i) = 0.125 * a * s[1] * c;
    d(2, i) = 0.125 * a * b * s[2];
  }
  return d;
}

Mat3 hex_jacobian(const std::array<Vec3, 8>& c, const Vec3& xi) {
  const HexGradients d = hex_local_derivatives(xi);
  Mat3 j = Mat3::Zero();
  for (int i = 0; i < 8; ++i) j += c[i] * d.col(i).transpose();
  return j;
}

HexGradients hex_shape_gradients_at(const std::array<Vec3, 8>& c, const Vec3& xi) {
  const Mat3 j = hex_jacobian(c, xi);
  const double det = j.determinant();
  const double scale = j.cwiseAbs().maxCoeff();
  if (!(std::abs(det) > 1e-14 * scale * scale * scale)) {
    throw DegenerateElementError("singular hexahedron Jacobian");
  }
  return j.transpose().inverse() * hex_local_derivatives(xi);
}

Eigen::Matrix<double, 6, Eigen::Dynamic> SmoothedBOperator::matrix() const {
  Eigen::Matrix<double, 6, Eigen::Dynamic> b =
      Eigen::Matrix<double, 6, Eigen::Dynamic>::Zero(6, 3 * nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Vec3& g = gradients[k];
    const Eigen::Index c = static_cast<Eigen::Index>(3 * k);
    b(0, c) = g.x();
    b(1, c + 1) = g.y();
    b(2, c + 2) = g.z();
    b(3, c) = g.y();
    b(3, c + 1) = g.x();
    b(4, c + 1) = g.z();
    b(4, c + 2) = g.y();
    b(5, c) = g.z();
    b(5, c + 2) = g.x();
  }
  return b;
}

namespace {

// Gradients of element `id` evaluated at the edge (a, b) quadrature point.
void element_gradients_at_edge(const Mesh& mesh, ElementId id, EdgeKey edge,
                               std::vector<std::pair<NodeId, Vec3>>& out) {
  const Element& el = mesh.elements[id];
  if (el.kind == ElementKind::Tet4) {
    const TetGradients g = tet_shape_gradients(tet_coords(mesh, el));
    for (int i = 0; i < 4; ++i) out.emplace_back(el.nodes[i], g.col(i));
    return;
  }
  int la = -1;
  int lb = -1;
  for (int i = 0; i < 8; ++i) {
    if (el.nodes[i] == edge.first) la = i;
    if (el.nodes[i] == edge.second) lb = i;
  }
  const Vec3 xi = 0.5 * (hex_local_coords(la) + hex_local_coords(lb));
  const HexGradients g = hex_shape_gradients_at(hex_coords(mesh, el), xi);
  for (int i = 0; i < 8; ++i) out.emplace_back(el.nodes[i], g.col(i));
}

Voigt6 strain_from(std::span<const NodeId> nodes, std::span<const Vec3> grads,
                   std::span<const Vec3> u) {
  Voigt6 e = Voigt6::Zero();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Vec3& g = grads[k];
    const Vec3& d = u[nodes[k]];
    e[0] += d.x() * g.x();
    e[1] += d.y() * g.y();
    e[2] += d.z() * g.z();
    e[3] += d.x() * g.y() + d.y() * g.x();
    e[4] += d.y() * g.z() + d.z() * g.y();
    e[5] += d.x() * g.z() + d.z() * g.x();
  }
  return e;
}

}  // namespace

SmoothedBOperator build_smoothed_operator(const Mesh& mesh, const EdgeTopology& topology,
                                          EdgeId edge) {
  const auto incident = topology.incident(edge);
  if (incident.empty()) throw TopologyError("edge without incident elements");
  const auto weights = topology.weights(edge);
  const EdgeKey key = topology.edge(edge);

  std::vector<std::pair<NodeId, Vec3>> contrib;
  std::vector<std::pair<NodeId, Vec3>> scratch;
  for (std::size_t j = 0; j < incident.size(); ++j) {
    scratch.clear();
    element_gradients_at_edge(mesh, incident[j], key, scratch);
    for (auto& [n, g] : scratch) contrib.emplace_back(n, weights[j] * g);
  }
  std::stable_sort(contrib.begin(), contrib.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  SmoothedBOperator op;
  op.volume = topology.edge_volume(edge);
  for (const auto& [n, g] : contrib) {
    if (op.nodes.empty() || op.nodes.back() != n) {
      op.nodes.push_back(n);
      op.gradients.push_back(g);
    } else {
      op.gradients.back() += g;
    }
  }
  return op;
}

Voigt6 smoothed_strain(const SmoothedBOperator& op, std::span<const Vec3> u) {
  return strain_from(op.nodes, op.gradients, u);
}

SmoothedOperators::SmoothedOperators(const Mesh& mesh, const EdgeTopology& topology) {
  const std::size_t ne = topology.num_edges();
  std::vector<SmoothedBOperator> ops(ne);
  parallel_for(ne, [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      ops[e] = build_smoothed_operator(mesh, topology, static_cast<EdgeId>(e));
    }
  });

  volume_.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    nodes_.insert(nodes_.end(), ops[e].nodes.begin(), ops[e].nodes.end());
    gradients_.insert(gradients_.end(), ops[e].gradients.begin(), ops[e].gradients.end());
    offsets_.push_back(nodes_.size());
    volume_[e] = ops[e].volume;
  }

  // Entries per node in ascending entry (= edge) order.
  const std::size_t nn = mesh.num_nodes();
  std::vector<std::size_t> counts(nn + 1, 0);
  for (NodeId n : nodes_) ++counts[n + 1];
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  node_offsets_ = counts;
  node_entries_.resize(nodes_.size());
  std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
  for (std::size_t k = 0; k < nodes_.size(); ++k) node_entries_[cursor[nodes_[k]]++] = k;
}

SmoothedBOperator SmoothedOperators::edge_operator(EdgeId e) const {
  SmoothedBOperator op;
  op.nodes.assign(nodes_.begin() + offsets_[e], nodes_.begin() + offsets_[e + 1]);
  op.gradients.assign(gradients_.begin() + offsets_[e], gradients_.begin() + offsets_[e + 1]);
  op.volume = volume_[e];
  return op;
}

Voigt6 SmoothedOperators::strain(EdgeId e, std::span<const Vec3> u) const {
  const std::size_t b = offsets_[e];
  const std::size_t n = offsets_[e + 1] - b;
  return strain_from({nodes_.data() + b, n}, {gradients_.data() + b, n}, u);
}

void SmoothedOperators::internal_force(const IsotropicElastic& mat, std::span<const Vec3> u,
                                       std::vector<Vec3>& f, EdgeFields* fields) const {
  const std::size_t ne = num_edges();
  std::vector<Vec3> entry_force(nodes_.size());
  if (fields) {
    fields->strain.resize(ne);
    fields->stress.resize(ne);
  }
  parallel_for(ne, [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      const Voigt6 eps = strain(static_cast<EdgeId>(e), u);
      const Voigt6 sig = stress_from_strain(mat, eps);
      if (fields) {
        fields->strain[e] = eps;
        fields->stress[e] = sig;
      }
      const double v = volume_[e];
      for (std::size_t k = offsets_[e]; k < offsets_[e + 1]; ++k) {
        const Vec3& g = gradients_[k];
        entry_force[k] = v * Vec3(sig[0] * g.x() + sig[3] * g.y() + sig[5] * g.z(),
                                  sig[3] * g.x() + sig[1] * g.y() + sig[4] * g.z(),
                                  sig[5] * g.x() + sig[4] * g.y() + sig[2] * g.z());
      }
    }
  });

  const std::size_t nn = num_nodes();
  f.assign(std::max(nn, u.size()), Vec3::Zero());
  parallel_for(nn, [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      Vec3 acc = Vec3::Zero();
      for (std::size_t k = node_offsets_[n]; k < node_offsets_[n + 1]; ++k) {
        acc += entry_force[node_entries_[k]];
      }
      f[n] = acc;
    }
  });
}

double SmoothedOperators::strain_energy(const IsotropicElastic& mat, std::span<const Vec3> u) const {
  double w = 0.0;
  for (std::size_t e = 0; e < num_edges(); ++e) {
    w += strain_energy_density(mat, strain(static_cast<EdgeId>(e), u)) * volume_[e];
  }
  return w;
}

double SmoothedOperators::strain_energy(const IsotropicElastic& mat, const EdgeFields& fields) const {
  double w = 0.0;
  for (std::size_t e = 0; e < num_edges(); ++e) {
    w += strain_energy_density(mat, fields.strain[e]) * volume_[e];
  }
  return w;
}

std::vector<Vec3> assemble_internal_force(const Mesh& mesh, const EdgeTopology& topology,
                                          const IsotropicElastic& mat, std::span<const Vec3> u) {
  SmoothedOperators ops(mesh, topology);
  std::vector<Vec3> f;
  ops.internal_force(mat, u, f);
  return f;
}

double LumpedMass::total() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < node_mass.size(); ++i) {
    if (!orphan[i]) m += node_mass[i];
  }
  return m;
}

LumpedMass assemble_lumped_mass(const Mesh& mesh, const IsotropicElastic& mat) {
  LumpedMass m;
  m.node_mass.assign(mesh.num_nodes(), 0.0);
  m.orphan.assign(mesh.num_nodes(), 1);
  for (ElementId e = 0; e < mesh.num_elements(); ++e) {
    if (!mesh.is_active(e)) continue;
    const Element& el = mesh.elements[e];
    const double share = mat.rho() * element_volume(mesh, e) / static_cast<double>(node_count(el.kind));
    for (NodeId n : el.node_ids()) {
      m.node_mass[n] += share;
      m.orphan[n] = 0;
    }
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < m.node_mass.size(); ++i) {
    if (!m.orphan[i]) {
      sum += m.node_mass[i];
      ++count;
    }
  }
  const double floor = count > 0 ? 1e-12 * sum / static_cast<double>(count) : 1e-12;
  for (std::size_t i = 0; i < m.node_mass.size(); ++i) {
    if (m.orphan[i]) m.node_mass[i] = floor;
  }
  return m;
}

std::vector<Vec3> assemble_external_force(const Mesh& mesh, std::span<const SurfaceLoad> loads,
                                          const Vec3& body_force) {
  std::vector<Vec3> f(mesh.num_nodes(), Vec3::Zero());
  for (const SurfaceLoad& load : loads) {
    for (const BoundaryFace& face : load.faces) {
      if (!mesh.is_active(face.owner)) continue;
      const Vec3 per_node = load.traction * (face.area(mesh) / face.count);
      for (std::uint8_t i = 0; i < face.count; ++i) f[face.nodes[i]] += per_node;
    }
  }
  if (body_force != Vec3::Zero()) {
    for (ElementId e = 0; e < mesh.num_elements(); ++e) {
      if (!mesh.is_active(e)) continue;
      const Element& el = mesh.elements[e];
      const Vec3 per_node = body_force * (element_volume(mesh, e) / static_cast<double>(node_count(el.kind)));
      for (NodeId n : el.node_ids()) f[n] += per_node;
    }
  }
  return f;
}

}  // namespace cemfrac
