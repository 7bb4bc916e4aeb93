#include "cemfrac/topology.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <tuple>

#include "cemfrac/parallel.hpp"

namespace cemfrac {

std::optional<EdgeId> EdgeTopology::find(EdgeKey key) const noexcept {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return std::nullopt;
  return static_cast<EdgeId>(it - edges_.begin());
}

std::vector<EdgeId> EdgeTopology::element_edges(const Mesh& mesh, ElementId e) const {
  const Element& el = mesh.elements[e];
  std::vector<EdgeId> out;
  for (const auto& [a, b] : local_edges(el.kind)) {
    auto id = find(make_edge_key(el.nodes[a], el.nodes[b]));
    if (!id) throw TopologyError("element " + std::to_string(e) + " has an edge outside the topology");
    out.push_back(*id);
  }
  return out;
}

double EdgeTopology::total_volume() const noexcept {
  double v = 0.0;
  for (double x : edge_volume_) v += x;
  return v;
}

void EdgeTopology::finalize() {
  const std::size_t n = edges_.size();
  weights_.assign(incident_.size(), 0.0);
  edge_volume_.assign(n, 0.0);
  for (std::size_t e = 0; e < n; ++e) {
    double vsum = 0.0;
    double share = 0.0;
    for (std::size_t k = offsets_[e]; k < offsets_[e + 1]; ++k) {
      vsum += volumes_[k];
      share += shares_[k];
    }
    for (std::size_t k = offsets_[e]; k < offsets_[e + 1]; ++k) weights_[k] = volumes_[k] / vsum;
    edge_volume_[e] = share;
  }
}

EdgeTopology build_edge_topology(const Mesh& mesh) {
  const std::size_t ne = mesh.elements.size();
  std::vector<double> volume(ne, 0.0);
  parallel_for(ne, [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      if (!mesh.active[e]) continue;
      const Element& el = mesh.elements[e];
      // Degenerate elements are rejected by validate_mesh; avoid throwing here.
      volume[e] = el.kind == ElementKind::Tet4
                      ? std::abs(signed_tet_volume(mesh.nodes[el.nodes[0]], mesh.nodes[el.nodes[1]],
                                                   mesh.nodes[el.nodes[2]], mesh.nodes[el.nodes[3]]))
                      : hex_volume(hex_coords(mesh, el));
    }
  });

  std::set<std::array<NodeId, 8>> node_sets;
  std::vector<std::tuple<EdgeKey, ElementId>> pairs;
  pairs.reserve(ne * 6);
  for (ElementId e = 0; e < ne; ++e) {
    if (!mesh.is_active(e)) continue;
    const Element& el = mesh.elements[e];
    std::array<NodeId, 8> key{};
    key.fill(static_cast<NodeId>(-1));
    std::copy(el.node_ids().begin(), el.node_ids().end(), key.begin());
    std::sort(key.begin(), key.begin() + node_count(el.kind));
    if (!node_sets.insert(key).second) {
      throw TopologyError("duplicate element connectivity at element " + std::to_string(e));
    }
    for (const auto& [a, b] : local_edges(el.kind)) {
      pairs.emplace_back(make_edge_key(el.nodes[a], el.nodes[b]), e);
    }
  }
  std::sort(pairs.begin(), pairs.end());

  EdgeTopology topo;
  topo.incident_.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [key, elem] = pairs[i];
    if (topo.edges_.empty() || topo.edges_.back() != key) {
      if (!topo.edges_.empty()) topo.offsets_.push_back(topo.incident_.size());
      topo.edges_.push_back(key);
    }
    topo.incident_.push_back(elem);
    topo.volumes_.push_back(volume[elem]);
    const double parts = mesh.elements[elem].kind == ElementKind::Tet4 ? 6.0 : 12.0;
    topo.shares_.push_back(volume[elem] / parts);
  }
  if (!topo.edges_.empty()) topo.offsets_.push_back(topo.incident_.size());
  topo.finalize();
  return topo;
}

EdgeTopology refresh_topology_after_deactivation(const EdgeTopology& topology,
                                                 std::span<const ElementId> deactivated) {
  std::vector<ElementId> removed(deactivated.begin(), deactivated.end());
  std::sort(removed.begin(), removed.end());
  auto is_removed = [&](ElementId e) {
    return std::binary_search(removed.begin(), removed.end(), e);
  };

  EdgeTopology out;
  for (EdgeId e = 0; e < topology.num_edges(); ++e) {
    const std::size_t first = out.incident_.size();
    for (std::size_t k = topology.offsets_[e]; k < topology.offsets_[e + 1]; ++k) {
      if (is_removed(topology.incident_[k])) continue;
      out.incident_.push_back(topology.incident_[k]);
      out.volumes_.push_back(topology.volumes_[k]);
      out.shares_.push_back(topology.shares_[k]);
    }
    if (out.incident_.size() == first) continue;
    out.edges_.push_back(topology.edges_[e]);
    out.offsets_.push_back(out.incident_.size());
  }
  out.finalize();
  return out;
}

}  // namespace cemfrac
