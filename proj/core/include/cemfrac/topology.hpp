#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cemfrac/mesh.hpp"

namespace cemfrac {

/// Edge-based smoothing domains of the active elements.
///
/// Edges are unique sorted node pairs kept in lexicographic order. Each edge
/// stores its incident active elements (ascending id) in CSR form together
/// with the element volume V_j, the volume weight V_j / sum(V_m), and the
/// element's share of the smoothing domain (V_j / 6 for tets, V_j / 12 for
/// hexes). The object is immutable once built.
class EdgeTopology {
public:
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<EdgeKey>& edges() const noexcept { return edges_; }
  EdgeKey edge(EdgeId e) const noexcept { return edges_[e]; }

  std::span<const ElementId> incident(EdgeId e) const noexcept {
    return {incident_.data() + offsets_[e], offsets_[e + 1] - offsets_[e]};
  }
  std::span<const double> weights(EdgeId e) const noexcept {
    return {weights_.data() + offsets_[e], offsets_[e + 1] - offsets_[e]};
  }
  std::span<const double> incident_volumes(EdgeId e) const noexcept {
    return {volumes_.data() + offsets_[e], offsets_[e + 1] - offsets_[e]};
  }
  double edge_volume(EdgeId e) const noexcept { return edge_volume_[e]; }
  const std::vector<double>& edge_volumes() const noexcept { return edge_volume_; }

  std::optional<EdgeId> find(EdgeKey key) const noexcept;

  /// Edge ids of an element's local edges, in local_edges() order.
  std::vector<EdgeId> element_edges(const Mesh& mesh, ElementId e) const;

  double total_volume() const noexcept;

  bool operator==(const EdgeTopology&) const = default;

private:
  friend EdgeTopology build_edge_topology(const Mesh& mesh);
  friend EdgeTopology refresh_topology_after_deactivation(const EdgeTopology& topology,
                                                          std::span<const ElementId> deactivated);
  void finalize();

  std::vector<EdgeKey> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<ElementId> incident_;
  std::vector<double> volumes_;
  std::vector<double> shares_;
  std::vector<double> weights_;
  std::vector<double> edge_volume_;
};

/// Builds the topology over active elements. Throws TopologyError when two
/// active elements share the same node set.
EdgeTopology build_edge_topology(const Mesh& mesh);

/// Removes the given elements from every incidence list, recomputes weights
/// and volumes and drops edges left without incident elements.
EdgeTopology refresh_topology_after_deactivation(const EdgeTopology& topology,
                                                 std::span<const ElementId> deactivated);

}  // namespace cemfrac
