#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cemfrac/material.hpp"
#include "cemfrac/mesh.hpp"
#include "cemfrac/topology.hpp"

namespace cemfrac {

using TetGradients = Eigen::Matrix<double, 3, 4>;
using HexGradients = Eigen::Matrix<double, 3, 8>;

/// Cartesian gradients of the four barycentric shape functions (column i is
/// grad N_i). Throws DegenerateElementError.
TetGradients tet_shape_gradients(const std::array<Vec3, 4>& coords);

/// dN_i/dxi of the trilinear shape functions at local point xi (column i).
HexGradients hex_local_derivatives(const Vec3& xi);

/// J(r, c) = dx_r / dxi_c.
Mat3 hex_jacobian(const std::array<Vec3, 8>& coords, const Vec3& xi);

/// Cartesian gradients of the trilinear shape functions at local point xi.
/// Throws DegenerateElementError when the Jacobian is singular.
HexGradients hex_shape_gradients_at(const std::array<Vec3, 8>& coords, const Vec3& xi);

/// Strain-displacement operator of one edge smoothing domain. Node k enters
/// with the volume-weighted gradient sum_j w_j grad N_k^{V_j}(G), which fixes
/// its 6x3 Voigt block.
struct SmoothedBOperator {
  std::vector<NodeId> nodes;  // ascending
  std::vector<Vec3> gradients;
  double volume = 0.0;

  /// Dense 6 x (3 * nodes.size()) matrix, columns ordered (node, dof).
  Eigen::Matrix<double, 6, Eigen::Dynamic> matrix() const;
};

/// Throws TopologyError when the edge has no incident element.
SmoothedBOperator build_smoothed_operator(const Mesh& mesh, const EdgeTopology& topology, EdgeId edge);

Voigt6 smoothed_strain(const SmoothedBOperator& op, std::span<const Vec3> u);

/// Per-edge strain and stress at the edge quadrature points.
struct EdgeFields {
  std::vector<Voigt6> strain;
  std::vector<Voigt6> stress;
};

/// Smoothed operators for every edge of a topology, stored contiguously, with
/// a node-to-entry index used to gather nodal forces in a fixed order.
class SmoothedOperators {
public:
  SmoothedOperators() = default;
  SmoothedOperators(const Mesh& mesh, const EdgeTopology& topology);

  std::size_t num_edges() const noexcept { return volume_.size(); }
  std::size_t num_nodes() const noexcept { return node_offsets_.size() - 1; }
  SmoothedBOperator edge_operator(EdgeId e) const;

  Voigt6 strain(EdgeId e, std::span<const Vec3> u) const;

  /// f = sum_e B_e^T sigma(B_e u) V_e. Optionally returns per-edge fields.
  void internal_force(const IsotropicElastic& mat, std::span<const Vec3> u, std::vector<Vec3>& f,
                      EdgeFields* fields = nullptr) const;

  /// sum_e psi(B_e u) V_e.
  double strain_energy(const IsotropicElastic& mat, std::span<const Vec3> u) const;
  double strain_energy(const IsotropicElastic& mat, const EdgeFields& fields) const;

private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> nodes_;
  std::vector<Vec3> gradients_;
  std::vector<double> volume_;
  std::vector<std::size_t> node_offsets_{0};
  std::vector<std::size_t> node_entries_;
};

/// Convenience wrapper building the operators on the fly.
std::vector<Vec3> assemble_internal_force(const Mesh& mesh, const EdgeTopology& topology,
                                          const IsotropicElastic& mat, std::span<const Vec3> u);

/// Row-sum lumped mass: rho V / 4 per tet node, rho V / 8 per hex node. Nodes
/// without an active element get a floor of 1e-12 times the mean nodal mass
/// and are flagged as orphans.
struct LumpedMass {
  std::vector<double> node_mass;  // same value for the three dofs of a node
  std::vector<char> orphan;

  double total() const noexcept;
};

LumpedMass assemble_lumped_mass(const Mesh& mesh, const IsotropicElastic& mat);

/// Uniform traction (Pa) on a set of boundary faces.
struct SurfaceLoad {
  std::vector<BoundaryFace> faces;
  Vec3 traction = Vec3::Zero();
};

/// Consistent nodal forces of face tractions (A/3 per triangle node, A/4 per
/// quad node) and body force per unit volume (V/4 per tet node, V/8 per hex
/// node). Faces owned by inactive elements carry no load.
std::vector<Vec3> assemble_external_force(const Mesh& mesh, std::span<const SurfaceLoad> loads,
                                          const Vec3& body_force);

}  // namespace cemfrac
