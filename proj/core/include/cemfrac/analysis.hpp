#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cemfrac/fracture.hpp"
#include "cemfrac/mesh.hpp"

namespace cemfrac {

/// Least-squares crack direction in the xy plane through `tip`: the dominant
/// eigenvector of sum r r^T over the polygon centroids r (relative to the
/// tip), oriented towards their mean. Angle in degrees from +x, in
/// (-180, 180]. Empty input gives nullopt.
std::optional<double> crack_angle_deg(std::span<const CrackPolygon> cracks, const Vec3& tip);

/// Connected components of a set of elements, two elements being adjacent
/// when they share a node. Returns a component label per input element,
/// labels numbered from 0 in order of first appearance.
std::vector<int> element_components(const Mesh& mesh, std::span<const ElementId> elements);

std::size_t count_components(const Mesh& mesh, std::span<const ElementId> elements);

/// Largest number of components, each with at least `min_size` elements,
/// formed by the elements whose centroid coordinate along `axis` lies on the
/// far side of a cut, over all cuts beyond `start` in direction `sign`
/// (+1 or -1). A single crack gives 1; a branched crack gives 2 or more.
std::size_t max_components_past_cut(const Mesh& mesh, std::span<const ElementId> elements, int axis,
                                     double start, int sign, std::size_t min_size = 1);

/// Ids of fractured elements recorded in a fracture history, ascending.
std::vector<ElementId> fractured_elements(std::span<const FractureRecord> records);

}  // namespace cemfrac
