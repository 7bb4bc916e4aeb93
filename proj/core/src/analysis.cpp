#include "cemfrac/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace cemfrac {

std::optional<double> crack_angle_deg(std::span<const CrackPolygon> cracks, const Vec3& tip) {
  if (cracks.empty()) return std::nullopt;
  Eigen::Matrix2d S = Eigen::Matrix2d::Zero();
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const CrackPolygon& c : cracks) {
    const Vec3 r3 = c.centroid() - tip;
    const Eigen::Vector2d r(r3.x(), r3.y());
    S += r * r.transpose();
    mean += r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(S);
  Eigen::Vector2d d = eig.eigenvectors().col(1);
  if (d.dot(mean) < 0.0) d = -d;
  return std::atan2(d.y(), d.x()) * 180.0 / std::numbers::pi;
}

namespace {

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::vector<int> element_components(const Mesh& mesh, std::span<const ElementId> elements) {
  DisjointSet ds(elements.size());
  std::vector<std::size_t> first_owner(mesh.num_nodes(), SIZE_MAX);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    for (NodeId n : mesh.elements[elements[i]].node_ids()) {
      if (first_owner[n] == SIZE_MAX) {
        first_owner[n] = i;
      } else {
        ds.unite(first_owner[n], i);
      }
    }
  }
  std::vector<int> label(elements.size(), -1);
  std::vector<int> root_label(elements.size(), -1);
  int next = 0;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const std::size_t r = ds.find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    label[i] = root_label[r];
  }
  return label;
}

std::size_t count_components(const Mesh& mesh, std::span<const ElementId> elements) {
  const auto labels = element_components(mesh, elements);
  return labels.empty() ? 0 : static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end()) + 1);
}

std::size_t max_components_past_cut(const Mesh& mesh, std::span<const ElementId> elements, int axis,
                                     double start, int sign, std::size_t min_size) {
  std::vector<double> level;
  level.reserve(elements.size());
  for (ElementId e : elements) level.push_back(sign * element_centroid(mesh, e)[axis]);
  std::vector<double> cuts;
  for (double l : level) {
    if (l > sign * start) cuts.push_back(l);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::size_t best = 0;
  std::vector<ElementId> subset;
  // A cut just below each distinct level keeps that level and everything beyond.
  for (double cut : cuts) {
    subset.clear();
    for (std::size_t i = 0; i < elements.size(); ++i) {
      if (level[i] >= cut) subset.push_back(elements[i]);
    }
    const auto labels = element_components(mesh, subset);
    std::vector<std::size_t> sizes;
    for (int l : labels) {
      if (static_cast<std::size_t>(l) >= sizes.size()) sizes.resize(l + 1, 0);
      ++sizes[l];
    }
    const auto big = static_cast<std::size_t>(
        std::count_if(sizes.begin(), sizes.end(), [&](std::size_t s) { return s >= min_size; }));
    best = std::max(best, big);
  }
  return best;
}

std::vector<ElementId> fractured_elements(std::span<const FractureRecord> records) {
  std::vector<ElementId> out;
  out.reserve(records.size());
  for (const FractureRecord& r : records) out.push_back(r.element);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace cemfrac
