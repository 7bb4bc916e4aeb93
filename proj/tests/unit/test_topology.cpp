#include <map>
#include <set>

#include <gtest/gtest.h>

#include "cemfrac/generator.hpp"
#include "cemfrac/topology.hpp"
#include "test_support.hpp"

using namespace cemfrac;

namespace {

// Brute force: every node pair of every active element's local edges, with
// the elements containing both nodes.
std::map<EdgeKey, std::set<ElementId>> brute_force_edges(const Mesh& m) {
  std::map<EdgeKey, std::set<ElementId>> out;
  for (ElementId e = 0; e < m.num_elements(); ++e) {
    if (!m.is_active(e)) continue;
    const Element& el = m.elements[e];
    for (const auto& [a, b] : local_edges(el.kind)) out[make_edge_key(el.nodes[a], el.nodes[b])].insert(e);
  }
  return out;
}

void expect_matches_brute_force(const Mesh& m, const EdgeTopology& t) {
  const auto ref = brute_force_edges(m);
  ASSERT_EQ(t.num_edges(), ref.size());
  std::size_t k = 0;
  for (const auto& [key, elems] : ref) {
    EXPECT_EQ(t.edge(static_cast<EdgeId>(k)), key);
    const auto inc = t.incident(static_cast<EdgeId>(k));
    EXPECT_EQ(std::set<ElementId>(inc.begin(), inc.end()), elems);
    ++k;
  }
}

void expect_partitions(const Mesh& m, const EdgeTopology& t) {
  double vol = 0.0;
  for (EdgeId e = 0; e < t.num_edges(); ++e) {
    double wsum = 0.0;
    double vsum = 0.0;
    const auto w = t.weights(e);
    const auto v = t.incident_volumes(e);
    const auto inc = t.incident(e);
    for (std::size_t j = 0; j < w.size(); ++j) {
      wsum += w[j];
      vsum += v[j];
      EXPECT_NEAR(v[j], element_volume(m, inc[j]), 1e-14);
    }
    EXPECT_NEAR(wsum, 1.0, 1e-12);
    double expected_volume = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      EXPECT_NEAR(w[j], v[j] / vsum, 1e-14);
      expected_volume += v[j] / (m.elements[inc[j]].kind == ElementKind::Tet4 ? 6.0 : 12.0);
    }
    EXPECT_NEAR(t.edge_volume(e), expected_volume, 1e-14 * expected_volume);
    vol += t.edge_volume(e);
  }
  EXPECT_LE(test::rel_err(vol, active_volume(m)), 1e-10);
  EXPECT_LE(test::rel_err(t.total_volume(), active_volume(m)), 1e-10);
}

}  // namespace

TEST(EdgeTopology, SingleTet) {
  const Mesh m = test::unit_tet_mesh();
  const EdgeTopology t = build_edge_topology(m);
  ASSERT_EQ(t.num_edges(), 6u);
  for (EdgeId e = 0; e < 6; ++e) {
    ASSERT_EQ(t.incident(e).size(), 1u);
    EXPECT_EQ(t.weights(e)[0], 1.0);
    EXPECT_NEAR(t.edge_volume(e), 1.0 / 36.0, 1e-16);
  }
}

TEST(EdgeTopology, SingleHex) {
  const Mesh m = test::unit_hex_mesh();
  const EdgeTopology t = build_edge_topology(m);
  EXPECT_EQ(t.num_edges(), 12u);
  expect_partitions(m, t);
}

TEST(EdgeTopology, TwoTetsSharingAFace) {
  const Mesh m = test::two_tet_mesh();
  const EdgeTopology t = build_edge_topology(m);
  expect_matches_brute_force(m, t);
  ASSERT_EQ(t.num_edges(), 9u);
  std::size_t shared = 0;
  for (EdgeId e = 0; e < t.num_edges(); ++e) {
    if (t.incident(e).size() == 2) {
      ++shared;
      const auto [a, b] = t.edge(e);
      EXPECT_TRUE(a >= 1 && a <= 3 && b >= 1 && b <= 3);
    }
  }
  EXPECT_EQ(shared, 3u);
}

TEST(EdgeTopology, InteriorEdgeOfHexGridHasFourElements) {
  GeneratorSpec spec;
  spec.size = Vec3(2, 2, 1);
  spec.cells = {2, 2, 1};
  spec.decomposition = CellDecomposition::Hex;
  const Mesh m = generate_notched_box(spec);
  const EdgeTopology t = build_edge_topology(m);
  // Grid node (1, 1, z) is 4 at z = 0 and 13 at z = 1.
  ASSERT_EQ(m.nodes[4], Vec3(1, 1, 0));
  ASSERT_EQ(m.nodes[13], Vec3(1, 1, 1));
  const auto e = t.find(make_edge_key(4, 13));
  ASSERT_TRUE(e.has_value());
  EXPECT_EQ(t.incident(*e).size(), 4u);
}

TEST(EdgeTopology, IncidenceIsIndeterminateOnUnstructuredMeshes) {
  std::mt19937_64 rng(7);
  const Mesh m = test::random_box_mesh(rng, false, 3, 0.2);
  const EdgeTopology t = build_edge_topology(m);
  std::set<std::size_t> counts;
  for (EdgeId e = 0; e < t.num_edges(); ++e) counts.insert(t.incident(e).size());
  EXPECT_GT(counts.size(), 2u);
}

TEST(EdgeTopology, MatchesBruteForceAndPartitions) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 6; ++i) {
    const Mesh m = i == 5 ? test::mixed_mesh(rng) : test::random_box_mesh(rng, i % 2 == 1);
    const EdgeTopology t = build_edge_topology(m);
    expect_matches_brute_force(m, t);
    expect_partitions(m, t);
  }
}

TEST(EdgeTopology, ElementEdgesFollowLocalOrder) {
  const Mesh m = test::two_tet_mesh();
  const EdgeTopology t = build_edge_topology(m);
  const auto ids = t.element_edges(m, 1);
  const auto local = local_edges(ElementKind::Tet4);
  ASSERT_EQ(ids.size(), 6u);
  for (std::size_t k = 0; k < 6; ++k) {
    const Element& el = m.elements[1];
    EXPECT_EQ(t.edge(ids[k]), make_edge_key(el.nodes[local[k].first], el.nodes[local[k].second]));
  }
}

TEST(EdgeTopology, DuplicateElementIsRejected) {
  Mesh m = test::unit_tet_mesh();
  m.add_element(Element::tet(0, 1, 2, 3));
  EXPECT_THROW(build_edge_topology(m), TopologyError);
}

TEST(EdgeTopology, InactiveElementsAreIgnored) {
  Mesh m = test::two_tet_mesh();
  m.active[0] = 0;
  const EdgeTopology t = build_edge_topology(m);
  EXPECT_EQ(t.num_edges(), 6u);
  expect_matches_brute_force(m, t);
}

TEST(RefreshTopology, DeactivateOneOfTwo) {
  const Mesh m = test::two_tet_mesh();
  const EdgeTopology t = build_edge_topology(m);
  const std::vector<ElementId> gone{1};
  const EdgeTopology r = refresh_topology_after_deactivation(t, gone);
  ASSERT_EQ(r.num_edges(), 6u);
  for (EdgeId e = 0; e < r.num_edges(); ++e) {
    ASSERT_EQ(r.incident(e).size(), 1u);
    EXPECT_EQ(r.incident(e)[0], 0u);
    EXPECT_EQ(r.weights(e)[0], 1.0);
  }
}

TEST(RefreshTopology, DeactivateAll) {
  const Mesh m = test::two_tet_mesh();
  const std::vector<ElementId> all{0, 1};
  const EdgeTopology r = refresh_topology_after_deactivation(build_edge_topology(m), all);
  EXPECT_EQ(r.num_edges(), 0u);
  EXPECT_EQ(r.total_volume(), 0.0);
}

TEST(RefreshTopology, EqualsRebuildOnReducedMesh) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    Mesh m = trial == 7 ? test::mixed_mesh(rng) : test::random_box_mesh(rng, trial % 2 == 1);
    const EdgeTopology t = build_edge_topology(m);
    std::vector<ElementId> gone;
    std::bernoulli_distribution pick(0.3);
    for (ElementId e = 0; e < m.num_elements(); ++e) {
      if (m.is_active(e) && pick(rng)) gone.push_back(e);
    }
    const EdgeTopology r = refresh_topology_after_deactivation(t, gone);
    for (ElementId e : gone) m.active[e] = 0;
    EXPECT_TRUE(r == build_edge_topology(m)) << "trial " << trial;
  }
}
