#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "cemfrac/analysis.hpp"
#include "test_support.hpp"

using namespace cemfrac;

namespace {

CrackPolygon poly_at(const Vec3& c) {
  CrackPolygon p;
  p.count = 3;
  p.vertices = {c + Vec3(1e-3, 0, 0), c + Vec3(0, 1e-3, 0), c - Vec3(1e-3, 1e-3, 0), Vec3::Zero()};
  return p;
}

Mesh strip(int n) {
  GeneratorSpec spec;
  spec.size = Vec3(n, 1, 1);
  spec.cells = {n, 1, 1};
  return generate_notched_box(spec);
}

}  // namespace

TEST(CrackAngle, EmptyIsNullopt) { EXPECT_FALSE(crack_angle_deg({}, Vec3::Zero()).has_value()); }

TEST(CrackAngle, StraightLineFromTip) {
  const Vec3 tip(0.05, 0.025, 0);
  for (double deg : {0.0, 30.0, 65.0, 90.0, 120.0, -45.0}) {
    const double r = deg * M_PI / 180.0;
    std::vector<CrackPolygon> c;
    for (int k = 1; k <= 10; ++k) c.push_back(poly_at(tip + 0.002 * k * Vec3(std::cos(r), std::sin(r), 0)));
    EXPECT_NEAR(*crack_angle_deg(c, tip), deg, 1e-9);
  }
}

TEST(CrackAngle, LeastSquaresThroughTip) {
  // Points scattered symmetrically about the 60 degree ray.
  const Vec3 tip = Vec3::Zero();
  const Vec3 d(std::cos(M_PI / 3), std::sin(M_PI / 3), 0), n(-d.y(), d.x(), 0);
  std::vector<CrackPolygon> c;
  for (int k = 1; k <= 20; ++k) {
    c.push_back(poly_at(k * d + 0.3 * n));
    c.push_back(poly_at(k * d - 0.3 * n));
  }
  EXPECT_NEAR(*crack_angle_deg(c, tip), 60.0, 1e-9);
}

TEST(Components, ChainAndGap) {
  const Mesh m = strip(6);  // 6 tets per cell
  std::vector<ElementId> first_and_last;
  for (ElementId e = 0; e < 6; ++e) first_and_last.push_back(e);
  for (ElementId e = 30; e < 36; ++e) first_and_last.push_back(e);
  EXPECT_EQ(count_components(m, first_and_last), 2u);
  const auto labels = element_components(m, first_and_last);
  EXPECT_EQ(labels.front(), 0);
  EXPECT_EQ(labels.back(), 1);
  std::vector<ElementId> all(m.num_elements());
  std::iota(all.begin(), all.end(), 0u);
  EXPECT_EQ(count_components(m, all), 1u);
  EXPECT_EQ(count_components(m, std::vector<ElementId>{}), 0u);
}

TEST(Components, PastCut) {
  // Two separated runs of cells beyond x = 1, one run before it.
  const Mesh m = strip(8);
  std::vector<ElementId> sel;
  auto cell = [&](int i) {
    for (ElementId e = 6 * i; e < 6 * i + 6; ++e) sel.push_back(e);
  };
  cell(0);
  cell(2);
  cell(3);
  cell(6);
  EXPECT_EQ(max_components_past_cut(m, sel, 0, 1.0, +1, 1), 2u);
  EXPECT_EQ(max_components_past_cut(m, sel, 0, 1.0, +1, 7), 1u);  // cell 6 alone has 6 elements
  EXPECT_EQ(max_components_past_cut(m, sel, 0, 6.0, -1, 1), 2u);
  EXPECT_EQ(max_components_past_cut(m, sel, 0, 7.0, -1, 1), 3u);
}

TEST(FracturedElements, SortedUnique) {
  std::vector<FractureRecord> r(3);
  r[0].element = 5;
  r[1].element = 2;
  r[2].element = 5;
  EXPECT_EQ(fractured_elements(r), (std::vector<ElementId>{2, 5}));
}
