#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "cemfrac/io.hpp"
#include "test_support.hpp"

using namespace cemfrac;

namespace {

std::string write_to_string(const Mesh& m) {
  std::ostringstream out;
  write_mesh(out, m);
  return out.str();
}

Mesh read_from_string(const std::string& s) {
  std::istringstream in(s);
  return read_mesh(in);
}

std::size_t parse_error_line(const std::string& s) {
  try {
    read_from_string(s);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

// Fixed two-tet snapshot used for the golden file.
Snapshot two_tet_snapshot() {
  Snapshot s;
  s.time = 1.5e-6;
  s.u = {Vec3(0, 0, 0), Vec3(1e-6, 0, 0), Vec3(0, -2e-6, 0), Vec3(0, 0, 3e-6), Vec3(1e-6, 1e-6, 1e-6)};
  s.v = {Vec3(0, 0, 0), Vec3(0.5, 0, 0), Vec3(0, -1, 0), Vec3(0, 0, 1.5), Vec3(0.25, 0.25, 0.25)};
  s.max_principal_stress = {1.25e8, -3e7};
  s.last_G = {12.5, 0.0};
  CrackPolygon p;
  p.element = 1;
  p.count = 3;
  p.vertices = {Vec3(0.5, 0.5, 0), Vec3(0.5, 0, 0.5), Vec3(0, 0.5, 0.5), Vec3::Zero()};
  p.normal = Vec3(1, 1, 1).normalized();
  p.time = 1e-6;
  p.G = 40.0;
  s.cracks = {p};
  return s;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / ("cemfrac_io_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST(ReadMesh, UnitTet) {
  const Mesh m = read_from_string(
      "cemfrac-mesh 1\n"
      "# unit tet\n"
      "nodes 4 elements 1\n"
      "0 0 0 0\n1 1 0 0\n\n2 0 1 0\n3 0 0 1\n"
      "0 tet 0 1 2 3\n");
  ASSERT_EQ(m.num_nodes(), 4u);
  ASSERT_EQ(m.num_elements(), 1u);
  EXPECT_DOUBLE_EQ(element_volume(m, 0), 1.0 / 6.0);
}

TEST(ReadMesh, CountMismatchNamesTheLine) {
  EXPECT_EQ(parse_error_line("cemfrac-mesh 1\nnodes 4 elements 1\n0 0 0 0\n1 1 0 0\n2 0 1 0\n0 tet 0 1 2 3\n"), 6u);
  EXPECT_EQ(parse_error_line("cemfrac-mesh 1\nnodes 4 elements 2\n0 0 0 0\n1 1 0 0\n2 0 1 0\n3 0 0 1\n0 tet 0 1 2 3\n"),
            7u);
}

TEST(ReadMesh, MalformedRecords) {
  EXPECT_EQ(parse_error_line("cemfrac-mesh 2\n"), 1u);
  EXPECT_EQ(parse_error_line("cemfrac-mesh 1\nnodes x elements 1\n"), 2u);
  EXPECT_EQ(parse_error_line("cemfrac-mesh 1\nnodes 1 elements 0\n5 0 0 0\n"), 3u);  // id not dense
  EXPECT_EQ(parse_error_line("cemfrac-mesh 1\nnodes 4 elements 1\n0 0 0 0\n1 1 0 0\n2 0 1 0\n3 0 0 1\n0 wedge 0 1 2 3\n"),
            7u);
  EXPECT_EQ(parse_error_line("cemfrac-mesh 1\nnodes 4 elements 1\n0 0 0 0\n1 1 0 0\n2 0 1 0\n3 0 0 1\n0 tet 0 1 2\n"),
            7u);
  EXPECT_EQ(parse_error_line("cemfrac-mesh 1\nnodes 4 elements 1\n0 0 0 0\n1 1 0 zz\n"), 4u);
}

TEST(ReadMesh, RejectsNegativeVolumeTet) {
  EXPECT_THROW(read_from_string("cemfrac-mesh 1\nnodes 4 elements 1\n0 0 0 0\n1 1 0 0\n2 0 1 0\n3 0 0 1\n0 tet 0 2 1 3\n"),
               Error);
}

TEST(WriteMesh, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 4; ++trial) {
    Mesh m = test::random_box_mesh(rng, trial % 2 == 1, 3, 0.2);
    for (auto& x : m.nodes) x *= 1.0 / 3.0;  // non-terminating binary fractions
    const Mesh r = read_from_string(write_to_string(m));
    EXPECT_TRUE(r == m);
    EXPECT_EQ(write_to_string(r), write_to_string(m));
  }
  const Mesh mixed = [] {
    std::mt19937_64 g(2);
    return test::mixed_mesh(g);
  }();
  Mesh all_active = mixed;
  std::fill(all_active.active.begin(), all_active.active.end(), 1);
  EXPECT_TRUE(read_from_string(write_to_string(mixed)) == all_active);
}

TEST(WriteMesh, FileRoundTrip) {
  const auto dir = temp_dir("mesh");
  const Mesh m = test::two_tet_mesh();
  write_mesh_file(dir / "m.txt", m);
  EXPECT_TRUE(read_mesh_file(dir / "m.txt") == m);
  EXPECT_THROW(read_mesh_file(dir / "missing.txt"), Error);
}

TEST(FormatDouble, SeventeenDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Vtk, SingleActiveTet) {
  const Mesh m = test::unit_tet_mesh();
  Snapshot s;
  s.u.assign(4, Vec3::Zero());
  s.v.assign(4, Vec3::Zero());
  s.max_principal_stress = {0.0};
  s.last_G = {0.0};
  std::ostringstream out;
  write_vtk_snapshot(out, m, s);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("# vtk DataFile Version 3.0\n", 0), 0u);
  EXPECT_NE(text.find("DATASET UNSTRUCTURED_GRID"), std::string::npos);
  EXPECT_NE(text.find("POINTS 4 double"), std::string::npos);
  EXPECT_NE(text.find("CELLS 1 5"), std::string::npos);
  EXPECT_NE(text.find("CELL_TYPES 1\n10\n"), std::string::npos);
}

TEST(Vtk, AllDeactivatedKeepsPoints) {
  Mesh m = test::two_tet_mesh();
  m.active = {0, 0};
  Snapshot s = two_tet_snapshot();
  std::ostringstream out;
  write_vtk_snapshot(out, m, s);
  EXPECT_NE(out.str().find("POINTS 5 double"), std::string::npos);
  EXPECT_NE(out.str().find("CELLS 0 0"), std::string::npos);
  EXPECT_NE(out.str().find("POINT_DATA 5"), std::string::npos);
}

TEST(Vtk, HexCellType) {
  const Mesh m = test::unit_hex_mesh();
  Snapshot s;
  s.u.assign(8, Vec3::Zero());
  s.v.assign(8, Vec3::Zero());
  s.max_principal_stress = {0.0};
  s.last_G = {0.0};
  std::ostringstream out;
  write_vtk_snapshot(out, m, s);
  EXPECT_NE(out.str().find("CELL_TYPES 1\n12\n"), std::string::npos);
}

TEST(Vtk, GoldenTwoTetSnapshot) {
  Mesh m = test::two_tet_mesh();
  const auto dir = temp_dir("golden");
  write_vtk_snapshot(dir / "snap.vtk", m, two_tet_snapshot());
  EXPECT_EQ(test::slurp(dir / "snap.vtk"), test::slurp(std::filesystem::path(CEMFRAC_TEST_DATA) / "two_tet.vtk"));
  EXPECT_EQ(test::slurp(dir / "snap_cracks.vtk"),
            test::slurp(std::filesystem::path(CEMFRAC_TEST_DATA) / "two_tet_cracks.vtk"));
}

TEST(Vtk, OutputIsByteIdenticalAcrossWrites) {
  const Mesh m = test::two_tet_mesh();
  std::ostringstream a, b;
  write_vtk_snapshot(a, m, two_tet_snapshot());
  write_vtk_snapshot(b, m, two_tet_snapshot());
  EXPECT_EQ(a.str(), b.str());
}

TEST(Vtk, CrackPolydata) {
  const Snapshot s = two_tet_snapshot();
  std::ostringstream out;
  write_crack_polydata(out, s.cracks, s.time);
  const std::string text = out.str();
  EXPECT_NE(text.find("DATASET POLYDATA"), std::string::npos);
  EXPECT_NE(text.find("POINTS 3 double"), std::string::npos);
  EXPECT_NE(text.find("POLYGONS 1 4"), std::string::npos);
  EXPECT_NE(text.find("NORMALS normal double"), std::string::npos);
}

TEST(Csv, EmptyEnergySeriesIsHeaderOnly) {
  std::ostringstream out;
  write_energy_csv(out, {});
  EXPECT_EQ(out.str(), "t,kinetic,strain,external_work,dissipated\n");
  std::ostringstream ld;
  write_load_displacement_csv(ld, {});
  EXPECT_EQ(ld.str(), "t,displacement,reaction_force\n");
}

TEST(Csv, EnergyRoundTrip) {
  const std::vector<EnergyRow> rows{{0.0, {0.0, 0.0, 0.0, 0.0}}, {1e-6, {1.0 / 3.0, 2.5, 2.8333333333333335, 0.1}}};
  std::ostringstream out;
  write_energy_csv(out, rows);
  std::istringstream in(out.str());
  const CsvTable t = read_csv(in);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][t.column("t")], 1e-6);
  EXPECT_EQ(t.rows[1][t.column("kinetic")], 1.0 / 3.0);
  EXPECT_EQ(t.rows[1][t.column("strain")], 2.5);
  EXPECT_EQ(t.rows[1][t.column("external_work")], 2.8333333333333335);
  EXPECT_EQ(t.rows[1][t.column("dissipated")], 0.1);
  EXPECT_THROW(t.column("nope"), Error);
}

TEST(Csv, LoadDisplacementRoundTripThroughFile) {
  const auto dir = temp_dir("csv");
  const std::vector<LoadDisplacementRow> rows{{0.0, 0.0, 0.0}, {2e-6, 1.7e-5, -3.25e4}};
  write_load_displacement_csv(dir / "ld.csv", rows);
  const CsvTable t = read_csv_file(dir / "ld.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"t", "displacement", "reaction_force"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][1], 1.7e-5);
  EXPECT_EQ(t.rows[1][2], -3.25e4);
}

TEST(Csv, ParseErrors) {
  std::istringstream bad("a,b\n1,2\n3\n");
  EXPECT_THROW(read_csv(bad), ParseError);
  std::istringstream word("a,b\n1,x\n");
  EXPECT_THROW(read_csv(word), ParseError);
}

TEST(Snapshot, FromSimulation) {
  GeneratorSpec spec;
  spec.size = Vec3(0.02, 0.01, 0.01);
  spec.cells = {2, 1, 1};
  const Mesh m = generate_notched_box(spec);
  LoadCase load;
  DirichletBC pull;
  for (NodeId i = 0; i < m.num_nodes(); ++i) {
    if (m.nodes[i].x() > 0.02 - 1e-12) pull.nodes.push_back(i);
  }
  pull.mask = {true, false, false};
  pull.velocity = Vec3(1, 0, 0);
  pull.ramp_time = 1e-7;
  load.dirichlet = {pull};
  IntegratorConfig cfg;
  cfg.t_end = 1e-6;
  Simulation sim(m, IsotropicElastic(200e9, 0.3, 7800, 1e9), load, cfg);
  for (int k = 0; k < 5; ++k) sim.step();
  const Snapshot s = make_snapshot(sim);
  EXPECT_EQ(s.u.size(), m.num_nodes());
  EXPECT_EQ(s.max_principal_stress.size(), m.num_elements());
  EXPECT_EQ(s.last_G.size(), m.num_elements());
  EXPECT_EQ(s.time, sim.state().t);
  EXPECT_GT(*std::max_element(s.max_principal_stress.begin(), s.max_principal_stress.end()), 0.0);
}
