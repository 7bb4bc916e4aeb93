#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cemfrac/dynamics.hpp"
#include "cemfrac/fracture.hpp"
#include "cemfrac/mesh.hpp"

namespace cemfrac {

// Native mesh format:
//   cemfrac-mesh 1
//   nodes <N> elements <M>
//   <id> <x> <y> <z>                       (N lines, ids 0..N-1)
//   <id> tet <n0> <n1> <n2> <n3>            (M lines, ids 0..M-1)
//   <id> hex <n0> ... <n7>
// Blank lines and lines starting with '#' are ignored.

/// Throws ParseError with the offending line number, or the mesh validation
/// errors for inverted or degenerate elements.
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::filesystem::path& path);

/// Writes every element (active or not) with 17 significant digits.
void write_mesh(std::ostream& out, const Mesh& mesh);
void write_mesh_file(const std::filesystem::path& path, const Mesh& mesh);

struct Snapshot {
  double time = 0.0;
  std::vector<Vec3> u;
  std::vector<Vec3> v;
  /// Per element, maximum over its edges of the max principal stress.
  std::vector<double> max_principal_stress;
  /// Per element, highest candidate G at the last fracture check.
  std::vector<double> last_G;
  std::vector<CrackPolygon> cracks;
};

Snapshot make_snapshot(const Simulation& sim);

/// Legacy ASCII VTK unstructured grid of the active cells (reference
/// coordinates; displacement and velocity as point data).
void write_vtk_snapshot(std::ostream& out, const Mesh& mesh, const Snapshot& snap);
/// Writes `path` and the crack polygons to `<stem>_cracks.vtk` next to it.
void write_vtk_snapshot(const std::filesystem::path& path, const Mesh& mesh, const Snapshot& snap);
void write_crack_polydata(std::ostream& out, std::span<const CrackPolygon> cracks, double time);

struct EnergyRow {
  double t = 0.0;
  EnergyLedger ledger;
};

struct LoadDisplacementRow {
  double t = 0.0;
  double displacement = 0.0;
  double reaction_force = 0.0;
};

void write_energy_csv(std::ostream& out, std::span<const EnergyRow> rows);
void write_energy_csv(const std::filesystem::path& path, std::span<const EnergyRow> rows);
void write_load_displacement_csv(std::ostream& out, std::span<const LoadDisplacementRow> rows);
void write_load_displacement_csv(const std::filesystem::path& path,
                                 std::span<const LoadDisplacementRow> rows);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column; throws Error when absent.
  std::size_t column(const std::string& name) const;
};

/// Numeric CSV with one header line. Throws ParseError.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

/// 17 significant digits, enough to read back the same double.
std::string format_double(double x);

}  // namespace cemfrac
