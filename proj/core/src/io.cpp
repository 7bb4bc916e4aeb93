#include "cemfrac/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace cemfrac {

std::string format_double(double x) {
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

struct LineReader {
  std::istream& in;
  std::size_t number = 0;

  // Next non-blank, non-comment line split into tokens; false at EOF.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in, line)) {
      ++number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      tokens.clear();
      std::istringstream ss(line);
      std::string tok;
      while (ss >> tok) tokens.push_back(tok);
      return true;
    }
    return false;
  }
};

template <class T>
T parse_integer(const std::string& tok, std::size_t line, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, std::string("expected integer ") + what + ", got '" + tok + "'");
  }
  return value;
}

double parse_real(const std::string& tok, std::size_t line, const char* what) {
  char* end = nullptr;
  const double value = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size() || !std::isfinite(value)) {
    throw ParseError(line, std::string("expected finite number ") + what + ", got '" + tok + "'");
  }
  return value;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

void check_stream(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

Mesh read_mesh(std::istream& in) {
  LineReader reader{in};
  std::vector<std::string> tok;
  if (!reader.next(tok)) throw ParseError(reader.number, "empty mesh file");
  if (tok.size() != 2 || tok[0] != "cemfrac-mesh" || tok[1] != "1") {
    throw ParseError(reader.number, "expected header 'cemfrac-mesh 1'");
  }
  if (!reader.next(tok)) throw ParseError(reader.number, "missing counts line");
  if (tok.size() != 4 || tok[0] != "nodes" || tok[2] != "elements") {
    throw ParseError(reader.number, "expected 'nodes <N> elements <M>'");
  }
  const auto n_nodes = parse_integer<std::size_t>(tok[1], reader.number, "node count");
  const auto n_elems = parse_integer<std::size_t>(tok[3], reader.number, "element count");

  Mesh mesh;
  mesh.nodes.reserve(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    if (!reader.next(tok)) {
      throw ParseError(reader.number, "expected " + std::to_string(n_nodes) + " nodes, found " + std::to_string(i));
    }
    if (tok.size() != 4) throw ParseError(reader.number, "node record needs '<id> <x> <y> <z>'");
    if (parse_integer<std::size_t>(tok[0], reader.number, "node id") != i) {
      throw ParseError(reader.number, "node ids must be dense and ascending from 0");
    }
    mesh.nodes.emplace_back(parse_real(tok[1], reader.number, "x"), parse_real(tok[2], reader.number, "y"),
                            parse_real(tok[3], reader.number, "z"));
  }
  for (std::size_t i = 0; i < n_elems; ++i) {
    if (!reader.next(tok)) {
      throw ParseError(reader.number,
                       "expected " + std::to_string(n_elems) + " elements, found " + std::to_string(i));
    }
    if (tok.size() < 2) throw ParseError(reader.number, "element record needs '<id> <kind> <nodes>'");
    if (parse_integer<std::size_t>(tok[0], reader.number, "element id") != i) {
      throw ParseError(reader.number, "element ids must be dense and ascending from 0");
    }
    Element el;
    if (tok[1] == "tet") {
      el.kind = ElementKind::Tet4;
    } else if (tok[1] == "hex") {
      el.kind = ElementKind::Hex8;
    } else {
      throw ParseError(reader.number, "unknown element kind '" + tok[1] + "'");
    }
    const std::size_t nn = node_count(el.kind);
    if (tok.size() != 2 + nn) {
      throw ParseError(reader.number, tok[1] + " needs " + std::to_string(nn) + " node ids");
    }
    for (std::size_t k = 0; k < nn; ++k) {
      const auto id = parse_integer<NodeId>(tok[2 + k], reader.number, "node reference");
      if (id >= n_nodes) throw ParseError(reader.number, "node reference " + tok[2 + k] + " out of range");
      el.nodes[k] = id;
    }
    mesh.add_element(el);
  }
  if (reader.next(tok)) {
    throw ParseError(reader.number, "unexpected record after " + std::to_string(n_elems) + " elements");
  }
  validate_mesh(mesh);
  return mesh;
}

Mesh read_mesh_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file " + path.string());
  return read_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "cemfrac-mesh 1\n";
  out << "nodes " << mesh.num_nodes() << " elements " << mesh.num_elements() << '\n';
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const Vec3& x = mesh.nodes[i];
    out << i << ' ' << format_double(x.x()) << ' ' << format_double(x.y()) << ' ' << format_double(x.z())
        << '\n';
  }
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Element& el = mesh.elements[e];
    out << e << (el.kind == ElementKind::Tet4 ? " tet" : " hex");
    for (NodeId n : el.node_ids()) out << ' ' << n;
    out << '\n';
  }
}

void write_mesh_file(const std::filesystem::path& path, const Mesh& mesh) {
  auto out = open_output(path);
  write_mesh(out, mesh);
  check_stream(out, path);
}

Snapshot make_snapshot(const Simulation& sim) {
  const Mesh& mesh = sim.mesh();
  const EdgeTopology& topo = sim.topology();
  Snapshot snap;
  snap.time = sim.state().t;
  snap.u = sim.state().u;
  snap.v = sim.state().v;
  snap.last_G = sim.fracture().last_G;
  snap.last_G.resize(mesh.num_elements(), 0.0);
  snap.cracks = sim.fracture().crack_surface;
  snap.max_principal_stress.assign(mesh.num_elements(), 0.0);

  const auto& stress = sim.edge_fields().stress;
  std::vector<double> edge_sigma(stress.size(), 0.0);
  for (std::size_t e = 0; e < stress.size(); ++e) edge_sigma[e] = max_principal_stress(stress[e]).value;
  for (ElementId e = 0; e < mesh.num_elements(); ++e) {
    if (!mesh.is_active(e) || edge_sigma.empty()) continue;
    double s = -std::numeric_limits<double>::infinity();
    for (EdgeId id : topo.element_edges(mesh, e)) s = std::max(s, edge_sigma[id]);
    snap.max_principal_stress[e] = s;
  }
  return snap;
}

namespace {

void write_vec3(std::ostream& out, const Vec3& x) {
  out << format_double(x.x()) << ' ' << format_double(x.y()) << ' ' << format_double(x.z()) << '\n';
}

}  // namespace

void write_vtk_snapshot(std::ostream& out, const Mesh& mesh, const Snapshot& snap) {
  if (snap.u.size() != mesh.num_nodes() || snap.v.size() != mesh.num_nodes()) {
    throw Error("write_vtk_snapshot: point data size does not match the mesh");
  }
  if (snap.max_principal_stress.size() != mesh.num_elements() || snap.last_G.size() != mesh.num_elements()) {
    throw Error("write_vtk_snapshot: cell data size does not match the mesh");
  }
  std::vector<ElementId> cells;
  std::size_t list_size = 0;
  for (ElementId e = 0; e < mesh.num_elements(); ++e) {
    if (!mesh.is_active(e)) continue;
    cells.push_back(e);
    list_size += 1 + node_count(mesh.elements[e].kind);
  }

  out << "# vtk DataFile Version 3.0\n";
  out << "cemfrac snapshot t=" << format_double(snap.time) << '\n';
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const Vec3& x : mesh.nodes) write_vec3(out, x);
  out << "CELLS " << cells.size() << ' ' << list_size << '\n';
  for (ElementId e : cells) {
    const Element& el = mesh.elements[e];
    out << node_count(el.kind);
    for (NodeId n : el.node_ids()) out << ' ' << n;
    out << '\n';
  }
  out << "CELL_TYPES " << cells.size() << '\n';
  for (ElementId e : cells) out << (mesh.elements[e].kind == ElementKind::Tet4 ? 10 : 12) << '\n';

  out << "POINT_DATA " << mesh.num_nodes() << '\n';
  out << "VECTORS displacement double\n";
  for (const Vec3& x : snap.u) write_vec3(out, x);
  out << "VECTORS velocity double\n";
  for (const Vec3& x : snap.v) write_vec3(out, x);

  out << "CELL_DATA " << cells.size() << '\n';
  out << "SCALARS active int 1\nLOOKUP_TABLE default\n";
  for (ElementId e : cells) out << (mesh.is_active(e) ? 1 : 0) << '\n';
  out << "SCALARS max_principal_stress double 1\nLOOKUP_TABLE default\n";
  for (ElementId e : cells) out << format_double(snap.max_principal_stress[e]) << '\n';
  out << "SCALARS energy_release_rate double 1\nLOOKUP_TABLE default\n";
  for (ElementId e : cells) out << format_double(snap.last_G[e]) << '\n';
  out << "SCALARS element_id int 1\nLOOKUP_TABLE default\n";
  for (ElementId e : cells) out << e << '\n';
}

void write_crack_polydata(std::ostream& out, std::span<const CrackPolygon> cracks, double time) {
  std::size_t n_points = 0;
  for (const CrackPolygon& c : cracks) n_points += c.count;
  out << "# vtk DataFile Version 3.0\n";
  out << "cemfrac cracks t=" << format_double(time) << '\n';
  out << "ASCII\nDATASET POLYDATA\n";
  out << "POINTS " << n_points << " double\n";
  for (const CrackPolygon& c : cracks) {
    for (std::size_t k = 0; k < c.count; ++k) write_vec3(out, c.vertices[k]);
  }
  out << "POLYGONS " << cracks.size() << ' ' << n_points + cracks.size() << '\n';
  std::size_t next = 0;
  for (const CrackPolygon& c : cracks) {
    out << static_cast<int>(c.count);
    for (std::size_t k = 0; k < c.count; ++k) out << ' ' << next++;
    out << '\n';
  }
  out << "CELL_DATA " << cracks.size() << '\n';
  out << "SCALARS element_id int 1\nLOOKUP_TABLE default\n";
  for (const CrackPolygon& c : cracks) out << c.element << '\n';
  out << "SCALARS fracture_time double 1\nLOOKUP_TABLE default\n";
  for (const CrackPolygon& c : cracks) out << format_double(c.time) << '\n';
  out << "SCALARS energy_release_rate double 1\nLOOKUP_TABLE default\n";
  for (const CrackPolygon& c : cracks) out << format_double(c.G) << '\n';
  out << "NORMALS normal double\n";
  for (const CrackPolygon& c : cracks) write_vec3(out, c.normal);
}

void write_vtk_snapshot(const std::filesystem::path& path, const Mesh& mesh, const Snapshot& snap) {
  {
    auto out = open_output(path);
    write_vtk_snapshot(out, mesh, snap);
    check_stream(out, path);
  }
  auto crack_path = path;
  crack_path.replace_filename(path.stem().string() + "_cracks.vtk");
  auto out = open_output(crack_path);
  write_crack_polydata(out, snap.cracks, snap.time);
  check_stream(out, crack_path);
}

void write_energy_csv(std::ostream& out, std::span<const EnergyRow> rows) {
  out << "t,kinetic,strain,external_work,dissipated\n";
  for (const EnergyRow& r : rows) {
    out << format_double(r.t) << ',' << format_double(r.ledger.kinetic) << ',' << format_double(r.ledger.strain)
        << ',' << format_double(r.ledger.external_work) << ',' << format_double(r.ledger.dissipated) << '\n';
  }
}

void write_energy_csv(const std::filesystem::path& path, std::span<const EnergyRow> rows) {
  auto out = open_output(path);
  write_energy_csv(out, rows);
  check_stream(out, path);
}

void write_load_displacement_csv(std::ostream& out, std::span<const LoadDisplacementRow> rows) {
  out << "t,displacement,reaction_force\n";
  for (const LoadDisplacementRow& r : rows) {
    out << format_double(r.t) << ',' << format_double(r.displacement) << ',' << format_double(r.reaction_force)
        << '\n';
  }
}

void write_load_displacement_csv(const std::filesystem::path& path,
                                 std::span<const LoadDisplacementRow> rows) {
  auto out = open_output(path);
  write_load_displacement_csv(out, rows);
  check_stream(out, path);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error("csv column '" + name + "' not found");
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t number = 0;
  const auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(in, line)) throw ParseError(1, "missing csv header");
  ++number;
  table.header = split(line);
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.header.size()) throw ParseError(number, "column count mismatch");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_real(c, number, "cell"));
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_csv(in);
}

}  // namespace cemfrac
