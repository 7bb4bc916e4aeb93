#include "cemfrac/generator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

namespace cemfrac {

namespace {

constexpr const char* kAxisNames[3] = {"x", "y", "z"};

// Grid index of coordinate c along an axis, or -1 when c is not on a grid plane.
int grid_index(const GeneratorSpec& s, int axis, double c) {
  const double h = s.size[axis] / s.cells[axis];
  const double r = (c - s.origin[axis]) / h;
  const double k = std::round(r);
  if (std::abs(r - k) > 1e-9 * std::max(1.0, std::abs(k))) return -1;
  if (k < 0 || k > s.cells[axis]) return -1;
  return static_cast<int>(k);
}

struct NotchIndices {
  int normal_axis, length_axis, plane;
  int lo, hi;  // duplicated grid range along the length axis, [lo, hi]
};

NotchIndices notch_indices(const GeneratorSpec& s) {
  const NotchSpec& n = *s.notch;
  const int plane = grid_index(s, n.normal_axis, n.position);
  int a = grid_index(s, n.length_axis, n.from);
  int b = grid_index(s, n.length_axis, n.to);
  if (a > b) std::swap(a, b);
  const int len = s.cells[n.length_axis];
  NotchIndices out{n.normal_axis, n.length_axis, plane, 0, 0};
  // The tip line stays shared.
  if (a == 0 && b == len) {
    out.lo = 0;
    out.hi = len;
  } else if (a == 0) {
    out.lo = 0;
    out.hi = b - 1;
  } else {
    out.lo = a + 1;
    out.hi = len;
  }
  return out;
}

// Body-centred split. Centre nodes are appended in cell order.
template <class AddTet>
void add_body_centered_tets(const GeneratorSpec& spec, Mesh& mesh, const std::vector<NodeId>& twin,
                            const std::optional<NotchIndices>& ni, const AddTet& add_tet) {
  const std::array<int, 3> n = spec.cells;
  const auto grid_id = [&](const std::array<int, 3>& g) {
    return static_cast<NodeId>(g[0] + (n[0] + 1) * (g[1] + (n[1] + 1) * g[2]));
  };
  const auto cell_id = [&](const std::array<int, 3>& c) {
    return static_cast<std::size_t>(c[0]) + static_cast<std::size_t>(n[0]) * (c[1] + static_cast<std::size_t>(n[1]) * c[2]);
  };
  const auto positive = [&](const std::array<int, 3>& c) { return ni && c[ni->normal_axis] >= ni->plane; };
  const auto corner = [&](const std::array<int, 3>& c, const std::array<int, 3>& off) {
    const NodeId id = grid_id({c[0] + off[0], c[1] + off[1], c[2] + off[2]});
    return positive(c) ? twin[id] : id;
  };

  const NodeId first_centre = static_cast<NodeId>(mesh.nodes.size());
  for (int k = 0; k < n[2]; ++k) {
    for (int j = 0; j < n[1]; ++j) {
      for (int i = 0; i < n[0]; ++i) {
        Vec3 c = Vec3::Zero();
        for (int q = 0; q < 8; ++q) c += mesh.nodes[corner({i, j, k}, {q & 1, (q >> 1) & 1, (q >> 2) & 1})];
        mesh.nodes.push_back(c / 8.0);
      }
    }
  }
  const auto centre = [&](const std::array<int, 3>& c) { return static_cast<NodeId>(first_centre + cell_id(c)); };

  // A face on the notch plane is cut when its whole length-axis span lies
  // inside the notch.
  int cut_lo = 0, cut_hi = -1;
  if (ni) {
    const int a = grid_index(spec, ni->length_axis, spec.notch->from);
    const int b = grid_index(spec, ni->length_axis, spec.notch->to);
    cut_lo = std::min(a, b);
    cut_hi = std::max(a, b);
  }

  for (int k = 0; k < n[2]; ++k) {
    for (int j = 0; j < n[1]; ++j) {
      for (int i = 0; i < n[0]; ++i) {
        const std::array<int, 3> c{i, j, k};
        for (int d = 0; d < 3; ++d) {
          const int a = (d + 1) % 3, b = (d + 2) % 3;
          for (int side = 0; side < 2; ++side) {
            std::array<int, 3> nb = c;
            nb[d] += side == 0 ? -1 : 1;
            const bool boundary = nb[d] < 0 || nb[d] >= n[d];
            bool cut = false;
            if (ni && d == ni->normal_axis && c[d] + side == ni->plane) {
              const int m = c[ni->length_axis];
              cut = m >= cut_lo && m + 1 <= cut_hi;
            }
            // Interior faces are emitted once, from the cell below them.
            if (!boundary && !cut && side == 0) continue;
            std::array<NodeId, 4> q{};
            static constexpr std::array<std::array<int, 2>, 4> kRing{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
            for (int r = 0; r < 4; ++r) {
              std::array<int, 3> off{};
              off[d] = side;
              off[a] = kRing[r][0];
              off[b] = kRing[r][1];
              q[r] = corner(c, off);
            }
            if (boundary || cut) {
              add_tet({centre(c), q[0], q[1], q[2]});
              add_tet({centre(c), q[0], q[2], q[3]});
            } else {
              for (int r = 0; r < 4; ++r) add_tet({centre(c), centre(nb), q[r], q[(r + 1) % 4]});
            }
          }
        }
      }
    }
  }
}

}  // namespace

void GeneratorSpec::validate() const {
  for (int d = 0; d < 3; ++d) {
    if (!(size[d] > 0.0) || !std::isfinite(size[d])) {
      throw ConfigError(std::string("size.") + kAxisNames[d], "must be positive");
    }
    if (cells[d] < 1) throw ConfigError(std::string("cells.") + kAxisNames[d], "must be >= 1");
  }
  if (!origin.allFinite()) throw ConfigError("origin", "not finite");
  if (!(jitter >= 0.0 && jitter < 0.25)) throw ConfigError("jitter", "must lie in [0, 0.25)");
  if (!notch) return;
  const NotchSpec& n = *notch;
  if (n.normal_axis < 0 || n.normal_axis > 2) throw ConfigError("notch.normal_axis", "must be x, y or z");
  if (n.length_axis < 0 || n.length_axis > 2 || n.length_axis == n.normal_axis) {
    throw ConfigError("notch.length_axis", "must differ from the normal axis");
  }
  const int plane = grid_index(*this, n.normal_axis, n.position);
  if (plane <= 0 || plane >= cells[n.normal_axis]) {
    throw ConfigError("notch.position", "must lie on an interior grid plane");
  }
  const int a = grid_index(*this, n.length_axis, n.from);
  const int b = grid_index(*this, n.length_axis, n.to);
  if (a < 0) throw ConfigError("notch.from", "must lie on a grid line inside the box");
  if (b < 0) throw ConfigError("notch.to", "must lie on a grid line inside the box");
  if (a == b) throw ConfigError("notch.to", "notch has zero length");
  const int len = cells[n.length_axis];
  if (std::min(a, b) != 0 && std::max(a, b) != len) {
    throw ConfigError("notch.from", "notch must start on the box boundary");
  }
}

std::size_t notch_duplicate_count(const GeneratorSpec& spec) {
  spec.validate();
  if (!spec.notch) return 0;
  const NotchIndices ni = notch_indices(spec);
  const int third = 3 - ni.normal_axis - ni.length_axis;
  return static_cast<std::size_t>(ni.hi - ni.lo + 1) * static_cast<std::size_t>(spec.cells[third] + 1);
}

Mesh generate_notched_box(const GeneratorSpec& spec) {
  spec.validate();
  const int nx = spec.cells[0], ny = spec.cells[1], nz = spec.cells[2];
  const auto id = [&](int i, int j, int k) {
    return static_cast<NodeId>(i + (nx + 1) * (j + (ny + 1) * k));
  };

  Mesh mesh;
  mesh.nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
  const Vec3 h(spec.size.x() / nx, spec.size.y() / ny, spec.size.z() / nz);
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        // Boundary planes are placed exactly on origin + size.
        const auto coord = [&](int d, int idx, int n) {
          return idx == n ? spec.origin[d] + spec.size[d] : spec.origin[d] + idx * h[d];
        };
        mesh.nodes.emplace_back(coord(0, i, nx), coord(1, j, ny), coord(2, k, nz));
      }
    }
  }

  if (spec.jitter > 0.0) {
    const auto unit = [&](std::uint64_t key) {
      // splitmix64
      std::uint64_t z = key + 0x9e3779b97f4a7c15ULL;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      z ^= z >> 31;
      return static_cast<double>(z >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    };
    for (int k = 0; k <= nz; ++k) {
      for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
          const std::array<int, 3> g{i, j, k};
          const NodeId n = id(i, j, k);
          for (int d = 0; d < 3; ++d) {
            if (g[d] == 0 || g[d] == spec.cells[d]) continue;
            if (spec.notch && d == spec.notch->normal_axis &&
                g[d] == grid_index(spec, d, spec.notch->position)) {
              continue;
            }
            const std::uint64_t key = spec.seed * 0x100000001b3ULL ^ (static_cast<std::uint64_t>(n) * 3 + d);
            mesh.nodes[n][d] += spec.jitter * h[d] * unit(key);
          }
        }
      }
    }
  }

  // Duplicate map for the positive side of the notch plane.
  std::vector<NodeId> twin(mesh.nodes.size());
  for (std::size_t n = 0; n < twin.size(); ++n) twin[n] = static_cast<NodeId>(n);
  std::optional<NotchIndices> ni;
  if (spec.notch) {
    ni = notch_indices(spec);
    const std::size_t original = mesh.nodes.size();
    for (std::size_t n = 0; n < original; ++n) {
      const std::array<int, 3> g{static_cast<int>(n % (nx + 1)), static_cast<int>((n / (nx + 1)) % (ny + 1)),
                                 static_cast<int>(n / ((nx + 1) * (ny + 1)))};
      if (g[ni->normal_axis] != ni->plane) continue;
      const int l = g[ni->length_axis];
      if (l < ni->lo || l > ni->hi) continue;
      twin[n] = static_cast<NodeId>(mesh.nodes.size());
      mesh.nodes.push_back(mesh.nodes[n]);
    }
  }

  const auto add_positive = [&mesh](std::array<NodeId, 4> t) {
    if (signed_tet_volume(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]], mesh.nodes[t[3]]) < 0.0) {
      std::swap(t[2], t[3]);
    }
    mesh.add_element(Element::tet(t[0], t[1], t[2], t[3]));
  };
  const auto on_positive_side = [&](const std::array<int, 3>& cell) {
    return ni && cell[ni->normal_axis] >= ni->plane;
  };

  if (spec.decomposition == CellDecomposition::BodyCentered) {
    add_body_centered_tets(spec, mesh, twin, ni, add_positive);
  } else {
    static constexpr std::array<std::array<int, 3>, 6> kPerms{{
        {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    const std::size_t n_cells = static_cast<std::size_t>(nx) * ny * nz;
    mesh.elements.reserve(n_cells * (spec.decomposition == CellDecomposition::SixTets ? 6 : 1));
    for (int k = 0; k < nz; ++k) {
      for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
          const bool positive = on_positive_side({i, j, k});
          const auto node = [&](int dx, int dy, int dz) {
            const NodeId n = id(i + dx, j + dy, k + dz);
            return positive ? twin[n] : n;
          };
          if (spec.decomposition == CellDecomposition::Hex) {
            mesh.add_element(Element::hex({node(0, 0, 0), node(1, 0, 0), node(1, 1, 0), node(0, 1, 0),
                                           node(0, 0, 1), node(1, 0, 1), node(1, 1, 1), node(0, 1, 1)}));
            continue;
          }
          // Kuhn split along the (0,0,0)-(1,1,1) diagonal.
          for (const auto& p : kPerms) {
            std::array<int, 3> step{0, 0, 0};
            std::array<NodeId, 4> t{};
            t[0] = node(0, 0, 0);
            step[p[0]] = 1;
            t[1] = node(step[0], step[1], step[2]);
            step[p[1]] = 1;
            t[2] = node(step[0], step[1], step[2]);
            t[3] = node(1, 1, 1);
            add_positive(t);
          }
        }
      }
    }
  }
  if (spec.jitter > 0.0) {
    try {
      validate_mesh(mesh);
    } catch (const Error& e) {
      throw ConfigError("jitter", std::string("perturbed mesh is invalid: ") + e.what());
    }
  }
  return mesh;
}

namespace {

int parse_axis(const nlohmann::json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected \"x\", \"y\" or \"z\"");
  const std::string s = j.get<std::string>();
  for (int d = 0; d < 3; ++d) {
    if (s == kAxisNames[d]) return d;
  }
  throw ConfigError(field, "expected \"x\", \"y\" or \"z\", got \"" + s + "\"");
}

Vec3 parse_vec3(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(field, "expected an array of 3 numbers");
  Vec3 v;
  for (int d = 0; d < 3; ++d) {
    if (!j[d].is_number()) throw ConfigError(field + "[" + std::to_string(d) + "]", "expected a number");
    v[d] = j[d].get<double>();
  }
  return v;
}

double parse_number(const nlohmann::json& obj, const char* key, const std::string& path) {
  const std::string field = path + "." + key;
  if (!obj.contains(key)) throw ConfigError(field, "missing");
  if (!obj[key].is_number()) throw ConfigError(field, "expected a number");
  return obj[key].get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const GeneratorSpec& spec) {
  j = nlohmann::json::object();
  j["origin"] = {spec.origin.x(), spec.origin.y(), spec.origin.z()};
  j["size"] = {spec.size.x(), spec.size.y(), spec.size.z()};
  j["cells"] = spec.cells;
  j["decomposition"] = spec.decomposition == CellDecomposition::SixTets ? "tet6"
                       : spec.decomposition == CellDecomposition::Hex  ? "hex"
                                                                       : "bcc";
  if (spec.jitter > 0.0) {
    j["jitter"] = spec.jitter;
    j["seed"] = spec.seed;
  }
  if (spec.notch) {
    const NotchSpec& n = *spec.notch;
    j["notch"] = {{"normal_axis", kAxisNames[n.normal_axis]},
                  {"position", n.position},
                  {"length_axis", kAxisNames[n.length_axis]},
                  {"from", n.from},
                  {"to", n.to}};
  }
}

GeneratorSpec generator_spec_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  GeneratorSpec spec;
  if (j.contains("origin")) spec.origin = parse_vec3(j["origin"], path + ".origin");
  if (!j.contains("size")) throw ConfigError(path + ".size", "missing");
  spec.size = parse_vec3(j["size"], path + ".size");
  if (!j.contains("cells")) throw ConfigError(path + ".cells", "missing");
  const auto& c = j["cells"];
  if (!c.is_array() || c.size() != 3) throw ConfigError(path + ".cells", "expected an array of 3 integers");
  for (int d = 0; d < 3; ++d) {
    if (!c[d].is_number_integer()) throw ConfigError(path + ".cells[" + std::to_string(d) + "]", "expected an integer");
    spec.cells[d] = c[d].get<int>();
  }
  if (j.contains("decomposition")) {
    const auto& d = j["decomposition"];
    if (d == "tet6") {
      spec.decomposition = CellDecomposition::SixTets;
    } else if (d == "hex") {
      spec.decomposition = CellDecomposition::Hex;
    } else if (d == "bcc") {
      spec.decomposition = CellDecomposition::BodyCentered;
    } else {
      throw ConfigError(path + ".decomposition", "expected \"tet6\", \"bcc\" or \"hex\"");
    }
  }
  if (j.contains("jitter")) {
    if (!j["jitter"].is_number()) throw ConfigError(path + ".jitter", "expected a number");
    spec.jitter = j["jitter"].get<double>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError(path + ".seed", "expected a non-negative integer");
    spec.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("notch") && !j["notch"].is_null()) {
    const auto& n = j["notch"];
    const std::string np = path + ".notch";
    if (!n.is_object()) throw ConfigError(np, "expected an object");
    NotchSpec notch;
    if (!n.contains("normal_axis")) throw ConfigError(np + ".normal_axis", "missing");
    if (!n.contains("length_axis")) throw ConfigError(np + ".length_axis", "missing");
    notch.normal_axis = parse_axis(n["normal_axis"], np + ".normal_axis");
    notch.length_axis = parse_axis(n["length_axis"], np + ".length_axis");
    notch.position = parse_number(n, "position", np);
    notch.from = parse_number(n, "from", np);
    notch.to = parse_number(n, "to", np);
    spec.notch = notch;
  }
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + "." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
  return spec;
}

}  // namespace cemfrac
