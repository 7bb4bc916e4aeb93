#include "cemfrac/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "cemfrac/analysis.hpp"
#include "cemfrac/io.hpp"

namespace cemfrac {

using nlohmann::json;

namespace {

constexpr const char* kAxes[3] = {"x", "y", "z"};

// ---- json helpers -------------------------------------------------------

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  if (!obj.contains(key)) throw ConfigError(path + "." + key, "missing");
  return obj[key];
}

double number(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string() && (j == "inf" || j == "infinity")) return std::numeric_limits<double>::infinity();
  throw ConfigError(path, "expected a number");
}

double number_or(const json& obj, const char* key, const std::string& path, double fallback) {
  return obj.contains(key) ? number(obj[key], path + "." + key) : fallback;
}

std::size_t count_or(const json& obj, const char* key, const std::string& path, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& j = obj[key];
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError(path + "." + key, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

bool bool_or(const json& obj, const char* key, const std::string& path, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError(path + "." + key, "expected true or false");
  return obj[key].get<bool>();
}

std::string string_or(const json& obj, const char* key, const std::string& path, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw ConfigError(path + "." + key, "expected a string");
  return obj[key].get<std::string>();
}

Vec3 vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(path, "expected an array of 3 numbers");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json number_json(double x) { return std::isinf(x) ? json("inf") : json(x); }

int axis_index(const json& j, const std::string& path) {
  if (j.is_string()) {
    for (int d = 0; d < 3; ++d) {
      if (j == kAxes[d]) return d;
    }
  }
  throw ConfigError(path, "expected \"x\", \"y\" or \"z\"");
}

// ---- regions ------------------------------------------------------------

RegionSpec region_from_json(const json& j, const std::string& path) {
  RegionSpec r;
  const std::string type = string_or(j, "type", path, "");
  if (type == "box") {
    r.type = RegionSpec::Type::Box;
    r.min = vec3(require(j, "min", path), path + ".min");
    r.max = vec3(require(j, "max", path), path + ".max");
    for (int d = 0; d < 3; ++d) {
      if (r.min[d] > r.max[d]) throw ConfigError(path + ".min", "exceeds max along " + std::string(kAxes[d]));
    }
  } else if (type == "cylinder") {
    r.type = RegionSpec::Type::Cylinder;
    r.center = vec3(require(j, "center", path), path + ".center");
    r.axis = vec3(require(j, "axis", path), path + ".axis");
    if (!(r.axis.norm() > 0.0)) throw ConfigError(path + ".axis", "must be nonzero");
    r.axis.normalize();
    r.radius_min = number_or(j, "radius_min", path, 0.0);
    r.radius_max = number(require(j, "radius_max", path), path + ".radius_max");
    r.axial_min = number(require(j, "axial_min", path), path + ".axial_min");
    r.axial_max = number(require(j, "axial_max", path), path + ".axial_max");
    if (r.radius_min < 0.0 || r.radius_min > r.radius_max) {
      throw ConfigError(path + ".radius_min", "must lie in [0, radius_max]");
    }
    if (r.axial_min > r.axial_max) throw ConfigError(path + ".axial_min", "exceeds axial_max");
  } else {
    throw ConfigError(path + ".type", "expected \"box\" or \"cylinder\"");
  }
  r.tolerance = number_or(j, "tolerance", path, 0.0);
  if (r.tolerance < 0.0) throw ConfigError(path + ".tolerance", "must be >= 0");
  return r;
}

json region_json(const RegionSpec& r) {
  json j;
  if (r.type == RegionSpec::Type::Box) {
    j = {{"type", "box"}, {"min", vec3_json(r.min)}, {"max", vec3_json(r.max)}};
  } else {
    j = {{"type", "cylinder"},         {"center", vec3_json(r.center)}, {"axis", vec3_json(r.axis)},
         {"radius_min", r.radius_min}, {"radius_max", r.radius_max},    {"axial_min", r.axial_min},
         {"axial_max", r.axial_max}};
  }
  if (r.tolerance > 0.0) j["tolerance"] = r.tolerance;
  return j;
}

BoundarySpec boundary_from_json(const json& j, const std::string& path) {
  BoundarySpec b;
  b.name = string_or(j, "name", path, "");
  b.region = region_from_json(require(j, "region", path), path + ".region");
  if (j.contains("owner") && !j["owner"].is_null()) b.owner = region_from_json(j["owner"], path + ".owner");
  return b;
}

void boundary_to_json(json& j, const BoundarySpec& b) {
  if (!b.name.empty()) j["name"] = b.name;
  j["region"] = region_json(b.region);
  if (b.owner) j["owner"] = region_json(*b.owner);
}

std::string dissipation_name(DissipationModel m) {
  return m == DissipationModel::CriticalEnergyTimesArea ? "gc_area" : "element_strain_energy";
}

}  // namespace

bool RegionSpec::contains(const Vec3& x, double tol) const {
  if (type == Type::Box) {
    for (int d = 0; d < 3; ++d) {
      if (x[d] < min[d] - tol || x[d] > max[d] + tol) return false;
    }
    return true;
  }
  const Vec3 rel = x - center;
  const double axial = rel.dot(axis);
  const double radial = (rel - axial * axis).norm();
  return axial >= axial_min - tol && axial <= axial_max + tol && radial >= radius_min - tol &&
         radial <= radius_max + tol;
}

void ScenarioConfig::validate() const {
  if (name.empty()) throw ConfigError("name", "must not be empty");
  if (mesh.generator) {
    try {
      mesh.generator->validate();
    } catch (const ConfigError& e) {
      throw ConfigError("mesh.generator." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
    }
  }
  if (!(material.E > 0.0) || !std::isfinite(material.E)) throw ConfigError("material.E", "must be positive");
  if (!(material.nu > -1.0 && material.nu < 0.5)) throw ConfigError("material.nu", "must lie in (-1, 0.5)");
  if (!(material.rho > 0.0) || !std::isfinite(material.rho)) throw ConfigError("material.rho", "must be positive");
  if (!(material.Gc >= 0.0)) throw ConfigError("material.Gc", "must be >= 0");
  for (std::size_t i = 0; i < dirichlet.size(); ++i) {
    const std::string p = "loads.dirichlet[" + std::to_string(i) + "]";
    const DirichletSpec& d = dirichlet[i];
    if (!d.dofs[0] && !d.dofs[1] && !d.dofs[2]) throw ConfigError(p + ".dofs", "no constrained direction");
    if (!d.velocity.allFinite()) throw ConfigError(p + ".velocity", "not finite");
    if (!(d.ramp_time >= 0.0)) throw ConfigError(p + ".ramp_time", "must be >= 0");
    if (d.velocity != Vec3::Zero() && !(d.ramp_time > 0.0)) {
      throw ConfigError(p + ".ramp_time", "must be positive for a nonzero velocity");
    }
  }
  for (std::size_t i = 0; i < neumann.size(); ++i) {
    if (!neumann[i].traction.allFinite()) {
      throw ConfigError("loads.neumann[" + std::to_string(i) + "].traction", "not finite");
    }
  }
  if (!body_force.allFinite()) throw ConfigError("loads.body_force", "not finite");
  integrator.validate();
  if (output.snapshot_every == 0) throw ConfigError("output.snapshot_every", "must be >= 1");
  if (output.record_every == 0) throw ConfigError("output.record_every", "must be >= 1");
  if (output.load_displacement_boundary >= static_cast<int>(dirichlet.size())) {
    throw ConfigError("output.load_displacement_boundary", "no such dirichlet entry");
  }
  if (analysis.branching) {
    const BranchingSpec& b = *analysis.branching;
    if (b.axis < 0 || b.axis > 2) throw ConfigError("analysis.branching.axis", "must be x, y or z");
    if (b.sign != 1 && b.sign != -1) throw ConfigError("analysis.branching.sign", "must be +1 or -1");
    if (!analysis.notch_tip) throw ConfigError("analysis.notch_tip", "required by analysis.branching");
  }
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["schema"] = kScenarioSchema;
  j["name"] = c.name;
  if (!c.description.empty()) j["description"] = c.description;
  json mesh = json::object();
  if (c.mesh.generator) {
    json g;
    to_json(g, *c.mesh.generator);
    mesh["generator"] = g;
  } else {
    mesh["file"] = c.mesh.file;
  }
  j["mesh"] = mesh;
  json mat = {{"E", c.material.E}, {"nu", c.material.nu}, {"rho", c.material.rho}, {"Gc", number_json(c.material.Gc)}};
  if (c.material.tensile_strength) mat["tensile_strength"] = *c.material.tensile_strength;
  j["material"] = mat;

  json loads = json::object();
  json dir = json::array();
  for (const DirichletSpec& d : c.dirichlet) {
    json e;
    boundary_to_json(e, d.boundary);
    json dofs = json::array();
    for (int k = 0; k < 3; ++k) {
      if (d.dofs[k]) dofs.push_back(kAxes[k]);
    }
    e["dofs"] = dofs;
    e["velocity"] = vec3_json(d.velocity);
    e["ramp_time"] = d.ramp_time;
    dir.push_back(e);
  }
  loads["dirichlet"] = dir;
  json neu = json::array();
  for (const NeumannSpec& n : c.neumann) {
    json e;
    boundary_to_json(e, n.boundary);
    e["traction"] = vec3_json(n.traction);
    neu.push_back(e);
  }
  loads["neumann"] = neu;
  loads["body_force"] = vec3_json(c.body_force);
  j["loads"] = loads;

  json integ = {{"gamma", c.integrator.gamma},
                {"t_end", c.integrator.t_end},
                {"fracture_check_every", c.integrator.fracture_check_every}};
  if (c.integrator.dt > 0.0) {
    integ["dt"] = c.integrator.dt;
  } else {
    integ["cfl"] = c.integrator.cfl;
  }
  j["integrator"] = integ;
  j["fracture"] = {{"enabled", c.integrator.fracture_enabled},
                   {"dissipation", dissipation_name(c.integrator.dissipation)}};
  j["output"] = {{"directory", c.output.directory},
                 {"snapshot_every", c.output.snapshot_every},
                 {"record_every", c.output.record_every},
                 {"vtk", c.output.vtk},
                 {"energy_csv", c.output.energy_csv},
                 {"load_displacement_csv", c.output.load_displacement_csv},
                 {"load_displacement_boundary", c.output.load_displacement_boundary}};
  json an = json::object();
  if (c.analysis.notch_tip) an["notch_tip"] = vec3_json(*c.analysis.notch_tip);
  if (c.analysis.branching) {
    an["branching"] = {{"axis", kAxes[c.analysis.branching->axis]},
                       {"sign", c.analysis.branching->sign},
                       {"min_size", c.analysis.branching->min_size}};
  }
  j["analysis"] = an;
  return j;
}

ScenarioConfig scenario_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("$", "expected an object");
  const json& schema = require(j, "schema", "$");
  if (schema != kScenarioSchema) {
    throw ConfigError("schema", std::string("unsupported schema, expected \"") + kScenarioSchema + "\"");
  }
  ScenarioConfig c;
  c.name = string_or(j, "name", "", "");
  c.description = string_or(j, "description", "", "");

  const json& mesh = require(j, "mesh", "$");
  if (mesh.contains("generator")) {
    c.mesh.generator = generator_spec_from_json(mesh["generator"], "mesh.generator");
  } else if (mesh.contains("file")) {
    c.mesh.file = string_or(mesh, "file", "mesh", "");
  } else {
    throw ConfigError("mesh", "needs \"generator\" or \"file\"");
  }

  const json& mat = require(j, "material", "$");
  c.material.E = number(require(mat, "E", "material"), "material.E");
  c.material.nu = number(require(mat, "nu", "material"), "material.nu");
  c.material.rho = number(require(mat, "rho", "material"), "material.rho");
  c.material.Gc = number(require(mat, "Gc", "material"), "material.Gc");
  if (mat.contains("tensile_strength")) {
    c.material.tensile_strength = number(mat["tensile_strength"], "material.tensile_strength");
  }

  if (j.contains("loads")) {
    const json& loads = j["loads"];
    if (!loads.is_object()) throw ConfigError("loads", "expected an object");
    if (loads.contains("dirichlet")) {
      const json& arr = loads["dirichlet"];
      if (!arr.is_array()) throw ConfigError("loads.dirichlet", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = "loads.dirichlet[" + std::to_string(i) + "]";
        DirichletSpec d;
        d.boundary = boundary_from_json(arr[i], p);
        const json& dofs = require(arr[i], "dofs", p);
        if (!dofs.is_array() || dofs.empty()) throw ConfigError(p + ".dofs", "expected a non-empty array of axes");
        for (std::size_t k = 0; k < dofs.size(); ++k) {
          d.dofs[axis_index(dofs[k], p + ".dofs[" + std::to_string(k) + "]")] = true;
        }
        if (arr[i].contains("velocity")) d.velocity = vec3(arr[i]["velocity"], p + ".velocity");
        d.ramp_time = number_or(arr[i], "ramp_time", p, 0.0);
        c.dirichlet.push_back(d);
      }
    }
    if (loads.contains("neumann")) {
      const json& arr = loads["neumann"];
      if (!arr.is_array()) throw ConfigError("loads.neumann", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = "loads.neumann[" + std::to_string(i) + "]";
        NeumannSpec n;
        n.boundary = boundary_from_json(arr[i], p);
        n.traction = vec3(require(arr[i], "traction", p), p + ".traction");
        c.neumann.push_back(n);
      }
    }
    if (loads.contains("body_force")) c.body_force = vec3(loads["body_force"], "loads.body_force");
  }

  const json& integ = require(j, "integrator", "$");
  c.integrator.t_end = number(require(integ, "t_end", "integrator"), "integrator.t_end");
  c.integrator.gamma = number_or(integ, "gamma", "integrator", 0.5);
  if (integ.contains("dt") && integ.contains("cfl")) throw ConfigError("integrator.dt", "give either dt or cfl");
  c.integrator.dt = number_or(integ, "dt", "integrator", 0.0);
  c.integrator.cfl = number_or(integ, "cfl", "integrator", 0.5);
  c.integrator.fracture_check_every = count_or(integ, "fracture_check_every", "integrator", 1);

  if (j.contains("fracture")) {
    const json& fr = j["fracture"];
    c.integrator.fracture_enabled = bool_or(fr, "enabled", "fracture", true);
    const std::string d = string_or(fr, "dissipation", "fracture", "gc_area");
    if (d == "gc_area") {
      c.integrator.dissipation = DissipationModel::CriticalEnergyTimesArea;
    } else if (d == "element_strain_energy") {
      c.integrator.dissipation = DissipationModel::ElementStrainEnergy;
    } else {
      throw ConfigError("fracture.dissipation", "expected \"gc_area\" or \"element_strain_energy\"");
    }
  }

  if (j.contains("output")) {
    const json& out = j["output"];
    c.output.directory = string_or(out, "directory", "output", c.output.directory);
    c.output.snapshot_every = count_or(out, "snapshot_every", "output", c.output.snapshot_every);
    c.output.record_every = count_or(out, "record_every", "output", c.output.record_every);
    c.output.vtk = bool_or(out, "vtk", "output", true);
    c.output.energy_csv = bool_or(out, "energy_csv", "output", true);
    c.output.load_displacement_csv = bool_or(out, "load_displacement_csv", "output", true);
    if (out.contains("load_displacement_boundary")) {
      if (!out["load_displacement_boundary"].is_number_integer()) {
        throw ConfigError("output.load_displacement_boundary", "expected an integer");
      }
      c.output.load_displacement_boundary = out["load_displacement_boundary"].get<int>();
    }
  }

  if (j.contains("analysis")) {
    const json& an = j["analysis"];
    if (an.contains("notch_tip")) c.analysis.notch_tip = vec3(an["notch_tip"], "analysis.notch_tip");
    if (an.contains("branching")) {
      const json& b = an["branching"];
      BranchingSpec spec;
      spec.axis = axis_index(require(b, "axis", "analysis.branching"), "analysis.branching.axis");
      if (b.contains("sign")) {
        if (!b["sign"].is_number_integer()) throw ConfigError("analysis.branching.sign", "expected +1 or -1");
        spec.sign = b["sign"].get<int>();
      }
      spec.min_size = count_or(b, "min_size", "analysis.branching", spec.min_size);
      c.analysis.branching = spec;
    }
  }
  c.validate();
  return c;
}

ScenarioConfig read_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

Mesh load_scenario_mesh(const ScenarioConfig& config) {
  if (config.mesh.generator) return generate_notched_box(*config.mesh.generator);
  if (config.mesh.file.empty()) {
    throw ConfigError("mesh.file", "this scenario needs an external mesh (cemfrac run --mesh FILE)");
  }
  try {
    return read_mesh_file(config.mesh.file);
  } catch (const ParseError& e) {
    throw ConfigError("mesh.file", config.mesh.file + ": " + e.what());
  }
}

namespace {

double mesh_scale(const Mesh& mesh) {
  if (mesh.nodes.empty()) return 1.0;
  Vec3 lo = mesh.nodes.front(), hi = mesh.nodes.front();
  for (const Vec3& x : mesh.nodes) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  return std::max((hi - lo).norm(), std::numeric_limits<double>::min());
}

SurfaceSelection select(const Mesh& mesh, const BoundarySpec& b, double scale, const std::string& path) {
  const double tol = b.region.tolerance > 0.0 ? b.region.tolerance : 1e-9 * scale;
  PointPredicate owner;
  if (b.owner) {
    const RegionSpec o = *b.owner;
    const double otol = o.tolerance > 0.0 ? o.tolerance : 1e-9 * scale;
    owner = [o, otol](const Vec3& x) { return o.contains(x, otol); };
  }
  const RegionSpec r = b.region;
  SurfaceSelection sel = select_boundary(mesh, [&](const Vec3& x) { return r.contains(x, tol); }, owner);
  if (sel.empty()) throw ConfigError(path + ".region", "selects no boundary face");
  return sel;
}

}  // namespace

LoadCase build_load_case(const Mesh& mesh, const ScenarioConfig& config) {
  const double scale = mesh_scale(mesh);
  LoadCase load;
  for (std::size_t i = 0; i < config.dirichlet.size(); ++i) {
    const DirichletSpec& d = config.dirichlet[i];
    const SurfaceSelection sel = select(mesh, d.boundary, scale, "loads.dirichlet[" + std::to_string(i) + "]");
    DirichletBC bc;
    bc.nodes = sel.nodes;
    bc.mask = d.dofs;
    bc.velocity = d.velocity;
    bc.ramp_time = d.ramp_time;
    load.dirichlet.push_back(std::move(bc));
  }
  for (std::size_t i = 0; i < config.neumann.size(); ++i) {
    const NeumannSpec& n = config.neumann[i];
    SurfaceSelection sel = select(mesh, n.boundary, scale, "loads.neumann[" + std::to_string(i) + "]");
    load.neumann.push_back(SurfaceLoad{std::move(sel.faces), n.traction});
  }
  load.body_force = config.body_force;
  return load;
}

// ---- presets ------------------------------------------------------------

namespace {

RegionSpec box(const Vec3& lo, const Vec3& hi) {
  RegionSpec r;
  r.type = RegionSpec::Type::Box;
  r.min = lo;
  r.max = hi;
  return r;
}

RegionSpec cylinder(const Vec3& center, const Vec3& axis, double r0, double r1, double a0, double a1) {
  RegionSpec r;
  r.type = RegionSpec::Type::Cylinder;
  r.center = center;
  r.axis = axis;
  r.radius_min = r0;
  r.radius_max = r1;
  r.axial_min = a0;
  r.axial_max = a1;
  return r;
}

DirichletSpec ramp(std::string name, RegionSpec region, int axis, double v0, double t0) {
  DirichletSpec d;
  d.boundary.name = std::move(name);
  d.boundary.region = region;
  d.dofs[axis] = true;
  d.velocity[axis] = v0;
  d.ramp_time = t0;
  return d;
}

DirichletSpec fixed(std::string name, RegionSpec region, int axis) {
  DirichletSpec d;
  d.boundary.name = std::move(name);
  d.boundary.region = region;
  d.dofs[axis] = true;
  return d;
}

ScenarioConfig kalthoff(bool coarse) {
  ScenarioConfig c;
  c.name = coarse ? "kalthoff-coarse" : "kalthoff";
  c.description = "Kalthoff-Winkler edge-impact plate, upper half with symmetry on y = 0";
  const double L = 0.1, H = 0.1, B = 0.009;
  GeneratorSpec g;
  g.size = Vec3(L, H, B);
  g.cells = coarse ? std::array<int, 3>{40, 40, 2} : std::array<int, 3>{80, 80, 4};
  g.decomposition = CellDecomposition::BodyCentered;
  g.notch = NotchSpec{1, 0.025, 0, 0.0, 0.05};
  c.mesh.generator = g;
  c.material = {190e9, 0.3, 8000.0, 2.213e4, std::nullopt};
  c.dirichlet.push_back(ramp("impact", box({0, 0, 0}, {0, 0.025, B}), 0, 16.5, 1e-6));
  c.dirichlet.push_back(fixed("symmetry", box({0, 0, 0}, {L, 0, B}), 1));
  c.integrator.cfl = 0.5;
  c.integrator.t_end = 90e-6;
  c.output.directory = "out/" + c.name;
  c.output.snapshot_every = coarse ? 50 : 100;
  c.output.load_displacement_boundary = 0;
  c.analysis.notch_tip = Vec3(0.05, 0.025, 0.0);
  return c;
}

ScenarioConfig anchorage() {
  ScenarioConfig c;
  c.name = "anchorage";
  c.description =
      "Pull-out of an embedded steel disc from a concrete cylinder, quarter model (y up, symmetry on x = 0 and "
      "z = 0). Needs an external mesh; region coordinates assume the cylinder base at y = 0 and the disc's "
      "upper face at y = 0.4 and must match the supplied mesh";
  c.mesh.file = "";
  c.material = {30e9, 0.2, 2400.0, 1.06e2, std::nullopt};
  const Vec3 up = Vec3::UnitY();
  c.dirichlet.push_back(ramp("disc", cylinder(Vec3::Zero(), up, 0.0, 0.2, 0.4, 0.4), 1, 0.01, 5e-3));
  c.dirichlet.push_back(fixed("counter-pressure", cylinder(Vec3::Zero(), up, 0.4, 0.7, 0.6, 0.6), 1));
  c.dirichlet.push_back(fixed("symmetry-x", box({0, 0, 0}, {0, 0.6, 0.7}), 0));
  c.dirichlet.push_back(fixed("symmetry-z", box({0, 0, 0}, {0.7, 0.6, 0}), 2));
  c.integrator.cfl = 0.5;
  c.integrator.t_end = 42.5e-3;
  c.output.directory = "out/anchorage";
  c.output.snapshot_every = 2000;
  c.output.record_every = 10;
  c.output.load_displacement_boundary = 0;
  return c;
}

ScenarioConfig compact_compression() {
  ScenarioConfig c;
  c.name = "compact-compression";
  c.description =
      "PMMA compact compression specimen, 16.5 mm thick, Hopkinson bar impact at the lower left. Needs an "
      "external mesh; the impact region assumes the specimen's left face at x = 0 and must match the mesh";
  c.mesh.file = "";
  c.material = {5.76e9, 0.42, 1180.0, 352.3, 129.6e6};
  c.dirichlet.push_back(ramp("impact", box({0, 0, 0}, {0, 0.0125, 0.0165}), 0, 20.0, 40e-6));
  c.integrator.dt = 1e-8;
  c.integrator.t_end = 140e-6;
  c.output.directory = "out/compact-compression";
  c.output.snapshot_every = 1000;
  c.output.record_every = 10;
  c.output.load_displacement_boundary = 0;
  return c;
}

ScenarioConfig branch_neumann(bool coarse) {
  ScenarioConfig c;
  c.name = coarse ? "branch-neumann-coarse" : "branch-neumann";
  c.description = "Pre-notched plate under suddenly applied tension on the upper and lower faces";
  const double L = 0.1, H = 0.04, B = 0.004;
  GeneratorSpec g;
  g.size = Vec3(L, H, B);
  g.cells = coarse ? std::array<int, 3>{70, 28, 3} : std::array<int, 3>{140, 56, 4};
  g.notch = NotchSpec{1, 0.02, 0, 0.0, 0.05};
  c.mesh.generator = g;
  c.material = {32e9, 0.2, 2450.0, 3.0, std::nullopt};
  NeumannSpec top;
  top.boundary.name = "top";
  top.boundary.region = box({0, H, 0}, {L, H, B});
  top.traction = Vec3(0, 1e6, 0);
  NeumannSpec bottom;
  bottom.boundary.name = "bottom";
  bottom.boundary.region = box({0, 0, 0}, {L, 0, B});
  bottom.traction = Vec3(0, -1e6, 0);
  c.neumann = {top, bottom};
  c.integrator.cfl = 0.5;
  c.integrator.t_end = 80e-6;
  c.output.directory = "out/" + c.name;
  c.output.snapshot_every = coarse ? 50 : 100;
  c.output.load_displacement_csv = false;
  c.analysis.notch_tip = Vec3(0.05, 0.02, 0.0);
  c.analysis.branching = BranchingSpec{0, 1, 3};
  return c;
}

const std::vector<std::string> kBranchDirichletCases = {"1.375", "3.318", "3.993"};

ScenarioConfig branch_dirichlet(bool coarse, const std::string& case_label) {
  const std::string label = case_label.empty() ? kBranchDirichletCases.front() : case_label;
  if (std::find(kBranchDirichletCases.begin(), kBranchDirichletCases.end(), label) ==
      kBranchDirichletCases.end()) {
    throw ConfigError("case", "branch-dirichlet cases are 1.375, 3.318 and 3.993 (m/s), got " + label);
  }
  const double v0 = std::stod(label);
  ScenarioConfig c;
  c.name = std::string(coarse ? "branch-dirichlet-coarse" : "branch-dirichlet") + "-v" + label;
  c.description = "Block with a vertical through-notch, one notch flank pulled sideways with a ramped velocity, the other held in x";
  const double L = 0.2, H = 0.2, B = 0.05;
  GeneratorSpec g;
  g.size = Vec3(L, H, B);
  g.cells = coarse ? std::array<int, 3>{40, 40, 4} : std::array<int, 3>{80, 80, 8};
  g.notch = NotchSpec{0, 0.1, 1, 0.1, H};
  c.mesh.generator = g;
  c.material = {36e9, 0.18, 2400.0, 65.0, std::nullopt};
  DirichletSpec pull = ramp("notch-flank", box({0.1, 0.15, 0}, {0.1, H, B}), 0, v0, 100e-6);
  pull.boundary.owner = box({0.1, 0, 0}, {L, H, B});
  c.dirichlet.push_back(pull);
  DirichletSpec support = fixed("support", box({0.1, 0.15, 0}, {0.1, H, B}), 0);
  support.boundary.owner = box({0, 0, 0}, {0.1, H, B});
  c.dirichlet.push_back(support);
  c.integrator.cfl = 0.5;
  c.integrator.t_end = 300e-6;
  c.output.directory = "out/" + c.name;
  c.output.snapshot_every = coarse ? 50 : 100;
  c.output.load_displacement_boundary = 0;
  c.analysis.notch_tip = Vec3(0.1, 0.1, 0.0);
  c.analysis.branching = BranchingSpec{1, -1, 3};
  return c;
}

}  // namespace

std::vector<PresetInfo> list_presets() {
  return {
      {"kalthoff", "Kalthoff-Winkler impact",
       "E=190 GPa nu=0.3 rho=8000 Gc=2.213e4 J/m^2; v0=16.5 m/s ramp t0=1 us; T=90 us", false,
       {"kalthoff", "kalthoff-coarse"}, {}},
      {"anchorage", "Anchorage pull-out",
       "E=30 GPa nu=0.2 rho=2400 Gc=1.06e2 J/m^2; v0=0.01 m/s ramp t0=5 ms; T=42.5 ms", true, {"anchorage"}, {}},
      {"compact-compression", "Compact compression (PMMA)",
       "E=5.76 GPa nu=0.42 rho=1180 Gc=352.3 J/m^2; v0=20 m/s ramp t0=40 us; T=140 us; dt=1e-8 s", true,
       {"compact-compression"}, {}},
      {"branch-neumann", "Crack branching, traction loading",
       "E=32 GPa nu=0.2 rho=2450 Gc=3 J/m^2; traction 1 MPa on upper/lower faces; T=80 us", false,
       {"branch-neumann", "branch-neumann-coarse"}, {}},
      {"branch-dirichlet", "Crack branching, velocity loading",
       "E=36 GPa nu=0.18 rho=2400 Gc=65 J/m^2; v0 in {1.375, 3.318, 3.993} m/s ramp t0=100 us; T=300 us", false,
       {"branch-dirichlet", "branch-dirichlet-coarse"}, kBranchDirichletCases},
  };
}

std::string format_preset_table() {
  std::ostringstream out;
  for (const PresetInfo& p : list_presets()) {
    out << p.name << "  (" << p.benchmark << ")\n";
    out << "    " << p.summary << '\n';
    out << "    variants:";
    for (const auto& v : p.variants) out << ' ' << v;
    out << '\n';
    if (!p.cases.empty()) {
      out << "    cases (--case):";
      for (const auto& v : p.cases) out << ' ' << v;
      out << '\n';
    }
    if (p.needs_external_mesh) out << "    needs an external mesh (--mesh FILE)\n";
  }
  return out.str();
}

ScenarioConfig preset_config(const std::string& name, const std::string& case_label) {
  const bool has_case = !case_label.empty();
  const auto no_case = [&] {
    if (has_case) throw ConfigError("case", "preset " + name + " has no load cases");
  };
  if (name == "kalthoff" || name == "kalthoff-coarse") {
    no_case();
    return kalthoff(name == "kalthoff-coarse");
  }
  if (name == "anchorage") {
    no_case();
    return anchorage();
  }
  if (name == "compact-compression") {
    no_case();
    return compact_compression();
  }
  if (name == "branch-neumann" || name == "branch-neumann-coarse") {
    no_case();
    return branch_neumann(name == "branch-neumann-coarse");
  }
  if (name == "branch-dirichlet" || name == "branch-dirichlet-coarse") {
    return branch_dirichlet(name == "branch-dirichlet-coarse", case_label);
  }
  throw ConfigError("preset", "unknown preset '" + name + "' (see `cemfrac presets`)");
}

void apply_overrides(ScenarioConfig& config, const RunOverrides& o) {
  if (o.output_directory) config.output.directory = *o.output_directory;
  if (o.mesh_file) {
    config.mesh.generator.reset();
    config.mesh.file = *o.mesh_file;
  }
  if (o.dt && o.cfl) throw ConfigError("integrator.dt", "give either --dt or --cfl");
  if (o.dt) {
    config.integrator.dt = *o.dt;
  }
  if (o.cfl) {
    config.integrator.dt = 0.0;
    config.integrator.cfl = *o.cfl;
  }
  if (o.t_end) config.integrator.t_end = *o.t_end;
  config.validate();
}

// ---- running ------------------------------------------------------------

ScenarioSummary run_scenario(const ScenarioConfig& config, bool quiet) {
  config.validate();
  const auto wall_start = std::chrono::steady_clock::now();
  const IsotropicElastic material(config.material.E, config.material.nu, config.material.rho,
                                  config.material.Gc);
  Mesh mesh = load_scenario_mesh(config);
  LoadCase load = build_load_case(mesh, config);

  int ld_index = config.output.load_displacement_boundary;
  if (ld_index < 0) {
    for (std::size_t i = 0; i < load.dirichlet.size(); ++i) {
      if (!load.dirichlet[i].is_fixed()) {
        ld_index = static_cast<int>(i);
        break;
      }
    }
  }
  std::vector<NodeId> ld_nodes;
  int ld_axis = 0;
  if (ld_index >= 0) {
    ld_nodes = load.dirichlet[ld_index].nodes;
    const auto& mask = load.dirichlet[ld_index].mask;
    ld_axis = mask[0] ? 0 : (mask[1] ? 1 : 2);
  }

  const std::filesystem::path dir = config.output.directory;
  std::filesystem::create_directories(dir);
  {
    std::ofstream cfg(dir / "config.json", std::ios::binary);
    cfg << to_json(config).dump(2) << '\n';
  }

  std::vector<EnergyRow> energy;
  std::vector<LoadDisplacementRow> ld;
  RunSinks sinks;
  sinks.snapshot_every = config.output.snapshot_every;
  sinks.record_every = config.output.record_every;
  sinks.on_snapshot = [&](const Simulation& sim) {
    if (!quiet) {
      std::clog << "  step " << sim.state().step << "/" << sim.total_steps() << "  t=" << sim.state().t
                << "  active=" << sim.mesh().num_active() << "  fractured=" << sim.fracture().records.size()
                << "  Ud=" << sim.fracture().dissipated << '\n';
    }
    if (!config.output.vtk) return;
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%06zu.vtk", sim.state().step);
    write_vtk_snapshot(dir / name, sim.mesh(), make_snapshot(sim));
  };
  sinks.on_record = [&](const Simulation& sim) {
    energy.push_back({sim.state().t, sim.state().ledger});
    if (ld_index >= 0) {
      double disp = 0.0;
      for (NodeId n : ld_nodes) disp += sim.state().u[n][ld_axis];
      disp /= static_cast<double>(ld_nodes.size());
      ld.push_back({sim.state().t, disp, sim.reaction(ld_nodes)[ld_axis]});
    }
  };

  const RunResult result = run(std::move(mesh), material, std::move(load), config.integrator, sinks);

  if (config.output.energy_csv) write_energy_csv(dir / "energy.csv", energy);
  if (config.output.load_displacement_csv && ld_index >= 0) {
    write_load_displacement_csv(dir / "load_displacement.csv", ld);
  }

  ScenarioSummary s;
  s.name = config.name;
  s.steps = result.state.step;
  s.dt = result.dt;
  s.t_end = result.state.t;
  s.elements = result.mesh.num_elements();
  s.active_elements = result.mesh.num_active();
  const auto fractured = fractured_elements(result.fracture.records);
  s.fractured_elements = fractured.size();
  s.dissipated = result.fracture.dissipated;
  s.final_energy = result.state.ledger;
  s.crack_components = count_components(result.mesh, fractured);
  if (config.analysis.notch_tip) {
    s.crack_angle_deg = crack_angle_deg(result.fracture.crack_surface, *config.analysis.notch_tip);
    if (config.analysis.branching) {
      const BranchingSpec& b = *config.analysis.branching;
      s.components_past_tip = max_components_past_cut(result.mesh, fractured, b.axis,
                                                       (*config.analysis.notch_tip)[b.axis], b.sign, b.min_size);
    }
  }
  s.output_directory = dir;
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  {
    std::ofstream sum(dir / "summary.json", std::ios::binary);
    sum << summary_to_json(s).dump(2) << '\n';
  }
  return s;
}

nlohmann::json summary_to_json(const ScenarioSummary& s) {
  json j = {{"name", s.name},
            {"steps", s.steps},
            {"dt", s.dt},
            {"t_end", s.t_end},
            {"elements", s.elements},
            {"active_elements", s.active_elements},
            {"fractured_elements", s.fractured_elements},
            {"dissipated_energy", s.dissipated},
            {"kinetic_energy", s.final_energy.kinetic},
            {"strain_energy", s.final_energy.strain},
            {"external_work", s.final_energy.external_work},
            {"crack_components", s.crack_components},
            {"wall_seconds", s.wall_seconds}};
  if (s.crack_angle_deg) j["crack_angle_deg"] = *s.crack_angle_deg;
  if (s.components_past_tip) j["components_past_tip"] = *s.components_past_tip;
  return j;
}

std::string format_summary(const ScenarioSummary& s) {
  std::ostringstream out;
  out << "scenario            " << s.name << '\n';
  out << "steps               " << s.steps << " (dt = " << s.dt << " s, t = " << s.t_end << " s)\n";
  out << "elements            " << s.elements << " (" << s.active_elements << " active)\n";
  out << "fractured elements  " << s.fractured_elements << '\n';
  out << "dissipated energy   " << s.dissipated << " J\n";
  out << "crack components    " << s.crack_components << '\n';
  if (s.crack_angle_deg) out << "crack angle         " << *s.crack_angle_deg << " deg from +x at the notch tip\n";
  if (s.components_past_tip) out << "branches past tip   " << *s.components_past_tip << '\n';
  out << "wall time           " << s.wall_seconds << " s\n";
  out << "output              " << s.output_directory.string() << '\n';
  return out.str();
}

}  // namespace cemfrac
