#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cemfrac/dynamics.hpp"
#include "cemfrac/generator.hpp"
#include "cemfrac/mesh.hpp"

namespace cemfrac {

inline constexpr const char* kScenarioSchema = "cemfrac.scenario.v1";

/// Point set used to pick boundary faces. Box: min <= x <= max. Cylinder:
/// radial distance from the axis line in [radius_min, radius_max] and axial
/// coordinate (from `center` along `axis`) in [axial_min, axial_max].
/// Bounds are widened by `tolerance`; 0 selects 1e-9 times the mesh size.
struct RegionSpec {
  enum class Type { Box, Cylinder };
  Type type = Type::Box;
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  Vec3 center = Vec3::Zero();
  Vec3 axis = Vec3::UnitY();
  double radius_min = 0.0;
  double radius_max = 0.0;
  double axial_min = 0.0;
  double axial_max = 0.0;
  double tolerance = 0.0;

  bool contains(const Vec3& x, double tol) const;
};

struct BoundarySpec {
  std::string name;
  RegionSpec region;
  /// Restricts faces to those whose owning element centroid lies in this
  /// region (selects one flank of a zero-width notch).
  std::optional<RegionSpec> owner;
};

struct DirichletSpec {
  BoundarySpec boundary;
  std::array<bool, 3> dofs{false, false, false};
  Vec3 velocity = Vec3::Zero();
  double ramp_time = 0.0;
};

struct NeumannSpec {
  BoundarySpec boundary;
  Vec3 traction = Vec3::Zero();
};

struct MaterialSpec {
  double E = 0.0;
  double nu = 0.0;
  double rho = 0.0;
  double Gc = 0.0;  // +inf disables fracture
  /// Reported only; the fracture criterion does not use it.
  std::optional<double> tensile_strength;
};

struct MeshSource {
  std::optional<GeneratorSpec> generator;
  std::string file;  // used when no generator is given
};

struct OutputSpec {
  std::string directory = "out";
  std::size_t snapshot_every = 100;
  std::size_t record_every = 1;
  bool vtk = true;
  bool energy_csv = true;
  bool load_displacement_csv = true;
  /// Dirichlet entry whose nodes define displacement and reaction; -1 picks
  /// the first ramped one.
  int load_displacement_boundary = -1;
};

struct BranchingSpec {
  int axis = 1;
  int sign = -1;
  std::size_t min_size = 3;
};

struct AnalysisSpec {
  std::optional<Vec3> notch_tip;
  std::optional<BranchingSpec> branching;
};

struct ScenarioConfig {
  std::string name;
  std::string description;
  MeshSource mesh;
  MaterialSpec material;
  std::vector<DirichletSpec> dirichlet;
  std::vector<NeumannSpec> neumann;
  Vec3 body_force = Vec3::Zero();
  IntegratorConfig integrator;
  OutputSpec output;
  AnalysisSpec analysis;

  /// Throws ConfigError with the dotted field path.
  void validate() const;
};

nlohmann::json to_json(const ScenarioConfig& config);
/// Parses and validates; throws ConfigError naming the field.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
ScenarioConfig read_scenario_file(const std::filesystem::path& path);

Mesh load_scenario_mesh(const ScenarioConfig& config);
/// Resolves the boundary regions on the mesh. Throws ConfigError when a
/// region selects no face.
LoadCase build_load_case(const Mesh& mesh, const ScenarioConfig& config);

struct PresetInfo {
  std::string name;
  std::string benchmark;
  std::string summary;
  bool needs_external_mesh = false;
  std::vector<std::string> variants;
  std::vector<std::string> cases;
};

/// One row per benchmark.
std::vector<PresetInfo> list_presets();
std::string format_preset_table();
/// `variant` is a preset or variant name (e.g. "kalthoff-coarse"); `case_label`
/// picks one of the listed load cases (default: the first). Throws
/// ConfigError for unknown names.
ScenarioConfig preset_config(const std::string& name, const std::string& case_label = "");

struct RunOverrides {
  std::optional<std::string> output_directory;
  std::optional<std::string> mesh_file;
  std::optional<double> dt;
  std::optional<double> cfl;
  std::optional<double> t_end;
  bool quiet = false;
};

void apply_overrides(ScenarioConfig& config, const RunOverrides& overrides);

struct ScenarioSummary {
  std::string name;
  std::size_t steps = 0;
  double dt = 0.0;
  double t_end = 0.0;
  std::size_t elements = 0;
  std::size_t active_elements = 0;
  std::size_t fractured_elements = 0;
  double dissipated = 0.0;
  EnergyLedger final_energy;
  double wall_seconds = 0.0;
  std::optional<double> crack_angle_deg;
  std::size_t crack_components = 0;
  std::optional<std::size_t> components_past_tip;
  std::filesystem::path output_directory;
};

/// Runs the scenario and writes its artifacts: snapshot_<step>.vtk (plus
/// crack polydata), energy.csv, load_displacement.csv, config.json and
/// summary.json.
ScenarioSummary run_scenario(const ScenarioConfig& config, bool quiet = false);

std::string format_summary(const ScenarioSummary& summary);
nlohmann::json summary_to_json(const ScenarioSummary& summary);

}  // namespace cemfrac
