#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "cemfrac/esfem.hpp"
#include "cemfrac/fracture.hpp"
#include "cemfrac/material.hpp"
#include "cemfrac/mesh.hpp"
#include "cemfrac/topology.hpp"

namespace cemfrac {

struct EnergyLedger {
  double kinetic = 0.0;
  double strain = 0.0;
  double external_work = 0.0;
  double dissipated = 0.0;
};

struct SimState {
  std::vector<Vec3> u;
  std::vector<Vec3> v;
  std::vector<Vec3> a;
  double t = 0.0;
  std::size_t step = 0;
  EnergyLedger ledger;

  static SimState at_rest(std::size_t num_nodes);
};

/// v = (t / t0) v0 for t <= t0, v0 afterwards.
double ramp_velocity(double t, double v0, double t0);

/// Prescribed velocity on selected dofs of a node set. A zero target with
/// ramp_time 0 fixes the dofs; ramp_time must be positive otherwise.
struct DirichletBC {
  std::vector<NodeId> nodes;
  std::array<bool, 3> mask{false, false, false};
  Vec3 velocity = Vec3::Zero();
  double ramp_time = 0.0;

  bool is_fixed() const noexcept { return velocity == Vec3::Zero(); }
};

struct LoadCase {
  std::vector<DirichletBC> dirichlet;
  /// Tractions act with constant magnitude from t = 0.
  std::vector<SurfaceLoad> neumann;
  Vec3 body_force = Vec3::Zero();

  /// Throws ConfigError on empty sets or non-positive ramp times.
  void validate() const;
};

/// One constrained degree of freedom.
struct DofConstraint {
  NodeId node = 0;
  std::uint8_t dof = 0;
  double v0 = 0.0;
  double t0 = 0.0;

  double velocity(double t) const;
  double acceleration(double t) const;
};

/// Flattens a load case into per-dof constraints; later entries win on
/// duplicates. Sorted by (node, dof).
std::vector<DofConstraint> flatten_constraints(const LoadCase& load);

struct IntegratorConfig {
  double dt = 0.0;  // fixed step; 0 selects cfl * h_min / c_d
  double cfl = 0.5;
  double gamma = 0.5;
  double t_end = 0.0;
  std::size_t fracture_check_every = 1;
  bool fracture_enabled = true;
  DissipationModel dissipation = DissipationModel::CriticalEnergyTimesArea;

  void validate() const;
};

/// cfl * (shortest edge among active elements) / c_d. Throws Error on an
/// empty active set.
double critical_timestep(const Mesh& mesh, const IsotropicElastic& mat, double cfl);

using InternalForceFn = std::function<void(std::span<const Vec3> u, std::vector<Vec3>& f_int)>;

/// Explicit Newmark (beta = 0) step:
///   u+ = u + v dt + a dt^2 / 2,  a+ = M^-1 (f_ext - f_int(u+)),
///   v+ = v + ((1 - gamma) a + gamma a+) dt,
/// then constrained dofs take their prescribed velocity and acceleration and
/// orphan nodes are frozen. Returns f_int(u+) through `f_int_out`. Throws
/// NumericalAbort on non-finite accelerations.
void newmark_step(SimState& state, const LumpedMass& mass, std::span<const Vec3> f_ext,
                  const InternalForceFn& internal_force, std::span<const DofConstraint> constraints,
                  double dt, double gamma, std::vector<Vec3>* f_int_out = nullptr);

/// sum over nodes of (m a - f_ext + f_int).
Vec3 reaction_force(std::span<const NodeId> nodes, const LumpedMass& mass, std::span<const Vec3> a,
                    std::span<const Vec3> f_int, std::span<const Vec3> f_ext);

/// Kinetic energy 1/2 sum m v^2 (orphans excluded) and smoothed strain energy.
/// External work and dissipated energy are carried over from `previous`.
EnergyLedger update_energy_ledger(const SimState& state, const LumpedMass& mass,
                                  const IsotropicElastic& mat, const SmoothedOperators& ops,
                                  const EnergyLedger& previous);

/// Owns the evolving discretisation of one run.
class Simulation {
public:
  Simulation(Mesh mesh, IsotropicElastic material, LoadCase load, IntegratorConfig config);

  /// Advances one step, runs the fracture check when due and updates the
  /// energy ledger.
  void step();
  /// Number of steps needed to reach t_end.
  std::size_t total_steps() const noexcept { return total_steps_; }
  bool finished() const noexcept { return state_.step >= total_steps_; }

  double dt() const noexcept { return dt_; }
  const Mesh& mesh() const noexcept { return mesh_; }
  const EdgeTopology& topology() const noexcept { return topology_; }
  const SmoothedOperators& operators() const noexcept { return ops_; }
  const IsotropicElastic& material() const noexcept { return material_; }
  const LoadCase& load() const noexcept { return load_; }
  const SimState& state() const noexcept { return state_; }
  const FractureState& fracture() const noexcept { return fracture_; }
  const LumpedMass& mass() const noexcept { return mass_; }
  const EdgeFields& edge_fields() const noexcept { return fields_; }
  const std::vector<Vec3>& internal_force() const noexcept { return f_int_; }
  const std::vector<Vec3>& external_force() const noexcept { return f_ext_; }

  Vec3 reaction(std::span<const NodeId> nodes) const;

private:
  void rebuild_discretisation(bool topology_only);
  void recompute_acceleration();

  Mesh mesh_;
  IsotropicElastic material_;
  LoadCase load_;
  IntegratorConfig config_;
  EdgeTopology topology_;
  SmoothedOperators ops_;
  LumpedMass mass_;
  std::vector<DofConstraint> constraints_;
  std::vector<Vec3> f_ext_;
  std::vector<Vec3> f_int_;
  std::vector<Vec3> applied_;  // f_ext plus support reactions
  EdgeFields fields_;
  SimState state_;
  FractureState fracture_;
  double dt_ = 0.0;
  std::size_t total_steps_ = 0;
};

struct RunSinks {
  /// Called for t = 0 and then every `snapshot_every` steps and at the end.
  std::function<void(const Simulation&)> on_snapshot;
  std::size_t snapshot_every = 0;
  /// Called for t = 0 and after every `record_every` steps and at the end.
  std::function<void(const Simulation&)> on_record;
  std::size_t record_every = 1;
};

struct RunResult {
  Mesh mesh;
  SimState state;
  FractureState fracture;
  double dt = 0.0;
};

/// Runs a simulation from rest to t_end.
RunResult run(Mesh mesh, const IsotropicElastic& material, LoadCase load,
              const IntegratorConfig& config, const RunSinks& sinks = {});

}  // namespace cemfrac
