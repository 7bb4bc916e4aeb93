#include "cemfrac/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>

namespace cemfrac {

SimState SimState::at_rest(std::size_t num_nodes) {
  SimState s;
  s.u.assign(num_nodes, Vec3::Zero());
  s.v.assign(num_nodes, Vec3::Zero());
  s.a.assign(num_nodes, Vec3::Zero());
  return s;
}

double ramp_velocity(double t, double v0, double t0) {
  if (t0 <= 0.0 || t >= t0) return v0;
  return std::max(t, 0.0) / t0 * v0;
}

void LoadCase::validate() const {
  for (std::size_t i = 0; i < dirichlet.size(); ++i) {
    const DirichletBC& bc = dirichlet[i];
    const std::string field = "loadcase.dirichlet[" + std::to_string(i) + "]";
    if (bc.nodes.empty()) throw ConfigError(field + ".nodes", "empty node set");
    if (!bc.mask[0] && !bc.mask[1] && !bc.mask[2]) throw ConfigError(field + ".dofs", "no constrained direction");
    if (!bc.velocity.allFinite()) throw ConfigError(field + ".velocity", "not finite");
    if (!bc.is_fixed() && !(bc.ramp_time > 0.0)) throw ConfigError(field + ".ramp_time", "must be positive");
  }
  for (std::size_t i = 0; i < neumann.size(); ++i) {
    const std::string field = "loadcase.neumann[" + std::to_string(i) + "]";
    if (neumann[i].faces.empty()) throw ConfigError(field + ".faces", "empty face set");
    if (!neumann[i].traction.allFinite()) throw ConfigError(field + ".traction", "not finite");
  }
  if (!body_force.allFinite()) throw ConfigError("loadcase.body_force", "not finite");
}

double DofConstraint::velocity(double t) const { return ramp_velocity(t, v0, t0); }

double DofConstraint::acceleration(double t) const {
  if (t0 <= 0.0 || t >= t0) return 0.0;
  return v0 / t0;
}

std::vector<DofConstraint> flatten_constraints(const LoadCase& load) {
  std::map<std::pair<NodeId, int>, DofConstraint> by_dof;
  for (const DirichletBC& bc : load.dirichlet) {
    for (NodeId n : bc.nodes) {
      for (int d = 0; d < 3; ++d) {
        if (!bc.mask[d]) continue;
        by_dof[{n, d}] = DofConstraint{n, static_cast<std::uint8_t>(d), bc.velocity[d],
                                       bc.is_fixed() ? 0.0 : bc.ramp_time};
      }
    }
  }
  std::vector<DofConstraint> out;
  out.reserve(by_dof.size());
  for (const auto& [key, c] : by_dof) out.push_back(c);
  return out;
}

void IntegratorConfig::validate() const {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw ConfigError("integrator.dt", "must be finite and >= 0");
  if (dt == 0.0 && !(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("integrator.cfl", "must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("integrator.gamma", "must lie in [0, 1]");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("integrator.t_end", "must be finite and >= 0");
  if (fracture_check_every == 0) throw ConfigError("integrator.fracture_check_every", "must be >= 1");
}

double critical_timestep(const Mesh& mesh, const IsotropicElastic& mat, double cfl) {
  double h = std::numeric_limits<double>::infinity();
  for (ElementId e = 0; e < mesh.num_elements(); ++e) {
    if (!mesh.is_active(e)) continue;
    const Element& el = mesh.elements[e];
    for (const auto& [a, b] : local_edges(el.kind)) {
      h = std::min(h, (mesh.nodes[el.nodes[b]] - mesh.nodes[el.nodes[a]]).norm());
    }
  }
  if (!std::isfinite(h)) throw Error("critical_timestep: no active elements");
  return cfl * h / wave_speeds(mat).dilatational;
}

void newmark_step(SimState& state, const LumpedMass& mass, std::span<const Vec3> f_ext,
                  const InternalForceFn& internal_force, std::span<const DofConstraint> constraints,
                  double dt, double gamma, std::vector<Vec3>* f_int_out) {
  const std::size_t n = state.u.size();
  const double half_dt2 = 0.5 * dt * dt;
  for (std::size_t i = 0; i < n; ++i) {
    if (mass.orphan[i]) continue;
    state.u[i] += dt * state.v[i] + half_dt2 * state.a[i];
  }

  std::vector<Vec3> local;
  std::vector<Vec3>& f_int = f_int_out ? *f_int_out : local;
  internal_force(state.u, f_int);

  const double t_next = state.t + dt;
  for (std::size_t i = 0; i < n; ++i) {
    if (mass.orphan[i]) {
      state.v[i].setZero();
      state.a[i].setZero();
      continue;
    }
    const Vec3 a_next = (f_ext[i] - f_int[i]) / mass.node_mass[i];
    if (!a_next.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite acceleration at node " << i << ", step " << state.step + 1 << ", t = " << t_next;
      throw NumericalAbort(msg.str());
    }
    state.v[i] += dt * ((1.0 - gamma) * state.a[i] + gamma * a_next);
    state.a[i] = a_next;
  }
  for (const DofConstraint& c : constraints) {
    if (mass.orphan[c.node]) continue;
    state.v[c.node][c.dof] = c.velocity(t_next);
    state.a[c.node][c.dof] = c.acceleration(t_next);
  }
  state.t = t_next;
  ++state.step;
}

Vec3 reaction_force(std::span<const NodeId> nodes, const LumpedMass& mass, std::span<const Vec3> a,
                    std::span<const Vec3> f_int, std::span<const Vec3> f_ext) {
  Vec3 r = Vec3::Zero();
  for (NodeId n : nodes) r += mass.node_mass[n] * a[n] - f_ext[n] + f_int[n];
  return r;
}

EnergyLedger update_energy_ledger(const SimState& state, const LumpedMass& mass,
                                  const IsotropicElastic& mat, const SmoothedOperators& ops,
                                  const EnergyLedger& previous) {
  EnergyLedger out = previous;
  double ke = 0.0;
  for (std::size_t i = 0; i < state.v.size(); ++i) {
    if (mass.orphan[i]) continue;
    ke += 0.5 * mass.node_mass[i] * state.v[i].squaredNorm();
  }
  out.kinetic = ke;
  out.strain = ops.strain_energy(mat, state.u);
  return out;
}

namespace {

// Total force applied from outside: f_ext on free dofs, m a + f_int on
// constrained dofs (external load plus support reaction).
void applied_force(const LumpedMass& mass, std::span<const DofConstraint> constraints,
                   std::span<const Vec3> a, std::span<const Vec3> f_int, std::span<const Vec3> f_ext,
                   std::vector<Vec3>& out) {
  out.assign(f_ext.begin(), f_ext.end());
  for (const DofConstraint& c : constraints) {
    out[c.node][c.dof] = mass.node_mass[c.node] * a[c.node][c.dof] + f_int[c.node][c.dof];
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mass.orphan[i]) out[i].setZero();
  }
}

}  // namespace

Simulation::Simulation(Mesh mesh, IsotropicElastic material, LoadCase load, IntegratorConfig config)
    : mesh_(std::move(mesh)), material_(material), load_(std::move(load)), config_(config) {
  config_.validate();
  load_.validate();
  validate_mesh(mesh_);
  for (const DirichletBC& bc : load_.dirichlet) {
    for (NodeId n : bc.nodes) {
      if (n >= mesh_.num_nodes()) throw ConfigError("loadcase.dirichlet", "node id out of range");
    }
  }
  constraints_ = flatten_constraints(load_);
  state_ = SimState::at_rest(mesh_.num_nodes());
  fracture_.last_G.assign(mesh_.num_elements(), 0.0);

  dt_ = config_.dt > 0.0 ? config_.dt : critical_timestep(mesh_, material_, config_.cfl);
  if (config_.t_end > 0.0) {
    total_steps_ = static_cast<std::size_t>(std::ceil(config_.t_end / dt_ * (1.0 - 1e-12)));
    total_steps_ = std::max<std::size_t>(total_steps_, 1);
    if (config_.dt == 0.0) dt_ = config_.t_end / static_cast<double>(total_steps_);
  }

  rebuild_discretisation(false);
  for (const DofConstraint& c : constraints_) {
    state_.v[c.node][c.dof] = c.velocity(0.0);
  }
  recompute_acceleration();
  applied_force(mass_, constraints_, state_.a, f_int_, f_ext_, applied_);
  state_.ledger = update_energy_ledger(state_, mass_, material_, ops_, state_.ledger);
}

void Simulation::rebuild_discretisation(bool topology_only) {
  if (!topology_only) topology_ = build_edge_topology(mesh_);
  ops_ = SmoothedOperators(mesh_, topology_);
  mass_ = assemble_lumped_mass(mesh_, material_);
  f_ext_ = assemble_external_force(mesh_, load_.neumann, load_.body_force);
  for (std::size_t i = 0; i < mass_.orphan.size(); ++i) {
    if (!mass_.orphan[i]) continue;
    state_.v[i].setZero();
    state_.a[i].setZero();
  }
}

void Simulation::recompute_acceleration() {
  ops_.internal_force(material_, state_.u, f_int_, &fields_);
  for (std::size_t i = 0; i < state_.a.size(); ++i) {
    state_.a[i] = mass_.orphan[i] ? Vec3::Zero() : Vec3((f_ext_[i] - f_int_[i]) / mass_.node_mass[i]);
  }
  for (const DofConstraint& c : constraints_) {
    if (mass_.orphan[c.node]) continue;
    state_.a[c.node][c.dof] = c.acceleration(state_.t);
  }
}

void Simulation::step() {
  const std::vector<Vec3> u_prev = state_.u;
  const InternalForceFn force = [this](std::span<const Vec3> u, std::vector<Vec3>& f) {
    ops_.internal_force(material_, u, f, &fields_);
  };
  newmark_step(state_, mass_, f_ext_, force, constraints_, dt_, config_.gamma, &f_int_);

  std::vector<Vec3> applied_next;
  applied_force(mass_, constraints_, state_.a, f_int_, f_ext_, applied_next);
  double work = 0.0;
  for (std::size_t i = 0; i < state_.u.size(); ++i) {
    work += 0.5 * (applied_[i] + applied_next[i]).dot(state_.u[i] - u_prev[i]);
  }
  state_.ledger.external_work += work;
  applied_ = std::move(applied_next);

  const bool check = config_.fracture_enabled && std::isfinite(material_.Gc()) &&
                     state_.step % config_.fracture_check_every == 0;
  if (check) {
    const auto stretches = compute_edge_stretches(mesh_, topology_, state_.u);
    const auto stresses = compute_quadrature_stresses(fields_.stress);
    FractureOptions opts;
    opts.dissipation = config_.dissipation;
    opts.time = state_.t;
    opts.material = &material_;
    opts.displacement = state_.u;
    const FractureOutcome outcome =
        evaluate_and_fracture(mesh_, topology_, fracture_, stretches, stresses, material_.Gc(), opts);
    if (!outcome.empty()) {
      if (outcome.added.empty()) {
        topology_ = refresh_topology_after_deactivation(topology_, outcome.deactivated);
        rebuild_discretisation(true);
      } else {
        rebuild_discretisation(false);
      }
      recompute_acceleration();
      applied_force(mass_, constraints_, state_.a, f_int_, f_ext_, applied_);
    }
  }
  state_.ledger.dissipated = fracture_.dissipated;
  state_.ledger = update_energy_ledger(state_, mass_, material_, ops_, state_.ledger);
}

Vec3 Simulation::reaction(std::span<const NodeId> nodes) const {
  return reaction_force(nodes, mass_, state_.a, f_int_, f_ext_);
}

RunResult run(Mesh mesh, const IsotropicElastic& material, LoadCase load,
              const IntegratorConfig& config, const RunSinks& sinks) {
  Simulation sim(std::move(mesh), material, std::move(load), config);
  const auto emit = [&](bool last) {
    const std::size_t s = sim.state().step;
    if (sinks.on_snapshot &&
        (s == 0 || last || (sinks.snapshot_every > 0 && s % sinks.snapshot_every == 0))) {
      sinks.on_snapshot(sim);
    }
    if (sinks.on_record && (s == 0 || last || (sinks.record_every > 0 && s % sinks.record_every == 0))) {
      sinks.on_record(sim);
    }
  };
  emit(sim.finished());
  while (!sim.finished()) {
    sim.step();
    emit(sim.finished());
  }
  return RunResult{sim.mesh(), sim.state(), sim.fracture(), sim.dt()};
}

}  // namespace cemfrac
