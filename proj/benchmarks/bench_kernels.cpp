#include <benchmark/benchmark.h>

#include "cemfrac/esfem.hpp"
#include "cemfrac/fracture.hpp"
#include "cemfrac/generator.hpp"
#include "cemfrac/parallel.hpp"
#include "cemfrac/topology.hpp"

namespace {

cemfrac::Mesh box_mesh(int n) {
  cemfrac::GeneratorSpec spec;
  spec.size = cemfrac::Vec3(0.1, 0.1, 0.01);
  spec.cells = {n, n, 3};
  spec.notch = cemfrac::NotchSpec{1, 0.05, 0, 0.0, 0.05};
  return cemfrac::generate_notched_box(spec);
}

std::vector<cemfrac::Vec3> stretch_field(const cemfrac::Mesh& mesh) {
  std::vector<cemfrac::Vec3> u(mesh.num_nodes());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& x = mesh.nodes[i];
    u[i] = cemfrac::Vec3(1e-4 * x.x() + 2e-5 * x.y(), 3e-4 * x.y(), -5e-5 * x.z());
  }
  return u;
}

void BM_BuildTopology(benchmark::State& state) {
  const auto mesh = box_mesh(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cemfrac::build_edge_topology(mesh));
  state.SetItemsProcessed(state.iterations() * mesh.num_elements());
}

void BM_InternalForce(benchmark::State& state) {
  const auto mesh = box_mesh(static_cast<int>(state.range(0)));
  const auto topo = cemfrac::build_edge_topology(mesh);
  const cemfrac::SmoothedOperators ops(mesh, topo);
  const cemfrac::IsotropicElastic mat(190e9, 0.3, 8000.0, 2.213e4);
  const auto u = stretch_field(mesh);
  std::vector<cemfrac::Vec3> f;
  for (auto _ : state) {
    ops.internal_force(mat, u, f);
    benchmark::DoNotOptimize(f.data());
  }
  state.SetItemsProcessed(state.iterations() * topo.num_edges());
}

void BM_FractureScan(benchmark::State& state) {
  const auto mesh = box_mesh(static_cast<int>(state.range(0)));
  const auto topo = cemfrac::build_edge_topology(mesh);
  const cemfrac::SmoothedOperators ops(mesh, topo);
  const cemfrac::IsotropicElastic mat(190e9, 0.3, 8000.0, 2.213e4);
  const auto u = stretch_field(mesh);
  std::vector<cemfrac::Vec3> f;
  cemfrac::EdgeFields fields;
  ops.internal_force(mat, u, f, &fields);
  const auto stretches = cemfrac::compute_edge_stretches(mesh, topo, u);
  const auto stresses = cemfrac::compute_quadrature_stresses(fields.stress);
  for (auto _ : state) {
    cemfrac::Mesh work = mesh;
    cemfrac::FractureState fs;
    // Gc high enough that the scan never mutates the mesh.
    benchmark::DoNotOptimize(cemfrac::evaluate_and_fracture(work, topo, fs, stretches, stresses, 1e30));
  }
  state.SetItemsProcessed(state.iterations() * mesh.num_elements());
}

}  // namespace

BENCHMARK(BM_BuildTopology)->Arg(20)->Arg(40);
BENCHMARK(BM_InternalForce)->Arg(20)->Arg(40);
BENCHMARK(BM_FractureScan)->Arg(20)->Arg(40);

BENCHMARK_MAIN();
