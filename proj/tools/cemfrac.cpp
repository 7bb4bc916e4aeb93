// cemfrac command line driver.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cemfrac/generator.hpp"
#include "cemfrac/io.hpp"
#include "cemfrac/parallel.hpp"
#include "cemfrac/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitOther = 1;

int threads_from_env() {
  const char* env = std::getenv("CEMFRAC_THREADS");
  if (!env || !*env) return 0;
  try {
    return std::stoi(env);
  } catch (const std::exception&) {
    throw cemfrac::ConfigError("CEMFRAC_THREADS", std::string("not an integer: ") + env);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit dynamic 3D fracture with crack elements on edge-smoothed FEM"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario from a JSON config or a built-in preset");
  std::string config_path, preset, case_label, out_dir, mesh_file;
  std::optional<int> threads;
  std::optional<double> dt, cfl, t_end;
  bool quiet = false;
  run->add_option("config", config_path, "Scenario config (JSON)");
  run->add_option("--preset", preset, "Built-in preset name (see `cemfrac presets`)");
  run->add_option("--case", case_label, "Load case of the preset");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--mesh", mesh_file, "External mesh file (native format)");
  run->add_option("--threads", threads, "Worker threads (default: CEMFRAC_THREADS or all cores)");
  auto* dt_opt = run->add_option("--dt", dt, "Fixed time step (s)");
  auto* cfl_opt = run->add_option("--cfl", cfl, "Courant number for the critical time step");
  dt_opt->excludes(cfl_opt);
  run->add_option("--t-end", t_end, "Override the end time (s)");
  run->add_flag("-q,--quiet", quiet, "No progress output");

  auto* mesh = app.add_subcommand("mesh", "Mesh utilities");
  mesh->require_subcommand(1);
  auto* gen = mesh->add_subcommand("gen", "Generate a structured (notched) box mesh");
  std::string gen_spec, gen_out;
  gen->add_option("spec", gen_spec, "Generator spec (JSON)")->required();
  gen->add_option("-o,--output", gen_out, "Output mesh file")->required();

  app.add_subcommand("presets", "List the built-in benchmark presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("presets")) {
      std::cout << cemfrac::format_preset_table();
      return kExitOk;
    }

    if (app.got_subcommand("mesh")) {
      std::ifstream in(gen_spec);
      if (!in) throw cemfrac::ConfigError(gen_spec, "cannot open generator spec");
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::parse_error& e) {
        throw cemfrac::ConfigError(gen_spec, std::string("invalid JSON: ") + e.what());
      }
      const auto spec = cemfrac::generator_spec_from_json(j.contains("generator") ? j["generator"] : j, "generator");
      const cemfrac::Mesh m = cemfrac::generate_notched_box(spec);
      cemfrac::write_mesh_file(gen_out, m);
      std::cout << "wrote " << gen_out << ": " << m.num_nodes() << " nodes, " << m.num_elements() << " elements\n";
      return kExitOk;
    }

    // run
    if (config_path.empty() == preset.empty()) {
      throw cemfrac::ConfigError("run", "give either a config file or --preset");
    }
    if (preset.empty() && !case_label.empty()) {
      throw cemfrac::ConfigError("case", "--case applies to presets only");
    }
    cemfrac::set_thread_count(threads ? *threads : threads_from_env());
    cemfrac::ScenarioConfig config =
        preset.empty() ? cemfrac::read_scenario_file(config_path) : cemfrac::preset_config(preset, case_label);
    cemfrac::RunOverrides o;
    if (!out_dir.empty()) o.output_directory = out_dir;
    if (!mesh_file.empty()) o.mesh_file = mesh_file;
    o.dt = dt;
    o.cfl = cfl;
    o.t_end = t_end;
    cemfrac::apply_overrides(config, o);
    if (!quiet) {
      std::clog << "running " << config.name << " with " << cemfrac::thread_count() << " thread(s)\n";
    }
    const auto summary = cemfrac::run_scenario(config, quiet);
    std::cout << cemfrac::format_summary(summary);
    return kExitOk;
  } catch (const cemfrac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const cemfrac::NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
}
