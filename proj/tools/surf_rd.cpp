// Command-line front end: mesh generation/checking, experiment runs and
// sweeps, and the matrix-property verification suite.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "surfrd/analysis.hpp"
#include "surfrd/assembly.hpp"
#include "surfrd/config.hpp"
#include "surfrd/experiments.hpp"
#include "surfrd/mesh.hpp"
#include "surfrd/mesh_generators.hpp"
#include "surfrd/off_io.hpp"
#include "surfrd/sparse.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitBlowUp = 4;

surfrd::MassMode method_from_string(const std::string& s) {
  if (s == "lsfem") return surfrd::MassMode::lumped;
  if (s == "sfem") return surfrd::MassMode::consistent;
  throw surfrd::ConfigError("unknown method '" + s + "' (expected sfem or lsfem)");
}

int cmd_mesh_gen(const std::string& kind, int level, int points, const std::string& out) {
  surfrd::SurfaceMesh mesh;
  if (kind == "icosphere") {
    mesh = surfrd::generate_icosphere(level);
  } else if (kind == "fibonacci") {
    mesh = surfrd::generate_fibonacci_delaunay(points);
  } else {
    throw surfrd::ConfigError("unknown mesh kind '" + kind + "'");
  }
  surfrd::write_off(mesh, out);
  std::cout << "wrote " << out << ": " << mesh.n_vertices() << " vertices, "
            << mesh.n_triangles() << " triangles, h = " << surfrd::sci(surfrd::mesh_size(mesh))
            << "\n";
  return kExitOk;
}

int cmd_mesh_check(const std::string& path) {
  const surfrd::SurfaceMesh mesh = surfrd::read_off(path);
  const surfrd::ValidationReport rep = surfrd::validate(mesh);
  std::cout << path << ": " << mesh.n_vertices() << " vertices, " << mesh.n_triangles()
            << " triangles\n";
  std::cout << "  h            = " << surfrd::sci(surfrd::mesh_size(mesh)) << "\n";
  std::cout << "  surface area = " << surfrd::sci(surfrd::surface_area(mesh)) << "\n";
  for (const std::string& f : rep.failures) std::cout << "  FAIL: " << f << "\n";
  if (!rep.ok()) {
    std::cout << "mesh check: INVALID\n";
    return 1;
  }
  const surfrd::DelaunayReport angle = surfrd::check_angle_condition(mesh);
  std::cout << "  angle condition: " << (angle.pass ? "pass" : "FAIL") << " (worst sum "
            << surfrd::sci(angle.worst_sum) << " rad, " << angle.violations.size()
            << " violations)\n";
  std::cout << "mesh check: " << (angle.pass ? "OK" : "valid but not Delaunay") << "\n";
  return kExitOk;
}

struct RunFlags {
  std::string experiment;
  std::string config_path;
  std::string family = "icosphere";
  int level = 2;
  std::string method = "lsfem";
  double tau = 0.0;      // 0 = preset default
  double tfinal = 0.0;   // 0 = preset default
  double tol = 1e-10;
  int max_iter = 10000;
  int stride = 0;
  std::string out_dir;
};

surfrd::RunRequest build_request(const RunFlags& flags) {
  surfrd::RunRequest req;
  if (!flags.config_path.empty()) {
    const surfrd::TomlConfig cfg = surfrd::TomlConfig::parse_file(flags.config_path);
    req.preset = surfrd::preset_from_config(cfg);
    req.family = surfrd::mesh_family_from_string(
        cfg.string("mesh", "kind", flags.family));
    req.level = static_cast<int>(cfg.number("mesh", "level", flags.level));
    req.method = method_from_string(cfg.string("time", "method", flags.method));
    req.solver_tol = cfg.number("solver", "tol", flags.tol);
    req.solver_max_iter = static_cast<int>(cfg.number("solver", "max_iter", flags.max_iter));
    req.snapshot_stride = static_cast<int>(cfg.number("output", "snapshot_stride", flags.stride));
    req.out_dir = cfg.string("output", "dir", flags.out_dir);
  } else {
    if (flags.experiment.empty()) {
      throw surfrd::ConfigError("run needs --experiment or --config");
    }
    req.preset = surfrd::make_preset(flags.experiment);
    req.family = surfrd::mesh_family_from_string(flags.family);
    req.level = flags.level;
    req.method = method_from_string(flags.method);
    req.solver_tol = flags.tol;
    req.solver_max_iter = flags.max_iter;
    req.snapshot_stride = flags.stride;
    req.out_dir = flags.out_dir;
  }
  // Command-line values override config file entries when given explicitly.
  if (flags.tau > 0.0) req.tau_override = flags.tau;
  if (flags.tfinal > 0.0) req.t_final_override = flags.tfinal;
  return req;
}

int cmd_run(const RunFlags& flags) {
  const surfrd::RunRequest req = build_request(flags);
  surfrd::RunOutcome out;
  try {
    out = surfrd::run_experiment(req);
  } catch (const surfrd::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  std::cout << "run " << req.preset.id << " level " << out.level << " ("
            << (req.method == surfrd::MassMode::lumped ? "lsfem" : "sfem") << "): N = "
            << out.n_nodes << ", h = " << surfrd::sci(out.h) << ", tau = " << surfrd::sci(out.tau)
            << ", status = " << surfrd::status_string(out.result) << "\n";
  for (int k = 0; k < out.result.final_state.n_components; ++k) {
    std::cout << "  " << surfrd::vtk_component_name(k, out.result.final_state.n_components)
              << " in [" << surfrd::sci(out.result.window_min[k]) << ", "
              << surfrd::sci(out.result.window_max[k]) << "] over [tau, T]\n";
  }
  if (out.linf_error) {
    std::cout << "  Linf-L2 error vs exact interpolant: " << surfrd::sci(*out.linf_error) << "\n";
  }
  if (out.region) {
    if (out.region->violated) {
      std::cout << "  region: VIOLATED";
      if (out.region->first_violation.step >= 0) {
        std::cout << " first at step " << out.region->first_violation.step << ", node "
                  << out.region->first_violation.node << ", component "
                  << out.region->first_violation.component << ", value "
                  << surfrd::sci(out.region->first_violation.value);
      }
      std::cout << "\n";
    } else {
      std::cout << "  region: preserved\n";
    }
  }
  if (out.result.status == surfrd::RunStatus::blow_up) {
    std::cout << "  blow-up detected at step " << out.result.blow_up_step << "\n";
    return kExitBlowUp;
  }
  return kExitOk;
}

int cmd_sweep(const RunFlags& flags, const std::string& levels) {
  const auto dots = levels.find("..");
  if (dots == std::string::npos) {
    throw surfrd::ConfigError("--levels expects the form A..B");
  }
  int level_begin = 0, level_end = 0;
  try {
    level_begin = std::stoi(levels.substr(0, dots));
    level_end = std::stoi(levels.substr(dots + 2));
  } catch (const std::exception&) {
    throw surfrd::ConfigError("--levels expects the form A..B with integers");
  }
  if (level_end - level_begin + 1 < 2) {
    throw surfrd::ConfigError("sweep needs at least two levels");
  }
  surfrd::RunRequest base = build_request(flags);
  const surfrd::SweepResult sweep = surfrd::sweep_experiment(base, level_begin, level_end);
  if (!base.out_dir.empty()) {
    std::filesystem::create_directories(base.out_dir);
    const std::string path = (std::filesystem::path(base.out_dir) / "table.csv").string();
    surfrd::write_sweep_csv(sweep, base.preset.model.r, path);
    std::cout << "wrote " << path << "\n";
  }
  for (const surfrd::SweepRow& row : sweep.rows) {
    std::cout << "  level " << row.level << ": N = " << row.n_nodes << ", h = "
              << surfrd::sci(row.h);
    if (row.error) std::cout << ", error = " << surfrd::sci(*row.error);
    if (row.rate) std::cout << ", rate = " << surfrd::sci(*row.rate);
    std::cout << ", status = " << row.status << "\n";
  }
  return kExitOk;
}

int cmd_verify(int level) {
  const surfrd::SurfaceMesh mesh = surfrd::generate_icosphere(level);
  const surfrd::FemOperators ops = surfrd::assemble_operators(mesh);
  const surfrd::DelaunayReport angle = surfrd::check_angle_condition(mesh);
  std::cout << "icosphere level " << level << ": N = " << mesh.n_vertices() << "\n";
  std::cout << "  angle condition: " << (angle.pass ? "pass" : "FAIL") << " (worst sum "
            << surfrd::sci(angle.worst_sum) << ")\n";
  const std::vector<double> s_values = {1e-3, 1e-1, 1.0};
  const surfrd::MatrixPropertyReport rep =
      surfrd::verify_matrix_properties(mesh, ops, s_values);
  std::cout << "  off-diagonal sign vs angle condition: "
            << (rep.offdiag_sign_matches_angle_condition ? "pass" : "FAIL")
            << " (max off-diagonal " << surfrd::sci(rep.max_offdiag) << ")\n";
  std::cout << "  solve-operator columns nonnegative:   "
            << (rep.columns_nonnegative ? "pass" : "FAIL") << " (min entry "
            << surfrd::sci(rep.min_column_entry) << ")\n";
  std::cout << "  solve-operator row sums equal one:    " << (rep.row_sum_one ? "pass" : "FAIL")
            << " (worst error " << surfrd::sci(rep.worst_row_sum_error) << ")\n";
  return rep.all_pass() && angle.pass ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"P1 surface FEM reaction-diffusion solver on closed triangulated surfaces"};
  app.require_subcommand(1);

  // mesh gen / mesh check
  CLI::App* mesh = app.add_subcommand("mesh", "mesh generation and checking");
  mesh->require_subcommand(1);
  CLI::App* gen = mesh->add_subcommand("gen", "generate a sphere mesh and write it as OFF");
  std::string gen_kind = "icosphere";
  int gen_level = 2;
  int gen_points = 1062;
  std::string gen_out = "mesh.off";
  gen->add_option("--kind", gen_kind, "icosphere or fibonacci");
  gen->add_option("--level", gen_level, "icosphere subdivision level");
  gen->add_option("--points", gen_points, "fibonacci point count");
  gen->add_option("--out", gen_out, "output OFF path")->required();
  CLI::App* check = mesh->add_subcommand("check", "validate an OFF mesh");
  std::string check_path;
  check->add_option("mesh", check_path, "OFF file")->required();

  // run
  CLI::App* run = app.add_subcommand("run", "run one experiment level");
  RunFlags run_flags;
  run->add_option("--experiment", run_flags.experiment, "exp1|exp2|exp3|exp4");
  run->add_option("--config", run_flags.config_path, "TOML config file");
  run->add_option("--family", run_flags.family, "icosphere or fibonacci");
  run->add_option("--level", run_flags.level, "mesh level");
  run->add_option("--method", run_flags.method, "sfem or lsfem");
  run->add_option("--tau", run_flags.tau, "time step (overrides preset)");
  run->add_option("--tfinal", run_flags.tfinal, "final time (overrides preset)");
  run->add_option("--tol", run_flags.tol, "linear solver tolerance");
  run->add_option("--max-iter", run_flags.max_iter, "linear solver iteration cap");
  run->add_option("--stride", run_flags.stride, "snapshot stride (0 = none)");
  run->add_option("--out", run_flags.out_dir, "output directory");

  // sweep
  CLI::App* sweep = app.add_subcommand("sweep", "run an experiment across mesh levels");
  RunFlags sweep_flags;
  std::string sweep_levels;
  sweep->add_option("--experiment", sweep_flags.experiment, "exp1|exp2|exp3|exp4");
  sweep->add_option("--config", sweep_flags.config_path, "TOML config file");
  sweep->add_option("--family", sweep_flags.family, "icosphere or fibonacci");
  sweep->add_option("--levels", sweep_levels, "level range A..B")->required();
  sweep->add_option("--method", sweep_flags.method, "sfem or lsfem");
  sweep->add_option("--tau", sweep_flags.tau, "fixed time step for all levels");
  sweep->add_option("--tfinal", sweep_flags.tfinal, "final time (overrides preset)");
  sweep->add_option("--tol", sweep_flags.tol, "linear solver tolerance");
  sweep->add_option("--max-iter", sweep_flags.max_iter, "linear solver iteration cap");
  sweep->add_option("--out", sweep_flags.out_dir, "output directory");

  // verify
  CLI::App* verify = app.add_subcommand("verify", "angle-condition and matrix-property suite");
  int verify_level = 2;
  verify->add_option("--level", verify_level, "icosphere level (N must stay <= 2000)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_mesh_gen(gen_kind, gen_level, gen_points, gen_out);
    if (check->parsed()) return cmd_mesh_check(check_path);
    if (run->parsed()) return cmd_run(run_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags, sweep_levels);
    if (verify->parsed()) return cmd_verify(verify_level);
  } catch (const surfrd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const surfrd::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
