#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "surfrd/analysis.hpp"
#include "surfrd/assembly.hpp"
#include "surfrd/config.hpp"
#include "surfrd/kinetics.hpp"
#include "surfrd/mesh.hpp"
#include "surfrd/mesh_generators.hpp"
#include "surfrd/timestepper.hpp"
#include "surfrd/vtk_io.hpp"

namespace surfrd {

// Scientific notation with 6 significant digits, the table format used
// throughout the CSV outputs.
inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5e", v);
  return buf;
}

enum class MeshFamily { icosphere, fibonacci };

inline MeshFamily mesh_family_from_string(const std::string& s) {
  if (s == "icosphere") return MeshFamily::icosphere;
  if (s == "fibonacci") return MeshFamily::fibonacci;
  throw ConfigError("unknown mesh family '" + s + "'");
}

// The fibonacci ladder doubles the node count per level (mesh size shrinks by
// about sqrt(2)); the icosphere ladder is plain subdivision (h halves).
inline SurfaceMesh make_level_mesh(MeshFamily family, int level) {
  if (family == MeshFamily::icosphere) return generate_icosphere(level);
  if (level < 0 || level > 10) {
    throw std::invalid_argument("fibonacci level must be in [0, 10]");
  }
  return generate_fibonacci_delaunay(126 << level);
}

enum class TauRule { proportional_h2, ladder_by_level, fixed };

struct ExperimentPreset {
  std::string id;
  KineticsModel model;
  std::vector<double> diffusion;
  std::vector<ScalarFunction> initial;
  std::optional<ExactSolution> exact;
  std::optional<Rectangle> rectangle;
  double t_final = 1.0;
  TauRule tau_rule = TauRule::fixed;
  double tau0 = 1e-3;       // ladder/fixed base step
  double h0 = 4.013e-01;    // reference mesh size for the tau ~ h^2 rule
};

inline double preset_tau(const ExperimentPreset& p, int level, double h) {
  double tau = p.tau0;
  switch (p.tau_rule) {
    case TauRule::proportional_h2:
      tau = p.tau0 * (h / p.h0) * (h / p.h0);
      break;
    case TauRule::ladder_by_level:
      tau = p.tau0 * std::pow(2.0, -level);
      break;
    case TauRule::fixed:
      break;
  }
  return std::min(tau, p.t_final);
}

// Spherical cap bump of radius `r_cap` around the north pole:
// base + (peak - base) * sqrt(1 - (x^2+y^2)/r^2) inside, base elsewhere.
inline ScalarFunction cap_datum(double r_cap, double base, double peak) {
  const double r2 = r_cap * r_cap;
  return [r2, base, peak](const Vec3& p) {
    const double rho2 = p.x * p.x + p.y * p.y;
    if (rho2 <= r2 && p.z > 0.0) {
      return base + (peak - base) * std::sqrt(1.0 - rho2 / r2);
    }
    return base;
  };
}

// Linear decay on the sphere with exact solution xyz e^{-t}.
inline ExperimentPreset make_exp1_preset(double d = 1.0 / 24.0, double beta = 0.5) {
  ExperimentPreset p;
  p.id = "exp1";
  p.model = make_semilinear_decay(beta, 1.0);
  p.diffusion = {d};
  p.initial = {[](const Vec3& x) { return x.x * x.y * x.z; }};
  p.exact = ExactSolution{
      "xyz_decay",
      {[](const Vec3& x, double t) { return x.x * x.y * x.z * std::exp(-t); }}};
  p.t_final = 1.0;
  p.tau_rule = TauRule::proportional_h2;
  p.tau0 = 0.2048;
  return p;
}

// Homogeneous heat equation with a compactly supported cap datum; the
// solution must stay in [0, 1].
inline ExperimentPreset make_exp2_preset(double d = 0.1) {
  ExperimentPreset p;
  p.id = "exp2";
  p.model = make_homogeneous_heat();
  p.diffusion = {d};
  p.initial = {cap_datum(0.2, 0.0, 1.0)};
  p.rectangle = Rectangle{{0.0}, {1.0}};
  p.t_final = 1.0;
  p.tau_rule = TauRule::ladder_by_level;
  p.tau0 = 0.2048;
  return p;
}

// Predator-prey system whose rectangle [eps, 1] x [0, a*alpha/(2b)] is
// invariant; run with a fixed step below the stability bound.
inline ExperimentPreset make_exp3_preset(const RosenzweigMacArthurParams& rm = {},
                                         double r_cap = 0.2) {
  ExperimentPreset p;
  p.id = "exp3";
  p.model = make_rosenzweig_macarthur(rm);
  p.diffusion = {1e-2, 1e-2};
  const double v0 = rm.a * rm.alpha / (2.0 * rm.b);
  p.initial = {cap_datum(r_cap, rm.eps, 1.0), [v0](const Vec3&) { return v0; }};
  p.rectangle = p.model.rectangle;
  p.t_final = 5.0;
  p.tau_rule = TauRule::fixed;
  p.tau0 = 1e-3;
  return p;
}

// Activator-depleted kinetics with manufactured forcing; exact solution
// (xy e^{-t}, -xyz e^{-t}).
inline ExperimentPreset make_exp4_preset(double a = 1.0, double b = 1.0) {
  ExperimentPreset p;
  p.id = "exp4";
  p.model = make_forced_schnakenberg(a, b);
  p.diffusion = {1.0 / 6.0, 1.0 / 12.0};
  p.initial = {[](const Vec3& x) { return x.x * x.y; },
               [](const Vec3& x) { return -x.x * x.y * x.z; }};
  p.exact = ExactSolution{
      "schnakenberg_pair",
      {[](const Vec3& x, double t) { return x.x * x.y * std::exp(-t); },
       [](const Vec3& x, double t) { return -x.x * x.y * x.z * std::exp(-t); }}};
  p.t_final = 1.0;
  p.tau_rule = TauRule::proportional_h2;
  p.tau0 = 0.2048;
  return p;
}

inline ExperimentPreset make_preset(const std::string& id) {
  if (id == "exp1") return make_exp1_preset();
  if (id == "exp2") return make_exp2_preset();
  if (id == "exp3") return make_exp3_preset();
  if (id == "exp4") return make_exp4_preset();
  throw ConfigError("unknown experiment '" + id + "'");
}

// Builds a preset from a TOML config: [model] selects the experiment and may
// override its parameters; [time] may override tau / t_final.
inline ExperimentPreset preset_from_config(const TomlConfig& cfg) {
  const std::string id = cfg.string("model", "experiment", "");
  if (id.empty()) throw ConfigError("config needs [model] experiment = \"exp1..exp4\"");
  ExperimentPreset p;
  if (id == "exp1") {
    p = make_exp1_preset(cfg.number("model", "d", 1.0 / 24.0),
                         cfg.number("model", "beta", 0.5));
  } else if (id == "exp2") {
    p = make_exp2_preset(cfg.number("model", "d", 0.1));
  } else if (id == "exp3") {
    RosenzweigMacArthurParams rm;
    rm.a = cfg.number("model", "a", rm.a);
    rm.b = cfg.number("model", "b", rm.b);
    rm.c = cfg.number("model", "c", rm.c);
    rm.d = cfg.number("model", "d", rm.d);
    rm.alpha = cfg.number("model", "alpha", rm.alpha);
    rm.eps = cfg.number("model", "eps", rm.eps);
    p = make_exp3_preset(rm, cfg.number("model", "r_cap", 0.2));
  } else if (id == "exp4") {
    p = make_exp4_preset(cfg.number("model", "a", 1.0), cfg.number("model", "b", 1.0));
  } else {
    throw ConfigError("unknown experiment '" + id + "'");
  }
  const std::vector<double> diff = cfg.numbers("model", "diffusion", p.diffusion);
  if (diff.size() != p.diffusion.size()) {
    throw ConfigError("config: diffusion needs " + std::to_string(p.diffusion.size()) +
                      " entries");
  }
  p.diffusion = diff;
  if (cfg.has("time", "tau")) {
    p.tau_rule = TauRule::fixed;
    p.tau0 = cfg.number("time", "tau", p.tau0);
  }
  p.t_final = cfg.number("time", "t_final", p.t_final);
  return p;
}

struct RunRequest {
  ExperimentPreset preset;
  MeshFamily family = MeshFamily::icosphere;
  int level = 2;
  MassMode method = MassMode::lumped;
  std::optional<double> tau_override;
  std::optional<double> t_final_override;
  double solver_tol = 1e-10;
  int solver_max_iter = 10000;
  int snapshot_stride = 0;
  std::string out_dir;  // empty = no files
};

struct RunOutcome {
  int level = 0;
  int n_nodes = 0;
  double h = 0.0;
  double tau = 0.0;
  SimulationResult result;
  std::optional<double> linf_error;
  std::optional<RegionReport> region;
};

inline const char* status_string(const SimulationResult& r) {
  return r.status == RunStatus::blow_up ? "blow_up" : "completed";
}

namespace detail {

inline void write_run_files(const RunRequest& req, const SurfaceMesh& mesh,
                            const RunOutcome& out) {
  namespace fs = std::filesystem;
  fs::create_directories(req.out_dir);
  const int r = out.result.final_state.n_components;
  {
    std::ofstream csv(fs::path(req.out_dir) / "run.csv");
    csv << "step,time";
    for (int k = 0; k < r; ++k) {
      const std::string name = vtk_component_name(k, r);
      csv << ",min_" << name << ",max_" << name;
    }
    csv << ",iterations\n";
    for (const StepRecord& rec : out.result.records) {
      csv << rec.step << ',' << sci(rec.time);
      for (int k = 0; k < r; ++k) csv << ',' << sci(rec.min_value[k]) << ',' << sci(rec.max_value[k]);
      csv << ',' << rec.solver_iterations << '\n';
    }
  }
  if (out.linf_error) {
    std::ofstream err(fs::path(req.out_dir) / "error.txt");
    err << sci(*out.linf_error) << '\n';
  }
  if (out.result.status == RunStatus::completed) {
    write_vtk(mesh, out.result.final_state, (fs::path(req.out_dir) / "final.vtk").string());
  }
  for (std::size_t s = 0; s < out.result.snapshots.size(); ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "snap_%06d.vtk", out.result.snapshot_steps[s]);
    write_vtk(mesh, out.result.snapshots[s], (fs::path(req.out_dir) / name).string());
  }
}

}  // namespace detail

// Runs one experiment level end to end. Solver failures propagate as
// SolverFailure; blow-ups are recorded in the outcome, not thrown.
inline RunOutcome run_experiment(const RunRequest& req) {
  const SurfaceMesh mesh = make_level_mesh(req.family, req.level);
  const FemOperators ops = assemble_operators(mesh);

  RunOutcome out;
  out.level = req.level;
  out.n_nodes = mesh.n_vertices();
  out.h = mesh_size(mesh);

  ExperimentPreset preset = req.preset;
  if (req.t_final_override) preset.t_final = *req.t_final_override;
  SimulationConfig config;
  config.diffusion = preset.diffusion;
  config.t_final = preset.t_final;
  config.tau = req.tau_override ? *req.tau_override : preset_tau(preset, req.level, out.h);
  config.mass_mode = req.method;
  config.solver_tol = req.solver_tol;
  config.solver_max_iter = req.solver_max_iter;
  config.snapshot_stride = req.snapshot_stride;
  out.tau = config.tau;

  const NodalField u0 = interpolate(mesh, std::span<const ScalarFunction>(preset.initial));

  std::optional<ErrorTracker> tracker;
  StepObserver observer = nullptr;
  if (preset.exact) {
    tracker.emplace(mesh, ops, *preset.exact);
    observer = tracker->observer();
  }

  out.result = imex_euler_run(mesh, ops, preset.model, u0, config, observer);
  if (tracker && out.result.status == RunStatus::completed) {
    out.linf_error = tracker->max_error();
  }
  if (preset.rectangle) {
    out.region = region_violation_scan(out.result, *preset.rectangle);
  }
  if (!req.out_dir.empty()) detail::write_run_files(req, mesh, out);
  return out;
}

struct SweepRow {
  int level = 0;
  int n_nodes = 0;
  double h = 0.0;
  double tau = 0.0;
  std::optional<double> error;
  std::optional<double> rate;
  std::vector<double> min_value;
  std::vector<double> max_value;
  std::string status = "completed";
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool is_convergence = false;  // error/rate columns vs extrema columns
};

inline int worker_cap() {
  if (const char* env = std::getenv("SURF_RD_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs the preset across [level_begin, level_end]; level failures are
// recorded in their row and the sweep continues.
inline SweepResult sweep_experiment(const RunRequest& base, int level_begin, int level_end) {
  if (level_end < level_begin || level_end - level_begin + 1 < 2) {
    throw std::invalid_argument("sweep needs at least two levels");
  }
  const int n_levels = level_end - level_begin + 1;
  std::vector<SweepRow> rows(n_levels);

  const int cap = worker_cap();
  std::vector<std::future<void>> pending;
  auto run_level = [&](int idx) {
    RunRequest req = base;
    req.level = level_begin + idx;
    if (!base.out_dir.empty()) {
      req.out_dir = (std::filesystem::path(base.out_dir) /
                     ("level_" + std::to_string(req.level))).string();
    }
    SweepRow& row = rows[idx];
    row.level = req.level;
    try {
      RunOutcome out = run_experiment(req);
      row.n_nodes = out.n_nodes;
      row.h = out.h;
      row.tau = out.tau;
      row.error = out.linf_error;
      row.min_value = out.result.window_min;
      row.max_value = out.result.window_max;
      row.status = status_string(out.result);
    } catch (const SolverFailure&) {
      row.status = "solver_failure";
    }
  };
  for (int idx = 0; idx < n_levels; ++idx) {
    if (static_cast<int>(pending.size()) >= cap) {
      pending.front().get();
      pending.erase(pending.begin());
    }
    pending.push_back(std::async(std::launch::async, run_level, idx));
  }
  for (auto& f : pending) f.get();

  SweepResult result;
  result.rows = std::move(rows);
  result.is_convergence = base.preset.exact.has_value();
  if (result.is_convergence) {
    for (std::size_t i = 1; i < result.rows.size(); ++i) {
      SweepRow& cur = result.rows[i];
      const SweepRow& prev = result.rows[i - 1];
      if (cur.error && prev.error && *cur.error > 0.0 && *prev.error > 0.0) {
        cur.rate = std::log(*prev.error / *cur.error) / std::log(prev.h / cur.h);
      }
    }
  }
  return result;
}

inline void write_sweep_csv(const SweepResult& sweep, int n_components, const std::string& path) {
  std::ofstream csv(path);
  if (!csv) throw std::runtime_error("cannot open " + path + " for writing");
  if (sweep.is_convergence) {
    csv << "i,N,h,error,rate\n";
    for (const SweepRow& row : sweep.rows) {
      csv << row.level << ',' << row.n_nodes << ',' << sci(row.h) << ','
          << (row.error ? sci(*row.error) : row.status) << ','
          << (row.rate ? sci(*row.rate) : "-") << '\n';
    }
  } else {
    csv << "i,N,h";
    for (int k = 0; k < n_components; ++k) {
      const std::string name = vtk_component_name(k, n_components);
      csv << ",min_" << name << ",max_" << name;
    }
    csv << ",status\n";
    for (const SweepRow& row : sweep.rows) {
      csv << row.level << ',' << row.n_nodes << ',' << sci(row.h);
      for (int k = 0; k < n_components; ++k) {
        if (k < static_cast<int>(row.min_value.size()) && row.min_value[k] <= row.max_value[k]) {
          csv << ',' << sci(row.min_value[k]) << ',' << sci(row.max_value[k]);
        } else {
          csv << ",-,-";
        }
      }
      csv << ',' << row.status << '\n';
    }
  }
}

}  // namespace surfrd
