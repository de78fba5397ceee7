#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "surfrd/assembly.hpp"
#include "surfrd/kinetics.hpp"
#include "surfrd/mesh.hpp"
#include "surfrd/sparse.hpp"

namespace surfrd {

enum class MassMode { lumped, consistent };

struct SimulationConfig {
  std::vector<double> diffusion;  // d_k, one per component
  double tau = 1e-3;
  double t_final = 1.0;
  MassMode mass_mode = MassMode::lumped;
  double solver_tol = 1e-10;
  int solver_max_iter = 10000;
  int snapshot_stride = 0;  // 0 = no snapshots

  void check(int r) const {
    if (static_cast<int>(diffusion.size()) != r) {
      throw std::invalid_argument("config: diffusion needs one coefficient per component");
    }
    for (double d : diffusion) {
      if (!(d > 0.0)) throw std::invalid_argument("config: diffusion coefficients must be > 0");
    }
    if (!(tau > 0.0)) throw std::invalid_argument("config: tau must be > 0");
    if (!(t_final > 0.0) || tau > t_final) {
      throw std::invalid_argument("config: need 0 < tau <= t_final");
    }
  }
};

struct StepRecord {
  int step = 0;
  double time = 0.0;
  std::vector<double> min_value;  // per component
  std::vector<double> max_value;
  std::vector<int> argmin;
  std::vector<int> argmax;
  int solver_iterations = 0;
};

enum class RunStatus { completed, blow_up };

struct SimulationResult {
  NodalField final_state;
  std::vector<StepRecord> records;  // steps 1..n
  std::vector<NodalField> snapshots;
  std::vector<int> snapshot_steps;
  RunStatus status = RunStatus::completed;
  int blow_up_step = -1;
  std::vector<double> initial_min;  // extrema of u0, per component
  std::vector<double> initial_max;
  // Extrema of all finite values seen over steps >= 1 (the last finite
  // extrema when a run blows up).
  std::vector<double> window_min;
  std::vector<double> window_max;
};

constexpr double kBlowUpThreshold = 1e100;

// Raised internally when a state or reaction value leaves the finite range
// the solver can meaningfully work with.
class BlowUpError : public std::runtime_error {
 public:
  explicit BlowUpError(const std::string& what) : std::runtime_error(what) {}
};

// One linear solve context per component: the constant-in-time operator
// M + d_k tau A together with its Jacobi diagonal.
struct SolveContext {
  SpdOperator op;
  CsrMatrix owned;  // consistent mode stores M + d tau A here
  std::vector<double> jacobi_inverse_diag;
};

class ImexEulerStepper {
 public:
  ImexEulerStepper(const SurfaceMesh& mesh, const FemOperators& ops, const KineticsModel& model,
                   const SimulationConfig& config)
      : mesh_(mesh), ops_(ops), model_(model), config_(config) {
    config.check(model.r);
    contexts_ = factor_cache(ops, config.diffusion, config.tau, config.mass_mode);
  }

  // Per-component contexts for the matrices M + d_k tau A; reusable across
  // all steps of a run.
  static std::vector<SolveContext> factor_cache(const FemOperators& ops,
                                                std::span<const double> diffusion, double tau,
                                                MassMode mode) {
    std::vector<SolveContext> contexts(diffusion.size());
    for (std::size_t k = 0; k < diffusion.size(); ++k) {
      SolveContext& ctx = contexts[k];
      if (mode == MassMode::lumped) {
        ctx.op = SpdOperator{&ops.stiffness, diffusion[k] * tau, &ops.lumped_mass};
      } else {
        ctx.owned = csr_add(1.0, ops.consistent_mass, diffusion[k] * tau, ops.stiffness);
        ctx.op = SpdOperator{&ctx.owned, 1.0, nullptr};
      }
      ctx.jacobi_inverse_diag = ctx.op.diagonal();
      for (double& d : ctx.jacobi_inverse_diag) d = 1.0 / d;
    }
    return contexts;
  }

  // Advances state from time t_n = step * tau to t_{n+1}: for each component
  // solves (M + d_k tau A) xi^{n+1} = M (xi^n + tau f_k(xi^n, x, t_n)).
  // Returns total CG iterations. The state is updated in place.
  int step(NodalField& state, int step_index) const {
    const int n = mesh_.n_vertices();
    const int r = model_.r;
    const double t_n = step_index * config_.tau;
    std::vector<double> u(r), f(r);
    NodalField stage(r, n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < r; ++k) u[k] = state(k, i);
      model_.eval(u, mesh_.vertices()[i], t_n, f);
      for (int k = 0; k < r; ++k) {
        const double v = state(k, i) + config_.tau * f[k];
        if (!std::isfinite(v) || std::abs(v) > kBlowUpThreshold) {
          throw BlowUpError("explicit reaction stage left the finite range at node " +
                            std::to_string(i));
        }
        stage(k, i) = v;
      }
    }
    int iterations = 0;
    std::vector<double> rhs(n);
    CgOptions opt{config_.solver_tol, config_.solver_max_iter, Precond::jacobi};
    for (int k = 0; k < r; ++k) {
      const auto s = stage.component(k);
      if (config_.mass_mode == MassMode::lumped) {
        for (int i = 0; i < n; ++i) rhs[i] = ops_.lumped_mass.diag[i] * s[i];
      } else {
        matvec(ops_.consistent_mass, s, rhs);
      }
      // Warm start from the previous state.
      iterations += cg_solve(contexts_[k].op, rhs, state.component(k), opt).iterations;
    }
    return iterations;
  }

  const std::vector<SolveContext>& contexts() const { return contexts_; }

 private:
  const SurfaceMesh& mesh_;
  const FemOperators& ops_;
  const KineticsModel& model_;
  SimulationConfig config_;
  std::vector<SolveContext> contexts_;
};

// Called after every accepted step (and once for the initial state with
// step = 0).
using StepObserver = std::function<void(int step, double time, const NodalField&)>;

inline int step_count(double t_final, double tau) {
  return static_cast<int>(std::ceil(t_final / tau - 1e-12));
}

// Runs ceil(t_final / tau) IMEX Euler steps, recording per-step extrema.
// A non-finite value or a magnitude above 1e100 stops the run with status
// blow_up; the records then end at the last finite step.
inline SimulationResult imex_euler_run(const SurfaceMesh& mesh, const FemOperators& ops,
                                       const KineticsModel& model, const NodalField& u0,
                                       const SimulationConfig& config,
                                       const StepObserver& observer = nullptr) {
  if (u0.n_components != model.r || u0.n_nodes != mesh.n_vertices()) {
    throw std::invalid_argument("imex_euler_run: initial state has wrong shape");
  }
  ImexEulerStepper stepper(mesh, ops, model, config);
  const int n_steps = step_count(config.t_final, config.tau);
  const int r = model.r;
  const int n = mesh.n_vertices();

  SimulationResult result;
  result.initial_min.assign(r, kInfinity);
  result.initial_max.assign(r, -kInfinity);
  for (int k = 0; k < r; ++k) {
    for (int i = 0; i < n; ++i) {
      result.initial_min[k] = std::min(result.initial_min[k], u0(k, i));
      result.initial_max[k] = std::max(result.initial_max[k], u0(k, i));
    }
  }
  result.window_min.assign(r, kInfinity);
  result.window_max.assign(r, -kInfinity);
  result.records.reserve(n_steps);

  NodalField state = u0;
  if (observer) observer(0, 0.0, state);
  if (config.snapshot_stride > 0) {
    result.snapshots.push_back(state);
    result.snapshot_steps.push_back(0);
  }

  for (int s = 0; s < n_steps; ++s) {
    int iterations = 0;
    try {
      iterations = stepper.step(state, s);
    } catch (const BlowUpError&) {
      result.status = RunStatus::blow_up;
      result.blow_up_step = s + 1;
      break;
    } catch (const SolverFailure& e) {
      throw SolverFailure("step " + std::to_string(s + 1) + ": " + e.what(), e.stats);
    }

    StepRecord rec;
    rec.step = s + 1;
    rec.time = (s + 1) * config.tau;
    rec.min_value.assign(r, kInfinity);
    rec.max_value.assign(r, -kInfinity);
    rec.argmin.assign(r, -1);
    rec.argmax.assign(r, -1);
    rec.solver_iterations = iterations;
    bool finite = true;
    for (int k = 0; k < r; ++k) {
      for (int i = 0; i < n; ++i) {
        const double v = state(k, i);
        if (!std::isfinite(v) || std::abs(v) > kBlowUpThreshold) {
          finite = false;
          continue;
        }
        if (v < rec.min_value[k]) {
          rec.min_value[k] = v;
          rec.argmin[k] = i;
        }
        if (v > rec.max_value[k]) {
          rec.max_value[k] = v;
          rec.argmax[k] = i;
        }
      }
    }
    if (!finite) {
      result.status = RunStatus::blow_up;
      result.blow_up_step = s + 1;
      // Keep the running extrema of whatever finite values this step had.
      for (int k = 0; k < r; ++k) {
        if (rec.argmin[k] >= 0) {
          result.window_min[k] = std::min(result.window_min[k], rec.min_value[k]);
          result.window_max[k] = std::max(result.window_max[k], rec.max_value[k]);
        }
      }
      break;
    }
    for (int k = 0; k < r; ++k) {
      result.window_min[k] = std::min(result.window_min[k], rec.min_value[k]);
      result.window_max[k] = std::max(result.window_max[k], rec.max_value[k]);
    }
    result.records.push_back(std::move(rec));
    if (observer) observer(s + 1, (s + 1) * config.tau, state);
    if (config.snapshot_stride > 0 && ((s + 1) % config.snapshot_stride == 0 || s + 1 == n_steps)) {
      result.snapshots.push_back(state);
      result.snapshot_steps.push_back(s + 1);
    }
  }

  result.final_state = std::move(state);
  return result;
}

}  // namespace surfrd
