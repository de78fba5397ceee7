#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "surfrd/assembly.hpp"
#include "surfrd/kinetics.hpp"
#include "surfrd/mesh.hpp"
#include "surfrd/sparse.hpp"
#include "surfrd/timestepper.hpp"

namespace surfrd {

struct ExactSolution {
  std::string name;
  std::vector<ScalarTimeFunction> components;

  int r() const { return static_cast<int>(components.size()); }
};

inline NodalField interpolate(const SurfaceMesh& mesh, const ExactSolution& exact, double t) {
  return interpolate(mesh, std::span<const ScalarTimeFunction>(exact.components), t);
}

// L2(Gamma_h) distance (consistent-mass norm) between a state and the nodal
// interpolant of the exact solution at time t.
inline double l2_error_at(const NodalField& state, const SurfaceMesh& mesh,
                          const FemOperators& ops, const ExactSolution& exact, double t) {
  NodalField diff = interpolate(mesh, exact, t);
  for (std::size_t i = 0; i < diff.values.size(); ++i) {
    diff.values[i] = state.values[i] - diff.values[i];
  }
  return l2_norm(ops.consistent_mass, diff);
}

// Online max-over-time L2 error; pass observe() as the run observer to avoid
// storing per-step snapshots.
class ErrorTracker {
 public:
  ErrorTracker(const SurfaceMesh& mesh, const FemOperators& ops, const ExactSolution& exact)
      : mesh_(mesh), ops_(ops), exact_(exact) {}

  void observe(int /*step*/, double time, const NodalField& state) {
    max_error_ = std::max(max_error_, l2_error_at(state, mesh_, ops_, exact_, time));
  }

  StepObserver observer() {
    return [this](int step, double time, const NodalField& state) {
      observe(step, time, state);
    };
  }

  double max_error() const { return max_error_; }

 private:
  const SurfaceMesh& mesh_;
  const FemOperators& ops_;
  const ExactSolution& exact_;
  double max_error_ = 0.0;
};

// Max over stored snapshots of the L2 distance to the exact interpolant.
// Requires snapshots at every step (stride 1).
inline double linf_l2_error(const SimulationResult& result, const ExactSolution& exact,
                            const SurfaceMesh& mesh, const FemOperators& ops) {
  if (result.snapshots.empty()) {
    throw std::invalid_argument("linf_l2_error: run has no snapshots (use stride 1)");
  }
  for (std::size_t s = 0; s + 1 < result.snapshot_steps.size(); ++s) {
    if (result.snapshot_steps[s + 1] != result.snapshot_steps[s] + 1) {
      throw std::invalid_argument("linf_l2_error: snapshots must be stored at every step");
    }
  }
  double err = 0.0;
  for (std::size_t s = 0; s < result.snapshots.size(); ++s) {
    const double t = result.snapshot_steps[s] == 0
                         ? 0.0
                         : result.records[result.snapshot_steps[s] - 1].time;
    err = std::max(err, l2_error_at(result.snapshots[s], mesh, ops, exact, t));
  }
  return err;
}

struct ConvergenceRow {
  int level = 0;
  int n_nodes = 0;
  double h = 0.0;
  double error = 0.0;
  double rate = 0.0;  // meaningless in row 0
  bool has_rate = false;
};

struct ConvergenceTable {
  std::string method;
  std::vector<ConvergenceRow> rows;
};

// rate_i = log(err_{i-1}/err_i) / log(h_{i-1}/h_i)
inline ConvergenceTable convergence_rates(std::span<const double> errors,
                                          std::span<const double> hs) {
  if (errors.size() != hs.size() || errors.size() < 2) {
    throw std::invalid_argument("convergence_rates: need matching sequences of length >= 2");
  }
  ConvergenceTable table;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !(hs[i] > 0.0)) {
      throw std::invalid_argument("convergence_rates: entries must be positive");
    }
    ConvergenceRow row;
    row.level = static_cast<int>(i);
    row.h = hs[i];
    row.error = errors[i];
    if (i > 0) {
      row.rate = std::log(errors[i - 1] / errors[i]) / std::log(hs[i - 1] / hs[i]);
      row.has_rate = true;
    }
    table.rows.push_back(row);
  }
  return table;
}

struct RegionViolation {
  int step = -1;
  int node = -1;
  int component = -1;
  double value = 0.0;
};

struct RegionReport {
  std::vector<double> min_value;  // over the reporting window, per component
  std::vector<double> max_value;
  bool violated = false;
  RegionViolation first_violation;
  bool blew_up = false;
};

constexpr double kRegionTolerance = 1e-12;

// Extrema over the window [tau, T] (steps >= 1) plus the first exit beyond
// the rectangle by more than the tolerance.
inline RegionReport region_violation_scan(const SimulationResult& result, const Rectangle& rect) {
  const int r = rect.dim();
  RegionReport rep;
  rep.min_value = result.window_min;
  rep.max_value = result.window_max;
  rep.blew_up = result.status == RunStatus::blow_up;
  for (const StepRecord& rec : result.records) {
    for (int k = 0; k < r; ++k) {
      if (rec.min_value[k] < rect.lo[k] - kRegionTolerance) {
        rep.violated = true;
        rep.first_violation = {rec.step, rec.argmin[k], k, rec.min_value[k]};
        return rep;
      }
      if (rec.max_value[k] > rect.hi[k] + kRegionTolerance) {
        rep.violated = true;
        rep.first_violation = {rec.step, rec.argmax[k], k, rec.max_value[k]};
        return rep;
      }
    }
  }
  // A blow-up is itself an exit from any finite rectangle even if every
  // recorded (finite) extremum stayed inside.
  if (rep.blew_up) rep.violated = true;
  return rep;
}

struct MatrixPropertyReport {
  bool offdiag_sign_matches_angle_condition = true;
  bool angle_condition_pass = true;
  double max_offdiag = 0.0;           // largest off-diagonal stiffness entry
  bool columns_nonnegative = true;    // (M + sA)^{-1} M >= 0 for all tested s
  double min_column_entry = 0.0;
  bool row_sum_one = true;            // (M + sA)^{-1} M 1 = 1
  double worst_row_sum_error = 0.0;

  bool all_pass() const {
    return offdiag_sign_matches_angle_condition && columns_nonnegative && row_sum_one;
  }
};

constexpr double kOffdiagTolerance = 1e-13;
constexpr double kColumnNonnegTolerance = 1e-12;
constexpr double kRowSumTolerance = 1e-9;

// Checks, for each s, that (i) the off-diagonal stiffness sign pattern matches
// the angle-condition verdict, (ii) every column of (M + sA)^{-1} M is
// entrywise nonnegative, (iii) (M + sA)^{-1} M 1 = 1.
inline MatrixPropertyReport verify_matrix_properties(const SurfaceMesh& mesh,
                                                     const FemOperators& ops,
                                                     std::span<const double> s_values,
                                                     const CgOptions& solve_opt = {1e-13, 20000,
                                                                                   Precond::jacobi}) {
  if (mesh.n_vertices() > 4096) {
    throw std::invalid_argument("verify_matrix_properties: mesh too large (N <= 4096)");
  }
  MatrixPropertyReport rep;
  const int n = mesh.n_vertices();

  const DelaunayReport angle = check_angle_condition(mesh);
  rep.angle_condition_pass = angle.pass;
  double max_offdiag = -kInfinity;
  for (int i = 0; i < n; ++i) {
    for (int k = ops.stiffness.row_offsets[i]; k < ops.stiffness.row_offsets[i + 1]; ++k) {
      if (ops.stiffness.col_indices[k] != i) {
        max_offdiag = std::max(max_offdiag, ops.stiffness.values[k]);
      }
    }
  }
  rep.max_offdiag = max_offdiag;
  const bool offdiag_nonpositive = max_offdiag <= kOffdiagTolerance;
  rep.offdiag_sign_matches_angle_condition = (offdiag_nonpositive == angle.pass);

  rep.min_column_entry = kInfinity;
  std::vector<double> ones(n, 1.0);
  for (double s : s_values) {
    for (int j = 0; j < n; ++j) {
      const std::vector<double> col =
          solve_operator_column_check(ops.lumped_mass, ops.stiffness, s, j, solve_opt);
      for (double v : col) rep.min_column_entry = std::min(rep.min_column_entry, v);
    }
    // One extra solve with b = M 1 checks the row-sum-one identity (cold
    // start, so the solve actually exercises the operator).
    std::vector<double> b(n), x(n, 0.0);
    for (int i = 0; i < n; ++i) b[i] = ops.lumped_mass.diag[i];
    SpdOperator op{&ops.stiffness, s, &ops.lumped_mass};
    cg_solve(op, b, x, solve_opt);
    for (int i = 0; i < n; ++i) {
      rep.worst_row_sum_error = std::max(rep.worst_row_sum_error, std::abs(x[i] - 1.0));
    }
  }
  rep.columns_nonnegative = rep.min_column_entry >= -kColumnNonnegTolerance;
  rep.row_sum_one = rep.worst_row_sum_error <= kRowSumTolerance;
  return rep;
}

// (xi' A xi) / (xi' M xi): discrete Laplace-Beltrami eigenvalue estimate.
inline double rayleigh_quotient(const FemOperators& ops, std::span<const double> xi) {
  const int n = ops.stiffness.n_rows;
  if (static_cast<int>(xi.size()) != n) {
    throw std::invalid_argument("rayleigh_quotient: dimension mismatch");
  }
  std::vector<double> tmp(n);
  matvec(ops.stiffness, xi, tmp);
  double num = 0.0;
  for (int i = 0; i < n; ++i) num += xi[i] * tmp[i];
  matvec(ops.consistent_mass, xi, tmp);
  double den = 0.0;
  for (int i = 0; i < n; ++i) den += xi[i] * tmp[i];
  if (den == 0.0) throw std::invalid_argument("rayleigh_quotient: zero vector");
  return num / den;
}

}  // namespace surfrd
