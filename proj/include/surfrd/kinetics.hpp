#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "surfrd/vec3.hpp"

namespace surfrd {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Product of intervals in phase space; entries may be infinite.
struct Rectangle {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }

  bool is_finite() const {
    for (int k = 0; k < dim(); ++k) {
      if (!std::isfinite(lo[k]) || !std::isfinite(hi[k])) return false;
    }
    return true;
  }

  bool contains(std::span<const double> u, double tol = 0.0) const {
    for (int k = 0; k < dim(); ++k) {
      if (u[k] < lo[k] - tol || u[k] > hi[k] + tol) return false;
    }
    return true;
  }
};

// Reaction kinetics f = (f_1,...,f_r) with per-component Lipschitz bounds
// valid on `rectangle`. eval must be pure.
struct KineticsModel {
  int r = 1;
  std::string name;
  std::function<void(std::span<const double>, const Vec3&, double, std::span<double>)> eval;
  std::vector<double> lipschitz;  // empty when no bound is supplied
  Rectangle rectangle;            // empty when no rectangle is claimed

  // Set for the scalar decay family so that the sharper scalar time-step
  // bound can be used.
  double decay_beta = -1.0;
  double decay_alpha = 0.0;
};

inline void eval_kinetics(const KineticsModel& model, std::span<const double> u, const Vec3& x,
                          double t, std::span<double> out) {
  model.eval(u, x, t, out);
  for (int k = 0; k < model.r; ++k) {
    if (!std::isfinite(out[k])) {
      throw std::domain_error("eval_kinetics: non-finite reaction value (component " +
                              std::to_string(k) + ")");
    }
  }
}

namespace detail {

inline double signed_power(double u, double alpha) {
  if (alpha == 1.0) return u;
  const double rounded = std::nearbyint(alpha);
  if (rounded == alpha && std::abs(alpha) < 64.0) {
    // Integer exponent: stays defined for negative arguments.
    double p = 1.0;
    for (int i = 0; i < static_cast<int>(rounded); ++i) p *= u;
    return p;
  }
  return std::pow(u, alpha);
}

}  // namespace detail

// f(u) = -beta u^alpha on [0, u_max]; beta = 0 gives the homogeneous heat
// equation.
inline KineticsModel make_semilinear_decay(double beta, double alpha, double u_max = 1.0) {
  if (beta < 0.0 || alpha < 1.0) {
    throw std::invalid_argument("semilinear decay needs beta >= 0 and alpha >= 1");
  }
  KineticsModel m;
  m.r = 1;
  m.name = "semilinear_decay";
  m.decay_beta = beta;
  m.decay_alpha = alpha;
  m.rectangle = {{0.0}, {u_max}};
  m.eval = [beta, alpha](std::span<const double> u, const Vec3&, double, std::span<double> out) {
    out[0] = -beta * detail::signed_power(u[0], alpha);
  };
  return m;
}

inline KineticsModel make_homogeneous_heat() {
  KineticsModel m = make_semilinear_decay(0.0, 1.0);
  m.name = "heat";
  return m;
}

struct RosenzweigMacArthurParams {
  double a = 10.0;
  double b = 1e-2;
  double c = 1.0;
  double d = 1.0;
  double alpha = 1e-3;
  double eps = 1e-7;  // lower bound of the invariant u-interval
};

// Predator-prey kinetics
//   f_1 = a u (1 - u) - b u v / (u + alpha)
//   f_2 = c u v / (u + alpha) - d v
// with invariant rectangle [eps, 1] x [0, a*alpha/(2b)] for c = d and
// 0 < alpha < 1/sqrt(2).
inline KineticsModel make_rosenzweig_macarthur(const RosenzweigMacArthurParams& p) {
  KineticsModel m;
  m.r = 2;
  m.name = "rosenzweig_macarthur";
  m.rectangle = {{p.eps, 0.0}, {1.0, p.a * p.alpha / (2.0 * p.b)}};
  const double sqrt2 = std::sqrt(2.0);
  m.lipschitz = {sqrt2 * (3.0 * p.a + p.b / (2.0 * p.alpha)),
                 sqrt2 * (p.c / (2.0 * p.alpha) + p.d / 2.0)};
  m.eval = [p](std::span<const double> u, const Vec3&, double, std::span<double> out) {
    const double holling = u[0] * u[1] / (u[0] + p.alpha);
    out[0] = p.a * u[0] * (1.0 - u[0]) - p.b * holling;
    out[1] = p.c * holling - p.d * u[1];
  };
  return m;
}

// Forcing that makes u = xy e^{-t}, v = -xyz e^{-t} an exact solution of the
// activator-depleted system with d1 = 1/6, d2 = 1/12 (degree-2 and degree-3
// spherical harmonics have Laplace-Beltrami eigenvalues 6 and 12 on the unit
// sphere, so the diffusion and time-derivative terms cancel).
inline void forced_schnakenberg_forcing(const Vec3& x, double t, double a, double b,
                                        std::span<double> out) {
  const double xy = x.x * x.y;
  const double cubic = xy * xy * xy * x.z;  // x^3 y^3 z
  out[0] = xy * std::exp(-t) + cubic * std::exp(-3.0 * t) - a;
  out[1] = -cubic * std::exp(-3.0 * t) - b;
}

// Activator-depleted kinetics with the manufactured forcing:
//   f_1 = a - u + u^2 v + F_1(x,t)
//   f_2 = b - u^2 v + F_2(x,t)
inline KineticsModel make_forced_schnakenberg(double a, double b) {
  KineticsModel m;
  m.r = 2;
  m.name = "forced_schnakenberg";
  m.eval = [a, b](std::span<const double> u, const Vec3& x, double t, std::span<double> out) {
    double forcing[2];
    forced_schnakenberg_forcing(x, t, a, b, forcing);
    const double uuv = u[0] * u[0] * u[1];
    out[0] = a - u[0] + uuv + forcing[0];
    out[1] = b - uuv + forcing[1];
  };
  return m;
}

struct InwardFluxReport {
  bool strict = false;  // all outward components < 0
  bool weak = false;    // all outward components <= 1e-12
  double worst = -kInfinity;
};

constexpr double kInwardFluxTolerance = 1e-12;

// Samples every face of a finite rectangle on a grid and records the largest
// outward component of f. Kinetics are evaluated at `x`, `t` (irrelevant for
// autonomous models).
inline InwardFluxReport check_inward_flux(const KineticsModel& model, const Rectangle& rect,
                                          int samples_per_face,
                                          const Vec3& x = {0.0, 0.0, 1.0}, double t = 0.0) {
  if (!rect.is_finite()) {
    throw std::invalid_argument("check_inward_flux: rectangle must be finite");
  }
  if (rect.dim() != model.r) {
    throw std::invalid_argument("check_inward_flux: rectangle dimension mismatch");
  }
  if (samples_per_face < 1) {
    throw std::invalid_argument("check_inward_flux: need at least one sample per face");
  }
  const int r = model.r;
  std::vector<double> u(r), f(r);
  InwardFluxReport rep;

  // Enumerate grid points on the face {u_k = bound} by sweeping the other
  // components; total points per face ~= samples_per_face.
  int per_axis = samples_per_face;
  if (r > 1) {
    per_axis = std::max(2, static_cast<int>(std::round(
                               std::pow(static_cast<double>(samples_per_face),
                                        1.0 / static_cast<double>(r - 1)))));
  }
  std::vector<int> idx(r, 0);
  for (int k = 0; k < r; ++k) {
    for (int side = 0; side < 2; ++side) {
      const double bound = side == 0 ? rect.lo[k] : rect.hi[k];
      const double sign = side == 0 ? -1.0 : 1.0;  // outward normal component
      std::fill(idx.begin(), idx.end(), 0);
      while (true) {
        for (int j = 0; j < r; ++j) {
          if (j == k) {
            u[j] = bound;
          } else {
            const double s = r == 1 ? 0.0
                                    : static_cast<double>(idx[j]) /
                                          static_cast<double>(per_axis - 1);
            u[j] = rect.lo[j] + s * (rect.hi[j] - rect.lo[j]);
          }
        }
        eval_kinetics(model, u, x, t, f);
        rep.worst = std::max(rep.worst, sign * f[k]);
        // Advance the multi-index over the face's free axes.
        int j = 0;
        for (; j < r; ++j) {
          if (j == k) continue;
          if (++idx[j] < per_axis) break;
          idx[j] = 0;
        }
        if (j == r || r == 1) break;
      }
    }
  }
  rep.strict = rep.worst < 0.0;
  rep.weak = rep.worst <= kInwardFluxTolerance;
  return rep;
}

// Largest stable IMEX Euler step: 1/max_k L_k for systems, the sharper
// (u_max)^{1-alpha}/beta for the scalar decay family, +infinity for the
// homogeneous heat equation.
inline double max_stable_timestep(const KineticsModel& model) {
  if (model.decay_beta >= 0.0) {
    if (model.decay_beta == 0.0) return kInfinity;
    const double u_max = model.rectangle.hi.empty() ? 1.0 : model.rectangle.hi[0];
    return std::pow(u_max, 1.0 - model.decay_alpha) / model.decay_beta;
  }
  if (model.lipschitz.empty()) {
    throw std::invalid_argument("max_stable_timestep: model has no Lipschitz data");
  }
  double l_max = 0.0;
  for (double l : model.lipschitz) l_max = std::max(l_max, l);
  if (l_max == 0.0) return kInfinity;
  return 1.0 / l_max;
}

}  // namespace surfrd
