#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "surfrd/mesh.hpp"
#include "surfrd/sparse.hpp"
#include "surfrd/vec3.hpp"

namespace surfrd {

// r components x N nodal values, component-major.
struct NodalField {
  int n_components = 0;
  int n_nodes = 0;
  std::vector<double> values;

  NodalField() = default;
  NodalField(int r, int n) : n_components(r), n_nodes(n), values(static_cast<std::size_t>(r) * n, 0.0) {}

  double& operator()(int k, int i) { return values[static_cast<std::size_t>(k) * n_nodes + i]; }
  double operator()(int k, int i) const { return values[static_cast<std::size_t>(k) * n_nodes + i]; }

  std::span<double> component(int k) {
    return {values.data() + static_cast<std::size_t>(k) * n_nodes, static_cast<std::size_t>(n_nodes)};
  }
  std::span<const double> component(int k) const {
    return {values.data() + static_cast<std::size_t>(k) * n_nodes, static_cast<std::size_t>(n_nodes)};
  }
};

// Constant in-plane gradients of the three P1 hat functions on one triangle.
// Each gradient is orthogonal to its opposite edge and the three sum to zero.
inline std::array<Vec3, 3> local_basis_gradients(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  const Vec3 n = cross(p1 - p0, p2 - p0);
  const double double_area = norm(n);
  if (double_area < 2.0 * kDegenerateAreaThreshold) {
    throw std::invalid_argument("local_basis_gradients: degenerate triangle");
  }
  const Vec3 unit_n = n / double_area;
  return {
      cross(unit_n, p2 - p1) / double_area,
      cross(unit_n, p0 - p2) / double_area,
      cross(unit_n, p1 - p0) / double_area,
  };
}

// a_ij = sum over triangles of area * (grad chi_i . grad chi_j). Symmetric,
// row sums vanish on closed meshes.
inline CsrMatrix assemble_stiffness(const SurfaceMesh& mesh) {
  std::vector<Coord> coords;
  coords.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 9);
  for (const Triangle& tri : mesh.triangles()) {
    const Vec3& p0 = mesh.vertices()[tri.v[0]];
    const Vec3& p1 = mesh.vertices()[tri.v[1]];
    const Vec3& p2 = mesh.vertices()[tri.v[2]];
    const auto grads = local_basis_gradients(p0, p1, p2);
    const double area = triangle_area(p0, p1, p2);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        coords.push_back({tri.v[a], tri.v[b], area * dot(grads[a], grads[b])});
      }
    }
  }
  return csr_from_coords(mesh.n_vertices(), mesh.n_vertices(), std::move(coords));
}

// Lumped mass: diagonal with one third of the incident triangle area per
// vertex (the vertex quadrature is exact for the piecewise linear integrand;
// cross terms vanish at every node).
inline DiagMatrix assemble_lumped_mass(const SurfaceMesh& mesh) {
  DiagMatrix m;
  m.diag.assign(mesh.n_vertices(), 0.0);
  for (const Triangle& tri : mesh.triangles()) {
    const double third = triangle_area(mesh.vertices()[tri.v[0]], mesh.vertices()[tri.v[1]],
                                       mesh.vertices()[tri.v[2]]) / 3.0;
    for (int a = 0; a < 3; ++a) m.diag[tri.v[a]] += third;
  }
  return m;
}

// Consistent mass: local matrix (area/12) * [[2,1,1],[1,2,1],[1,1,2]].
inline CsrMatrix assemble_consistent_mass(const SurfaceMesh& mesh) {
  std::vector<Coord> coords;
  coords.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 9);
  for (const Triangle& tri : mesh.triangles()) {
    const double w = triangle_area(mesh.vertices()[tri.v[0]], mesh.vertices()[tri.v[1]],
                                   mesh.vertices()[tri.v[2]]) / 12.0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        coords.push_back({tri.v[a], tri.v[b], a == b ? 2.0 * w : w});
      }
    }
  }
  return csr_from_coords(mesh.n_vertices(), mesh.n_vertices(), std::move(coords));
}

struct FemOperators {
  CsrMatrix stiffness;
  DiagMatrix lumped_mass;
  CsrMatrix consistent_mass;
  double total_area = 0.0;
};

inline FemOperators assemble_operators(const SurfaceMesh& mesh) {
  return {assemble_stiffness(mesh), assemble_lumped_mass(mesh),
          assemble_consistent_mass(mesh), surface_area(mesh)};
}

using ScalarFunction = std::function<double(const Vec3&)>;
using ScalarTimeFunction = std::function<double(const Vec3&, double)>;

inline NodalField interpolate(const SurfaceMesh& mesh, std::span<const ScalarFunction> comps) {
  NodalField f(static_cast<int>(comps.size()), mesh.n_vertices());
  for (int k = 0; k < f.n_components; ++k) {
    for (int i = 0; i < f.n_nodes; ++i) {
      const double v = comps[k](mesh.vertices()[i]);
      if (!std::isfinite(v)) {
        throw std::invalid_argument("interpolate: non-finite sample at node " + std::to_string(i));
      }
      f(k, i) = v;
    }
  }
  return f;
}

inline NodalField interpolate(const SurfaceMesh& mesh, const ScalarFunction& g) {
  return interpolate(mesh, std::span<const ScalarFunction>(&g, 1));
}

inline NodalField interpolate(const SurfaceMesh& mesh,
                              std::span<const ScalarTimeFunction> comps, double t) {
  NodalField f(static_cast<int>(comps.size()), mesh.n_vertices());
  for (int k = 0; k < f.n_components; ++k) {
    for (int i = 0; i < f.n_nodes; ++i) {
      const double v = comps[k](mesh.vertices()[i], t);
      if (!std::isfinite(v)) {
        throw std::invalid_argument("interpolate: non-finite sample at node " + std::to_string(i));
      }
      f(k, i) = v;
    }
  }
  return f;
}

// Tensor-product norms: sqrt(sum_k xi_k' M xi_k) with M the lumped or the
// consistent mass matrix.
inline double lumped_norm(const DiagMatrix& lumped_mass, const NodalField& u) {
  if (lumped_mass.size() != u.n_nodes) {
    throw std::invalid_argument("lumped_norm: dimension mismatch");
  }
  double s = 0.0;
  for (int k = 0; k < u.n_components; ++k) {
    const auto xi = u.component(k);
    for (int i = 0; i < u.n_nodes; ++i) s += lumped_mass.diag[i] * xi[i] * xi[i];
  }
  return std::sqrt(s);
}

inline double l2_norm(const CsrMatrix& consistent_mass, const NodalField& u) {
  if (consistent_mass.n_rows != u.n_nodes) {
    throw std::invalid_argument("l2_norm: dimension mismatch");
  }
  double s = 0.0;
  std::vector<double> tmp(u.n_nodes);
  for (int k = 0; k < u.n_components; ++k) {
    const auto xi = u.component(k);
    matvec(consistent_mass, xi, tmp);
    for (int i = 0; i < u.n_nodes; ++i) s += xi[i] * tmp[i];
  }
  return std::sqrt(std::max(0.0, s));
}

}  // namespace surfrd
