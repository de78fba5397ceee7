#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "surfrd/vec3.hpp"

namespace surfrd {

struct Triangle {
  int v[3];
};

// Up to three incident triangles are kept per edge so that validation can
// report non-manifold configurations; a valid closed mesh has exactly two.
struct EdgeIncidence {
  int tris[3] = {-1, -1, -1};
  int count = 0;

  void add(int t) {
    if (count < 3) tris[count] = t;
    ++count;
  }
};

using EdgeMap = std::unordered_map<std::uint64_t, EdgeIncidence>;

inline std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

inline std::pair<int, int> edge_key_vertices(std::uint64_t key) {
  return {static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu)};
}

// Triangulated closed surface. Immutable after construction; the edge map is
// built eagerly and tolerates broken input so that validate() can report on it.
class SurfaceMesh {
 public:
  SurfaceMesh() = default;
  SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
      : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    build_edge_map();
  }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const EdgeMap& edge_map() const { return edge_map_; }

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_triangles() const { return static_cast<int>(triangles_.size()); }

 private:
  void build_edge_map() {
    edge_map_.clear();
    edge_map_.reserve(triangles_.size() * 3 / 2 + 1);
    const int nv = n_vertices();
    for (int t = 0; t < n_triangles(); ++t) {
      const Triangle& tri = triangles_[t];
      for (int e = 0; e < 3; ++e) {
        const int a = tri.v[e];
        const int b = tri.v[(e + 1) % 3];
        if (a < 0 || b < 0 || a >= nv || b >= nv || a == b) continue;
        edge_map_[edge_key(a, b)].add(t);
      }
    }
  }

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  EdgeMap edge_map_;
};

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

inline double triangle_area(const SurfaceMesh& mesh, int t) {
  const Triangle& tri = mesh.triangles()[t];
  return triangle_area(mesh.vertices()[tri.v[0]], mesh.vertices()[tri.v[1]],
                       mesh.vertices()[tri.v[2]]);
}

constexpr double kDegenerateAreaThreshold = 1e-14;

struct ValidationReport {
  bool indices_ok = true;
  bool finite_coords = true;
  bool nondegenerate = true;
  bool closed = true;
  bool oriented = true;
  bool connected = true;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

// Checks closedness, orientation consistency, connectivity and minimum
// triangle area; every failure is listed, none throws.
inline ValidationReport validate(const SurfaceMesh& mesh) {
  ValidationReport rep;
  const int nv = mesh.n_vertices();
  const int nt = mesh.n_triangles();

  for (int i = 0; i < nv; ++i) {
    if (!is_finite(mesh.vertices()[i])) {
      rep.finite_coords = false;
      rep.failures.push_back("vertex " + std::to_string(i) + " has non-finite coordinates");
    }
  }

  for (int t = 0; t < nt; ++t) {
    const Triangle& tri = mesh.triangles()[t];
    bool in_range = true;
    for (int e = 0; e < 3; ++e) {
      if (tri.v[e] < 0 || tri.v[e] >= nv) {
        in_range = false;
        rep.indices_ok = false;
        rep.failures.push_back("triangle " + std::to_string(t) + " references vertex " +
                               std::to_string(tri.v[e]));
      }
    }
    if (!in_range) continue;
    if (tri.v[0] == tri.v[1] || tri.v[1] == tri.v[2] || tri.v[0] == tri.v[2]) {
      rep.indices_ok = false;
      rep.failures.push_back("triangle " + std::to_string(t) + " has repeated vertices");
      continue;
    }
    if (triangle_area(mesh, t) < kDegenerateAreaThreshold) {
      rep.nondegenerate = false;
      rep.failures.push_back("triangle " + std::to_string(t) + " is degenerate (area < 1e-14)");
    }
  }

  // Closedness: every edge must be shared by exactly two triangles.
  for (const auto& [key, inc] : mesh.edge_map()) {
    if (inc.count != 2) {
      rep.closed = false;
      const auto [a, b] = edge_key_vertices(key);
      rep.failures.push_back("edge (" + std::to_string(a) + "," + std::to_string(b) +
                             ") has " + std::to_string(inc.count) + " incident triangles");
    }
  }

  // Orientation: a shared edge must be traversed in opposite directions by its
  // two triangles, i.e. each directed edge appears exactly once.
  if (rep.closed && rep.indices_ok) {
    std::unordered_map<std::uint64_t, int> directed;
    directed.reserve(mesh.edge_map().size() * 2);
    auto dir_key = [](int a, int b) {
      return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
    };
    for (int t = 0; t < nt; ++t) {
      const Triangle& tri = mesh.triangles()[t];
      for (int e = 0; e < 3; ++e) directed[dir_key(tri.v[e], tri.v[(e + 1) % 3])]++;
    }
    for (const auto& [key, count] : directed) {
      if (count != 1) {
        rep.oriented = false;
        const int a = static_cast<int>(key >> 32);
        const int b = static_cast<int>(key & 0xffffffffu);
        rep.failures.push_back("directed edge (" + std::to_string(a) + "->" +
                               std::to_string(b) + ") traversed " + std::to_string(count) +
                               " times (inconsistent winding)");
      }
    }
  }

  // Connectivity over vertices through mesh edges.
  if (nv > 0) {
    std::vector<char> seen(nv, 0);
    std::vector<std::vector<int>> adjacency(nv);
    for (const auto& [key, inc] : mesh.edge_map()) {
      const auto [a, b] = edge_key_vertices(key);
      adjacency[a].push_back(b);
      adjacency[b].push_back(a);
    }
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (int w : adjacency[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          ++reached;
          frontier.push(w);
        }
      }
    }
    if (reached != nv) {
      rep.connected = false;
      rep.failures.push_back("mesh has more than one connected component (" +
                             std::to_string(nv - reached) + " unreachable vertices)");
    }
  }

  return rep;
}

// Maximum triangle diameter, which for a triangle is its longest edge.
inline double mesh_size(const SurfaceMesh& mesh) {
  double h = 0.0;
  for (const auto& [key, inc] : mesh.edge_map()) {
    const auto [a, b] = edge_key_vertices(key);
    h = std::max(h, norm(mesh.vertices()[a] - mesh.vertices()[b]));
  }
  return h;
}

inline double surface_area(const SurfaceMesh& mesh) {
  double area = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) area += triangle_area(mesh, t);
  return area;
}

struct EdgeAngleViolation {
  int a = -1;
  int b = -1;
  double angle_sum = 0.0;  // radians
};

struct DelaunayReport {
  std::vector<EdgeAngleViolation> violations;
  double worst_sum = 0.0;
  bool pass = true;
};

constexpr double kAngleSumTolerance = 1e-12;

namespace detail {

inline int opposite_vertex(const Triangle& tri, int a, int b) {
  for (int e = 0; e < 3; ++e) {
    if (tri.v[e] != a && tri.v[e] != b) return tri.v[e];
  }
  return -1;
}

inline double angle_at(const Vec3& apex, const Vec3& p, const Vec3& q) {
  const Vec3 u = p - apex;
  const Vec3 v = q - apex;
  const double c = dot(u, v) / (norm(u) * norm(v));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace detail

// For every edge shared by two triangles, sums the two angles opposite the
// edge (computed with 3D dot products inside each triangle's own plane) and
// flags sums exceeding pi.
inline DelaunayReport check_angle_condition(const SurfaceMesh& mesh) {
  DelaunayReport rep;
  for (const auto& [key, inc] : mesh.edge_map()) {
    if (inc.count != 2) continue;
    const auto [a, b] = edge_key_vertices(key);
    double sum = 0.0;
    for (int s = 0; s < 2; ++s) {
      const Triangle& tri = mesh.triangles()[inc.tris[s]];
      const int c = detail::opposite_vertex(tri, a, b);
      sum += detail::angle_at(mesh.vertices()[c], mesh.vertices()[a], mesh.vertices()[b]);
    }
    rep.worst_sum = std::max(rep.worst_sum, sum);
    if (sum > std::numbers::pi + kAngleSumTolerance) {
      rep.violations.push_back({a, b, sum});
    }
  }
  rep.pass = rep.violations.empty();
  return rep;
}

}  // namespace surfrd
