#pragma once

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "surfrd/mesh.hpp"
#include "surfrd/vec3.hpp"

namespace surfrd {

class HullDegeneracyError : public std::runtime_error {
 public:
  HullDegeneracyError(std::string what, std::vector<int> indices)
      : std::runtime_error(std::move(what)), offending_indices(std::move(indices)) {}

  std::vector<int> offending_indices;
};

namespace detail {

// Regular icosahedron inscribed in the unit sphere, outward orientation.
inline SurfaceMesh unit_icosahedron() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double s = 1.0 / std::sqrt(1.0 + phi * phi);
  const double a = s;
  const double b = phi * s;
  std::vector<Vec3> v = {
      {-a, b, 0},  {a, b, 0},  {-a, -b, 0}, {a, -b, 0}, {0, -a, b},  {0, a, b},
      {0, -a, -b}, {0, a, -b}, {b, 0, -a},  {b, 0, a},  {-b, 0, -a}, {-b, 0, a},
  };
  std::vector<Triangle> f = {
      {{0, 11, 5}}, {{0, 5, 1}},  {{0, 1, 7}},   {{0, 7, 10}}, {{0, 10, 11}},
      {{1, 5, 9}},  {{5, 11, 4}}, {{11, 10, 2}}, {{10, 7, 6}}, {{7, 1, 8}},
      {{3, 9, 4}},  {{3, 4, 2}},  {{3, 2, 6}},   {{3, 6, 8}},  {{3, 8, 9}},
      {{4, 9, 5}},  {{2, 4, 11}}, {{6, 2, 10}},  {{8, 6, 7}},  {{9, 8, 1}},
  };
  return SurfaceMesh(std::move(v), std::move(f));
}

}  // namespace detail

// Icosahedron subdivided `level` times with every new vertex projected back to
// the unit sphere. V = 10*4^level + 2, F = 20*4^level.
inline SurfaceMesh generate_icosphere(int level) {
  if (level < 0 || level > 8) {
    throw std::invalid_argument("icosphere level must be in [0, 8], got " +
                                std::to_string(level));
  }
  SurfaceMesh mesh = detail::unit_icosahedron();
  for (int l = 0; l < level; ++l) {
    std::vector<Vec3> verts = mesh.vertices();
    std::vector<Triangle> faces;
    faces.reserve(mesh.n_triangles() * 4);
    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(mesh.edge_map().size());
    auto mid = [&](int a, int b) {
      const auto key = edge_key(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int idx = static_cast<int>(verts.size());
      verts.push_back(normalized(verts[a] + verts[b]));
      midpoint.emplace(key, idx);
      return idx;
    };
    for (const Triangle& tri : mesh.triangles()) {
      const int i0 = tri.v[0], i1 = tri.v[1], i2 = tri.v[2];
      const int m01 = mid(i0, i1), m12 = mid(i1, i2), m20 = mid(i2, i0);
      faces.push_back({{i0, m01, m20}});
      faces.push_back({{i1, m12, m01}});
      faces.push_back({{i2, m20, m12}});
      faces.push_back({{m01, m12, m20}});
    }
    mesh = SurfaceMesh(std::move(verts), std::move(faces));
  }
  return mesh;
}

inline std::vector<Vec3> fibonacci_sphere_points(int n) {
  std::vector<Vec3> pts;
  pts.reserve(n);
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    pts.push_back({r * std::cos(phi), r * std::sin(phi), z});
  }
  return pts;
}

namespace detail {

// Incremental 3D convex hull. Points are assumed to be in near-convex
// position (they lie on a sphere here); every input point must end up on the
// hull, otherwise a degeneracy is reported.
class ConvexHull {
 public:
  explicit ConvexHull(const std::vector<Vec3>& pts) : pts_(pts) {
    if (pts_.size() < 4) throw HullDegeneracyError("hull needs at least 4 points", {});
    build();
  }

  std::vector<Triangle> triangles() const {
    std::vector<Triangle> out;
    for (const Face& f : faces_) {
      if (f.alive) out.push_back({{f.a, f.b, f.c}});
    }
    return out;
  }

 private:
  struct Face {
    int a, b, c;
    Vec3 normal;   // outward, not normalized
    Vec3 origin;   // one vertex, for visibility tests
    bool alive = true;
  };

  void add_face(int a, int b, int c) {
    Face f{a, b, c, {}, pts_[a], true};
    f.normal = cross(pts_[b] - pts_[a], pts_[c] - pts_[a]);
    faces_.push_back(f);
  }

  bool visible(const Face& f, const Vec3& p) const {
    return dot(f.normal, p - f.origin) > visibility_eps_;
  }

  void build() {
    const int n = static_cast<int>(pts_.size());
    // Seed tetrahedron: spread-out, non-coplanar quadruple.
    int i0 = 0;
    int i1 = -1;
    double best = -1.0;
    for (int i = 1; i < n; ++i) {
      const double d = norm(pts_[i] - pts_[i0]);
      if (d > best) best = d, i1 = i;
    }
    if (best < 1e-12) throw HullDegeneracyError("all points coincide", {i0, i1});
    int i2 = -1;
    best = -1.0;
    for (int i = 0; i < n; ++i) {
      const double d = norm(cross(pts_[i1] - pts_[i0], pts_[i] - pts_[i0]));
      if (d > best) best = d, i2 = i;
    }
    if (best < 1e-12) throw HullDegeneracyError("points are collinear", {i0, i1, i2});
    int i3 = -1;
    best = -1.0;
    const Vec3 plane_n = cross(pts_[i1] - pts_[i0], pts_[i2] - pts_[i0]);
    for (int i = 0; i < n; ++i) {
      const double d = std::abs(dot(plane_n, pts_[i] - pts_[i0]));
      if (d > best) best = d, i3 = i;
    }
    if (best < 1e-12) throw HullDegeneracyError("points are coplanar", {i0, i1, i2, i3});

    if (dot(plane_n, pts_[i3] - pts_[i0]) > 0.0) std::swap(i1, i2);
    add_face(i0, i1, i2);
    add_face(i0, i2, i3);
    add_face(i0, i3, i1);
    add_face(i1, i3, i2);

    std::vector<char> inserted(n, 0);
    inserted[i0] = inserted[i1] = inserted[i2] = inserted[i3] = 1;

    for (int p = 0; p < n; ++p) {
      if (inserted[p]) continue;
      insert_point(p);
      inserted[p] = 1;
    }

    // On a sphere every point is a hull vertex; anything swallowed by the
    // visibility threshold indicates coincident or nearly coincident points.
    std::vector<char> used(n, 0);
    for (const Face& f : faces_) {
      if (!f.alive) continue;
      used[f.a] = used[f.b] = used[f.c] = 1;
    }
    std::vector<int> missing;
    for (int i = 0; i < n; ++i) {
      if (!used[i]) missing.push_back(i);
    }
    if (!missing.empty()) {
      throw HullDegeneracyError(
          "hull degeneracy: " + std::to_string(missing.size()) +
              " input points are not hull vertices (coincident points?)",
          missing);
    }
  }

  void insert_point(int p) {
    // Collect visible faces and the horizon (directed edges of the visible
    // region's boundary, taken in the orientation of the visible faces).
    std::unordered_map<std::uint64_t, int> edge_use;
    std::vector<std::uint64_t> horizon_candidates;
    bool any_visible = false;
    auto dir_key = [](int a, int b) {
      return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
    };
    for (Face& f : faces_) {
      if (!f.alive || !visible(f, pts_[p])) continue;
      any_visible = true;
      f.alive = false;
      const int vs[3] = {f.a, f.b, f.c};
      for (int e = 0; e < 3; ++e) {
        const int a = vs[e];
        const int b = vs[(e + 1) % 3];
        // An edge interior to the visible region appears once per direction.
        const auto rev = dir_key(b, a);
        auto it = edge_use.find(rev);
        if (it != edge_use.end()) {
          edge_use.erase(it);
        } else {
          edge_use.emplace(dir_key(a, b), 1);
          horizon_candidates.push_back(dir_key(a, b));
        }
      }
    }
    if (!any_visible) {
      throw HullDegeneracyError("point " + std::to_string(p) +
                                    " lies inside the current hull (coincident points?)",
                                {p});
    }
    for (const auto key : horizon_candidates) {
      if (!edge_use.count(key)) continue;
      const int a = static_cast<int>(key >> 32);
      const int b = static_cast<int>(key & 0xffffffffu);
      add_face(a, b, p);
    }
    // Compact dead faces occasionally to keep scans cheap.
    if (faces_.size() > 4 * alive_estimate()) compact();
  }

  std::size_t alive_estimate() const {
    std::size_t alive = 0;
    for (const Face& f : faces_) alive += f.alive ? 1 : 0;
    return alive == 0 ? 1 : alive;
  }

  void compact() {
    std::vector<Face> kept;
    kept.reserve(faces_.size() / 2);
    for (const Face& f : faces_) {
      if (f.alive) kept.push_back(f);
    }
    faces_ = std::move(kept);
  }

  const std::vector<Vec3>& pts_;
  std::vector<Face> faces_;
  double visibility_eps_ = 1e-12;
};

}  // namespace detail

// Fibonacci-lattice points on the unit sphere triangulated by their convex
// hull, which for points on a sphere is the spherical Delaunay triangulation.
inline SurfaceMesh generate_fibonacci_delaunay(int n_points) {
  if (n_points < 12) {
    throw std::invalid_argument("fibonacci mesh needs at least 12 points, got " +
                                std::to_string(n_points));
  }
  std::vector<Vec3> pts = fibonacci_sphere_points(n_points);
  detail::ConvexHull hull(pts);
  return SurfaceMesh(std::move(pts), hull.triangles());
}

}  // namespace surfrd
