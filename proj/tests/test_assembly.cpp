#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "surfrd/assembly.hpp"
#include "surfrd/mesh_generators.hpp"

using namespace surfrd;
using Catch::Approx;

namespace {

// Cotangent-weight stiffness, used only as an oracle against the
// gradient-based assembly.
CsrMatrix cotangent_stiffness(const SurfaceMesh& mesh) {
  std::vector<Coord> coords;
  for (const Triangle& tri : mesh.triangles()) {
    const Vec3* p[3] = {&mesh.vertices()[tri.v[0]], &mesh.vertices()[tri.v[1]],
                        &mesh.vertices()[tri.v[2]]};
    for (int corner = 0; corner < 3; ++corner) {
      const int i = tri.v[(corner + 1) % 3];
      const int j = tri.v[(corner + 2) % 3];
      const Vec3 u = *p[(corner + 1) % 3] - *p[corner];
      const Vec3 v = *p[(corner + 2) % 3] - *p[corner];
      const double cot = dot(u, v) / norm(cross(u, v));
      coords.push_back({i, j, -0.5 * cot});
      coords.push_back({j, i, -0.5 * cot});
      coords.push_back({i, i, 0.5 * cot});
      coords.push_back({j, j, 0.5 * cot});
    }
  }
  return csr_from_coords(mesh.n_vertices(), mesh.n_vertices(), std::move(coords));
}

SurfaceMesh obtuse_tetrahedron() {
  const double deg = std::numbers::pi / 180.0;
  const double d = 1.0 / std::tan(50.0 * deg);
  std::vector<Vec3> verts = {{-1.0, 0.0, 0.0},
                             {1.0, 0.0, 0.0},
                             {0.0, d, 0.0},
                             {0.0, -d * std::cos(60.0 * deg), d * std::sin(60.0 * deg)}};
  std::vector<Triangle> tris = {{{0, 1, 2}}, {{1, 0, 3}}, {{0, 2, 3}}, {{2, 1, 3}}};
  return SurfaceMesh(std::move(verts), std::move(tris));
}

}  // namespace

TEST_CASE("hat gradients on the reference right triangle") {
  const auto g = local_basis_gradients({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
  CHECK(g[0].x == Approx(-1.0).margin(1e-14));
  CHECK(g[0].y == Approx(-1.0).margin(1e-14));
  CHECK(g[1].x == Approx(1.0).margin(1e-14));
  CHECK(g[1].y == Approx(0.0).margin(1e-14));
  CHECK(g[2].x == Approx(0.0).margin(1e-14));
  CHECK(g[2].y == Approx(1.0).margin(1e-14));
  for (const Vec3& v : g) CHECK(v.z == Approx(0.0).margin(1e-14));
}

TEST_CASE("hat gradients sum to zero and are edge-orthogonal") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 p0{uni(rng), uni(rng), uni(rng)};
    const Vec3 p1{uni(rng), uni(rng), uni(rng)};
    const Vec3 p2{uni(rng), uni(rng), uni(rng)};
    if (triangle_area(p0, p1, p2) < 1e-3) continue;
    const auto g = local_basis_gradients(p0, p1, p2);
    const Vec3 sum = g[0] + g[1] + g[2];
    CHECK(norm(sum) < 1e-13);
    // Each gradient is orthogonal to its opposite edge.
    CHECK(std::abs(dot(g[0], p2 - p1)) < 1e-12);
    CHECK(std::abs(dot(g[1], p0 - p2)) < 1e-12);
    CHECK(std::abs(dot(g[2], p1 - p0)) < 1e-12);
    // In-plane: orthogonal to the triangle normal.
    const Vec3 n = cross(p1 - p0, p2 - p0);
    for (const Vec3& v : g) CHECK(std::abs(dot(v, n)) / norm(n) < 1e-12);
    // Linear reproduction: grad of the interpolant of f(x) = x.
    const Vec3 gx = g[0] * p0.x + g[1] * p1.x + g[2] * p2.x;
    CHECK(norm(gx - cross(normalized(n), cross(Vec3{1, 0, 0}, normalized(n)))) < 1e-10);
  }
}

TEST_CASE("equilateral hat gradient magnitude is 2/sqrt(3)") {
  const Vec3 p0{0, 0, 0}, p1{1, 0, 0}, p2{0.5, std::sqrt(3.0) / 2.0, 0};
  const auto g = local_basis_gradients(p0, p1, p2);
  for (const Vec3& v : g) CHECK(norm(v) == Approx(2.0 / std::sqrt(3.0)).epsilon(1e-13));
}

TEST_CASE("degenerate triangle is rejected") {
  CHECK_THROWS_AS(local_basis_gradients({0, 0, 0}, {1, 0, 0}, {2, 0, 0}),
                  std::invalid_argument);
}

TEST_CASE("single equilateral triangle local stiffness entries") {
  // Closed two-triangle double cover of one equilateral triangle would be
  // degenerate, so assemble on an open mesh and only look at the local sums.
  const Vec3 p0{0, 0, 0}, p1{1, 0, 0}, p2{0.5, std::sqrt(3.0) / 2.0, 0};
  SurfaceMesh mesh({p0, p1, p2}, {{{0, 1, 2}}});
  const CsrMatrix a = assemble_stiffness(mesh);
  for (int i = 0; i < 3; ++i) {
    CHECK(a(i, i) == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-13));
    for (int j = 0; j < 3; ++j) {
      if (i != j) CHECK(a(i, j) == Approx(-0.5 / std::sqrt(3.0)).epsilon(1e-13));
    }
  }
}

TEST_CASE("stiffness matches the cotangent oracle") {
  for (int level : {0, 1, 2}) {
    const SurfaceMesh mesh = generate_icosphere(level);
    const CsrMatrix a = assemble_stiffness(mesh);
    const CsrMatrix oracle = cotangent_stiffness(mesh);
    REQUIRE(a.col_indices == oracle.col_indices);
    for (std::size_t k = 0; k < a.values.size(); ++k) {
      REQUIRE(a.values[k] == Approx(oracle.values[k]).margin(1e-12));
    }
  }
}

TEST_CASE("stiffness is symmetric with zero row sums") {
  const SurfaceMesh mesh = generate_fibonacci_delaunay(300);
  const CsrMatrix a = assemble_stiffness(mesh);
  double max_abs = 0.0;
  for (double v : a.values) max_abs = std::max(max_abs, std::abs(v));
  for (int i = 0; i < a.n_rows; ++i) {
    double row_sum = 0.0;
    for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
      const int j = a.col_indices[k];
      row_sum += a.values[k];
      REQUIRE(std::abs(a.values[k] - a(j, i)) <= 1e-14 * max_abs);
    }
    REQUIRE(std::abs(row_sum) <= 1e-12);
  }
}

TEST_CASE("angle condition equivalence for off-diagonal signs") {
  // Delaunay meshes: all off-diagonal entries nonpositive.
  for (int level : {0, 1, 2, 3}) {
    const SurfaceMesh mesh = generate_icosphere(level);
    REQUIRE(check_angle_condition(mesh).pass);
    const CsrMatrix a = assemble_stiffness(mesh);
    for (int i = 0; i < a.n_rows; ++i) {
      for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
        if (a.col_indices[k] != i) REQUIRE(a.values[k] <= 1e-13);
      }
    }
  }
  // Converse: the angle-violating edge carries a positive entry equal to
  // -(cot a1 + cot a2)/2 with a1 = a2 = 100 degrees.
  const SurfaceMesh bad = obtuse_tetrahedron();
  REQUIRE_FALSE(check_angle_condition(bad).pass);
  const CsrMatrix a = assemble_stiffness(bad);
  const double deg = std::numbers::pi / 180.0;
  const double expected = -std::cos(100.0 * deg) / std::sin(100.0 * deg);  // -cot(100deg) > 0
  CHECK(a(0, 1) > 0.0);
  CHECK(a(0, 1) == Approx(expected).epsilon(1e-12));
}

TEST_CASE("lumped mass is one third of incident area") {
  const SurfaceMesh mesh = generate_icosphere(0);
  const DiagMatrix m = assemble_lumped_mass(mesh);
  const double area = surface_area(mesh);
  double total = 0.0;
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    CHECK(m.diag[i] > 0.0);
    // Vertex-transitive mesh: every entry equals area / 12.
    CHECK(m.diag[i] == Approx(area / 12.0).epsilon(1e-12));
    total += m.diag[i];
  }
  CHECK(total == Approx(area).epsilon(1e-12));

  // Single equilateral triangle contributes area/3 ~ 0.14434 per vertex.
  const Vec3 p0{0, 0, 0}, p1{1, 0, 0}, p2{0.5, std::sqrt(3.0) / 2.0, 0};
  const DiagMatrix single = assemble_lumped_mass(SurfaceMesh({p0, p1, p2}, {{{0, 1, 2}}}));
  for (int i = 0; i < 3; ++i) {
    CHECK(single.diag[i] == Approx(std::sqrt(3.0) / 12.0).epsilon(1e-13));
    CHECK(single.diag[i] == Approx(0.14434).epsilon(1e-4));
  }
}

TEST_CASE("lumped mass conserves area on irregular meshes") {
  const SurfaceMesh mesh = generate_fibonacci_delaunay(500);
  const DiagMatrix m = assemble_lumped_mass(mesh);
  double total = 0.0;
  for (double v : m.diag) total += v;
  CHECK(total == Approx(surface_area(mesh)).epsilon(1e-12));
}

TEST_CASE("consistent mass local structure and global sums") {
  const Vec3 p0{0, 0, 0}, p1{2, 0, 0}, p2{0, 3, 0};  // area 3
  const SurfaceMesh single({p0, p1, p2}, {{{0, 1, 2}}});
  const CsrMatrix m = assemble_consistent_mass(single);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(m(i, j) == Approx(i == j ? 3.0 / 6.0 : 3.0 / 12.0).epsilon(1e-13));
    }
  }

  const SurfaceMesh mesh = generate_icosphere(2);
  const CsrMatrix mc = assemble_consistent_mass(mesh);
  const DiagMatrix ml = assemble_lumped_mass(mesh);
  double total = 0.0;
  for (int i = 0; i < mc.n_rows; ++i) {
    double row = 0.0;
    for (int k = mc.row_offsets[i]; k < mc.row_offsets[i + 1]; ++k) {
      row += mc.values[k];
      total += mc.values[k];
    }
    // Row sums of the consistent mass equal the lumped diagonal.
    REQUIRE(row == Approx(ml.diag[i]).margin(1e-13));
  }
  CHECK(total == Approx(surface_area(mesh)).epsilon(1e-12));
}

TEST_CASE("interpolation of constants and of xyz") {
  const SurfaceMesh mesh = generate_icosphere(3);
  const NodalField c = interpolate(mesh, ScalarFunction([](const Vec3&) { return 2.5; }));
  for (int i = 0; i < c.n_nodes; ++i) REQUIRE(c(0, i) == 2.5);

  const NodalField f =
      interpolate(mesh, ScalarFunction([](const Vec3& x) { return x.x * x.y * x.z; }));
  const double bound = std::pow(3.0, -1.5);
  for (int i = 0; i < f.n_nodes; ++i) {
    REQUIRE(f(0, i) >= -bound - 1e-14);
    REQUIRE(f(0, i) <= bound + 1e-14);
  }
}

TEST_CASE("interpolation rejects non-finite samples") {
  const SurfaceMesh mesh = generate_icosphere(0);
  CHECK_THROWS_AS(
      interpolate(mesh, ScalarFunction([](const Vec3& x) { return 1.0 / (x.z - x.z); })),
      std::invalid_argument);
}

TEST_CASE("norms of the constant one field equal sqrt(area)") {
  const SurfaceMesh mesh = generate_icosphere(2);
  const FemOperators ops = assemble_operators(mesh);
  const NodalField ones = interpolate(mesh, ScalarFunction([](const Vec3&) { return 1.0; }));
  const double expected = std::sqrt(ops.total_area);
  CHECK(lumped_norm(ops.lumped_mass, ones) == Approx(expected).epsilon(1e-12));
  CHECK(l2_norm(ops.consistent_mass, ones) == Approx(expected).epsilon(1e-12));
}

TEST_CASE("lumped norm dominates the consistent norm with ratio at most 2") {
  const SurfaceMesh mesh = generate_icosphere(3);
  const FemOperators ops = assemble_operators(mesh);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    NodalField u(1, mesh.n_vertices());
    for (int i = 0; i < u.n_nodes; ++i) u(0, i) = uni(rng);
    const double lumped = lumped_norm(ops.lumped_mass, u);
    const double l2 = l2_norm(ops.consistent_mass, u);
    REQUIRE(l2 <= lumped * (1.0 + 1e-12));
    const double ratio = lumped / l2;
    REQUIRE(ratio > 1.0);
    REQUIRE(ratio <= 2.0 + 1e-12);
  }
}

TEST_CASE("rayleigh quotients of interpolated harmonics approach 6 and 12") {
  // Degree-2 and degree-3 spherical harmonics have Laplace-Beltrami
  // eigenvalues 6 and 12; the discrete quotient converges quadratically.
  double prev_err_xy = 1e9, prev_err_xyz = 1e9;
  for (int level : {3, 4, 5}) {
    const SurfaceMesh mesh = generate_icosphere(level);
    const FemOperators ops = assemble_operators(mesh);
    const NodalField xy =
        interpolate(mesh, ScalarFunction([](const Vec3& x) { return x.x * x.y; }));
    const NodalField xyz =
        interpolate(mesh, ScalarFunction([](const Vec3& x) { return x.x * x.y * x.z; }));
    std::vector<double> tmp(mesh.n_vertices());
    double q_xy = 0.0, q_xyz = 0.0;
    {
      matvec(ops.stiffness, xy.component(0), tmp);
      double num = 0.0;
      for (int i = 0; i < mesh.n_vertices(); ++i) num += xy(0, i) * tmp[i];
      matvec(ops.consistent_mass, xy.component(0), tmp);
      double den = 0.0;
      for (int i = 0; i < mesh.n_vertices(); ++i) den += xy(0, i) * tmp[i];
      q_xy = num / den;
    }
    {
      matvec(ops.stiffness, xyz.component(0), tmp);
      double num = 0.0;
      for (int i = 0; i < mesh.n_vertices(); ++i) num += xyz(0, i) * tmp[i];
      matvec(ops.consistent_mass, xyz.component(0), tmp);
      double den = 0.0;
      for (int i = 0; i < mesh.n_vertices(); ++i) den += xyz(0, i) * tmp[i];
      q_xyz = num / den;
    }
    const double err_xy = std::abs(q_xy - 6.0);
    const double err_xyz = std::abs(q_xyz - 12.0);
    CHECK(err_xy < prev_err_xy);
    CHECK(err_xyz < prev_err_xyz);
    prev_err_xy = err_xy;
    prev_err_xyz = err_xyz;
    if (level == 5) {
      CHECK(err_xy / 6.0 < 0.01);
      CHECK(err_xyz / 12.0 < 0.01);
    }
  }
}
