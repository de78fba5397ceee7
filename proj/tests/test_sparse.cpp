#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "surfrd/assembly.hpp"
#include "surfrd/mesh_generators.hpp"
#include "surfrd/sparse.hpp"

using namespace surfrd;
using Catch::Approx;

namespace {

// Dense helpers used only as test oracles.
using Dense = std::vector<std::vector<double>>;

Dense dense_from_csr(const CsrMatrix& a) {
  Dense d(a.n_rows, std::vector<double>(a.n_cols, 0.0));
  for (int r = 0; r < a.n_rows; ++r) {
    for (int k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
      d[r][a.col_indices[k]] += a.values[k];
    }
  }
  return d;
}

std::vector<double> dense_matvec(const Dense& a, const std::vector<double>& x) {
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t c = 0; c < a[r].size(); ++c) y[r] += a[r][c] * x[c];
  }
  return y;
}

// Plain Cholesky solve for small SPD systems.
std::vector<double> dense_cholesky_solve(Dense a, std::vector<double> b) {
  const int n = static_cast<int>(a.size());
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < j; ++k) a[j][j] -= a[j][k] * a[j][k];
    a[j][j] = std::sqrt(a[j][j]);
    for (int i = j + 1; i < n; ++i) {
      for (int k = 0; k < j; ++k) a[i][j] -= a[i][k] * a[j][k];
      a[i][j] /= a[j][j];
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < i; ++k) b[i] -= a[i][k] * b[k];
    b[i] /= a[i][i];
  }
  for (int i = n - 1; i >= 0; --i) {
    for (int k = i + 1; k < n; ++k) b[i] -= a[k][i] * b[k];
    b[i] /= a[i][i];
  }
  return b;
}

CsrMatrix random_sparse(int n, std::mt19937& rng, bool spd) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_int_distribution<int> col(0, n - 1);
  std::vector<Coord> coords;
  for (int r = 0; r < n; ++r) {
    for (int k = 0; k < 4; ++k) coords.push_back({r, col(rng), uni(rng)});
  }
  CsrMatrix a = csr_from_coords(n, n, std::move(coords));
  if (!spd) return a;
  // A' A + I is SPD.
  Dense d = dense_from_csr(a);
  std::vector<Coord> spd_coords;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = i == j ? 1.0 : 0.0;
      for (int k = 0; k < n; ++k) s += d[k][i] * d[k][j];
      spd_coords.push_back({i, j, s});
    }
  }
  return csr_from_coords(n, n, std::move(spd_coords));
}

}  // namespace

TEST_CASE("csr_from_coords sums duplicates and sorts columns") {
  CsrMatrix a = csr_from_coords(2, 2, {{0, 1, 1.0}, {0, 0, 2.0}, {0, 1, 0.5}, {1, 1, 3.0}});
  REQUIRE(a.row_offsets == std::vector<int>{0, 2, 3});
  REQUIRE(a.col_indices == std::vector<int>{0, 1, 1});
  CHECK(a.values[0] == 2.0);
  CHECK(a.values[1] == 1.5);
  CHECK(a.values[2] == 3.0);
  CHECK(a(0, 1) == 1.5);
  CHECK(a(1, 0) == 0.0);
}

TEST_CASE("matvec identity and diagonal cases") {
  CsrMatrix eye = csr_from_coords(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
  std::vector<double> x = {1.5, -2.0, 0.25};
  CHECK(matvec(eye, x) == x);

  CsrMatrix d = csr_from_coords(2, 2, {{0, 0, 2.0}, {1, 1, 3.0}});
  const auto y = matvec(d, std::vector<double>{1.0, 1.0});
  CHECK(y[0] == 2.0);
  CHECK(y[1] == 3.0);
}

TEST_CASE("matvec dimension mismatch throws") {
  CsrMatrix eye = csr_from_coords(3, 3, {{0, 0, 1.0}});
  std::vector<double> x(2, 0.0), y(3, 0.0);
  CHECK_THROWS_AS(matvec(eye, x, y), std::invalid_argument);
}

TEST_CASE("matvec agrees with a dense oracle on random sparse matrices") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 20 + trial;
    CsrMatrix a = random_sparse(n, rng, false);
    Dense d = dense_from_csr(a);
    std::vector<double> x(n);
    for (double& v : x) v = uni(rng);
    const auto y_sparse = matvec(a, x);
    const auto y_dense = dense_matvec(d, x);
    for (int i = 0; i < n; ++i) {
      REQUIRE(y_sparse[i] == Approx(y_dense[i]).margin(1e-13));
    }
  }
}

TEST_CASE("csr_add merges patterns") {
  CsrMatrix a = csr_from_coords(2, 2, {{0, 0, 1.0}, {0, 1, 2.0}});
  CsrMatrix b = csr_from_coords(2, 2, {{0, 1, 1.0}, {1, 0, 4.0}});
  CsrMatrix c = csr_add(2.0, a, -1.0, b);
  CHECK(c(0, 0) == 2.0);
  CHECK(c(0, 1) == 3.0);
  CHECK(c(1, 0) == -4.0);
  CHECK(c(1, 1) == 0.0);
}

TEST_CASE("cg solves the identity in at most one iteration") {
  CsrMatrix eye = csr_from_coords(4, 4, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}, {3, 3, 1.0}});
  SpdOperator op{&eye, 1.0, nullptr};
  std::vector<double> b = {1.0, -2.0, 3.0, 0.5};
  std::vector<double> x(4, 0.0);
  const SolveStats stats = cg_solve(op, b, x);
  CHECK(stats.iterations <= 1);
  for (int i = 0; i < 4; ++i) CHECK(x[i] == Approx(b[i]).margin(1e-12));
}

TEST_CASE("cg solves a diagonal system exactly") {
  CsrMatrix d = csr_from_coords(2, 2, {{0, 0, 4.0}, {1, 1, 9.0}});
  SpdOperator op{&d, 1.0, nullptr};
  std::vector<double> b = {4.0, 9.0};
  std::vector<double> x(2, 0.0);
  cg_solve(op, b, x);
  CHECK(x[0] == Approx(1.0).margin(1e-12));
  CHECK(x[1] == Approx(1.0).margin(1e-12));
}

TEST_CASE("cg matches a dense Cholesky oracle on random SPD systems") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 30;
    CsrMatrix a = random_sparse(n, rng, true);
    std::vector<double> b(n);
    for (double& v : b) v = uni(rng);
    std::vector<double> x(n, 0.0);
    SpdOperator op{&a, 1.0, nullptr};
    const SolveStats stats = cg_solve(op, b, x, {1e-12, 10000, Precond::jacobi});
    CHECK(stats.iterations <= 5 * n);
    const auto oracle = dense_cholesky_solve(dense_from_csr(a), b);
    for (int i = 0; i < n; ++i) REQUIRE(x[i] == Approx(oracle[i]).margin(1e-9));
  }
}

TEST_CASE("cg converges within the iteration budget at tol 1e-10") {
  std::mt19937 rng(99);
  const int n = 40;
  CsrMatrix a = random_sparse(n, rng, true);
  std::vector<double> b(n, 1.0);
  std::vector<double> x(n, 0.0);
  SpdOperator op{&a, 1.0, nullptr};
  const SolveStats stats = cg_solve(op, b, x, {1e-10, 5 * n, Precond::jacobi});
  CHECK(stats.final_relative_residual <= 1e-10);
}

TEST_CASE("cg reports non-convergence with the achieved residual") {
  std::mt19937 rng(3);
  CsrMatrix a = random_sparse(25, rng, true);
  std::vector<double> b(25, 1.0);
  std::vector<double> x(25, 0.0);
  SpdOperator op{&a, 1.0, nullptr};
  bool threw = false;
  try {
    cg_solve(op, b, x, {1e-14, 2, Precond::none});
  } catch (const SolverFailure& e) {
    threw = true;
    CHECK(e.stats.iterations == 2);
    CHECK(e.stats.final_relative_residual > 1e-14);
  }
  CHECK(threw);
}

TEST_CASE("diag plus csr operator applies both parts") {
  CsrMatrix a = csr_from_coords(2, 2, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 5.0}});
  DiagMatrix m{{3.0, 4.0}};
  SpdOperator op{&a, 0.5, &m};
  std::vector<double> x = {1.0, 1.0};
  std::vector<double> y(2);
  op.apply(x, y);
  CHECK(y[0] == Approx(3.0 + 0.5 * 3.0));
  CHECK(y[1] == Approx(4.0 + 0.5 * 7.0));
  const auto d = op.diagonal();
  CHECK(d[0] == Approx(3.5));
  CHECK(d[1] == Approx(6.5));
}

TEST_CASE("solve operator columns are nonnegative and sum against ones") {
  // (M + sA)^{-1} M is entrywise nonnegative with unit row sums on meshes
  // satisfying the angle condition.
  std::vector<SurfaceMesh> meshes;
  for (int level : {0, 1, 2, 3}) meshes.push_back(generate_icosphere(level));
  meshes.push_back(generate_fibonacci_delaunay(126));
  for (const SurfaceMesh& mesh : meshes) {
    REQUIRE(check_angle_condition(mesh).pass);
    const CsrMatrix a = assemble_stiffness(mesh);
    const DiagMatrix m = assemble_lumped_mass(mesh);
    const int n = mesh.n_vertices();
    for (double s : {1e-3, 1e-1, 1.0}) {
      // Row-sum-one identity via one solve with b = M 1.
      std::vector<double> b(n), x(n, 1.0);
      for (int i = 0; i < n; ++i) b[i] = m.diag[i];
      SpdOperator op{&a, s, &m};
      cg_solve(op, b, x, {1e-12, 20000, Precond::jacobi});
      for (int i = 0; i < n; ++i) REQUIRE(x[i] == Approx(1.0).margin(1e-9));
      // Column nonnegativity, checked column by column.
      for (int j = 0; j < n; ++j) {
        const auto col = solve_operator_column_check(m, a, s, j, {1e-13, 20000, Precond::jacobi});
        for (double v : col) REQUIRE(v >= -1e-12);
      }
    }
  }
}

TEST_CASE("solve operator at s = 0 is the identity") {
  const SurfaceMesh mesh = generate_icosphere(1);
  const CsrMatrix a = assemble_stiffness(mesh);
  const DiagMatrix m = assemble_lumped_mass(mesh);
  const auto col = solve_operator_column_check(m, a, 0.0, 5);
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    REQUIRE(col[i] == Approx(i == 5 ? 1.0 : 0.0).margin(1e-12));
  }
}

TEST_CASE("solve operator column approaches e_j as s tends to zero") {
  const SurfaceMesh mesh = generate_icosphere(0);
  const CsrMatrix a = assemble_stiffness(mesh);
  const DiagMatrix m = assemble_lumped_mass(mesh);
  const double s = 1e-8;
  const auto col = solve_operator_column_check(m, a, s, 3, {1e-13, 10000, Precond::jacobi});
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    const double expected = i == 3 ? 1.0 : 0.0;
    CHECK(col[i] == Approx(expected).margin(1e-6));
  }
}

TEST_CASE("triplet dump emits row col value lines") {
  CsrMatrix a = csr_from_coords(2, 2, {{0, 1, 2.5}, {1, 0, -1.0}});
  std::ostringstream os;
  dump_triplets(a, os);
  CHECK(os.str() == "0 1 2.5\n1 0 -1\n");
}
