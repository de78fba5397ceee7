#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace surfrd {

struct Coord {
  int row;
  int col;
  double value;
};

// Compressed sparse row with sorted column indices per row.
struct CsrMatrix {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<int> row_offsets;  // size n_rows + 1
  std::vector<int> col_indices;
  std::vector<double> values;

  double operator()(int i, int j) const {
    for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      if (col_indices[k] == j) return values[k];
    }
    return 0.0;
  }
};

struct DiagMatrix {
  std::vector<double> diag;

  int size() const { return static_cast<int>(diag.size()); }
};

// Builds a CSR matrix from coordinate triplets; duplicate entries are summed
// in their original order so that assembly stays bitwise reproducible.
inline CsrMatrix csr_from_coords(int n_rows, int n_cols, std::vector<Coord> coords) {
  std::stable_sort(coords.begin(), coords.end(), [](const Coord& a, const Coord& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.n_rows = n_rows;
  m.n_cols = n_cols;
  m.row_offsets.assign(n_rows + 1, 0);
  std::size_t i = 0;
  while (i < coords.size()) {
    const int r = coords[i].row;
    const int c = coords[i].col;
    if (r < 0 || r >= n_rows || c < 0 || c >= n_cols) {
      throw std::out_of_range("csr_from_coords: entry out of range");
    }
    double sum = 0.0;
    while (i < coords.size() && coords[i].row == r && coords[i].col == c) {
      sum += coords[i].value;
      ++i;
    }
    m.col_indices.push_back(c);
    m.values.push_back(sum);
    m.row_offsets[r + 1]++;
  }
  for (int r = 0; r < n_rows; ++r) m.row_offsets[r + 1] += m.row_offsets[r];
  return m;
}

inline void matvec(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  if (static_cast<int>(x.size()) != a.n_cols || static_cast<int>(y.size()) != a.n_rows) {
    throw std::invalid_argument("matvec: dimension mismatch");
  }
  for (int r = 0; r < a.n_rows; ++r) {
    double s = 0.0;
    for (int k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
      s += a.values[k] * x[a.col_indices[k]];
    }
    y[r] = s;
  }
}

inline std::vector<double> matvec(const CsrMatrix& a, std::span<const double> x) {
  std::vector<double> y(a.n_rows);
  matvec(a, x, y);
  return y;
}

// C = alpha*A + beta*B with pattern union (two-pointer row merge).
inline CsrMatrix csr_add(double alpha, const CsrMatrix& a, double beta, const CsrMatrix& b) {
  if (a.n_rows != b.n_rows || a.n_cols != b.n_cols) {
    throw std::invalid_argument("csr_add: dimension mismatch");
  }
  CsrMatrix c;
  c.n_rows = a.n_rows;
  c.n_cols = a.n_cols;
  c.row_offsets.assign(a.n_rows + 1, 0);
  for (int r = 0; r < a.n_rows; ++r) {
    int ia = a.row_offsets[r], ea = a.row_offsets[r + 1];
    int ib = b.row_offsets[r], eb = b.row_offsets[r + 1];
    while (ia < ea || ib < eb) {
      const int ca = ia < ea ? a.col_indices[ia] : c.n_cols;
      const int cb = ib < eb ? b.col_indices[ib] : c.n_cols;
      if (ca < cb) {
        c.col_indices.push_back(ca);
        c.values.push_back(alpha * a.values[ia++]);
      } else if (cb < ca) {
        c.col_indices.push_back(cb);
        c.values.push_back(beta * b.values[ib++]);
      } else {
        c.col_indices.push_back(ca);
        c.values.push_back(alpha * a.values[ia++] + beta * b.values[ib++]);
      }
      c.row_offsets[r + 1]++;
    }
  }
  for (int r = 0; r < c.n_rows; ++r) c.row_offsets[r + 1] += c.row_offsets[r];
  return c;
}

// S x = diag .* x + csr_scale * (A x); either part may be absent.
struct SpdOperator {
  const CsrMatrix* csr = nullptr;
  double csr_scale = 1.0;
  const DiagMatrix* diag = nullptr;

  int size() const {
    if (csr) return csr->n_rows;
    if (diag) return diag->size();
    return 0;
  }

  void apply(std::span<const double> x, std::span<double> y) const {
    const int n = size();
    if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n) {
      throw std::invalid_argument("SpdOperator::apply: dimension mismatch");
    }
    if (csr) {
      matvec(*csr, x, y);
      if (csr_scale != 1.0) {
        for (int i = 0; i < n; ++i) y[i] *= csr_scale;
      }
    } else {
      std::fill(y.begin(), y.end(), 0.0);
    }
    if (diag) {
      for (int i = 0; i < n; ++i) y[i] += diag->diag[i] * x[i];
    }
  }

  std::vector<double> diagonal() const {
    const int n = size();
    std::vector<double> d(n, 0.0);
    if (csr) {
      for (int r = 0; r < n; ++r) d[r] = csr_scale * (*csr)(r, r);
    }
    if (diag) {
      for (int i = 0; i < n; ++i) d[i] += diag->diag[i];
    }
    return d;
  }
};

struct SolveStats {
  int iterations = 0;
  double final_relative_residual = 0.0;
};

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, SolveStats s)
      : std::runtime_error(what), stats(s) {}

  SolveStats stats;
};

enum class Precond { none, jacobi };

struct CgOptions {
  double tol = 1e-10;  // relative residual ||b - Sx|| / ||b||
  int max_iter = 10000;
  Precond precond = Precond::jacobi;
};

namespace detail {

inline double dot_vec(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot_vec(a, a)); }

}  // namespace detail

// Preconditioned conjugate gradients. `x` carries the initial guess on entry
// and the solution on success; non-convergence throws with the achieved
// residual attached.
inline SolveStats cg_solve(const SpdOperator& s, std::span<const double> b,
                           std::span<double> x, const CgOptions& opt = {}) {
  const int n = s.size();
  if (static_cast<int>(b.size()) != n || static_cast<int>(x.size()) != n) {
    throw std::invalid_argument("cg_solve: dimension mismatch");
  }
  const double norm_b = detail::norm2(b);
  SolveStats stats;
  if (norm_b == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return stats;
  }

  std::vector<double> inv_precond;
  if (opt.precond == Precond::jacobi) {
    inv_precond = s.diagonal();
    for (double& d : inv_precond) {
      if (d <= 0.0) throw std::invalid_argument("cg_solve: nonpositive diagonal entry");
      d = 1.0 / d;
    }
  }

  std::vector<double> r(n), z(n), p(n), sp(n);
  s.apply(x, r);
  for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];

  auto apply_precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    if (inv_precond.empty()) {
      out = in;
    } else {
      for (int i = 0; i < n; ++i) out[i] = inv_precond[i] * in[i];
    }
  };

  apply_precond(r, z);
  p = z;
  double rz = detail::dot_vec(r, z);
  double res = detail::norm2(r) / norm_b;
  stats.final_relative_residual = res;

  while (res > opt.tol) {
    if (stats.iterations >= opt.max_iter) {
      throw SolverFailure("cg_solve: no convergence after " +
                              std::to_string(stats.iterations) +
                              " iterations (relative residual " + std::to_string(res) + ")",
                          stats);
    }
    s.apply(p, sp);
    const double psp = detail::dot_vec(p, sp);
    if (!(psp > 0.0)) {
      throw SolverFailure("cg_solve: operator is not positive definite", stats);
    }
    const double alpha = rz / psp;
    for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (int i = 0; i < n; ++i) r[i] -= alpha * sp[i];
    apply_precond(r, z);
    const double rz_next = detail::dot_vec(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    ++stats.iterations;
    res = detail::norm2(r) / norm_b;
    stats.final_relative_residual = res;
  }
  return stats;
}

// Column j of (M + s A)^{-1} M for diagonal M, by one CG solve with right-hand
// side M e_j.
inline std::vector<double> solve_operator_column_check(const DiagMatrix& lumped_mass,
                                                       const CsrMatrix& stiffness, double s,
                                                       int j, const CgOptions& opt = {}) {
  if (s < 0.0) throw std::invalid_argument("solve_operator_column_check: s must be >= 0");
  if (j < 0 || j >= lumped_mass.size()) {
    throw std::out_of_range("solve_operator_column_check: column index out of range");
  }
  const int n = lumped_mass.size();
  std::vector<double> b(n, 0.0);
  b[j] = lumped_mass.diag[j];
  std::vector<double> x(n, 0.0);
  SpdOperator op{&stiffness, s, &lumped_mass};
  cg_solve(op, b, x, opt);
  return x;
}

// Debug dump: one "row col value" triplet per line.
inline void dump_triplets(const CsrMatrix& a, std::ostream& out) {
  out.precision(17);
  for (int r = 0; r < a.n_rows; ++r) {
    for (int k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
      out << r << ' ' << a.col_indices[k] << ' ' << a.values[k] << '\n';
    }
  }
}

}  // namespace surfrd
