// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include "gapdg/common.hpp"

namespace gapdg {

/// Compressed-row sparse matrix with sorted, unique column indices per row.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_offsets;  // size rows+1
  std::vector<int> col_indices;
  std::vector<double> values;

  int nnz() const { return static_cast<int>(values.size()); }
};

/// y = A x.
inline std::vector<double> matvec(const SparseMatrix& A, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != A.cols)
    throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<double> y(A.rows, 0.0);
  for (int r = 0; r < A.rows; ++r) {
    double s = 0;
    for (int k = A.row_offsets[r]; k < A.row_offsets[r + 1]; ++k)
      s += A.values[k] * x[A.col_indices[k]];
    y[r] = s;
  }
  return y;
}

enum class SolveMethod { direct_lu, gmres };

namespace detail {
inline Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& A) {
  Eigen::SparseMatrix<double> M(A.rows, A.cols);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(A.values.size());
  for (int r = 0; r < A.rows; ++r)
    for (int k = A.row_offsets[r]; k < A.row_offsets[r + 1]; ++k)
      trips.emplace_back(r, A.col_indices[k], A.values[k]);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}
}  // namespace detail

/// Solve A x = b. direct_lu uses a sparse LU factorization with partial
/// (threshold) pivoting; gmres restarts at 200 with diagonal
/// preconditioning, at most 10 restart cycles. The relative residual
/// ||Ax - b|| / ||b|| <= tol is asserted on return.
inline std::vector<double> solve(const SparseMatrix& A, const std::vector<double>& b,
                                 SolveMethod method = SolveMethod::direct_lu,
                                 double tol = 1e-10) {
  if (A.rows != A.cols || static_cast<int>(b.size()) != A.rows)
    throw std::invalid_argument("solve: dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> bv(b.data(), b.size());
  if (bv.norm() == 0.0) return std::vector<double>(A.rows, 0.0);

  const Eigen::SparseMatrix<double> M = detail::to_eigen(A);
  Eigen::VectorXd x;
  if (method == SolveMethod::direct_lu) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success) throw SolverError("solve: singular factorization");
    x = lu.solve(bv);
    // iterative refinement; the raw factorization residual tracks the
    // condition number, which grows under mesh refinement
    for (int it = 0; it < 3; ++it) {
      const Eigen::VectorXd r = bv - M * x;
      if (r.norm() <= 0.1 * tol * bv.norm()) break;
      x += lu.solve(r);
    }
  } else {
    Eigen::GMRES<Eigen::SparseMatrix<double>, Eigen::DiagonalPreconditioner<double>> gmres;
    gmres.set_restart(200);
    gmres.setMaxIterations(10 * 200);
    // the stopping test sees the preconditioned residual; aim lower so the
    // true-residual postcondition below holds
    gmres.setTolerance(0.05 * tol);
    gmres.compute(M);
    x = gmres.solve(bv);
    if (gmres.info() != Eigen::Success)
      throw SolverError("solve: gmres did not converge within 10 restarts");
  }
  const double rel = (M * x - bv).norm() / bv.norm();
  if (!(rel <= tol)) {
    char msg[96];
    std::snprintf(msg, sizeof(msg), "solve: residual %.3e exceeds tolerance %.3e", rel, tol);
    throw SolverError(msg);
  }
  return std::vector<double>(x.data(), x.data() + x.size());
}

/// MatrixMarket coordinate dump (1-based indices, full precision).
inline void write_matrix_market(const std::string& path, const SparseMatrix& A) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_matrix_market: cannot open " + path);
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.rows << " " << A.cols << " " << A.nnz() << "\n";
  char buf[64];
  for (int r = 0; r < A.rows; ++r)
    for (int k = A.row_offsets[r]; k < A.row_offsets[r + 1]; ++k) {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", r + 1, A.col_indices[k] + 1,
                    A.values[k]);
      os << buf;
    }
}

}  // namespace gapdg
