#pragma once

// Sparse linear algebra, backed by Eigen: SPD operators, a cached direct
// factorization, unpreconditioned CG, and MatrixMarket debug dumps.

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <ostream>

#include "aifem/geometry.hpp"

namespace aifem {

using SparseOperator = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

class DirectSolver {
 public:
  explicit DirectSolver(const SparseOperator& A) {
    ldlt_.compute(A);
    if (ldlt_.info() != Eigen::Success)
      throw Error("DirectSolver: factorization failed (matrix singular?)");
  }
  Vector solve(const Vector& b) const { return ldlt_.solve(b); }

 private:
  Eigen::SimplicialLDLT<SparseOperator> ldlt_;
};

inline Vector solve_direct(const SparseOperator& A, const Vector& b) {
  return DirectSolver(A).solve(b);
}

inline std::pair<Vector, int> solve_cg(const SparseOperator& A,
                                       const Vector& b, double tol,
                                       int max_iters = 100000) {
  Eigen::ConjugateGradient<SparseOperator, Eigen::Lower | Eigen::Upper,
                           Eigen::IdentityPreconditioner>
      cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(max_iters);
  cg.compute(A);
  Vector x = cg.solve(b);
  return {x, int(cg.iterations())};
}

inline bool is_symmetric(const SparseOperator& A, double rel_tol = 1e-12) {
  const SparseOperator At = SparseOperator(A.transpose());
  const double scale = A.coeffs().abs().maxCoeff();
  for (int k = 0; k < A.outerSize(); ++k) {
    SparseOperator::InnerIterator it(A, k), jt(At, k);
    for (; it; ++it, ++jt) {
      if (!jt || it.row() != jt.row()) return false;
      if (std::abs(it.value() - jt.value()) > rel_tol * scale) return false;
    }
    if (jt) return false;
  }
  return true;
}

inline void write_matrix_market(std::ostream& os, const SparseOperator& A) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
  char buf[80];
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseOperator::InnerIterator it(A, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.16e\n", long(it.row()) + 1,
                    long(it.col()) + 1, it.value());
      os << buf;
    }
}

inline void write_vector_market(std::ostream& os, const Vector& v) {
  os << "%%MatrixMarket matrix array real general\n";
  os << v.size() << " 1\n";
  char buf[48];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.16e\n", v[i]);
    os << buf;
  }
}

}  // namespace aifem
