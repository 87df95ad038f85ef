#pragma once

#include <vector>

#include <Eigen/Core>

#include "hhg/stokes_operator.hpp"

namespace hhg {

// Dense symmetric-indefinite factorization P A P^T = L D L^T with
// Bunch-Kaufman pivoting (1x1 and 2x2 diagonal blocks).
class SymmetricIndefiniteLDLT {
 public:
  SymmetricIndefiniteLDLT() = default;
  explicit SymmetricIndefiniteLDLT(const Eigen::MatrixXd& a) { compute(a); }

  // Throws std::runtime_error if a pivot block vanishes, i.e. the matrix is
  // singular to working precision.
  void compute(const Eigen::MatrixXd& a);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  Eigen::Index size() const { return lu_.rows(); }
  int num_two_by_two_blocks() const;

 private:
  Eigen::MatrixXd lu_;            // unit lower factor below the diagonal, D on the block diagonal
  std::vector<Eigen::Index> piv_;  // row interchanged with k at step k
  std::vector<int> block_;         // 1 or 2 at the first index of each block, 0 at the second
};

// Direct solver of the level-0 Stokes system. If the pressure is determined
// only up to a constant, the system is bordered with the mean constraint
// e^T p = 0, e = M 1, and the result is mean-projected.
class CoarseSolver {
 public:
  explicit CoarseSolver(const StokesOperator& op);

  void solve(const StokesVector& b, StokesVector& x) const;
  std::size_t num_unknowns() const { return n_; }
  bool bordered() const { return bordered_; }

 private:
  const StokesOperator* op_;
  std::size_t n_;
  bool bordered_;
  Eigen::MatrixXd matrix_;
  SymmetricIndefiniteLDLT ldlt_;
};

}  // namespace hhg
