#include "hhg/coarse_solver.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

#include "hhg/flops.hpp"

namespace hhg {

namespace {

void swap_symmetric(Eigen::MatrixXd& a, Eigen::Index i, Eigen::Index j) {
  if (i == j) return;
  a.row(i).swap(a.row(j));
  a.col(i).swap(a.col(j));
}

}  // namespace

void SymmetricIndefiniteLDLT::compute(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("SymmetricIndefiniteLDLT: matrix is not square");
  const double alpha = (1.0 + std::sqrt(17.0)) / 8.0;
  const Eigen::Index n = a.rows();
  lu_ = a;
  piv_.assign(n, 0);
  block_.assign(n, 0);
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  const double tiny = 1e-14 * scale;

  Eigen::Index k = 0;
  while (k < n) {
    const double absakk = std::abs(lu_(k, k));
    Eigen::Index imax = k;
    double colmax = 0.0;
    if (k + 1 < n) {
      colmax = lu_.col(k).tail(n - k - 1).cwiseAbs().maxCoeff(&imax);
      imax += k + 1;
    }
    if (std::max(absakk, colmax) <= tiny) throw std::runtime_error("SymmetricIndefiniteLDLT: singular matrix");

    int step = 1;
    Eigen::Index kp = k;
    if (absakk < alpha * colmax) {
      double rowmax = 0.0;
      for (Eigen::Index j = k; j < n; ++j)
        if (j != imax) rowmax = std::max(rowmax, std::abs(lu_(imax, j)));
      if (absakk * rowmax >= alpha * colmax * colmax) {
        kp = k;
      } else if (std::abs(lu_(imax, imax)) >= alpha * rowmax) {
        kp = imax;
      } else {
        kp = imax;
        step = 2;
      }
    }
    const Eigen::Index kk = k + step - 1;
    piv_[kk] = kp;
    swap_symmetric(lu_, kk, kp);
    // Keep earlier columns of L consistent with the interchange: rows were
    // swapped with the full rows above, columns < k hold L and are fine.

    const Eigen::Index rest = n - k - step;
    if (step == 1) {
      const double d = lu_(k, k);
      if (std::abs(d) <= tiny) throw std::runtime_error("SymmetricIndefiniteLDLT: singular matrix");
      if (rest > 0) {
        const Eigen::VectorXd w = lu_.col(k).tail(rest);
        lu_.bottomRightCorner(rest, rest).noalias() -= (w / d) * w.transpose();
        lu_.col(k).tail(rest) = w / d;
      }
      block_[k] = 1;
    } else {
      const Eigen::Matrix2d d = lu_.block(k, k, 2, 2);
      if (std::abs(d.determinant()) <= tiny * tiny) throw std::runtime_error("SymmetricIndefiniteLDLT: singular matrix");
      if (rest > 0) {
        const Eigen::MatrixXd w = lu_.block(k + 2, k, rest, 2);
        const Eigen::MatrixXd l = w * d.inverse();
        lu_.bottomRightCorner(rest, rest).noalias() -= l * w.transpose();
        lu_.block(k + 2, k, rest, 2) = l;
      }
      block_[k] = 2;
      block_[k + 1] = 0;
      piv_[k] = k;
    }
    k += step;
  }
}

Eigen::VectorXd SymmetricIndefiniteLDLT::solve(const Eigen::VectorXd& b) const {
  const Eigen::Index n = lu_.rows();
  if (b.size() != n) throw std::invalid_argument("SymmetricIndefiniteLDLT: size mismatch");
  Eigen::VectorXd x = b;
  for (Eigen::Index k = 0; k < n; ++k) std::swap(x[k], x[piv_[k]]);
  // L y = P b
  for (Eigen::Index k = 0; k < n;) {
    const int s = block_[k];
    const Eigen::Index rest = n - k - s;
    if (rest > 0) x.tail(rest).noalias() -= lu_.block(k + s, k, rest, s) * x.segment(k, s);
    k += s;
  }
  // D z = y
  for (Eigen::Index k = 0; k < n;) {
    const int s = block_[k];
    if (s == 1) {
      x[k] /= lu_(k, k);
    } else {
      const Eigen::Matrix2d d = lu_.block(k, k, 2, 2);
      x.segment(k, 2) = d.inverse() * Eigen::Vector2d(x.segment(k, 2));
    }
    k += s;
  }
  // L^T w = z
  for (Eigen::Index k = n; k > 0;) {
    Eigen::Index start = k - 1;
    if (start > 0 && block_[start] == 0) --start;
    const int s = block_[start];
    const Eigen::Index rest = n - start - s;
    if (rest > 0) x.segment(start, s).noalias() -= lu_.block(start + s, start, rest, s).transpose() * x.tail(rest);
    k = start;
  }
  for (Eigen::Index k = n; k-- > 0;) std::swap(x[k], x[piv_[k]]);
  return x;
}

int SymmetricIndefiniteLDLT::num_two_by_two_blocks() const {
  int c = 0;
  for (int b : block_) c += b == 2;
  return c;
}

CoarseSolver::CoarseSolver(const StokesOperator& op)
    : op_(&op), n_(op.num_unknowns()), bordered_(op.fully_dirichlet()) {
  const Eigen::Index n = static_cast<Eigen::Index>(n_);
  const Eigen::Index dim = bordered_ ? n + 1 : n;
  matrix_ = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& t : op.export_triplets(0)) matrix_(t.row(), t.col()) += t.value();
  if (bordered_) {
    const auto& ps = *op.pressure_space();
    const Eigen::Index p0 = 3 * static_cast<Eigen::Index>(op.num_velocity_dofs());
    const auto& ml = op.pressure_lumped_mass();
    for (std::size_t d = 0; d < ps.num_dofs(); ++d) {
      const double w = ml[ps.owned_slots()[d]];
      matrix_(n, p0 + static_cast<Eigen::Index>(d)) = w;
      matrix_(p0 + static_cast<Eigen::Index>(d), n) = w;
    }
  }
  ldlt_.compute(matrix_);
}

void CoarseSolver::solve(const StokesVector& b, StokesVector& x) const {
  const Eigen::Index n = static_cast<Eigen::Index>(n_);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(matrix_.rows());
  rhs.head(n) = op_->to_vector(b);
  const Eigen::VectorXd sol = ldlt_.solve(rhs);
  // Two triangular solves and the block-diagonal solve.
  const auto m = static_cast<std::uint64_t>(matrix_.rows());
  flops::add(2 * m * m + 3 * m);
  op_->from_vector(sol.head(n), x);
  if (bordered_) op_->project_pressure_mean_zero(x.p);
}

}  // namespace hhg
