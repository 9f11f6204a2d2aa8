#include "qplab/linalg.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "qplab/error.hpp"

namespace qplab {

LogLU::LogLU(Matrix a) : lu_(std::move(a)) {
  if (lu_.rows() != lu_.cols()) throw Error(ErrorKind::InvalidArgument, "LogLU needs a square matrix");
  const Eigen::Index n = lu_.rows();
  perm_.resize(static_cast<std::size_t>(n));
  std::iota(perm_.begin(), perm_.end(), Eigen::Index{0});
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index p = k;
    lu_.col(k).tail(n - k).cwiseAbs().maxCoeff(&p);
    p += k;
    const double pivot = lu_(p, k);
    if (!(std::abs(pivot) >= kPivotUnderflow)) {
      singular_ = true;
      logabs_ = -std::numeric_limits<double>::infinity();
      return;
    }
    if (p != k) {
      lu_.row(k).swap(lu_.row(p));
      std::swap(perm_[static_cast<std::size_t>(k)], perm_[static_cast<std::size_t>(p)]);
      parity_ = -parity_;
    }
    if (pivot < 0.0) parity_ = -parity_;
    logabs_ += std::log(std::abs(pivot));
    const Eigen::Index rest = n - k - 1;
    if (rest == 0) continue;
    lu_.col(k).tail(rest) /= pivot;
    lu_.bottomRightCorner(rest, rest).noalias() -= lu_.col(k).tail(rest) * lu_.row(k).tail(rest);
  }
}

LogDet LogLU::logdet() const noexcept {
  if (singular_) return {-std::numeric_limits<double>::infinity(), 0};
  return {logabs_, parity_};
}

Matrix LogLU::solve(const Matrix& rhs) const {
  if (singular_) throw Error(ErrorKind::SingularWindow, "matrix is numerically singular");
  const Eigen::Index n = lu_.rows();
  Matrix x(n, rhs.cols());
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = rhs.row(perm_[static_cast<std::size_t>(i)]);
  lu_.triangularView<Eigen::UnitLower>().solveInPlace(x);
  lu_.triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Matrix LogLU::inverse() const { return solve(Matrix::Identity(lu_.rows(), lu_.rows())); }

LogDet logdet(const Matrix& a) { return LogLU(a).logdet(); }

double hadamard_log_bound(const Matrix& a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) s += std::log(a.row(i).norm());
  return s;
}

Matrix delete_row_col(const Matrix& a, Eigen::Index drop_row, Eigen::Index drop_col) {
  const Eigen::Index n = a.rows(), m = a.cols();
  Matrix out(n - 1, m - 1);
  for (Eigen::Index i = 0, oi = 0; i < n; ++i) {
    if (i == drop_row) continue;
    for (Eigen::Index j = 0, oj = 0; j < m; ++j) {
      if (j == drop_col) continue;
      out(oi, oj++) = a(i, j);
    }
    ++oi;
  }
  return out;
}

}  // namespace qplab
