#pragma once

#include <Eigen/Dense>
#include <vector>

namespace qplab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// log|det| with the sign of det; sign == 0 marks a singular matrix and then
/// logabs == -infinity.
struct LogDet {
  double logabs;
  int sign;
};

/// Pivots smaller than this in magnitude are treated as exact zeros.
inline constexpr double kPivotUnderflow = 1e-300;

/// Row-pivoted LU factorization that accumulates the determinant as a sum of
/// log|pivot| plus a sign, so it never overflows or underflows.
class LogLU {
 public:
  explicit LogLU(Matrix a);

  Eigen::Index size() const noexcept { return lu_.rows(); }
  bool singular() const noexcept { return singular_; }
  LogDet logdet() const noexcept;

  /// Solves A X = rhs. Throws SingularWindow when singular().
  Matrix solve(const Matrix& rhs) const;
  Matrix inverse() const;

 private:
  Matrix lu_;
  std::vector<Eigen::Index> perm_;  // row i of PA is row perm_[i] of A
  int parity_ = 1;
  bool singular_ = false;
  double logabs_ = 0.0;
};

LogDet logdet(const Matrix& a);

/// sum_k log ||row_k||_2, the Hadamard ceiling on log|det|.
double hadamard_log_bound(const Matrix& a);

/// Matrix with row `drop_row` and column `drop_col` removed.
Matrix delete_row_col(const Matrix& a, Eigen::Index drop_row, Eigen::Index drop_col);

}  // namespace qplab
