#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace resilient {

using Index = Eigen::Index;

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by solve/inverse when the system matrix is singular within tolerance.
class SingularMatrixError : public LinalgError {
 public:
  SingularMatrixError(const std::string& what, double condition_estimate)
      : LinalgError(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

class NotPositiveDefiniteError : public LinalgError {
 public:
  using LinalgError::LinalgError;
};

/// Dense real matrix with finite entries.
///
/// Every constructor rejects NaN and Inf, so a `Matrix` that exists is always
/// finite. Arithmetic results are re-checked, which turns overflow into an
/// exception rather than a silently poisoned value.
class Matrix {
 public:
  Matrix() = default;
  Matrix(Index rows, Index cols);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);
  explicit Matrix(Eigen::MatrixXd values);

  static Matrix zeros(Index rows, Index cols) { return Matrix(rows, cols); }
  static Matrix identity(Index n);
  static Matrix diagonal(std::span<const double> entries);
  static Matrix column(std::span<const double> entries);
  /// Row-major construction; `entries.size()` must equal rows*cols.
  static Matrix from_row_major(Index rows, Index cols, std::span<const double> entries);

  Index rows() const noexcept { return values_.rows(); }
  Index cols() const noexcept { return values_.cols(); }
  bool is_square() const noexcept { return rows() == cols(); }
  bool empty() const noexcept { return values_.size() == 0; }

  double operator()(Index r, Index c) const { return values_(r, c); }
  const Eigen::MatrixXd& eigen() const noexcept { return values_; }

  std::vector<double> row_major() const;
  Matrix transpose() const;
  Matrix block(Index row, Index col, Index rows, Index cols) const;
  double norm() const { return values_.norm(); }
  double max_abs() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }
  friend Matrix operator-(Matrix a) { return a *= -1.0; }
  friend Matrix operator*(const Matrix& a, const Matrix& b);

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a.values_ == b.values_;
  }

 private:
  Eigen::MatrixXd values_;
};

/// Throws LinalgError naming `what` if any entry is not finite.
void require_finite(const Eigen::MatrixXd& m, const std::string& what);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

struct SvdResult {
  Matrix U;                       ///< rows × rows, orthonormal
  std::vector<double> singular;   ///< nonincreasing, length min(rows, cols)
  Matrix V;                       ///< cols × cols, orthonormal
};

/// Full SVD: m == U · diag(S) · Vᵀ with diag(S) padded to m's shape.
SvdResult svd(const Matrix& m);

struct SymmetricEigen {
  std::vector<double> values;  ///< ascending
  Matrix vectors;              ///< column i pairs with values[i]
};

/// Eigen-decomposition of a symmetric matrix. The input is symmetrized as
/// (M + Mᵀ)/2 first; inputs whose asymmetry exceeds `symmetry_tol`·max(1, ‖M‖)
/// are rejected.
SymmetricEigen sym_eig(const Matrix& m, double symmetry_tol = 1e-9);
std::vector<double> sym_eigenvalues(const Matrix& m, double symmetry_tol = 1e-9);
double lambda_max(const Matrix& m, double symmetry_tol = 1e-9);

/// max |λ| over the complex spectrum of a square matrix.
double spectral_radius(const Matrix& m);

Matrix kron(const Matrix& a, const Matrix& b);

/// Column-stacking vectorization; vec(A·M·Bᵀ) == kron(B, A)·vec(M).
Matrix vec(const Matrix& m);
Matrix unvec(const Matrix& v, Index rows, Index cols);

/// 2-norm condition number σmax/σmin (infinity when σmin == 0).
double condition_number(const Matrix& m);

/// Solves a·x = b. Throws SingularMatrixError when σmin ≤ singular_tol·σmax.
Matrix solve(const Matrix& a, const Matrix& b, double singular_tol = 1e-12);
Matrix inverse(const Matrix& a, double singular_tol = 1e-12);

/// Lower-triangular factor L with a = L·Lᵀ; throws NotPositiveDefiniteError.
Matrix cholesky(const Matrix& a, double tol = 1e-12);
bool is_positive_definite(const Matrix& a, double tol = 1e-12);

Matrix symmetrize(const Matrix& m);

/// Assembles a matrix from a grid of blocks. All blocks in a grid row share
/// a row count; all blocks in a grid column share a column count. Zero-sized
/// blocks are allowed.
Matrix block_matrix(const std::vector<std::vector<Matrix>>& grid);

/// Block-diagonal concatenation.
Matrix block_diagonal(const std::vector<Matrix>& blocks);

}  // namespace resilient
