#include "resilient/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace resilient {

namespace {

std::string shape(Index r, Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

}  // namespace

void require_finite(const Eigen::MatrixXd& m, const std::string& what) {
  if (!m.allFinite()) throw LinalgError(what + ": non-finite entry");
}

Matrix::Matrix(Index rows, Index cols) {
  if (rows < 0 || cols < 0) throw LinalgError("Matrix: negative dimension");
  values_ = Eigen::MatrixXd::Zero(rows, cols);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Index>(rows.size());
  const auto c = r == 0 ? Index{0} : static_cast<Index>(rows.begin()->size());
  values_.resize(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Index>(row.size()) != c) throw LinalgError("Matrix: ragged initializer");
    Index j = 0;
    for (double v : row) values_(i, j++) = v;
    ++i;
  }
  require_finite(values_, "Matrix");
}

Matrix::Matrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  require_finite(values_, "Matrix");
}

Matrix Matrix::identity(Index n) { return Matrix(Eigen::MatrixXd::Identity(n, n)); }

Matrix Matrix::diagonal(std::span<const double> entries) {
  const auto n = static_cast<Index>(entries.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) d(i, i) = entries[static_cast<std::size_t>(i)];
  return Matrix(std::move(d));
}

Matrix Matrix::column(std::span<const double> entries) {
  return from_row_major(static_cast<Index>(entries.size()), 1, entries);
}

Matrix Matrix::from_row_major(Index rows, Index cols, std::span<const double> entries) {
  if (static_cast<Index>(entries.size()) != rows * cols)
    throw LinalgError("Matrix: " + std::to_string(entries.size()) + " entries for shape " +
                      shape(rows, cols));
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = entries[static_cast<std::size_t>(i * cols + j)];
  return Matrix(std::move(m));
}

std::vector<double> Matrix::row_major() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(values_.size()));
  for (Index i = 0; i < rows(); ++i)
    for (Index j = 0; j < cols(); ++j) out.push_back(values_(i, j));
  return out;
}

Matrix Matrix::transpose() const { return Matrix(Eigen::MatrixXd(values_.transpose())); }

Matrix Matrix::block(Index row, Index col, Index r, Index c) const {
  if (row < 0 || col < 0 || r < 0 || c < 0 || row + r > rows() || col + c > cols())
    throw LinalgError("Matrix::block: out of range");
  return Matrix(Eigen::MatrixXd(values_.block(row, col, r, c)));
}

double Matrix::max_abs() const { return values_.size() == 0 ? 0.0 : values_.cwiseAbs().maxCoeff(); }

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows() != other.rows() || cols() != other.cols())
    throw LinalgError("add: " + shape(rows(), cols()) + " vs " + shape(other.rows(), other.cols()));
  values_ += other.values_;
  require_finite(values_, "add");
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows() != other.rows() || cols() != other.cols())
    throw LinalgError("subtract: " + shape(rows(), cols()) + " vs " +
                      shape(other.rows(), other.cols()));
  values_ -= other.values_;
  require_finite(values_, "subtract");
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  values_ *= s;
  require_finite(values_, "scale");
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) { return matmul(a, b); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw LinalgError("matmul: " + shape(a.rows(), a.cols()) + " times " +
                      shape(b.rows(), b.cols()));
  return Matrix(Eigen::MatrixXd(a.eigen() * b.eigen()));
}

Matrix transpose(const Matrix& m) { return m.transpose(); }

SvdResult svd(const Matrix& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> solver(m.eigen(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = solver.singularValues();
  return {Matrix(solver.matrixU()), std::vector<double>(s.data(), s.data() + s.size()),
          Matrix(solver.matrixV())};
}

Matrix symmetrize(const Matrix& m) {
  if (!m.is_square()) throw LinalgError("symmetrize: non-square matrix");
  return Matrix(Eigen::MatrixXd(0.5 * (m.eigen() + m.eigen().transpose())));
}

namespace {

Eigen::MatrixXd checked_symmetric_part(const Matrix& m, double symmetry_tol) {
  if (!m.is_square()) throw LinalgError("sym_eig: non-square matrix " + shape(m.rows(), m.cols()));
  const double asym = (m.eigen() - m.eigen().transpose()).cwiseAbs().maxCoeff();
  if (m.rows() > 0 && asym > symmetry_tol * std::max(1.0, m.max_abs())) {
    std::ostringstream os;
    os << "sym_eig: matrix is not symmetric (max |M - M^T| = " << asym << ")";
    throw LinalgError(os.str());
  }
  return 0.5 * (m.eigen() + m.eigen().transpose());
}

}  // namespace

SymmetricEigen sym_eig(const Matrix& m, double symmetry_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(checked_symmetric_part(m, symmetry_tol));
  if (solver.info() != Eigen::Success) throw LinalgError("sym_eig: no convergence");
  const auto& ev = solver.eigenvalues();
  return {std::vector<double>(ev.data(), ev.data() + ev.size()), Matrix(solver.eigenvectors())};
}

std::vector<double> sym_eigenvalues(const Matrix& m, double symmetry_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(checked_symmetric_part(m, symmetry_tol),
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw LinalgError("sym_eig: no convergence");
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double lambda_max(const Matrix& m, double symmetry_tol) {
  const auto ev = sym_eigenvalues(m, symmetry_tol);
  if (ev.empty()) throw LinalgError("lambda_max: empty matrix");
  return ev.back();
}

double spectral_radius(const Matrix& m) {
  if (!m.is_square())
    throw LinalgError("spectral_radius: non-square matrix " + shape(m.rows(), m.cols()));
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m.eigen(), false);
  if (solver.info() != Eigen::Success) throw LinalgError("spectral_radius: no convergence");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b.eigen();
  return Matrix(std::move(out));
}

Matrix vec(const Matrix& m) {
  Eigen::MatrixXd v(m.rows() * m.cols(), 1);
  for (Index j = 0; j < m.cols(); ++j) v.block(j * m.rows(), 0, m.rows(), 1) = m.eigen().col(j);
  return Matrix(std::move(v));
}

Matrix unvec(const Matrix& v, Index rows, Index cols) {
  if (v.cols() != 1 || v.rows() != rows * cols)
    throw LinalgError("unvec: vector of length " + std::to_string(v.rows()) +
                      " does not fit shape " + shape(rows, cols));
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) m.col(j) = v.eigen().block(j * rows, 0, rows, 1);
  return Matrix(std::move(m));
}

double condition_number(const Matrix& m) {
  if (m.empty()) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> solver(m.eigen());
  const auto& s = solver.singularValues();
  const double smin = s(s.size() - 1);
  return smin == 0.0 ? std::numeric_limits<double>::infinity() : s(0) / smin;
}

Matrix solve(const Matrix& a, const Matrix& b, double singular_tol) {
  if (!a.is_square()) throw LinalgError("solve: non-square system " + shape(a.rows(), a.cols()));
  if (a.rows() != b.rows())
    throw LinalgError("solve: rhs has " + std::to_string(b.rows()) + " rows, expected " +
                      std::to_string(a.rows()));
  if (a.empty()) return Matrix(0, b.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> sv(a.eigen());
  const auto& s = sv.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  const double cond = smin == 0.0 ? std::numeric_limits<double>::infinity() : smax / smin;
  if (smax == 0.0 || smin <= singular_tol * smax) {
    std::ostringstream os;
    os << "solve: matrix is singular within tolerance (condition estimate " << cond << ")";
    throw SingularMatrixError(os.str(), cond);
  }
  return Matrix(Eigen::MatrixXd(a.eigen().colPivHouseholderQr().solve(b.eigen())));
}

Matrix inverse(const Matrix& a, double singular_tol) {
  return solve(a, Matrix::identity(a.rows()), singular_tol);
}

Matrix cholesky(const Matrix& a, double tol) {
  const Eigen::MatrixXd sym = checked_symmetric_part(a, 1e-9);
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError("cholesky: matrix is not positive definite");
  Eigen::MatrixXd l = llt.matrixL();
  const double floor = tol * std::max(1.0, a.max_abs());
  for (Index i = 0; i < l.rows(); ++i)
    if (l(i, i) * l(i, i) <= floor)
      throw NotPositiveDefiniteError("cholesky: matrix is not positive definite within tolerance");
  return Matrix(std::move(l));
}

bool is_positive_definite(const Matrix& a, double tol) {
  try {
    cholesky(a, tol);
    return true;
  } catch (const LinalgError&) {
    return false;
  }
}

Matrix block_matrix(const std::vector<std::vector<Matrix>>& grid) {
  if (grid.empty()) return Matrix(0, 0);
  const std::size_t ncols = grid.front().size();
  std::vector<Index> heights(grid.size()), widths(ncols);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].size() != ncols) throw LinalgError("block_matrix: ragged block grid");
    heights[i] = grid[i].front().rows();
  }
  for (std::size_t j = 0; j < ncols; ++j) widths[j] = grid.front()[j].cols();
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = 0; j < ncols; ++j)
      if (grid[i][j].rows() != heights[i] || grid[i][j].cols() != widths[j])
        throw LinalgError("block_matrix: block (" + std::to_string(i) + "," + std::to_string(j) +
                          ") is " + shape(grid[i][j].rows(), grid[i][j].cols()) + ", expected " +
                          shape(heights[i], widths[j]));

  Index total_rows = 0, total_cols = 0;
  for (auto h : heights) total_rows += h;
  for (auto w : widths) total_cols += w;
  Eigen::MatrixXd out(total_rows, total_cols);
  Index r = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Index c = 0;
    for (std::size_t j = 0; j < ncols; ++j) {
      out.block(r, c, heights[i], widths[j]) = grid[i][j].eigen();
      c += widths[j];
    }
    r += heights[i];
  }
  return Matrix(std::move(out));
}

Matrix block_diagonal(const std::vector<Matrix>& blocks) {
  Index total_rows = 0, total_cols = 0;
  for (const auto& b : blocks) {
    total_rows += b.rows();
    total_cols += b.cols();
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(total_rows, total_cols);
  Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b.eigen();
    r += b.rows();
    c += b.cols();
  }
  return Matrix(std::move(out));
}

}  // namespace resilient
