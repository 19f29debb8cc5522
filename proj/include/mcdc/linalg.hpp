#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mcdc {

using Vec = std::vector<double>;

/// Small dense row-major matrix.  Everything in this project is tiny
/// (covariances and transforms, typically 2x2), so this favours clarity over
/// blocking or expression templates.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Builds a matrix from nested initializer-style rows.
  static Matrix from_rows(const std::vector<Vec>& rows);
  static Matrix identity(std::size_t n);

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  const std::vector<double>& data() const { return data_; }

  Matrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vec mat_vec(const Matrix& a, std::span<const double> x);

/// Max absolute entry-wise difference; matrices must have equal shape.
double max_abs_diff(const Matrix& a, const Matrix& b);

bool is_symmetric(const Matrix& a, double tol = 1e-12);
double trace(const Matrix& a);

/// Cholesky factorization a = L L^T for symmetric positive definite `a`.
/// Writes the lower factor into `lower` and returns true; returns false if a
/// non-positive pivot is met (matrix not positive definite).
bool cholesky(const Matrix& a, Matrix& lower);

/// log det(a) given its lower Cholesky factor.
double chol_log_det(const Matrix& lower);

/// Solves L y = b by forward substitution.
Vec chol_forward_solve(const Matrix& lower, std::span<const double> b);

/// Inverse by Gauss-Jordan elimination with partial pivoting.  Throws
/// NumericError on a (near-)singular matrix.
Matrix invert(const Matrix& a);

/// Smallest eigenvalue of a symmetric matrix via cyclic Jacobi rotations.
double smallest_eigenvalue_sym(const Matrix& a);

}  // namespace mcdc
