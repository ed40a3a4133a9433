#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace scorelab {

/// Dense row-major matrix of doubles.  Sized for the problems in this
/// library (parameter blocks up to ~10, precision matrices up to a few
/// hundred), so the implementation favours clarity and exact error
/// semantics over large-scale performance.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> v);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a_[i * cols_ + j];
  }

  std::span<const double> row(std::size_t i) const {
    return {a_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) {
    return {a_.data() + i * cols_, cols_};
  }

  std::span<const double> data() const { return a_; }
  std::span<double> data() { return a_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

Matrix multiply(const Matrix& a, const Matrix& b);
std::vector<double> multiply(const Matrix& a, std::span<const double> x);
Matrix transpose(const Matrix& a);

/// max |a(i,j)| relative asymmetry check; throws domain_error when the
/// matrix fails to be symmetric within a 1e-10 relative tolerance.
void require_symmetric(const Matrix& a, const char* context);

/// Cholesky factorization A = L·Lᵀ of a symmetric positive definite matrix.
/// Construction validates symmetry (1e-10 relative) and reports the pivot
/// index on the first non-positive pivot via not_spd_error.
class Cholesky {
 public:
  static Cholesky factor(const Matrix& a);

  std::vector<double> solve(std::span<const double> b) const;
  Matrix solve(const Matrix& b) const;

  /// log det A  (twice the log-product of the factor's diagonal)
  double log_det() const;

  const Matrix& lower() const { return l_; }

 private:
  explicit Cholesky(Matrix l) : l_(std::move(l)) {}
  Matrix l_;
};

std::vector<double> solve_spd(const Matrix& a, std::span<const double> b);
Matrix inverse_spd(const Matrix& a);

/// Numerical rank of the Gram matrix XᵀX via diagonally pivoted Cholesky.
/// `tol` is relative to the largest initial diagonal entry.
std::size_t gram_rank(const Matrix& x, double tol = 1e-10);

}  // namespace scorelab
