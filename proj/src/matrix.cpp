#include "scorelab/matrix.hpp"

#include <cmath>
#include <string>

#include "scorelab/errors.hpp"
#include "scorelab/kernels.hpp"

namespace scorelab {

Matrix::Matrix(std::size_t rows, std::size_t cols,
               std::initializer_list<double> v)
    : rows_(rows), cols_(cols), a_(v) {
  if (a_.size() != rows * cols)
    throw validation_error("Matrix: initializer size does not match shape");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw validation_error("multiply: inner dimensions do not match");
  const Matrix bt = transpose(b);
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      c(i, j) = kernels::dot(a.row(i), bt.row(j));
  return c;
}

std::vector<double> multiply(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size())
    throw validation_error("multiply: vector length does not match");
  std::vector<double> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = kernels::dot(a.row(i), x);
  return y;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

void require_symmetric(const Matrix& a, const char* context) {
  if (a.rows() != a.cols())
    throw domain_error(std::string(context) + ": matrix is not square");
  const double scale = 1.0 + kernels::max_abs(a.data());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::fabs(a(i, j) - a(j, i)) > 1e-10 * scale)
        throw domain_error(std::string(context) + ": matrix is not symmetric (entry " +
                           std::to_string(i) + "," + std::to_string(j) + ")");
}

Cholesky Cholesky::factor(const Matrix& a) {
  require_symmetric(a, "Cholesky");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::span<const double> lj = l.row(j).subspan(0, j);
    const double d = a(j, j) - kernels::dot(lj, lj);
    if (!(d > 0.0))
      throw not_spd_error(j, "Cholesky: non-positive pivot at index " +
                                 std::to_string(j));
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      const std::span<const double> li = l.row(i).subspan(0, j);
      l(i, j) = (a(i, j) - kernels::dot(li, lj)) / l(j, j);
    }
  }
  return Cholesky(std::move(l));
}

std::vector<double> Cholesky::solve(std::span<const double> b) const {
  const std::size_t n = l_.rows();
  if (b.size() != n) throw validation_error("Cholesky::solve: size mismatch");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = (b[i] - kernels::dot(l_.row(i).subspan(0, i),
                                std::span<const double>(y.data(), i))) /
           l_(i, i);
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = y[k];
    for (std::size_t i = k + 1; i < n; ++i) s -= l_(i, k) * x[i];
    x[k] = s / l_(k, k);
  }
  return x;
}

Matrix Cholesky::solve(const Matrix& b) const {
  if (b.rows() != l_.rows())
    throw validation_error("Cholesky::solve: row count mismatch");
  Matrix x(b.rows(), b.cols());
  std::vector<double> col(b.rows());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
    const std::vector<double> xj = solve(col);
    for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = xj[i];
  }
  return x;
}

double Cholesky::log_det() const {
  double s = 0.0;
  for (std::size_t i = 0; i < l_.rows(); ++i) s += std::log(l_(i, i));
  return 2.0 * s;
}

std::vector<double> solve_spd(const Matrix& a, std::span<const double> b) {
  return Cholesky::factor(a).solve(b);
}

Matrix inverse_spd(const Matrix& a) {
  return Cholesky::factor(a).solve(Matrix::identity(a.rows()));
}

std::size_t gram_rank(const Matrix& x, double tol) {
  const std::size_t p = x.cols();
  if (p == 0) return 0;
  const Matrix xt = transpose(x);
  Matrix g(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      g(i, j) = kernels::dot(xt.row(i), xt.row(j));

  // Diagonally pivoted Cholesky: stop when the best remaining pivot falls
  // below tol relative to the largest initial diagonal entry.
  double max_diag = 0.0;
  for (std::size_t i = 0; i < p; ++i) max_diag = std::max(max_diag, g(i, i));
  if (max_diag <= 0.0) return 0;

  std::vector<std::size_t> perm(p);
  for (std::size_t i = 0; i < p; ++i) perm[i] = i;
  Matrix l(p, p);
  std::size_t rank = 0;
  for (std::size_t k = 0; k < p; ++k) {
    std::size_t best = k;
    for (std::size_t i = k + 1; i < p; ++i)
      if (g(perm[i], perm[i]) > g(perm[best], perm[best])) best = i;
    std::swap(perm[k], perm[best]);
    const double d = g(perm[k], perm[k]);
    if (d <= tol * max_diag) break;
    const double lkk = std::sqrt(d);
    ++rank;
    for (std::size_t i = k + 1; i < p; ++i) {
      double s = g(perm[i], perm[k]);
      for (std::size_t j = 0; j < k; ++j) s -= l(perm[i], j) * l(perm[k], j);
      l(perm[i], k) = s / lkk;
      g(perm[i], perm[i]) -= l(perm[i], k) * l(perm[i], k);
    }
    l(perm[k], k) = lkk;
  }
  return rank;
}

}  // namespace scorelab
