#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace genet {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  [[nodiscard]] std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  [[nodiscard]] const std::vector<double>& data() const { return data_; }

  [[nodiscard]] Matrix transposed() const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Thin SVD, m = u * diag(values) * v^T, with k = min(rows, cols).
/// `values` is non-increasing. Columns of u for zero singular values are zero.
struct ThinSvd {
  std::vector<double> values;
  Matrix u;  // rows x k
  Matrix v;  // cols x k
};

/// One-sided (Hestenes) Jacobi SVD. Throws NONFINITE_INPUT on NaN/inf entries.
[[nodiscard]] ThinSvd jacobi_svd(const Matrix& m);

/// Singular values only, non-increasing, min(rows, cols) of them.
[[nodiscard]] std::vector<double> singular_values(const Matrix& m);

struct LeastSquaresSolution {
  std::vector<double> x;
  std::size_t rank = 0;
};

/// Minimum-norm least-squares solution of design * x ~= rhs via the
/// pseudo-inverse. Singular values at or below
/// max(rows, cols) * eps * sigma_max count as zero.
[[nodiscard]] LeastSquaresSolution solve_least_squares(const Matrix& design, std::span<const double> rhs);

}  // namespace genet
