#include "genet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "genet/error.hpp"

namespace genet {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw std::invalid_argument("matrix data size mismatch");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product shape mismatch");
  Matrix out(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

namespace {

constexpr int kMaxSweeps = 80;

// Works column-major on an m x n working copy with n <= m: rotates column
// pairs until every pair is numerically orthogonal.
struct ColumnWork {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<std::vector<double>> a;  // n columns of length m
  std::vector<std::vector<double>> v;  // n columns of length n

  static double dot(const std::vector<double>& x, const std::vector<double>& y) {
    return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
  }

  static void rotate(std::vector<double>& x, std::vector<double>& y, double c, double s) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xi = x[i];
      const double yi = y[i];
      x[i] = c * xi - s * yi;
      y[i] = s * xi + c * yi;
    }
  }

  void orthogonalize() {
    const double eps = std::numeric_limits<double>::epsilon();
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      bool rotated = false;
      for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const double alpha = dot(a[p], a[p]);
          const double beta = dot(a[q], a[q]);
          const double gamma = dot(a[p], a[q]);
          if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
          rotated = true;
          const double zeta = (beta - alpha) / (2.0 * gamma);
          const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
          const double c = 1.0 / std::hypot(1.0, t);
          const double s = c * t;
          rotate(a[p], a[q], c, s);
          rotate(v[p], v[q], c, s);
        }
      }
      if (!rotated) return;
    }
  }
};

ThinSvd svd_tall(const Matrix& m) {
  ColumnWork w;
  w.m = m.rows();
  w.n = m.cols();
  w.a.assign(w.n, std::vector<double>(w.m));
  w.v.assign(w.n, std::vector<double>(w.n, 0.0));
  for (std::size_t c = 0; c < w.n; ++c) {
    for (std::size_t r = 0; r < w.m; ++r) w.a[c][r] = m(r, c);
    w.v[c][c] = 1.0;
  }
  w.orthogonalize();

  std::vector<double> norms(w.n);
  for (std::size_t c = 0; c < w.n; ++c) norms[c] = std::sqrt(ColumnWork::dot(w.a[c], w.a[c]));
  std::vector<std::size_t> order(w.n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  ThinSvd out;
  out.values.resize(w.n);
  out.u = Matrix(w.m, w.n);
  out.v = Matrix(w.n, w.n);
  for (std::size_t k = 0; k < w.n; ++k) {
    const std::size_t c = order[k];
    const double sigma = norms[c];
    out.values[k] = sigma;
    for (std::size_t r = 0; r < w.m; ++r) out.u(r, k) = sigma > 0.0 ? w.a[c][r] / sigma : 0.0;
    for (std::size_t r = 0; r < w.n; ++r) out.v(r, k) = w.v[c][r];
  }
  return out;
}

void require_finite(const Matrix& m) {
  for (const double x : m.data()) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNonfiniteInput, "matrix has a non-finite entry");
  }
}

}  // namespace

ThinSvd jacobi_svd(const Matrix& m) {
  require_finite(m);
  if (m.rows() == 0 || m.cols() == 0) return ThinSvd{{}, Matrix(m.rows(), 0), Matrix(m.cols(), 0)};
  if (m.cols() <= m.rows()) return svd_tall(m);
  auto t = svd_tall(m.transposed());
  std::swap(t.u, t.v);
  return t;
}

std::vector<double> singular_values(const Matrix& m) { return jacobi_svd(m).values; }

LeastSquaresSolution solve_least_squares(const Matrix& design, std::span<const double> rhs) {
  if (rhs.size() != design.rows()) throw std::invalid_argument("rhs length does not match design rows");
  for (const double y : rhs) {
    if (!std::isfinite(y)) throw Error(ErrorCode::kNonfiniteInput, "rhs has a non-finite entry");
  }
  const auto svd = jacobi_svd(design);
  LeastSquaresSolution out;
  out.x.assign(design.cols(), 0.0);
  if (svd.values.empty()) return out;
  const double cutoff = static_cast<double>(std::max(design.rows(), design.cols())) *
                        std::numeric_limits<double>::epsilon() * svd.values.front();
  for (std::size_t k = 0; k < svd.values.size(); ++k) {
    const double sigma = svd.values[k];
    if (sigma <= cutoff || sigma == 0.0) continue;
    ++out.rank;
    double projection = 0.0;
    for (std::size_t r = 0; r < design.rows(); ++r) projection += svd.u(r, k) * rhs[r];
    const double scale = projection / sigma;
    for (std::size_t c = 0; c < design.cols(); ++c) out.x[c] += scale * svd.v(c, k);
  }
  return out;
}

}  // namespace genet
