#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qem {

struct SingularMatrixError : std::runtime_error {
  explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// Small dense row-major matrix; dimensions here are the manifold dimension
/// (single digits), so everything is direct elimination.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix diagonal(const std::vector<double>& d);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Matrix operator+(const Matrix& o) const;
  Matrix operator-(const Matrix& o) const;
  Matrix operator*(double s) const;
  Matrix operator*(const Matrix& o) const;

  double max_abs() const;
  double max_asymmetry() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

/// Inverse by Gauss elimination with partial pivoting. A pivot below
/// `pivot_floor` raises SingularMatrixError.
Matrix invert(const Matrix& a, double pivot_floor = 1e-12);

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues ascending; `vectors` columns are the matching
/// eigenvectors.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
};
SymmetricEigen jacobi_eigen(const Matrix& a, int max_sweeps = 64);

/// Rank-3 array of Christoffel symbols, indexed (k, i, j) for Γ^k_{ij}.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(std::size_t n) : n_(n), data_(n * n * n, 0.0) {}

  double& operator()(std::size_t k, std::size_t i, std::size_t j) {
    return data_[(k * n_ + i) * n_ + j];
  }
  double operator()(std::size_t k, std::size_t i, std::size_t j) const {
    return data_[(k * n_ + i) * n_ + j];
  }
  std::size_t dim() const { return n_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

}  // namespace qem
