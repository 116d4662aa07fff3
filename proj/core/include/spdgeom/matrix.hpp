#pragma once

#include <cmath>
#include <initializer_list>
#include <vector>

#include "spdgeom/errors.hpp"

namespace spdgeom {

/// Dense row-major matrix of doubles. The workhorse storage type behind the
/// symmetric/SPD/triangular wrappers in types.hpp.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {
    if (rows < 0 || cols < 0) throw ShapeError("Matrix: negative dimension");
  }
  Matrix(int rows, int cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(rows) * cols)
      throw ShapeError("Matrix: data size does not match dimensions");
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }
  static Matrix identity(int n);
  static Matrix diag(const std::vector<double>& d);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  double* row_ptr(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }
  const double* row_ptr(int i) const { return data_.data() + static_cast<std::size_t>(i) * cols_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  Matrix transpose() const;
  double trace() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  /// In-place (A + Aᵀ)/2.
  void symmetrize();

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);

/// C = A * B.
Matrix matmul(const Matrix& a, const Matrix& b);
/// C = A * Bᵀ (contiguous dot products, preferred when B is available row-major).
Matrix matmul_abt(const Matrix& a, const Matrix& b);
/// C = Aᵀ * B.
Matrix matmul_atb(const Matrix& a, const Matrix& b);
/// y = A * x.
std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);

/// Frobenius inner product ⟨A, B⟩ = Σ A_ij B_ij.
double frobenius_dot(const Matrix& a, const Matrix& b);

/// U * diag(w) * Uᵀ for a square U. The result is symmetrized.
Matrix sandwich_diag(const Matrix& u, const std::vector<double>& w);

inline void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": shape mismatch");
}

}  // namespace spdgeom
