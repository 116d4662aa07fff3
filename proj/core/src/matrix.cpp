#include "spdgeom/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace spdgeom {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = static_cast<int>(rows.size());
  cols_ = rows_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  data_.reserve(static_cast<std::size_t>(rows_) * cols_);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != cols_)
      throw ShapeError("Matrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diag(const std::vector<double>& d) {
  Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (int i = 0; i < m.rows(); ++i) m(i, i) = d[i];
  return m;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  check_same_shape(*this, o, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  check_same_shape(*this, o, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::trace() const {
  if (!square()) throw ShapeError("trace: matrix not square");
  double t = 0.0;
  for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Matrix::symmetrize() {
  if (!square()) throw ShapeError("symmetrize: matrix not square");
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < i; ++j) {
      const double m = 0.5 * ((*this)(i, j) + (*this)(j, i));
      (*this)(i, j) = m;
      (*this)(j, i) = m;
    }
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
  for (int i = 0; i < n; ++i) {
    double* ci = c.row_ptr(i);
    for (int l = 0; l < k; ++l) {
      const double ail = a(i, l);
      const double* bl = b.row_ptr(l);
      for (int j = 0; j < m; ++j) ci[j] += ail * bl[j];
    }
  }
  return c;
}

Matrix matmul_abt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_abt: inner dimensions differ");
  Matrix c(a.rows(), b.rows());
  const int k = a.cols();
  for (int i = 0; i < a.rows(); ++i) {
    const double* ai = a.row_ptr(i);
    for (int j = 0; j < b.rows(); ++j) {
      const double* bj = b.row_ptr(j);
      double s = 0.0;
      for (int l = 0; l < k; ++l) s += ai[l] * bj[l];
      c(i, j) = s;
    }
  }
  return c;
}

Matrix matmul_atb(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("matmul_atb: inner dimensions differ");
  Matrix c(a.cols(), b.cols());
  const int n = a.rows();
  for (int l = 0; l < n; ++l) {
    const double* al = a.row_ptr(l);
    const double* bl = b.row_ptr(l);
    for (int i = 0; i < a.cols(); ++i) {
      const double ail = al[i];
      double* ci = c.row_ptr(i);
      for (int j = 0; j < b.cols(); ++j) ci[j] += ail * bl[j];
    }
  }
  return c;
}

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
  if (a.cols() != static_cast<int>(x.size())) throw ShapeError("matvec: dimension mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const double* ai = a.row_ptr(i);
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
    y[i] = s;
  }
  return y;
}

double frobenius_dot(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "frobenius_dot");
  double s = 0.0;
  const auto& da = a.data();
  const auto& db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) s += da[i] * db[i];
  return s;
}

Matrix sandwich_diag(const Matrix& u, const std::vector<double>& w) {
  if (!u.square() || u.rows() != static_cast<int>(w.size()))
    throw ShapeError("sandwich_diag: dimension mismatch");
  const int n = u.rows();
  Matrix scaled(n, n);  // scaled = U * diag(w)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scaled(i, j) = u(i, j) * w[j];
  Matrix c = matmul_abt(scaled, u);
  c.symmetrize();
  return c;
}

}  // namespace spdgeom
