#pragma once

#include <utility>
#include <vector>

#include "spdgeom/matrix.hpp"

namespace spdgeom {

/// Symmetric n×n matrix. Construction accepts inputs whose symmetrization
/// error is at most 1e-12 · max(1, ‖·‖_F) and stores the symmetrized matrix,
/// so round-off from upstream products is absorbed rather than rejected.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m);

  static SymMatrix zeros(int n) { return SymMatrix(Matrix::zeros(n, n)); }
  static SymMatrix identity(int n) { return SymMatrix(Matrix::identity(n)); }

  int dim() const { return mat_.rows(); }
  const Matrix& m() const { return mat_; }
  double operator()(int i, int j) const { return mat_(i, j); }
  /// Symmetric write: sets (i,j) and (j,i).
  void set(int i, int j, double v) {
    mat_(i, j) = v;
    mat_(j, i) = v;
  }

  SymMatrix& operator+=(const SymMatrix& o) { mat_ += o.mat_; return *this; }
  SymMatrix& operator-=(const SymMatrix& o) { mat_ -= o.mat_; return *this; }
  SymMatrix& operator*=(double s) { mat_ *= s; return *this; }

 private:
  struct unchecked_t {};
  SymMatrix(unchecked_t, Matrix m) : mat_(std::move(m)) {}
  friend SymMatrix sym_unchecked(Matrix m);

  Matrix mat_;
};

/// Internal fast path for matrices symmetric by construction.
SymMatrix sym_unchecked(Matrix m);

inline SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
inline SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
inline SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
inline SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

/// Symmetric positive-definite matrix. Construction verifies symmetry as in
/// SymMatrix and positive definiteness through Cholesky success.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(Matrix m);
  explicit SpdMatrix(SymMatrix s);

  static SpdMatrix identity(int n);

  int dim() const { return sym_.dim(); }
  const Matrix& m() const { return sym_.m(); }
  const SymMatrix& sym() const { return sym_; }
  double operator()(int i, int j) const { return sym_(i, j); }

 private:
  struct unchecked_t {};
  SpdMatrix(unchecked_t, SymMatrix s) : sym_(std::move(s)) {}
  friend SpdMatrix spd_unchecked(SymMatrix s);

  SymMatrix sym_;
};

/// Internal fast path for matrices SPD by construction (e.g. U f(Λ) Uᵀ with
/// f > 0). Skips the Cholesky probe, still symmetrizes.
SpdMatrix spd_unchecked(SymMatrix s);

/// Lower-triangular matrix. Entries above the diagonal must be exactly zero.
/// Positivity of the diagonal is contextual (required for Cholesky factors,
/// not for differentials) and is checked by the factorization, not here.
class LowerTri {
 public:
  LowerTri() = default;
  explicit LowerTri(Matrix m);

  int dim() const { return mat_.rows(); }
  const Matrix& m() const { return mat_; }
  double operator()(int i, int j) const { return mat_(i, j); }
  double& operator()(int i, int j) { return mat_(i, j); }

 private:
  Matrix mat_;
};

/// Eigendecomposition of a symmetric matrix: input = U diag(lambda) Uᵀ with
/// orthogonal U and eigenvalues sorted in descending order.
struct EigDecomp {
  Matrix u;
  std::vector<double> lambda;

  int dim() const { return static_cast<int>(lambda.size()); }
};

}  // namespace spdgeom
