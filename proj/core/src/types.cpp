#include "spdgeom/types.hpp"

#include <algorithm>
#include <cmath>

#include "spdgeom/linalg.hpp"

namespace spdgeom {

namespace {

double symmetry_defect(const Matrix& m) {
  double worst = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < i; ++j) worst = std::max(worst, std::fabs(m(i, j) - m(j, i)));
  return worst;
}

}  // namespace

SymMatrix::SymMatrix(Matrix m) {
  if (!m.square()) throw ShapeError("SymMatrix: matrix not square");
  if (!m.all_finite()) throw DomainError("SymMatrix: non-finite entries");
  const double tol = 1e-12 * std::max(1.0, m.frobenius_norm());
  if (symmetry_defect(m) > tol)
    throw ShapeError("SymMatrix: input is not symmetric within tolerance");
  m.symmetrize();
  mat_ = std::move(m);
}

SymMatrix sym_unchecked(Matrix m) {
  m.symmetrize();
  return SymMatrix(SymMatrix::unchecked_t{}, std::move(m));
}

SpdMatrix::SpdMatrix(Matrix m) : SpdMatrix(SymMatrix(std::move(m))) {}

SpdMatrix::SpdMatrix(SymMatrix s) {
  cholesky_raw(s.m());  // throws NotPositiveDefiniteError unless SPD
  sym_ = std::move(s);
}

SpdMatrix SpdMatrix::identity(int n) { return spd_unchecked(SymMatrix::identity(n)); }

SpdMatrix spd_unchecked(SymMatrix s) { return SpdMatrix(SpdMatrix::unchecked_t{}, std::move(s)); }

LowerTri::LowerTri(Matrix m) {
  if (!m.square()) throw ShapeError("LowerTri: matrix not square");
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != 0.0) throw ShapeError("LowerTri: nonzero entry above the diagonal");
  mat_ = std::move(m);
}

}  // namespace spdgeom
