#pragma once

#include <functional>
#include <vector>

#include "spdgeom/types.hpp"

namespace spdgeom {

using ScalarFn = std::function<double(double)>;

/// Eigendecomposition of a symmetric matrix by Householder tridiagonalization
/// followed by implicit-shift QL sweeps. Eigenvalues are returned in
/// descending order. Throws NumericError if the QL iteration exceeds its cap
/// (30 sweeps per eigenvalue, 30·n total).
EigDecomp sym_eig(const SymMatrix& s);
EigDecomp sym_eig(const SpdMatrix& p);

/// U f(Λ) Uᵀ from a precomputed decomposition. Throws DomainError when f
/// evaluates to a non-finite value at some eigenvalue.
SymMatrix mat_fun(const EigDecomp& d, const ScalarFn& f);
SymMatrix mat_fun(const SpdMatrix& p, const ScalarFn& f);
SymMatrix mat_fun(const SymMatrix& s, const ScalarFn& f);

/// Matrix logarithm of an SPD matrix.
SymMatrix mlog(const SpdMatrix& p);
/// Matrix exponential of a symmetric matrix; the result is SPD.
SpdMatrix mexp(const SymMatrix& v);
/// Matrix power P^theta (theta ≠ 0; theta = 1 returns P unchanged).
SpdMatrix mpow(const SpdMatrix& p, double theta);
SpdMatrix mpow(const EigDecomp& d, double theta);

/// Cholesky factor: lower-triangular L with positive diagonal, L Lᵀ = P.
/// Throws NotPositiveDefiniteError (with the pivot index) when P is not SPD.
LowerTri cholesky(const SpdMatrix& p);
/// Factorization of a raw symmetric matrix; used by the SpdMatrix constructor.
LowerTri cholesky_raw(const Matrix& m);

/// Solve L X = B (forward substitution).
Matrix solve_lower(const LowerTri& l, const Matrix& b);
/// Solve Lᵀ X = B (back substitution).
Matrix solve_lower_t(const LowerTri& l, const Matrix& b);
/// SPD inverse through the Cholesky factor.
SpdMatrix spd_inverse(const SpdMatrix& p);

/// Symmetric solution X of P X + X P = V.
SymMatrix lyapunov(const SpdMatrix& p, const SymMatrix& v);
/// Symmetric solution X of M X P + P X M = V. Throws NumericError with a
/// condition estimate when the reduced system is too ill-conditioned.
SymMatrix gen_lyapunov(const SpdMatrix& p, const SpdMatrix& m, const SymMatrix& v);

/// Coupled Newton–Schulz iteration for P^{1/2}, with trace normalization
/// before and rescaling after the loop. Throws NumericError on residual
/// growth (divergence) and ConfigError when iters < 1.
SpdMatrix newton_schulz_sqrt(const SpdMatrix& p, int iters);

/// Fréchet differential df_P(V) of the matrix function induced by f, via the
/// first divided-difference (Loewner) matrix in the eigenbasis of P. fprime
/// supplies the diagonal; it is also used when |λ_i − λ_j| < 1e-8 · max(λ_i, λ_j).
SymMatrix dmat_fun(const SpdMatrix& p, const ScalarFn& f, const ScalarFn& fprime, const SymMatrix& v);
/// Inverse of the differential: returns V such that dmat_fun(p, f, f', V) = W.
SymMatrix dmat_fun_inv(const SpdMatrix& p, const ScalarFn& f, const ScalarFn& fprime, const SymMatrix& w);

/// Differential of the Cholesky map: the lower-triangular Ṽ with
/// Ṽ Lᵀ + L Ṽᵀ = V, computed as L·Φ(L⁻¹ V L⁻ᵀ) where Φ halves the diagonal
/// and keeps the strict lower part.
LowerTri dchol(const SpdMatrix& p, const SymMatrix& v);

/// Strictly lower triangular part ⌊X⌋.
Matrix strict_lower(const Matrix& x);
/// Diagonal part D(X) as a full (diagonal) matrix.
Matrix diag_part(const Matrix& x);
/// Diagonal logarithm of a matrix with positive diagonal entries; off-diagonal
/// entries of the argument are ignored. Throws DomainError on a nonpositive
/// diagonal entry.
Matrix dlog_diag(const Matrix& d);

/// Row-major n² flattening. Frobenius inner products are preserved exactly.
std::vector<double> vec_sym(const SymMatrix& s);

namespace fns {
double log(double x);
double dlog(double x);
ScalarFn pow(double theta);
ScalarFn dpow(double theta);
}  // namespace fns

}  // namespace spdgeom
