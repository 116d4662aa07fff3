#include "spdgeom/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace spdgeom {

namespace fns {

double log(double x) { return std::log(x); }
double dlog(double x) { return 1.0 / x; }
ScalarFn pow(double theta) {
  return [theta](double x) { return std::pow(x, theta); };
}
ScalarFn dpow(double theta) {
  return [theta](double x) { return theta * std::pow(x, theta - 1.0); };
}

}  // namespace fns

SymMatrix mat_fun(const EigDecomp& d, const ScalarFn& f) {
  std::vector<double> w(d.lambda.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = f(d.lambda[i]);
    if (!std::isfinite(w[i]))
      throw DomainError("mat_fun: scalar function undefined at eigenvalue " +
                        std::to_string(d.lambda[i]));
  }
  return sym_unchecked(sandwich_diag(d.u, w));
}

SymMatrix mat_fun(const SpdMatrix& p, const ScalarFn& f) { return mat_fun(sym_eig(p), f); }
SymMatrix mat_fun(const SymMatrix& s, const ScalarFn& f) { return mat_fun(sym_eig(s), f); }

SymMatrix mlog(const SpdMatrix& p) { return mat_fun(p, fns::log); }

SpdMatrix mexp(const SymMatrix& v) {
  return spd_unchecked(mat_fun(v, [](double x) { return std::exp(x); }));
}

SpdMatrix mpow(const SpdMatrix& p, double theta) {
  if (theta == 0.0) throw ConfigError("mpow: power must be nonzero");
  if (theta == 1.0) return p;
  return spd_unchecked(mat_fun(p, fns::pow(theta)));
}

SpdMatrix mpow(const EigDecomp& d, double theta) {
  if (theta == 0.0) throw ConfigError("mpow: power must be nonzero");
  return spd_unchecked(mat_fun(d, fns::pow(theta)));
}

LowerTri cholesky_raw(const Matrix& m) {
  const int n = m.rows();
  Matrix l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = m(i, j);
      for (int k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      if (i == j) {
        if (!(sum > 0.0))
          throw NotPositiveDefiniteError(
              "cholesky: nonpositive pivot at index " + std::to_string(i), i);
        l(i, i) = std::sqrt(sum);
      } else {
        l(i, j) = sum / l(j, j);
      }
    }
  }
  return LowerTri(std::move(l));
}

LowerTri cholesky(const SpdMatrix& p) { return cholesky_raw(p.m()); }

Matrix solve_lower(const LowerTri& l, const Matrix& b) {
  if (l.dim() != b.rows()) throw ShapeError("solve_lower: dimension mismatch");
  const int n = l.dim(), m = b.cols();
  Matrix x = b;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < i; ++k) {
      const double lik = l(i, k);
      const double* xk = x.row_ptr(k);
      double* xi = x.row_ptr(i);
      for (int j = 0; j < m; ++j) xi[j] -= lik * xk[j];
    }
    const double inv = 1.0 / l(i, i);
    double* xi = x.row_ptr(i);
    for (int j = 0; j < m; ++j) xi[j] *= inv;
  }
  return x;
}

Matrix solve_lower_t(const LowerTri& l, const Matrix& b) {
  if (l.dim() != b.rows()) throw ShapeError("solve_lower_t: dimension mismatch");
  const int n = l.dim(), m = b.cols();
  Matrix x = b;
  for (int i = n - 1; i >= 0; --i) {
    for (int k = i + 1; k < n; ++k) {
      const double lki = l(k, i);
      const double* xk = x.row_ptr(k);
      double* xi = x.row_ptr(i);
      for (int j = 0; j < m; ++j) xi[j] -= lki * xk[j];
    }
    const double inv = 1.0 / l(i, i);
    double* xi = x.row_ptr(i);
    for (int j = 0; j < m; ++j) xi[j] *= inv;
  }
  return x;
}

SpdMatrix spd_inverse(const SpdMatrix& p) {
  const LowerTri l = cholesky(p);
  Matrix inv = solve_lower_t(l, solve_lower(l, Matrix::identity(p.dim())));
  inv.symmetrize();
  return spd_unchecked(sym_unchecked(std::move(inv)));
}

namespace {

SymMatrix lyapunov_eig(const EigDecomp& d, const SymMatrix& v) {
  const Matrix vt = matmul(matmul_atb(d.u, v.m()), d.u);
  const int n = d.dim();
  Matrix xt(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) xt(i, j) = vt(i, j) / (d.lambda[i] + d.lambda[j]);
  Matrix x = matmul(matmul(d.u, xt), d.u.transpose());
  return sym_unchecked(std::move(x));
}

}  // namespace

SymMatrix lyapunov(const SpdMatrix& p, const SymMatrix& v) {
  if (p.dim() != v.dim()) throw ShapeError("lyapunov: dimension mismatch");
  return lyapunov_eig(sym_eig(p), v);
}

SymMatrix gen_lyapunov(const SpdMatrix& p, const SpdMatrix& m, const SymMatrix& v) {
  if (p.dim() != v.dim() || m.dim() != v.dim())
    throw ShapeError("gen_lyapunov: dimension mismatch");
  // M X P + P X M = V reduces to a plain Lyapunov system for
  // P' = M^{-1/2} P M^{-1/2}: X = M^{-1/2} L_{P'}[M^{-1/2} V M^{-1/2}] M^{-1/2}.
  const SymMatrix r = mat_fun(m, fns::pow(-0.5));
  Matrix pr = matmul(matmul(r.m(), p.m()), r.m());
  pr.symmetrize();
  const EigDecomp dp = sym_eig(sym_unchecked(std::move(pr)));
  const double lo = dp.lambda.back(), hi = dp.lambda.front();
  if (!(lo > 0.0) || hi / lo > 1e14)
    throw NumericError("gen_lyapunov: system too ill-conditioned, cond estimate " +
                           std::to_string(lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity()),
                       lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
  Matrix vr = matmul(matmul(r.m(), v.m()), r.m());
  vr.symmetrize();
  const SymMatrix core = lyapunov_eig(dp, sym_unchecked(std::move(vr)));
  Matrix x = matmul(matmul(r.m(), core.m()), r.m());
  x.symmetrize();
  return sym_unchecked(std::move(x));
}

SpdMatrix newton_schulz_sqrt(const SpdMatrix& p, int iters) {
  if (iters < 1) throw ConfigError("newton_schulz_sqrt: iters must be >= 1");
  const int n = p.dim();
  const double tr = p.m().trace();
  Matrix a = p.m() * (1.0 / tr);
  Matrix y = a;
  Matrix z = Matrix::identity(n);
  const Matrix id3 = Matrix::identity(n) * 3.0;

  double prev_residual = std::numeric_limits<double>::infinity();
  for (int k = 0; k < iters; ++k) {
    const Matrix zy = matmul(z, y);
    double residual = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double dlt = zy(i, j) - (i == j ? 1.0 : 0.0);
        residual += dlt * dlt;
      }
    residual = std::sqrt(residual);
    if (!std::isfinite(residual) || residual > prev_residual * 1.1 + 1e-12)
      throw NumericError("newton_schulz_sqrt: divergence detected at iteration " +
                             std::to_string(k),
                         residual);
    prev_residual = residual;

    const Matrix t = id3 - zy;
    y = matmul(y, t) * 0.5;
    z = matmul(t, z) * 0.5;
    y.symmetrize();
    z.symmetrize();
  }
  y *= std::sqrt(tr);
  return spd_unchecked(sym_unchecked(std::move(y)));
}

namespace {

// Loewner matrix of f on the spectrum: K_ij = (f(λi) − f(λj))/(λi − λj),
// with the derivative used on the diagonal and for near-equal pairs.
Matrix loewner(const std::vector<double>& lambda, const ScalarFn& f, const ScalarFn& fprime) {
  const int n = static_cast<int>(lambda.size());
  std::vector<double> fl(n);
  for (int i = 0; i < n; ++i) fl[i] = f(lambda[i]);
  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double li = lambda[i], lj = lambda[j];
      double v;
      if (std::fabs(li - lj) < 1e-8 * std::max(std::fabs(li), std::fabs(lj)) || li == lj) {
        v = fprime(0.5 * (li + lj));
      } else {
        v = (fl[i] - fl[j]) / (li - lj);
      }
      if (!std::isfinite(v))
        throw DomainError("dmat_fun: divided difference undefined on the spectrum");
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

SymMatrix apply_loewner(const EigDecomp& d, const Matrix& k, const SymMatrix& v, bool invert) {
  const Matrix vt = matmul(matmul_atb(d.u, v.m()), d.u);
  const int n = d.dim();
  Matrix ht(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (invert) {
        if (k(i, j) == 0.0)
          throw DomainError("dmat_fun_inv: differential is singular on this spectrum");
        ht(i, j) = vt(i, j) / k(i, j);
      } else {
        ht(i, j) = vt(i, j) * k(i, j);
      }
    }
  Matrix h = matmul(matmul(d.u, ht), d.u.transpose());
  return sym_unchecked(std::move(h));
}

}  // namespace

SymMatrix dmat_fun(const SpdMatrix& p, const ScalarFn& f, const ScalarFn& fprime, const SymMatrix& v) {
  if (p.dim() != v.dim()) throw ShapeError("dmat_fun: dimension mismatch");
  const EigDecomp d = sym_eig(p);
  return apply_loewner(d, loewner(d.lambda, f, fprime), v, /*invert=*/false);
}

SymMatrix dmat_fun_inv(const SpdMatrix& p, const ScalarFn& f, const ScalarFn& fprime, const SymMatrix& w) {
  if (p.dim() != w.dim()) throw ShapeError("dmat_fun_inv: dimension mismatch");
  const EigDecomp d = sym_eig(p);
  return apply_loewner(d, loewner(d.lambda, f, fprime), w, /*invert=*/true);
}

LowerTri dchol(const SpdMatrix& p, const SymMatrix& v) {
  if (p.dim() != v.dim()) throw ShapeError("dchol: dimension mismatch");
  const LowerTri l = cholesky(p);
  const int n = p.dim();
  // C = L⁻¹ V L⁻ᵀ
  const Matrix w1 = solve_lower(l, v.m());
  const Matrix c = solve_lower(l, w1.transpose()).transpose();
  // Φ(C): keep strict lower part, halve the diagonal.
  Matrix phi(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) phi(i, j) = c(i, j);
    phi(i, i) = 0.5 * c(i, i);
  }
  Matrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int k = j; k <= i; ++k) s += l(i, k) * phi(k, j);
      out(i, j) = s;
    }
  return LowerTri(std::move(out));
}

Matrix strict_lower(const Matrix& x) {
  if (!x.square()) throw ShapeError("strict_lower: matrix not square");
  Matrix out(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < i; ++j) out(i, j) = x(i, j);
  return out;
}

Matrix diag_part(const Matrix& x) {
  if (!x.square()) throw ShapeError("diag_part: matrix not square");
  Matrix out(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) out(i, i) = x(i, i);
  return out;
}

Matrix dlog_diag(const Matrix& d) {
  if (!d.square()) throw ShapeError("dlog_diag: matrix not square");
  Matrix out(d.rows(), d.cols());
  for (int i = 0; i < d.rows(); ++i) {
    if (!(d(i, i) > 0.0))
      throw DomainError("dlog_diag: nonpositive diagonal entry at index " + std::to_string(i));
    out(i, i) = std::log(d(i, i));
  }
  return out;
}

std::vector<double> vec_sym(const SymMatrix& s) { return s.m().data(); }

}  // namespace spdgeom
