#include "spdgeom/metric.hpp"

#include <cmath>
#include <string>

namespace spdgeom {

const char* family_name(MetricFamily f) {
  switch (f) {
    case MetricFamily::LEM: return "LEM";
    case MetricFamily::AIM: return "AIM";
    case MetricFamily::EM: return "EM";
    case MetricFamily::MPEM: return "MPEM";
    case MetricFamily::LCM: return "LCM";
    case MetricFamily::BWM: return "BWM";
    case MetricFamily::GBWM: return "GBWM";
  }
  return "?";
}

MetricSpec MetricSpec::lem(double alpha, double beta) {
  MetricSpec s;
  s.family = MetricFamily::LEM;
  s.alpha = alpha;
  s.beta = beta;
  return s;
}

MetricSpec MetricSpec::aim(double theta, double alpha, double beta) {
  MetricSpec s;
  s.family = MetricFamily::AIM;
  s.theta = theta;
  s.alpha = alpha;
  s.beta = beta;
  return s;
}

MetricSpec MetricSpec::em(double theta, double alpha, double beta) {
  MetricSpec s;
  s.family = MetricFamily::EM;
  s.theta = theta;
  s.alpha = alpha;
  s.beta = beta;
  return s;
}

MetricSpec MetricSpec::mpem(double theta1, double theta2) {
  MetricSpec s;
  s.family = MetricFamily::MPEM;
  s.theta = theta1;
  s.theta2 = theta2;
  return s;
}

MetricSpec MetricSpec::lcm(double theta) {
  MetricSpec s;
  s.family = MetricFamily::LCM;
  s.theta = theta;
  return s;
}

MetricSpec MetricSpec::bwm(double theta) {
  MetricSpec s;
  s.family = MetricFamily::BWM;
  s.theta = theta;
  return s;
}

MetricSpec MetricSpec::gbwm(double theta, std::optional<SpdMatrix> m) {
  MetricSpec s;
  s.family = MetricFamily::GBWM;
  s.theta = theta;
  s.gbwm_m = std::move(m);
  return s;
}

double MetricSpec::theta0() const {
  if (family == MetricFamily::MPEM) return 0.5 * (theta + theta2);
  return theta;
}

void MetricSpec::validate(int n) const {
  if (!(alpha > 0.0) || !(alpha + n * beta > 0.0))
    throw ConfigError("MetricSpec: (alpha, beta) must satisfy alpha > 0 and alpha + n*beta > 0");
  if (family == MetricFamily::MPEM) {
    if (theta == 0.0 || theta2 == 0.0 || theta + theta2 == 0.0)
      throw ConfigError("MetricSpec: MPEM powers must be nonzero with nonzero sum");
  } else if (theta == 0.0) {
    throw ConfigError("MetricSpec: deformation power must be nonzero");
  }
  if (gbwm_m) {
    if (family != MetricFamily::GBWM) throw ConfigError("MetricSpec: anchor is GBWM-only");
    if (gbwm_m->dim() != n) throw ConfigError("MetricSpec: GBWM anchor dimension mismatch");
  }
}

double inner_ab(const SymMatrix& v, const SymMatrix& w, double alpha, double beta) {
  if (v.dim() != w.dim()) throw ShapeError("inner_ab: dimension mismatch");
  const int n = v.dim();
  if (!(alpha > 0.0) || !(alpha + n * beta > 0.0))
    throw ConfigError("inner_ab: alpha > 0 and alpha + n*beta > 0 required");
  return alpha * frobenius_dot(v.m(), w.m()) + beta * v.m().trace() * w.m().trace();
}

namespace {

SymMatrix dpow_at(const SpdMatrix& p, double theta, const SymMatrix& v) {
  if (theta == 1.0) return v;
  return dmat_fun(p, fns::pow(theta), fns::dpow(theta), v);
}

SymMatrix dpow_inv_at(const SpdMatrix& p, double theta, const SymMatrix& w) {
  if (theta == 1.0) return w;
  return dmat_fun_inv(p, fns::pow(theta), fns::dpow(theta), w);
}

double lcm_base_metric(const SpdMatrix& p, const SymMatrix& v, const SymMatrix& w) {
  const LowerTri l = cholesky(p);
  const LowerTri dv = dchol(p, v);
  const LowerTri dw = dchol(p, w);
  const int n = p.dim();
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) s += dv(i, j) * dw(i, j);
    s += dv(i, i) * dw(i, i) / (l(i, i) * l(i, i));
  }
  return s;
}

double comm_defect(const Matrix& a, const Matrix& b) {
  return (matmul(a, b) - matmul(b, a)).frobenius_norm();
}

void require_commuting(const SpdMatrix& p, const SpdMatrix& q, const char* who) {
  const double tol = 1e-8 * p.m().frobenius_norm() * q.m().frobenius_norm();
  if (comm_defect(p.m(), q.m()) > tol)
    throw NonCommutingError(std::string(who) + ": arguments must commute");
}

SpdMatrix gbwm_anchor(const MetricSpec& spec, int n) {
  return spec.gbwm_m ? *spec.gbwm_m : SpdMatrix::identity(n);
}

// (A B)^{1/2} for SPD A, B, via A^{1/2} (A^{1/2} B A^{1/2})^{1/2} A^{-1/2}.
Matrix spd_product_sqrt(const SpdMatrix& a, const SpdMatrix& b) {
  const EigDecomp da = sym_eig(a);
  const Matrix as = mpow(da, 0.5).m();
  const Matrix asi = mpow(da, -0.5).m();
  Matrix inner = matmul(matmul(as, b.m()), as);
  inner.symmetrize();
  const SpdMatrix c = spd_unchecked(sym_unchecked(std::move(inner)));
  const Matrix cs = mpow(c, 0.5).m();
  return matmul(matmul(as, cs), asi);
}

// Bures-Wasserstein log at base A of point B: (AB)^{1/2} + (BA)^{1/2} - 2A.
SymMatrix bwm_base_log(const SpdMatrix& a, const SpdMatrix& b) {
  const Matrix z = spd_product_sqrt(a, b);
  Matrix w = z + z.transpose() - 2.0 * a.m();
  return sym_unchecked(std::move(w));
}

// GBWM log at base A of point B with anchor M:
// M (M⁻¹ A M⁻¹ B)^{1/2} + (B M⁻¹ A M⁻¹)^{1/2} M - 2A.
SymMatrix gbwm_base_log(const SpdMatrix& a, const SpdMatrix& b, const SpdMatrix& m) {
  const SpdMatrix minv = spd_inverse(m);
  Matrix g = matmul(matmul(minv.m(), a.m()), minv.m());
  g.symmetrize();
  const SpdMatrix gs = spd_unchecked(sym_unchecked(std::move(g)));
  const Matrix z = spd_product_sqrt(gs, b);  // (M⁻¹AM⁻¹ B)^{1/2}
  Matrix w = matmul(m.m(), z) + matmul(z.transpose(), m.m()) - 2.0 * a.m();
  return sym_unchecked(std::move(w));
}

// Log-Cholesky log at base A of point B, expressed back in Sym(n):
// (chol⁻¹)_{*,L}[ ⌊K⌋ − ⌊L⌋ + D(L) dlog(D(L)⁻¹ D(K)) ] with L=chol(A), K=chol(B).
SymMatrix lcm_base_log(const SpdMatrix& a, const SpdMatrix& b) {
  const LowerTri l = cholesky(a);
  const LowerTri k = cholesky(b);
  const int n = a.dim();
  Matrix t(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) t(i, j) = k(i, j) - l(i, j);
    t(i, i) = l(i, i) * std::log(k(i, i) / l(i, i));
  }
  Matrix w = matmul_abt(t, l.m()) + matmul_abt(l.m(), t);
  return sym_unchecked(std::move(w));
}

}  // namespace

double metric_at(const MetricSpec& spec, const SpdMatrix& p, const SymMatrix& v, const SymMatrix& w) {
  const int n = p.dim();
  spec.validate(n);
  if (v.dim() != n || w.dim() != n) throw ShapeError("metric_at: dimension mismatch");

  switch (spec.family) {
    case MetricFamily::LEM: {
      const SymMatrix dv = dmat_fun(p, fns::log, fns::dlog, v);
      const SymMatrix dw = dmat_fun(p, fns::log, fns::dlog, w);
      return inner_ab(dv, dw, spec.alpha, spec.beta);
    }
    case MetricFamily::AIM: {
      const double th = spec.theta;
      const SymMatrix dv = dpow_at(p, th, v);
      const SymMatrix dw = dpow_at(p, th, w);
      const SpdMatrix pti = mpow(p, -th);
      const Matrix x = matmul(pti.m(), dv.m());
      const Matrix y = matmul(pti.m(), dw.m());
      double txy = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) txy += x(i, j) * y(j, i);
      const double val = spec.alpha * txy + spec.beta * x.trace() * y.trace();
      return val / (th * th);
    }
    case MetricFamily::EM: {
      const double th = spec.theta;
      const SymMatrix dv = dpow_at(p, th, v);
      const SymMatrix dw = dpow_at(p, th, w);
      return inner_ab(dv, dw, spec.alpha, spec.beta) / (th * th);
    }
    case MetricFamily::MPEM: {
      const SymMatrix dv = dpow_at(p, spec.theta, v);
      const SymMatrix dw = dpow_at(p, spec.theta2, w);
      return frobenius_dot(dv.m(), dw.m()) / (spec.theta * spec.theta2);
    }
    case MetricFamily::LCM: {
      const double th = spec.theta;
      const SpdMatrix a = mpow(p, th);
      const SymMatrix dv = dpow_at(p, th, v);
      const SymMatrix dw = dpow_at(p, th, w);
      return lcm_base_metric(a, dv, dw) / (th * th);
    }
    case MetricFamily::BWM: {
      const double th = spec.theta;
      const SpdMatrix a = mpow(p, 2.0 * th);
      const SymMatrix dv = dpow_at(p, 2.0 * th, v);
      const SymMatrix dw = dpow_at(p, 2.0 * th, w);
      return 0.5 * frobenius_dot(lyapunov(a, dv).m(), dw.m()) / (4.0 * th * th);
    }
    case MetricFamily::GBWM: {
      const double th = spec.theta;
      const SpdMatrix a = mpow(p, 2.0 * th);
      const SpdMatrix m = gbwm_anchor(spec, n);
      const SymMatrix dv = dpow_at(p, 2.0 * th, v);
      const SymMatrix dw = dpow_at(p, 2.0 * th, w);
      return 0.5 * frobenius_dot(gen_lyapunov(a, m, dv).m(), dw.m()) / (4.0 * th * th);
    }
  }
  throw ConfigError("metric_at: unknown family");
}

SymMatrix rielog_identity(const MetricSpec& spec, const SpdMatrix& p) {
  const int n = p.dim();
  spec.validate(n);
  switch (spec.family) {
    case MetricFamily::LEM:
    case MetricFamily::AIM:
      return mlog(p);
    case MetricFamily::EM:
    case MetricFamily::MPEM:
    case MetricFamily::BWM:
    case MetricFamily::GBWM: {
      const double t0 = spec.theta0();
      return sym_unchecked((mpow(p, t0).m() - Matrix::identity(n)) * (1.0 / t0));
    }
    case MetricFamily::LCM: {
      const double th = spec.theta;
      const LowerTri lt = cholesky(mpow(p, th));
      Matrix out(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
          out(i, j) = lt(i, j);
          out(j, i) = lt(i, j);
        }
        out(i, i) = 2.0 * std::log(lt(i, i));
      }
      return sym_unchecked(out * (1.0 / th));
    }
  }
  throw ConfigError("rielog_identity: unknown family");
}

SpdMatrix rieexp_identity(const MetricSpec& spec, const SymMatrix& v) {
  const int n = v.dim();
  spec.validate(n);
  switch (spec.family) {
    case MetricFamily::LEM:
    case MetricFamily::AIM:
      return mexp(v);
    case MetricFamily::EM:
    case MetricFamily::MPEM:
    case MetricFamily::BWM:
    case MetricFamily::GBWM: {
      const double t0 = spec.theta0();
      const EigDecomp d = sym_eig(v);
      std::vector<double> shifted(d.lambda.size());
      for (std::size_t i = 0; i < shifted.size(); ++i) {
        shifted[i] = 1.0 + t0 * d.lambda[i];
        if (!(shifted[i] > 0.0))
          throw DomainError("rieexp_identity: I + theta*V leaves the SPD cone (eigenvalue " +
                            std::to_string(shifted[i]) + ")");
      }
      std::vector<double> w(shifted.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(shifted[i], 1.0 / t0);
      return spd_unchecked(sym_unchecked(sandwich_diag(d.u, w)));
    }
    case MetricFamily::LCM: {
      const double th = spec.theta;
      Matrix lt(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) lt(i, j) = th * v(i, j);
        lt(i, i) = std::exp(0.5 * th * v(i, i));
      }
      Matrix a = matmul_abt(lt, lt);
      a.symmetrize();
      const SpdMatrix asq = spd_unchecked(sym_unchecked(std::move(a)));
      return th == 1.0 ? asq : mpow(asq, 1.0 / th);
    }
  }
  throw ConfigError("rieexp_identity: unknown family");
}

TangentAt rielog_at(const MetricSpec& spec, const SpdMatrix& p, const SpdMatrix& q) {
  const int n = p.dim();
  spec.validate(n);
  if (q.dim() != n) throw ShapeError("rielog_at: dimension mismatch");

  switch (spec.family) {
    case MetricFamily::LEM: {
      const SymMatrix diff = sym_unchecked(mlog(q).m() - mlog(p).m());
      return {p, dmat_fun_inv(p, fns::log, fns::dlog, diff)};
    }
    case MetricFamily::AIM: {
      const double th = spec.theta;
      const SpdMatrix a = mpow(p, th);
      const SpdMatrix b = mpow(q, th);
      const EigDecomp da = sym_eig(a);
      const Matrix as = mpow(da, 0.5).m();
      const Matrix asi = mpow(da, -0.5).m();
      Matrix c = matmul(matmul(asi, b.m()), asi);
      c.symmetrize();
      const SymMatrix lg = mlog(spd_unchecked(sym_unchecked(std::move(c))));
      Matrix w = matmul(matmul(as, lg.m()), as);
      w.symmetrize();
      return {p, dpow_inv_at(p, th, sym_unchecked(std::move(w)))};
    }
    case MetricFamily::EM: {
      const double th = spec.theta;
      const SymMatrix w = sym_unchecked(mpow(q, th).m() - mpow(p, th).m());
      return {p, dpow_inv_at(p, th, w)};
    }
    case MetricFamily::MPEM: {
      require_commuting(p, q, "rielog_at (MPEM)");
      const double t0 = spec.theta0();
      const SymMatrix w = sym_unchecked(mpow(q, t0).m() - mpow(p, t0).m());
      return {p, dpow_inv_at(p, t0, w)};
    }
    case MetricFamily::LCM: {
      const double th = spec.theta;
      const SymMatrix w = lcm_base_log(mpow(p, th), mpow(q, th));
      return {p, dpow_inv_at(p, th, w)};
    }
    case MetricFamily::BWM: {
      const double th = spec.theta;
      const SymMatrix w = bwm_base_log(mpow(p, 2.0 * th), mpow(q, 2.0 * th));
      return {p, dpow_inv_at(p, 2.0 * th, w)};
    }
    case MetricFamily::GBWM: {
      const double th = spec.theta;
      const SpdMatrix m = gbwm_anchor(spec, n);
      const SymMatrix w = gbwm_base_log(mpow(p, 2.0 * th), mpow(q, 2.0 * th), m);
      return {p, dpow_inv_at(p, 2.0 * th, w)};
    }
  }
  throw ConfigError("rielog_at: unknown family");
}

SpdMatrix rieexp_at(const MetricSpec& spec, const SpdMatrix& p, const SymMatrix& v) {
  const int n = p.dim();
  spec.validate(n);
  if (v.dim() != n) throw ShapeError("rieexp_at: dimension mismatch");

  switch (spec.family) {
    case MetricFamily::LEM: {
      const SymMatrix step = dmat_fun(p, fns::log, fns::dlog, v);
      return mexp(sym_unchecked(mlog(p).m() + step.m()));
    }
    case MetricFamily::AIM: {
      const double th = spec.theta;
      const SymMatrix w = dpow_at(p, th, v);
      const EigDecomp da = sym_eig(mpow(p, th));
      const Matrix as = mpow(da, 0.5).m();
      const Matrix asi = mpow(da, -0.5).m();
      Matrix inner = matmul(matmul(asi, w.m()), asi);
      inner.symmetrize();
      const SpdMatrix e = mexp(sym_unchecked(std::move(inner)));
      Matrix res = matmul(matmul(as, e.m()), as);
      res.symmetrize();
      const SpdMatrix at = spd_unchecked(sym_unchecked(std::move(res)));
      return th == 1.0 ? at : mpow(at, 1.0 / th);
    }
    case MetricFamily::EM: {
      const double th = spec.theta;
      Matrix a = mpow(p, th).m() + dpow_at(p, th, v).m();
      a.symmetrize();
      const EigDecomp d = sym_eig(sym_unchecked(std::move(a)));
      std::vector<double> w(d.lambda.size());
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(d.lambda[i] > 0.0))
          throw DomainError("rieexp_at: step leaves the SPD cone (eigenvalue " +
                            std::to_string(d.lambda[i]) + ")");
        w[i] = std::pow(d.lambda[i], 1.0 / th);
      }
      return spd_unchecked(sym_unchecked(sandwich_diag(d.u, w)));
    }
    default:
      throw UnsupportedError(std::string("rieexp_at: no closed form for family ") +
                             family_name(spec.family));
  }
}

namespace {

// Distance helpers for commuting arguments: eigenvalues of q (and the GBWM
// anchor) read off in p's eigenbasis; throws when the basis does not
// simultaneously diagonalize.
std::vector<double> diagonal_in_basis(const EigDecomp& dp, const SpdMatrix& x, const char* who) {
  const Matrix xt = matmul(matmul_atb(dp.u, x.m()), dp.u);
  double off = 0.0;
  for (int i = 0; i < xt.rows(); ++i)
    for (int j = 0; j < xt.cols(); ++j)
      if (i != j) off = std::max(off, std::fabs(xt(i, j)));
  if (off > 1e-8 * x.m().frobenius_norm())
    throw UnsupportedError(std::string(who) +
                           ": closed-form distance requires commuting (simultaneously "
                           "diagonalizable) arguments");
  std::vector<double> d(xt.rows());
  for (int i = 0; i < xt.rows(); ++i) d[i] = xt(i, i);
  return d;
}

}  // namespace

double geodesic_dist(const MetricSpec& spec, const SpdMatrix& p, const SpdMatrix& q) {
  const int n = p.dim();
  spec.validate(n);
  if (q.dim() != n) throw ShapeError("geodesic_dist: dimension mismatch");

  switch (spec.family) {
    case MetricFamily::LEM: {
      const SymMatrix diff = sym_unchecked(mlog(p).m() - mlog(q).m());
      return std::sqrt(inner_ab(diff, diff, spec.alpha, spec.beta));
    }
    case MetricFamily::AIM: {
      const double th = spec.theta;
      const EigDecomp da = sym_eig(mpow(p, th));
      const Matrix asi = mpow(da, -0.5).m();
      Matrix c = matmul(matmul(asi, mpow(q, th).m()), asi);
      c.symmetrize();
      const SymMatrix lg = mlog(spd_unchecked(sym_unchecked(std::move(c))));
      return std::sqrt(inner_ab(lg, lg, spec.alpha, spec.beta)) / std::fabs(th);
    }
    case MetricFamily::EM: {
      const double th = spec.theta;
      const SymMatrix diff = sym_unchecked(mpow(p, th).m() - mpow(q, th).m());
      return std::sqrt(inner_ab(diff, diff, spec.alpha, spec.beta)) / std::fabs(th);
    }
    case MetricFamily::MPEM: {
      const double t0 = spec.theta0();
      const EigDecomp dp = sym_eig(p);
      const std::vector<double> mu = diagonal_in_basis(dp, q, "geodesic_dist (MPEM)");
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = std::pow(dp.lambda[i], t0) - std::pow(mu[i], t0);
        s += d * d;
      }
      return std::sqrt(s) / std::fabs(t0);
    }
    case MetricFamily::LCM: {
      const double th = spec.theta;
      const LowerTri l = cholesky(mpow(p, th));
      const LowerTri k = cholesky(mpow(q, th));
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
          const double d = l(i, j) - k(i, j);
          s += d * d;
        }
        const double d = std::log(l(i, i)) - std::log(k(i, i));
        s += d * d;
      }
      return std::sqrt(s) / std::fabs(th);
    }
    case MetricFamily::BWM: {
      const double th = spec.theta;
      const SpdMatrix a = mpow(p, 2.0 * th);
      const SpdMatrix b = mpow(q, 2.0 * th);
      const EigDecomp da = sym_eig(a);
      const Matrix as = mpow(da, 0.5).m();
      Matrix inner = matmul(matmul(as, b.m()), as);
      inner.symmetrize();
      const EigDecomp dc = sym_eig(sym_unchecked(std::move(inner)));
      double cross = 0.0;
      for (double lam : dc.lambda) cross += std::sqrt(std::max(lam, 0.0));
      const double d2 = std::max(a.m().trace() + b.m().trace() - 2.0 * cross, 0.0);
      return std::sqrt(d2) / (2.0 * std::fabs(th));
    }
    case MetricFamily::GBWM: {
      const double th = spec.theta;
      const SpdMatrix m = gbwm_anchor(spec, n);
      const EigDecomp dp = sym_eig(p);
      const std::vector<double> mu = diagonal_in_basis(dp, q, "geodesic_dist (GBWM)");
      const std::vector<double> mm = diagonal_in_basis(dp, m, "geodesic_dist (GBWM)");
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = std::pow(dp.lambda[i], th) - std::pow(mu[i], th);
        s += d * d / mm[i];
      }
      return std::sqrt(s) / (2.0 * std::fabs(th));
    }
  }
  throw ConfigError("geodesic_dist: unknown family");
}

std::pair<double, double> gbwm_aim_check(double theta, const SpdMatrix& p, const SymMatrix& v,
                                         const SymMatrix& w) {
  if (theta == 0.0) throw ConfigError("gbwm_aim_check: theta must be nonzero");
  const int n = p.dim();
  if (v.dim() != n || w.dim() != n) throw ShapeError("gbwm_aim_check: dimension mismatch");

  const EigDecomp dp = sym_eig(p);
  const SpdMatrix pt = mpow(dp, 2.0 * theta);
  const SymMatrix dv = dpow_at(p, 2.0 * theta, v);
  const SymMatrix dw = dpow_at(p, 2.0 * theta, w);
  const double scale = 1.0 / (4.0 * theta * theta);

  // GBWM route, anchored at P^{2θ}: generalized Lyapunov solver.
  const double g_gbwm = scale * 0.5 * frobenius_dot(gen_lyapunov(pt, pt, dv).m(), dw.m());

  // Quarter of the power-deformed affine-invariant metric: inverse route.
  const SpdMatrix pti = mpow(dp, -2.0 * theta);
  const Matrix x = matmul(pti.m(), dv.m());
  const Matrix y = matmul(pti.m(), dw.m());
  double txy = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) txy += x(i, j) * y(j, i);
  const double g_aim_quarter = 0.25 * scale * txy;

  return {g_gbwm, g_aim_quarter};
}

}  // namespace spdgeom
