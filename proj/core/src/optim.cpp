#include "spdgeom/optim.hpp"

#include <cmath>
#include <string>

namespace spdgeom {

namespace {

void check_finite_grad(const Matrix& grad, const char* who) {
  if (!grad.all_finite())
    throw NumericError(std::string(who) + ": non-finite gradient", grad.max_abs());
}

void require_pem_pullback(const MetricSpec& spec, const char* who) {
  if (spec.family != MetricFamily::EM || spec.alpha != 1.0 || spec.beta != 0.0)
    throw UnsupportedError(std::string(who) +
                           ": only the (theta,1,0)-EM pullback geometry is supported");
  if (spec.theta == 0.0) throw ConfigError(std::string(who) + ": theta must be nonzero");
}

}  // namespace

Matrix sgd_step(const Matrix& param, const Matrix& grad, double lr) {
  check_same_shape(param, grad, "sgd_step");
  check_finite_grad(grad, "sgd_step");
  return param - grad * lr;
}

std::vector<double> sgd_step(const std::vector<double>& param, const std::vector<double>& grad,
                             double lr) {
  if (param.size() != grad.size()) throw ShapeError("sgd_step: shape mismatch");
  std::vector<double> out(param.size());
  for (std::size_t i = 0; i < param.size(); ++i) {
    if (!std::isfinite(grad[i])) throw NumericError("sgd_step: non-finite gradient", grad[i]);
    out[i] = param[i] - lr * grad[i];
  }
  return out;
}

SymMatrix sgd_step(const SymMatrix& param, const SymMatrix& grad, double lr) {
  check_finite_grad(grad.m(), "sgd_step");
  return sym_unchecked(param.m() - grad.m() * lr);
}

SymMatrix egrad_to_rgrad(const MetricSpec& spec, const SpdMatrix& p, const SymMatrix& egrad) {
  require_pem_pullback(spec, "egrad_to_rgrad");
  if (p.dim() != egrad.dim()) throw ShapeError("egrad_to_rgrad: dimension mismatch");
  check_finite_grad(egrad.m(), "egrad_to_rgrad");
  const double th = spec.theta;
  if (th == 1.0) return egrad;  // φ is the identity
  // φ_* = (1/|θ|) dpow_θ is self-adjoint, so the inverse Loewner map applies twice.
  const SymMatrix once = dmat_fun_inv(p, fns::pow(th), fns::dpow(th), egrad);
  const SymMatrix twice = dmat_fun_inv(p, fns::pow(th), fns::dpow(th), once);
  return twice * (th * th);
}

SpdMatrix rsgd_step(const MetricSpec& spec, const SpdMatrix& p, const SymMatrix& egrad, double lr) {
  require_pem_pullback(spec, "rsgd_step");
  if (p.dim() != egrad.dim()) throw ShapeError("rsgd_step: dimension mismatch");
  check_finite_grad(egrad.m(), "rsgd_step");
  const double th = spec.theta;

  // φ(P') = φ(P) − lr (ad φ_{*,P})⁻¹(egrad); with φ = (1/|θ|) pow_θ the
  // adjoint inverse is |θ| · dpow_θ⁻¹, so in the pow_θ chart the step reads
  // P'^θ = P^θ − lr θ² dpow_θ⁻¹(egrad).
  const SymMatrix adj =
      th == 1.0 ? egrad : dmat_fun_inv(p, fns::pow(th), fns::dpow(th), egrad) * (th * th);
  Matrix chart = mpow(p, th).m() - adj.m() * lr;
  chart.symmetrize();
  const SymMatrix chart_sym = sym_unchecked(std::move(chart));
  const EigDecomp d = sym_eig(chart_sym);
  const double smallest = d.lambda.back();
  if (!(smallest > 0.0))
    throw StepRejectedError("rsgd_step: update leaves the SPD cone (eigenvalue " +
                                std::to_string(smallest) + ")",
                            smallest);
  if (th == 1.0) return spd_unchecked(chart_sym);
  std::vector<double> w(d.lambda.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(d.lambda[i], 1.0 / th);
  return spd_unchecked(sym_unchecked(sandwich_diag(d.u, w)));
}

std::pair<Matrix, double> scaled_init(const Matrix& a0, double lr, double theta) {
  if (!(theta > 0.0)) throw ConfigError("scaled_init: theta must be positive");
  return {a0 * theta, lr * theta * theta};
}

}  // namespace spdgeom
