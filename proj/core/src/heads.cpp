#include "spdgeom/heads.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spdgeom/metric.hpp"

namespace spdgeom {

namespace {

double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void check_mlr_shapes(const std::vector<double>& x, const Matrix& directions, const char* who) {
  if (directions.cols() != static_cast<int>(x.size()))
    throw ShapeError(std::string(who) + ": feature dimension mismatch");
  if (directions.rows() == 0) throw ShapeError(std::string(who) + ": no classes");
}

double norm2(const double* a, int n) { return dot(a, a, n); }

}  // namespace

std::vector<double> emlr_logits(const std::vector<double>& x, const EuclideanMlrParams& params) {
  check_mlr_shapes(x, params.directions, "emlr_logits");
  if (static_cast<int>(params.bias.size()) != params.directions.rows())
    throw ShapeError("emlr_logits: bias length mismatch");
  const int c = params.directions.rows(), d = params.directions.cols();
  std::vector<double> out(c);
  for (int k = 0; k < c; ++k)
    out[k] = dot(params.directions.row_ptr(k), x.data(), d) - params.bias[k];
  return out;
}

std::vector<double> emlr_logits_anchor(const std::vector<double>& x, const Matrix& anchors,
                                       const Matrix& directions) {
  check_mlr_shapes(x, directions, "emlr_logits_anchor");
  check_same_shape(anchors, directions, "emlr_logits_anchor");
  const int c = directions.rows(), d = directions.cols();
  std::vector<double> out(c);
  std::vector<double> centered(d);
  for (int k = 0; k < c; ++k) {
    const double* p = anchors.row_ptr(k);
    for (int i = 0; i < d; ++i) centered[i] = x[i] - p[i];
    out[k] = dot(directions.row_ptr(k), centered.data(), d);
  }
  return out;
}

std::vector<double> emlr_logits_margin(const std::vector<double>& x, const Matrix& anchors,
                                       const Matrix& directions) {
  check_mlr_shapes(x, directions, "emlr_logits_margin");
  check_same_shape(anchors, directions, "emlr_logits_margin");
  const int c = directions.rows(), d = directions.cols();
  std::vector<double> out(c);
  std::vector<double> centered(d);
  for (int k = 0; k < c; ++k) {
    const double* a = directions.row_ptr(k);
    const double an = std::sqrt(norm2(a, d));
    if (!(an > 0.0)) throw DegenerateDirectionError("emlr_logits_margin: zero direction");
    const double* p = anchors.row_ptr(k);
    for (int i = 0; i < d; ++i) centered[i] = x[i] - p[i];
    const double inner = dot(a, centered.data(), d);
    const double margin = std::fabs(inner) / an;  // d(x, H_{a,p})
    const double sign = inner > 0.0 ? 1.0 : (inner < 0.0 ? -1.0 : 0.0);
    out[k] = sign * an * margin;
  }
  return out;
}

std::vector<double> bias_to_anchor(const std::vector<double>& a, double b) {
  const double n2 = norm2(a.data(), static_cast<int>(a.size()));
  if (!(n2 > 0.0)) throw DegenerateDirectionError("bias_to_anchor: zero direction");
  std::vector<double> p(a.size());
  const double scale = b / n2;
  for (std::size_t i = 0; i < a.size(); ++i) p[i] = scale * a[i];
  return p;
}

const char* head_kind_name(HeadKind k) {
  switch (k) {
    case HeadKind::LogEmlr: return "log";
    case HeadKind::PowEmlr: return "pow";
    case HeadKind::ScalePowEmlr: return "scalepow";
    case HeadKind::PowTmlr: return "powtmlr";
    case HeadKind::ChoTmlr: return "chotmlr";
    case HeadKind::PowEmlrPrime: return "powprime";
  }
  return "?";
}

HeadSpec HeadSpec::log_emlr() { return HeadSpec{HeadKind::LogEmlr, 1.0, {}, false, 15}; }
HeadSpec HeadSpec::pow_emlr(double theta) { return HeadSpec{HeadKind::PowEmlr, theta, {}, false, 15}; }
HeadSpec HeadSpec::scale_pow_emlr(double theta) {
  return HeadSpec{HeadKind::ScalePowEmlr, theta, {}, false, 15};
}
HeadSpec HeadSpec::pow_tmlr(double theta) { return HeadSpec{HeadKind::PowTmlr, theta, {}, false, 15}; }
HeadSpec HeadSpec::cho_tmlr(double theta) { return HeadSpec{HeadKind::ChoTmlr, theta, {}, false, 15}; }
HeadSpec HeadSpec::pow_emlr_prime(double theta, const SpdMatrix& anchor) {
  return HeadSpec{HeadKind::PowEmlrPrime, theta, anchor.sym(), false, 15};
}

void HeadSpec::validate() const {
  if (kind != HeadKind::LogEmlr && theta == 0.0)
    throw ConfigError("HeadSpec: theta must be nonzero for power-based heads");
  if (use_newton_schulz) {
    if (theta != 0.5)
      throw ConfigError("HeadSpec: the Newton-Schulz path is only valid for theta = 1/2");
    if (newton_schulz_iters < 1) throw ConfigError("HeadSpec: newton_schulz_iters must be >= 1");
  }
}

namespace {

SpdMatrix head_power(const HeadSpec& spec, const SpdMatrix& s, double theta) {
  if (spec.use_newton_schulz && theta == 0.5)
    return newton_schulz_sqrt(s, spec.newton_schulz_iters);
  return mpow(s, theta);
}

}  // namespace

SymMatrix head_matrix(const HeadSpec& spec, const SpdMatrix& s) {
  spec.validate();
  switch (spec.kind) {
    case HeadKind::LogEmlr:
      return mlog(s);
    case HeadKind::PowEmlr:
    case HeadKind::PowEmlrPrime:
      return head_power(spec, s, spec.theta).sym();
    case HeadKind::ScalePowEmlr:
      return head_power(spec, s, spec.theta).sym() * (1.0 / std::fabs(spec.theta));
    case HeadKind::PowTmlr: {
      const Matrix pt = head_power(spec, s, spec.theta).m();
      return sym_unchecked((pt - Matrix::identity(s.dim())) * (1.0 / spec.theta));
    }
    case HeadKind::ChoTmlr: {
      if (spec.use_newton_schulz) {
        // chol(S^θ) with the square root from the iterative path, then the
        // same (1/θ)-scaled Cholesky-space bracket.
        const SymMatrix bracket = rielog_identity(MetricSpec::lcm(1.0), head_power(spec, s, spec.theta));
        return bracket * (1.0 / spec.theta);
      }
      return rielog_identity(MetricSpec::lcm(spec.theta), s);
    }
  }
  throw ConfigError("head_matrix: unknown head kind");
}

std::vector<double> head_forward(const HeadSpec& spec, const SpdMatrix& s, const Matrix& fc_weights,
                                 const std::vector<double>& fc_bias) {
  spec.validate();
  const int c = fc_weights.rows();
  if (static_cast<int>(fc_bias.size()) != c) throw ShapeError("head_forward: bias length mismatch");
  if (fc_weights.cols() != s.dim() * s.dim())
    throw ShapeError("head_forward: FC width must be n^2");

  std::vector<double> x = vec_sym(head_matrix(spec, s));
  if (spec.kind == HeadKind::PowEmlrPrime) {
    if (spec.shared_anchor.dim() != s.dim())
      throw ConfigError("head_forward: PowEmlrPrime requires a shared anchor of matching size");
    const std::vector<double> pa = vec_sym(spec.shared_anchor);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= pa[i];
  }
  std::vector<double> logits = matvec(fc_weights, x);
  for (int k = 0; k < c; ++k) logits[k] += fc_bias[k];
  return logits;
}

std::vector<double> spd_mlr_logits_lem(const SpdMatrix& s, const SpdMlrParams& params, double alpha,
                                       double beta) {
  if (params.anchors.size() != params.directions.size())
    throw ShapeError("spd_mlr_logits_lem: anchors/directions count mismatch");
  const SymMatrix ls = mlog(s);
  std::vector<double> out(params.anchors.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const SymMatrix diff = sym_unchecked(ls.m() - mlog(params.anchors[k]).m());
    out[k] = inner_ab(diff, params.directions[k], alpha, beta);
  }
  return out;
}

std::vector<double> spd_mlr_logits_pem(const SpdMatrix& s, const SpdMlrParams& params, double theta,
                                       double alpha, double beta) {
  if (theta == 0.0) throw ConfigError("spd_mlr_logits_pem: theta must be nonzero");
  if (params.anchors.size() != params.directions.size())
    throw ShapeError("spd_mlr_logits_pem: anchors/directions count mismatch");
  const SymMatrix st = mpow(s, theta).sym();
  const double scale = 1.0 / std::fabs(theta);
  std::vector<double> out(params.anchors.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const SymMatrix diff = sym_unchecked(st.m() - mpow(params.anchors[k], theta).m());
    out[k] = scale * inner_ab(diff, params.directions[k], alpha, beta);
  }
  return out;
}

SoftmaxXent softmax_xent(const std::vector<double>& logits, int label) {
  const int c = static_cast<int>(logits.size());
  if (label < 0 || label >= c) throw ShapeError("softmax_xent: label out of range");
  for (double l : logits)
    if (!std::isfinite(l)) throw DomainError("softmax_xent: non-finite logit");

  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  std::vector<double> probs(c);
  for (int k = 0; k < c; ++k) {
    probs[k] = std::exp(logits[k] - m);
    sum += probs[k];
  }
  const double lse = m + std::log(sum);
  SoftmaxXent out;
  out.loss = lse - logits[label];
  out.grad.resize(c);
  for (int k = 0; k < c; ++k) out.grad[k] = probs[k] / sum - (k == label ? 1.0 : 0.0);
  return out;
}

}  // namespace spdgeom
