#pragma once

#include <vector>

#include "spdgeom/linalg.hpp"

namespace spdgeom {

/// Per-class parameters of a Euclidean multinomial logistic regression:
/// row k of directions is a_k (nonzero), bias[k] is b_k.
struct EuclideanMlrParams {
  Matrix directions;
  std::vector<double> bias;
};

/// logits_k = ⟨a_k, x⟩ − b_k.
std::vector<double> emlr_logits(const std::vector<double>& x, const EuclideanMlrParams& params);

/// logits_k = ⟨a_k, x − p_k⟩, with anchors p_k as rows.
std::vector<double> emlr_logits_anchor(const std::vector<double>& x, const Matrix& anchors,
                                       const Matrix& directions);

/// Signed margin form: sign(⟨a_k, x − p_k⟩) · ‖a_k‖ · d(x, H_{a_k,p_k}).
/// Algebraically identical to emlr_logits_anchor.
std::vector<double> emlr_logits_margin(const std::vector<double>& x, const Matrix& anchors,
                                       const Matrix& directions);

/// Minimum-norm anchor p with ⟨a, p⟩ = b, i.e. p = (b/‖a‖²) a.
std::vector<double> bias_to_anchor(const std::vector<double>& a, double b);

/// The matrix maps feeding the FC layer of a covariance classifier head.
enum class HeadKind { LogEmlr, PowEmlr, ScalePowEmlr, PowTmlr, ChoTmlr, PowEmlrPrime };

const char* head_kind_name(HeadKind k);

/// A head = matrix map + FC layer convention. theta is ignored by LogEmlr.
/// PowEmlrPrime replaces the bias with one shared anchor subtracted in
/// feature space; the anchor starts SPD and is afterwards trained as an
/// unconstrained symmetric parameter.
struct HeadSpec {
  HeadKind kind = HeadKind::PowEmlr;
  double theta = 0.5;
  SymMatrix shared_anchor;       // PowEmlrPrime only; empty when unused
  bool use_newton_schulz = false;  // square-root path, theta = 1/2 only
  int newton_schulz_iters = 15;

  static HeadSpec log_emlr();
  static HeadSpec pow_emlr(double theta);
  static HeadSpec scale_pow_emlr(double theta);
  static HeadSpec pow_tmlr(double theta);
  static HeadSpec cho_tmlr(double theta);
  static HeadSpec pow_emlr_prime(double theta, const SpdMatrix& anchor);

  void validate() const;
};

/// The mapped matrix fed to vectorization:
///   LogEmlr       mlog(S)
///   PowEmlr       S^θ
///   ScalePowEmlr  (1/|θ|) S^θ
///   PowTmlr       (1/θ)(S^θ − I)
///   ChoTmlr       (1/θ)[⌊L̃⌋ + ⌊L̃⌋ᵀ + 2 dlog(D(L̃))], L̃ = chol(S^θ)
///   PowEmlrPrime  S^θ (the anchor is subtracted inside the FC layer)
SymMatrix head_matrix(const HeadSpec& spec, const SpdMatrix& s);

/// FC layer after the matrix map: logits = W vec(·) + b, except PowEmlrPrime
/// where logits_k = ⟨row_k(W), vec(S^θ) − vec(anchor)⟩ + b_k (trainers keep
/// b at zero for that head).
std::vector<double> head_forward(const HeadSpec& spec, const SpdMatrix& s, const Matrix& fc_weights,
                                 const std::vector<double>& fc_bias);

/// Per-class manifold parameters of an SPD multinomial logistic regression.
struct SpdMlrParams {
  std::vector<SpdMatrix> anchors;     // P_k
  std::vector<SymMatrix> directions;  // A_k
};

/// logits_k = ⟨log S − log P_k, A_k⟩^(α,β).
std::vector<double> spd_mlr_logits_lem(const SpdMatrix& s, const SpdMlrParams& params, double alpha,
                                       double beta);

/// logits_k = (1/|θ|) ⟨S^θ − P_k^θ, A_k⟩^(α,β); θ < 0 is the inverse-power
/// extension (θ = −1 classifies inverse covariance matrices).
std::vector<double> spd_mlr_logits_pem(const SpdMatrix& s, const SpdMlrParams& params, double theta,
                                       double alpha, double beta);

struct SoftmaxXent {
  double loss;
  std::vector<double> grad;  // softmax(logits) − onehot(label)
};

/// Numerically stable softmax cross-entropy with gradient.
SoftmaxXent softmax_xent(const std::vector<double>& logits, int label);

}  // namespace spdgeom
