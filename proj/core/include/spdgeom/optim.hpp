#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spdgeom/metric.hpp"

namespace spdgeom {

/// Plain SGD settings. classifier_factor multiplies the learning rate of the
/// FC weight matrix (biases and manifold parameters use the base rate).
struct SgdConfig {
  double lr = 0.01;
  double classifier_factor = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(lr > 0.0)) throw ConfigError("SgdConfig: lr must be positive");
    if (!(classifier_factor > 0.0))
      throw ConfigError("SgdConfig: classifier_factor must be positive");
  }
};

/// param − lr · grad. Throws NumericError on non-finite gradients.
Matrix sgd_step(const Matrix& param, const Matrix& grad, double lr);
std::vector<double> sgd_step(const std::vector<double>& param, const std::vector<double>& grad,
                             double lr);
SymMatrix sgd_step(const SymMatrix& param, const SymMatrix& grad, double lr);

/// Projection of a Euclidean gradient to the Riemannian gradient under the
/// (θ,1,0)-EM pullback geometry: Π_P = φ_{*,P}⁻¹ ∘ (ad φ_{*,P})⁻¹ with
/// φ = (1/|θ|) pow_θ, whose differential is self-adjoint in the Frobenius
/// product. Only that family is supported (UnsupportedError otherwise).
SymMatrix egrad_to_rgrad(const MetricSpec& spec, const SpdMatrix& p, const SymMatrix& egrad);

/// One Riemannian SGD step: rieexp_P(−lr · Π_P(egrad)), evaluated through the
/// closed form φ(P') = φ(P) − lr · (ad φ_{*,P})⁻¹(egrad). Throws
/// StepRejectedError (with the offending eigenvalue) when the update would
/// leave the SPD cone.
SpdMatrix rsgd_step(const MetricSpec& spec, const SpdMatrix& p, const SymMatrix& egrad, double lr);

/// Initialization transform pairing a scaled-power classifier with a plain
/// power classifier: (A₀, γ) on the power side corresponds to (θ·A₀, θ²·γ)
/// on the scaled side. Requires theta > 0.
std::pair<Matrix, double> scaled_init(const Matrix& a0, double lr, double theta);

/// Trainable state of an SPD multinomial logistic regression: SPD anchors
/// stepped by rsgd_step, symmetric directions stepped by sgd_step.
struct RsgdState {
  MetricSpec spec;
  std::vector<SpdMatrix> anchors;
  std::vector<SymMatrix> directions;
};

}  // namespace spdgeom
