#pragma once

#include <optional>
#include <utility>

#include "spdgeom/linalg.hpp"

namespace spdgeom {

/// The seven metric families on S++(n). EM with theta != 1 is the
/// power-Euclidean metric (PEM); BWM/GBWM carry the power deformation through
/// pow_{2θ} with a 1/(4θ²) scale, so theta = 1/2 recovers the standard
/// Bures-Wasserstein metric.
enum class MetricFamily { LEM, AIM, EM, MPEM, LCM, BWM, GBWM };

const char* family_name(MetricFamily f);

/// Tagged description of one metric family plus its parameters.
///
/// theta is the deformation power (theta2 joins it for MPEM), (alpha, beta)
/// parameterize the O(n)-invariant inner product where the family admits one
/// (LEM/AIM/EM), and gbwm_m is the SPD anchor of GBWM (identity when absent).
struct MetricSpec {
  MetricFamily family = MetricFamily::LEM;
  double theta = 1.0;
  double theta2 = 1.0;  // MPEM only
  double alpha = 1.0;
  double beta = 0.0;
  std::optional<SpdMatrix> gbwm_m;

  static MetricSpec lem(double alpha = 1.0, double beta = 0.0);
  static MetricSpec aim(double theta = 1.0, double alpha = 1.0, double beta = 0.0);
  static MetricSpec em(double theta = 1.0, double alpha = 1.0, double beta = 0.0);
  static MetricSpec mpem(double theta1, double theta2);
  static MetricSpec lcm(double theta = 1.0);
  static MetricSpec bwm(double theta = 0.5);
  static MetricSpec gbwm(double theta = 0.5, std::optional<SpdMatrix> m = std::nullopt);

  /// Effective power for the matrix-power-based log at the identity:
  /// (theta1+theta2)/2 for MPEM, theta otherwise.
  double theta0() const;

  /// Checks the parameter constraints against dimension n.
  /// Throws ConfigError on violation.
  void validate(int n) const;
};

/// A tangent vector attached to its base point.
struct TangentAt {
  SpdMatrix base;
  SymMatrix vec;
};

/// O(n)-invariant inner product α ⟨V,W⟩ + β tr(V) tr(W) on Sym(n).
/// Requires alpha > 0 and alpha + n·beta > 0.
double inner_ab(const SymMatrix& v, const SymMatrix& w, double alpha, double beta);

/// Metric tensor g_P(V, W) of the given family at base point P.
double metric_at(const MetricSpec& spec, const SpdMatrix& p, const SymMatrix& v, const SymMatrix& w);

/// Riemannian logarithm at the identity.
SymMatrix rielog_identity(const MetricSpec& spec, const SpdMatrix& p);

/// Riemannian exponential at the identity (inverse of rielog_identity).
/// For the power families the map is only defined where I + θ₀V is positive
/// definite; DomainError otherwise.
SpdMatrix rieexp_identity(const MetricSpec& spec, const SymMatrix& v);

/// Riemannian logarithm at a general base point. MPEM requires commuting
/// arguments (NonCommutingError otherwise).
TangentAt rielog_at(const MetricSpec& spec, const SpdMatrix& p, const SpdMatrix& q);

/// Riemannian exponential at a general base point; closed forms exist for the
/// LEM, AIM and EM families only (UnsupportedError otherwise).
SpdMatrix rieexp_at(const MetricSpec& spec, const SpdMatrix& p, const SymMatrix& v);

/// Closed-form geodesic distance. Supported: LEM, AIM, EM, LCM, BWM, plus a
/// commuting-arguments fallback for MPEM and GBWM (UnsupportedError otherwise).
double geodesic_dist(const MetricSpec& spec, const SpdMatrix& p, const SpdMatrix& q);

/// Evaluates the identity connecting the power-deformed GBWM anchored at
/// P^{2θ} with a quarter of the power-deformed affine-invariant metric.
/// Returns (GBWM value, AIM value / 4); the two routes share no solver.
std::pair<double, double> gbwm_aim_check(double theta, const SpdMatrix& p, const SymMatrix& v,
                                         const SymMatrix& w);

}  // namespace spdgeom
