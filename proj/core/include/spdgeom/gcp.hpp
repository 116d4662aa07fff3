#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spdgeom/heads.hpp"
#include "spdgeom/optim.hpp"

namespace spdgeom {

/// One training sample: a d×N feature field (d channels at N positions).
struct FeatureSample {
  Matrix x;
  int label = 0;
};

struct Dataset {
  std::vector<FeatureSample> samples;
  int dim = 0;          // d
  int positions = 0;    // N
  int num_classes = 0;  // C

  void validate() const;
};

/// Σ = (1/N) X̄ X̄ᵀ + eps_reg·I with column-mean-centered X̄. The result must
/// be positive definite (NotPositiveDefiniteError for rank-deficient scatter
/// with eps_reg = 0).
SpdMatrix covariance_pool(const Matrix& x, double eps_reg);

/// covariance_pool with the scale-aware default ridge 1e-6 · tr(Σ)/d.
SpdMatrix covariance_pool_adaptive(const Matrix& x);

/// Synthetic covariance-classification benchmark: class c draws feature
/// columns from N(0, G_c) with G_c = rieexp_identity(LEM, spread·B_c) for a
/// fixed random symmetric B_c. Bit-identical for identical seeds.
Dataset synth_dataset(int num_classes, int dim, int positions, int per_class, double spread,
                      std::uint64_t seed);

enum class FeatureFormat { Csv, F64Bin };

void save_features(const std::string& path, const Dataset& ds, FeatureFormat format);
Dataset load_features(const std::string& path, FeatureFormat format);
/// Detects the format by the f64bin magic bytes.
Dataset load_features_auto(const std::string& path);

struct TrainConfig {
  HeadSpec head;
  int epochs = 30;
  int batch_size = 8;
  SgdConfig sgd;
  double weight_decay = 0.0;
  /// Covariance ridge; absent means the scale-aware default 1e-6 · tr(Σ)/d.
  std::optional<double> eps_reg;
  /// (epoch, divisor) pairs: the learning rate is divided by the divisor at
  /// the start of the listed (0-based) epoch.
  std::vector<std::pair<int, double>> lr_schedule;

  void validate() const;
};

/// The trained pipeline: optional channel reduction, matrix-function head,
/// FC layer. The reduction map is applied to X before pooling when present;
/// the toy trainer leaves it unset.
struct GcpModel {
  HeadSpec head;
  Matrix fc_weights;             // C × d²
  std::vector<double> fc_bias;   // C
  std::optional<Matrix> reduction;
  std::optional<double> eps_reg;  // ridge policy used at train time
  int num_classes = 0;
};

struct EpochStats {
  double train_loss = 0.0;
  double train_top1 = 0.0;
  double train_top5 = 0.0;
  double val_top1 = 0.0;
  double val_top5 = 0.0;
};

/// What a run reports: per-epoch curves, the resolved config, the seed, and
/// wall time. All fields except wall_seconds are deterministic in the seed.
struct RunRecord {
  std::vector<EpochStats> epochs;
  TrainConfig config;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;

  /// Stable-key-order JSON; the volatile timing field is emitted last.
  std::string to_json() const;
};

std::vector<double> model_logits(const GcpModel& model, const FeatureSample& sample);

/// Deterministic single-threaded SGD over softmax cross-entropy through the
/// head. FC weights use lr · classifier_factor and take the weight decay;
/// the bias (and the PowEmlrPrime anchor) use the base rate, undecayed.
/// A fixed stratified 80/20 split provides the per-epoch validation metrics.
std::pair<GcpModel, RunRecord> train(const Dataset& ds, const TrainConfig& cfg);

/// Top-1/top-5 accuracy; ties broken toward the lowest class index.
std::pair<double, double> evaluate(const GcpModel& model, const Dataset& ds);

}  // namespace spdgeom
