#include "spdgeom/gcp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "spdgeom/rng.hpp"

namespace spdgeom {

void Dataset::validate() const {
  if (dim <= 0 || positions < 2 || num_classes <= 0)
    throw ConfigError("Dataset: need dim > 0, positions >= 2, num_classes > 0");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const FeatureSample& s = samples[i];
    if (s.x.rows() != dim || s.x.cols() != positions)
      throw ShapeError("Dataset: sample " + std::to_string(i) + " has inconsistent shape");
    if (!s.x.all_finite())
      throw DomainError("Dataset: sample " + std::to_string(i) + " has non-finite entries");
    if (s.label < 0 || s.label >= num_classes)
      throw ConfigError("Dataset: sample " + std::to_string(i) + " label out of range");
  }
}

namespace {

// Centered scatter (1/N) X̄ X̄ᵀ as a plain matrix.
Matrix covariance_scatter(const Matrix& x) {
  const int d = x.rows(), n = x.cols();
  if (n < 2) throw ConfigError("covariance_pool: need at least two positions");
  if (!x.all_finite()) throw DomainError("covariance_pool: non-finite feature entries");
  std::vector<double> mean(d, 0.0);
  for (int i = 0; i < d; ++i) {
    const double* xi = x.row_ptr(i);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += xi[j];
    mean[i] = s / n;
  }
  Matrix centered(d, n);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < n; ++j) centered(i, j) = x(i, j) - mean[i];
  Matrix scatter = matmul_abt(centered, centered);
  scatter *= 1.0 / n;
  scatter.symmetrize();
  return scatter;
}

}  // namespace

SpdMatrix covariance_pool(const Matrix& x, double eps_reg) {
  if (eps_reg < 0.0) throw ConfigError("covariance_pool: eps_reg must be nonnegative");
  Matrix scatter = covariance_scatter(x);
  for (int i = 0; i < scatter.rows(); ++i) scatter(i, i) += eps_reg;
  return SpdMatrix(sym_unchecked(std::move(scatter)));
}

SpdMatrix covariance_pool_adaptive(const Matrix& x) {
  Matrix scatter = covariance_scatter(x);
  const double eps = 1e-6 * scatter.trace() / scatter.rows();
  for (int i = 0; i < scatter.rows(); ++i) scatter(i, i) += eps;
  return SpdMatrix(sym_unchecked(std::move(scatter)));
}

Dataset synth_dataset(int num_classes, int dim, int positions, int per_class, double spread,
                      std::uint64_t seed) {
  if (num_classes <= 0 || dim <= 0 || positions < 2 || per_class <= 0)
    throw ConfigError("synth_dataset: invalid sizes");
  if (spread < 0.0) throw ConfigError("synth_dataset: spread must be nonnegative");

  Dataset ds;
  ds.dim = dim;
  ds.positions = positions;
  ds.num_classes = num_classes;
  ds.samples.reserve(static_cast<std::size_t>(num_classes) * per_class);

  for (int c = 0; c < num_classes; ++c) {
    Rng class_rng = Rng::stream(seed, static_cast<std::uint64_t>(c));
    Matrix b(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j <= i; ++j) {
        const double v = class_rng.normal();
        b(i, j) = v;
        b(j, i) = v;
      }
    const SpdMatrix cov = rieexp_identity(MetricSpec::lem(), sym_unchecked(b * spread));
    const Matrix factor = mpow(cov, 0.5).m();

    for (int s = 0; s < per_class; ++s) {
      Rng samp = Rng::stream(seed, 0x100000ULL + static_cast<std::uint64_t>(c) * per_class + s);
      Matrix z(dim, positions);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < positions; ++j) z(i, j) = samp.normal();
      ds.samples.push_back({matmul(factor, z), c});
    }
  }
  return ds;
}

void TrainConfig::validate() const {
  head.validate();
  sgd.validate();
  if (epochs < 1) throw ConfigError("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
  if (weight_decay < 0.0) throw ConfigError("TrainConfig: weight_decay must be nonnegative");
  if (eps_reg && *eps_reg < 0.0) throw ConfigError("TrainConfig: eps_reg must be nonnegative");
  for (const auto& [epoch, divisor] : lr_schedule) {
    if (epoch < 0 || !(divisor > 0.0)) throw ConfigError("TrainConfig: bad lr_schedule entry");
  }
}

namespace {

SpdMatrix pooled(const Matrix& x, const std::optional<double>& eps_reg) {
  return eps_reg ? covariance_pool(x, *eps_reg) : covariance_pool_adaptive(x);
}

Matrix reduced(const std::optional<Matrix>& reduction, const Matrix& x) {
  return reduction ? matmul(*reduction, x) : x;
}

// Rank of `label` under descending logits with ties to the lower index.
int label_rank(const std::vector<double>& logits, int label) {
  int rank = 0;
  for (int k = 0; k < static_cast<int>(logits.size()); ++k) {
    if (k == label) continue;
    if (logits[k] > logits[label] || (logits[k] == logits[label] && k < label)) ++rank;
  }
  return rank;
}

struct FeatureCache {
  std::vector<std::vector<double>> x;  // vec of the head-mapped matrix
  std::vector<int> labels;
  int width = 0;
};

FeatureCache precompute_features(const Dataset& ds, const HeadSpec& head,
                                 const std::optional<double>& eps_reg) {
  FeatureCache cache;
  cache.width = ds.dim * ds.dim;
  cache.x.reserve(ds.samples.size());
  cache.labels.reserve(ds.samples.size());
  for (const FeatureSample& s : ds.samples) {
    const SpdMatrix sigma = pooled(s.x, eps_reg);
    cache.x.push_back(vec_sym(head_matrix(head, sigma)));
    cache.labels.push_back(s.label);
  }
  return cache;
}

struct Split {
  std::vector<int> train;
  std::vector<int> val;
};

// Stratified 80/20 split by position within each class, in dataset order.
Split split_dataset(const Dataset& ds) {
  Split sp;
  std::vector<std::vector<int>> by_class(ds.num_classes);
  for (int i = 0; i < static_cast<int>(ds.samples.size()); ++i)
    by_class[ds.samples[i].label].push_back(i);
  for (const auto& idx : by_class) {
    const int n_train = std::max(1, static_cast<int>(idx.size() * 4 / 5));
    for (int i = 0; i < static_cast<int>(idx.size()); ++i)
      (i < n_train ? sp.train : sp.val).push_back(idx[i]);
  }
  std::sort(sp.train.begin(), sp.train.end());
  std::sort(sp.val.begin(), sp.val.end());
  if (sp.val.empty()) sp.val = sp.train;
  return sp;
}

struct FcState {
  Matrix weights;             // C × width
  std::vector<double> bias;   // C
  std::vector<double> anchor;  // vec of the shared PowEmlrPrime anchor (may be empty)
};

std::vector<double> fc_logits(const FcState& fc, const std::vector<double>& x, bool prime) {
  std::vector<double> features = x;
  if (prime)
    for (std::size_t i = 0; i < features.size(); ++i) features[i] -= fc.anchor[i];
  std::vector<double> logits = matvec(fc.weights, features);
  for (std::size_t k = 0; k < logits.size(); ++k) logits[k] += fc.bias[k];
  return logits;
}

std::pair<double, double> cache_accuracy(const FcState& fc, const FeatureCache& cache,
                                         const std::vector<int>& idx, bool prime) {
  if (idx.empty()) return {0.0, 0.0};
  int hit1 = 0, hit5 = 0;
  for (int i : idx) {
    const std::vector<double> logits = fc_logits(fc, cache.x[i], prime);
    const int rank = label_rank(logits, cache.labels[i]);
    hit1 += rank == 0;
    hit5 += rank < 5;
  }
  return {static_cast<double>(hit1) / idx.size(), static_cast<double>(hit5) / idx.size()};
}

}  // namespace

std::vector<double> model_logits(const GcpModel& model, const FeatureSample& sample) {
  const SpdMatrix sigma = pooled(reduced(model.reduction, sample.x), model.eps_reg);
  return head_forward(model.head, sigma, model.fc_weights, model.fc_bias);
}

std::pair<GcpModel, RunRecord> train(const Dataset& ds, const TrainConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ds.validate();
  cfg.validate();

  const bool prime = cfg.head.kind == HeadKind::PowEmlrPrime;
  HeadSpec head = cfg.head;
  if (prime && head.shared_anchor.dim() == 0) head.shared_anchor = SymMatrix::identity(ds.dim);
  if (prime && head.shared_anchor.dim() != ds.dim)
    throw ConfigError("train: PowEmlrPrime anchor dimension mismatch");

  const FeatureCache cache = precompute_features(ds, head, cfg.eps_reg);
  const Split split = split_dataset(ds);
  const int c = ds.num_classes, width = cache.width;

  Rng rng(cfg.sgd.seed);
  FcState fc;
  fc.weights = Matrix(c, width);
  for (int k = 0; k < c; ++k)
    for (int j = 0; j < width; ++j) fc.weights(k, j) = 0.01 * rng.normal();
  fc.bias.assign(c, 0.0);
  if (prime) fc.anchor = vec_sym(head.shared_anchor);

  RunRecord record;
  record.config = cfg;
  record.seed = cfg.sgd.seed;

  std::vector<int> order = split.train;
  double lr = cfg.sgd.lr;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& [at_epoch, divisor] : cfg.lr_schedule)
      if (at_epoch == epoch) lr /= divisor;
    const double lr_w = lr * cfg.sgd.classifier_factor;

    // Fisher-Yates over the training indices, then fixed-order batches.
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform_index(i + 1));
      std::swap(order[i], order[j]);
    }

    double loss_sum = 0.0;
    Matrix grad_w(c, width);
    std::vector<double> grad_b(c);
    std::vector<double> grad_anchor(prime ? width : 0);

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double inv_bs = 1.0 / static_cast<double>(end - start);
      grad_w.data().assign(grad_w.data().size(), 0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
      std::fill(grad_anchor.begin(), grad_anchor.end(), 0.0);

      for (std::size_t t = start; t < end; ++t) {
        const int i = order[t];
        std::vector<double> features = cache.x[i];
        if (prime)
          for (int j = 0; j < width; ++j) features[j] -= fc.anchor[j];
        std::vector<double> logits = matvec(fc.weights, features);
        for (int k = 0; k < c; ++k) logits[k] += fc.bias[k];
        const SoftmaxXent sx = softmax_xent(logits, cache.labels[i]);
        loss_sum += sx.loss;
        for (int k = 0; k < c; ++k) {
          const double gk = sx.grad[k];
          grad_b[k] += gk;
          double* gw = grad_w.row_ptr(k);
          for (int j = 0; j < width; ++j) gw[j] += gk * features[j];
        }
        if (prime) {
          // d logits_k / d anchor = −row_k(W)
          for (int k = 0; k < c; ++k) {
            const double gk = sx.grad[k];
            const double* wk = fc.weights.row_ptr(k);
            for (int j = 0; j < width; ++j) grad_anchor[j] -= gk * wk[j];
          }
        }
      }

      for (int k = 0; k < c; ++k) {
        double* wk = fc.weights.row_ptr(k);
        const double* gw = grad_w.row_ptr(k);
        for (int j = 0; j < width; ++j)
          wk[j] -= lr_w * (gw[j] * inv_bs + cfg.weight_decay * wk[j]);
        fc.bias[k] -= lr * grad_b[k] * inv_bs;
      }
      if (prime)
        for (int j = 0; j < width; ++j) fc.anchor[j] -= lr * grad_anchor[j] * inv_bs;
    }

    EpochStats stats;
    stats.train_loss = order.empty() ? 0.0 : loss_sum / static_cast<double>(order.size());
    std::tie(stats.train_top1, stats.train_top5) = cache_accuracy(fc, cache, split.train, prime);
    std::tie(stats.val_top1, stats.val_top5) = cache_accuracy(fc, cache, split.val, prime);
    record.epochs.push_back(stats);
  }

  GcpModel model;
  model.head = head;
  if (prime) {
    Matrix anchor_m(ds.dim, ds.dim, fc.anchor);
    anchor_m.symmetrize();
    model.head.shared_anchor = sym_unchecked(std::move(anchor_m));
  }
  model.fc_weights = std::move(fc.weights);
  model.fc_bias = std::move(fc.bias);
  model.eps_reg = cfg.eps_reg;
  model.num_classes = c;

  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(model), std::move(record)};
}

std::pair<double, double> evaluate(const GcpModel& model, const Dataset& ds) {
  ds.validate();
  if (ds.num_classes != model.num_classes) throw ShapeError("evaluate: class count mismatch");
  if (model.fc_weights.cols() !=
      (model.reduction ? model.reduction->rows() * model.reduction->rows() : ds.dim * ds.dim))
    throw ShapeError("evaluate: feature width mismatch");
  int hit1 = 0, hit5 = 0;
  for (const FeatureSample& s : ds.samples) {
    const std::vector<double> logits = model_logits(model, s);
    const int rank = label_rank(logits, s.label);
    hit1 += rank == 0;
    hit5 += rank < 5;
  }
  const double n = static_cast<double>(ds.samples.size());
  return {hit1 / n, hit5 / n};
}

}  // namespace spdgeom
