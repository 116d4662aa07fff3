#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spdgeom/gcp.hpp"
#include "spdgeom/metric.hpp"
#include "spdgeom/rng.hpp"

namespace spdgeom::experiments {

/// Parallel-trial budget: SPD_GEOM_THREADS when set, hardware concurrency
/// otherwise, never below 1.
int thread_budget();

// ---------------------------------------------------------------------------
// Distance gap between the power-Euclidean and log-Euclidean geometries.
// ---------------------------------------------------------------------------

struct DistgapConfig {
  int n = 256;
  int pairs = 1000;
  std::vector<double> thetas = {0.5};
  std::string sampler = "wishart";  // wishart | logexp
  std::uint64_t seed = 0;
};

struct DistgapRow {
  std::vector<double> d_pem;  // one entry per configured theta
  double d_lem = 0.0;
};

struct DistgapSummary {
  double theta = 0.0;
  double mean_abs_gap = 0.0;
  double std_abs_gap = 0.0;
  double mean_rel_gap = 0.0;
};

struct DistgapResult {
  DistgapConfig config;
  std::vector<DistgapRow> rows;            // indexed by pair id
  std::vector<DistgapSummary> summaries;   // one per theta
};

/// Samples SPD pairs, computes the PEM and LEM geodesic distances per pair
/// (sharing one eigendecomposition per matrix across all powers), and
/// aggregates |d_pem − d_lem| statistics. Deterministic per (seed, pair id).
DistgapResult run_distgap(const DistgapConfig& cfg);

/// pair_id,d_pem,d_lem,abs_diff rows for the first configured theta.
void write_distgap_csv(const std::string& path, const DistgapResult& result);
/// Stable-key summary including the fixed n=256/θ=0.5 reference constants.
void write_distgap_json(const std::string& path, const DistgapResult& result);

// ---------------------------------------------------------------------------
// Invariant suite over the seven metric families.
// ---------------------------------------------------------------------------

struct CheckEntry {
  std::string name;
  double max_err = 0.0;
  double tol = 0.0;
  bool pass = true;
};

struct CheckLogsResult {
  std::vector<CheckEntry> checks;
  bool all_pass = true;
};

/// Round-trips, identity-basepoint consistency, metric-scaling invariance and
/// deformed-log consistency for every family. perturb injects a deliberate
/// 1e-6 fault so the suite's detection power itself is testable.
CheckLogsResult run_check_logs(int n, int trials, std::uint64_t seed, bool perturb);

// ---------------------------------------------------------------------------
// Training-equivalence harnesses.
// ---------------------------------------------------------------------------

struct PairingResult {
  std::vector<double> per_step_dev;        // weight/anchor relation deviation
  std::vector<double> per_step_logit_dev;  // forward agreement
  std::vector<double> per_step_loss_diff;
  double tol = 0.0;
  double max_dev = 0.0;
  int first_violation = -1;  // step index, -1 when none
  bool pass = true;
};

/// Plain-power vs scaled-power FC training with scaled initialization and the
/// θ²-scaled weight learning rate; the weight relation A_t = (1/θ)Ā_t and the
/// loss curves must track to 1e-6 over the run.
PairingResult run_scalepow_pairing(double theta, int steps, std::uint64_t seed);

/// SPD MLR trained with Riemannian SGD on its anchors versus the Euclidean
/// MLR living in the power-map codomain; anchors (through the power map) and
/// logits must track to 1e-8 per step.
PairingResult run_rsgd_pairing(double theta, int steps, std::uint64_t seed);

struct DivergenceResult {
  std::vector<double> per_trial_gap;
  int exceed_count = 0;
  double threshold = 1e-6;
  bool pass = true;  // pass means NOT equivalent on >= 95% of trials
};

/// One-step FC update of the shifted-power tangent head, rewritten onto plain
/// power features, versus the matched scaled plain-power update. The two must
/// differ: the identity shift entangles the effective bias with the weights.
DivergenceResult run_powtmlr_divergence(double theta, int trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Deformed-GBWM / quarter-AIM identity.
// ---------------------------------------------------------------------------

struct GbwmAimResult {
  double max_rel_dev = 0.0;
  double tol = 1e-8;
  int trials = 0;
  int worst_trial = -1;
  bool pass = true;
};

GbwmAimResult run_gbwm_aim(double theta, int trials, std::uint64_t seed, bool perturb);

// ---------------------------------------------------------------------------
// Shared sampling helpers (deterministic in the supplied generator).
// ---------------------------------------------------------------------------

/// SPD matrix A Aᵀ/n + I with A standard normal.
SpdMatrix sample_wishart(int n, Rng& rng);
/// mexp of a random symmetric matrix with entries N(0, 1/n) — log-spectrum
/// roughly in [-2, 2] independent of n.
SpdMatrix sample_logexp(int n, Rng& rng);
/// Random symmetric matrix with N(0, scale²) entries.
SymMatrix sample_sym(int n, double scale, Rng& rng);
/// mexp(sample_sym(n, scale)): SPD with log-spectrum of width ~scale·√n.
SpdMatrix sample_spd_near_identity(int n, double scale, Rng& rng);

}  // namespace spdgeom::experiments
