#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "experiments.hpp"
#include "spdgeom/metric.hpp"
#include "test_util.hpp"

using namespace spdgeom;
using namespace spdgeom::test;
namespace ex = spdgeom::experiments;

TEST_CASE("distgap: fast per-pair path matches the geodesic-distance API") {
  ex::DistgapConfig cfg;
  cfg.n = 6;
  cfg.pairs = 10;
  cfg.thetas = {0.5, 0.25};
  cfg.sampler = "wishart";
  cfg.seed = 7;
  const ex::DistgapResult result = ex::run_distgap(cfg);

  for (int pair = 0; pair < cfg.pairs; ++pair) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(pair));
    const SpdMatrix p = ex::sample_wishart(cfg.n, rng);
    const SpdMatrix q = ex::sample_wishart(cfg.n, rng);
    CHECK(result.rows[pair].d_lem ==
          doctest::Approx(geodesic_dist(MetricSpec::lem(), p, q)).epsilon(1e-10));
    for (std::size_t t = 0; t < cfg.thetas.size(); ++t)
      CHECK(result.rows[pair].d_pem[t] ==
            doctest::Approx(geodesic_dist(MetricSpec::em(cfg.thetas[t]), p, q)).epsilon(1e-10));
  }
}

TEST_CASE("distgap: deterministic in the seed, positive gap, vanishing-power limit") {
  ex::DistgapConfig cfg;
  cfg.n = 12;
  cfg.pairs = 40;
  cfg.thetas = {0.5, 1e-3};
  cfg.seed = 11;
  for (const char* sampler : {"wishart", "logexp"}) {
    cfg.sampler = sampler;
    const ex::DistgapResult a = ex::run_distgap(cfg);
    const ex::DistgapResult b = ex::run_distgap(cfg);
    CHECK(a.summaries[0].mean_abs_gap == b.summaries[0].mean_abs_gap);
    CHECK(a.summaries[0].mean_abs_gap > 0.0);
    CHECK(a.summaries[1].mean_rel_gap < 1e-2);
  }
  cfg.sampler = "nope";
  CHECK_THROWS_AS(ex::run_distgap(cfg), ConfigError);
}

TEST_CASE("check-logs: clean kernel passes, injected fault is caught") {
  const ex::CheckLogsResult clean = ex::run_check_logs(5, 8, 42, false);
  CHECK(clean.all_pass);
  for (const ex::CheckEntry& e : clean.checks) CHECK(e.max_err <= e.tol);

  const ex::CheckLogsResult faulty = ex::run_check_logs(5, 8, 42, true);
  CHECK_FALSE(faulty.all_pass);
}

TEST_CASE("scaled-power pairing holds across powers") {
  for (double theta : {0.25, 0.5, 0.7}) {
    const ex::PairingResult r = ex::run_scalepow_pairing(theta, 60, 9);
    CHECK(r.pass);
    CHECK(r.max_dev <= 1e-6);
    for (double d : r.per_step_loss_diff) CHECK(d <= 1e-6);
  }
  // Identity scaling: the two runs are the same run.
  const ex::PairingResult id = ex::run_scalepow_pairing(1.0, 30, 9);
  CHECK(id.max_dev == 0.0);
}

TEST_CASE("manifold-SGD pairing tracks the flattened trajectory") {
  for (double theta : {0.25, 0.5, 1.0}) {
    const ex::PairingResult r = ex::run_rsgd_pairing(theta, 60, 13);
    CHECK(r.pass);
    CHECK(r.max_dev <= 1e-8);
  }
}

TEST_CASE("shifted tangent head is not a reparameterized power head") {
  const ex::DivergenceResult r = ex::run_powtmlr_divergence(0.5, 100, 17);
  CHECK(r.pass);
  CHECK(r.exceed_count >= 95);
  // The analytic gap for one step is (lr/θ²)·‖g‖·√n > 0.
  for (double g : r.per_trial_gap) CHECK(g > 0.0);
}

TEST_CASE("deformed-GBWM/quarter-AIM identity with fault injection") {
  const ex::GbwmAimResult clean = ex::run_gbwm_aim(0.5, 30, 23, false);
  CHECK(clean.pass);
  CHECK(clean.max_rel_dev < 1e-8);

  const ex::GbwmAimResult faulty = ex::run_gbwm_aim(0.5, 30, 23, true);
  CHECK_FALSE(faulty.pass);
}

TEST_CASE("thread budget honors the environment cap") {
  setenv("SPD_GEOM_THREADS", "3", 1);
  CHECK(ex::thread_budget() == 3);
  setenv("SPD_GEOM_THREADS", "0", 1);
  CHECK(ex::thread_budget() >= 1);
  unsetenv("SPD_GEOM_THREADS");
  CHECK(ex::thread_budget() >= 1);
}
