#include <doctest.h>

#include <cmath>

#include "spdgeom/metric.hpp"
#include "test_util.hpp"

using namespace spdgeom;
using namespace spdgeom::test;

namespace {

const std::vector<MetricSpec> kAllFamilies = {
    MetricSpec::lem(),         MetricSpec::aim(0.7),  MetricSpec::em(0.5),
    MetricSpec::mpem(0.5, 1.0), MetricSpec::lcm(0.8), MetricSpec::bwm(0.5),
    MetricSpec::gbwm(0.5),
};

}  // namespace

TEST_CASE("inner_ab: closed-form values and positive definiteness") {
  const SymMatrix id = SymMatrix::identity(2);
  CHECK(inner_ab(id, id, 1.0, 0.0) == doctest::Approx(2.0));
  CHECK(inner_ab(id, id, 1.0, 1.0) == doctest::Approx(6.0));

  Rng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const SymMatrix v = random_sym(3, 1.0, rng);
    if (v.m().frobenius_norm() == 0.0) continue;
    CHECK(inner_ab(v, v, 0.7, -0.2) > 0.0);  // alpha + n*beta = 0.1 > 0
  }
  CHECK_THROWS_AS(inner_ab(id, id, -1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(inner_ab(id, id, 1.0, -0.6), ConfigError);
}

TEST_CASE("MetricSpec validation") {
  CHECK_THROWS_AS(MetricSpec::em(0.0).validate(3), ConfigError);
  CHECK_THROWS_AS(MetricSpec::mpem(0.5, -0.5).validate(3), ConfigError);
  CHECK_THROWS_AS(MetricSpec::lem(0.0).validate(3), ConfigError);
  CHECK_NOTHROW(MetricSpec::mpem(0.5, 1.5).validate(3));
}

TEST_CASE("metric_at: identity-basepoint values") {
  Rng rng(22);
  const SymMatrix v = random_sym(4, 1.0, rng);
  const SymMatrix w = random_sym(4, 1.0, rng);
  const SpdMatrix id = SpdMatrix::identity(4);

  CHECK(metric_at(MetricSpec::lem(), id, v, w) ==
        doctest::Approx(frobenius_dot(v.m(), w.m())).epsilon(1e-12));

  for (double th : {0.25, 0.5, 1.0})
    CHECK(metric_at(MetricSpec::bwm(th), id, v, w) ==
          doctest::Approx(0.25 * frobenius_dot(v.m(), w.m())).epsilon(1e-10));
}

TEST_CASE("metric_at: deformed power metric expands through the power differential") {
  Rng rng(23);
  const SpdMatrix p = random_spd(5, 0.6, rng);
  const SymMatrix v = random_sym(5, 1.0, rng);
  for (double th : {0.5, 0.25}) {
    const SymMatrix dv = dmat_fun(p, fns::pow(th), fns::dpow(th), v);
    const double want = frobenius_dot(dv.m(), dv.m()) / (th * th);
    CHECK(metric_at(MetricSpec::em(th), p, v, v) == doctest::Approx(want).epsilon(1e-11));
  }
}

TEST_CASE("metric_at: symmetric, bilinear, positive; GBWM at M = I matches BWM") {
  Rng rng(24);
  const SpdMatrix p = random_spd(4, 0.5, rng);
  for (const MetricSpec& spec : kAllFamilies) {
    const SymMatrix v = random_sym(4, 1.0, rng);
    const SymMatrix w = random_sym(4, 1.0, rng);
    if (spec.family != MetricFamily::MPEM) {
      CHECK(metric_at(spec, p, v, w) == doctest::Approx(metric_at(spec, p, w, v)).epsilon(1e-10));
    }
    const double lhs = metric_at(spec, p, sym_unchecked(v.m() * 2.0 + w.m() * 0.5), w);
    const double rhs = 2.0 * metric_at(spec, p, v, w) + 0.5 * metric_at(spec, p, w, w);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    if (v.m().frobenius_norm() > 0.0) CHECK(metric_at(spec, p, v, v) > 0.0);
  }

  const SymMatrix v = random_sym(4, 1.0, rng);
  CHECK(metric_at(MetricSpec::gbwm(0.5, SpdMatrix::identity(4)), p, v, v) ==
        doctest::Approx(metric_at(MetricSpec::bwm(0.5), p, v, v)).epsilon(1e-11));
}

TEST_CASE("rielog_identity: basepoint itself maps to zero for every family") {
  const SpdMatrix id = SpdMatrix::identity(5);
  for (const MetricSpec& spec : kAllFamilies)
    CHECK(rielog_identity(spec, id).m().frobenius_norm() < 1e-14);
}

TEST_CASE("rielog_identity: power family closed form") {
  const SpdMatrix p(Matrix{{4, 0}, {0, 1}});
  const SymMatrix v = rielog_identity(MetricSpec::em(0.5), p);
  CHECK(rel_fro_err(v.m(), Matrix{{2, 0}, {0, 0}}) < 1e-13);
}

TEST_CASE("rielog_identity: log-Cholesky collapses to the matrix log on diagonals") {
  const SpdMatrix p(Matrix{{4, 0, 0}, {0, 0.25, 0}, {0, 0, 1}});
  for (double th : {0.5, 1.0, 2.0})
    CHECK(rel_fro_err(rielog_identity(MetricSpec::lcm(th), p).m(), mlog(p).m()) < 1e-12);
}

TEST_CASE("rielog_identity: affine-invariant log is deformation-free") {
  Rng rng(25);
  const SpdMatrix p = random_spd(5, 0.7, rng);
  const Matrix want = mlog(p).m();
  for (double th : {0.25, 1.0, 2.0})
    CHECK(rel_fro_err(rielog_identity(MetricSpec::aim(th), p).m(), want) < 1e-11);
}

TEST_CASE("rieexp_identity: zero vector maps to the identity; inverse example") {
  for (const MetricSpec& spec : kAllFamilies) {
    const SpdMatrix p = rieexp_identity(spec, SymMatrix::zeros(4));
    CHECK(rel_fro_err(p.m(), Matrix::identity(4)) < 1e-14);
  }
  const SpdMatrix back =
      rieexp_identity(MetricSpec::em(0.5), sym_unchecked(Matrix{{2, 0}, {0, 0}}));
  CHECK(rel_fro_err(back.m(), Matrix{{4, 0}, {0, 1}}) < 1e-13);
}

TEST_CASE("rieexp_identity: power families reject steps outside the cone") {
  const SymMatrix v = sym_unchecked(Matrix{{-3.0, 0.0}, {0.0, 0.1}});
  CHECK_THROWS_AS(rieexp_identity(MetricSpec::em(1.0), v), DomainError);
}

TEST_CASE("rielog/rieexp identity round-trip across all families") {
  Rng rng(26);
  for (int trial = 0; trial < 10; ++trial) {
    const SymMatrix v = random_sym(8, 0.12, rng);
    for (const MetricSpec& spec : kAllFamilies) {
      const SymMatrix back = rielog_identity(spec, rieexp_identity(spec, v));
      CHECK((back.m() - v.m()).frobenius_norm() / (1.0 + v.m().frobenius_norm()) < 1e-9);
    }
  }
}

TEST_CASE("rielog_at: Bures-Wasserstein log at the identity") {
  Rng rng(27);
  const SpdMatrix q = random_spd(5, 0.5, rng);
  const TangentAt t = rielog_at(MetricSpec::bwm(0.5), SpdMatrix::identity(5), q);
  const Matrix want = (mpow(q, 0.5).m() - Matrix::identity(5)) * 2.0;
  CHECK(rel_fro_err(t.vec.m(), want) < 1e-11);
}

TEST_CASE("rielog_at: log of the basepoint itself vanishes") {
  Rng rng(28);
  const SpdMatrix p = random_spd(4, 0.6, rng);
  CHECK(rielog_at(MetricSpec::aim(1.0), p, p).vec.m().frobenius_norm() < 1e-12);
  CHECK(rielog_at(MetricSpec::lem(), p, p).vec.m().frobenius_norm() < 1e-12);
}

TEST_CASE("rielog_at at the identity reproduces rielog_identity for every family") {
  Rng rng(29);
  const SpdMatrix id = SpdMatrix::identity(6);
  for (int trial = 0; trial < 5; ++trial) {
    const SpdMatrix q = random_spd(6, 0.4, rng);
    for (const MetricSpec& spec : kAllFamilies) {
      const Matrix got = rielog_at(spec, id, q).vec.m();
      const Matrix want = rielog_identity(spec, q).m();
      CHECK((got - want).frobenius_norm() / (1.0 + want.frobenius_norm()) < 1e-10);
    }
  }
}

TEST_CASE("rielog_at: fixed-anchor GBWM agrees with the congruence pullback of BWM") {
  Rng rng(30);
  for (int trial = 0; trial < 5; ++trial) {
    const SpdMatrix p = random_spd(4, 0.4, rng);
    const SpdMatrix q = random_spd(4, 0.4, rng);
    const SpdMatrix m = random_spd(4, 0.3, rng);
    const double theta = 0.5;

    const Matrix direct = rielog_at(MetricSpec::gbwm(theta, m), p, q).vec.m();

    // Independent route: congruence by M^{-1/2} turns the anchored metric
    // into plain BWM; push arguments through, take the BWM log, pull back.
    const SymMatrix rsym = mat_fun(m, fns::pow(-0.5));
    const Matrix r = rsym.m();
    const Matrix rh = mat_fun(m, fns::pow(0.5)).m();
    auto congruence = [&](const SpdMatrix& x, const Matrix& t) {
      Matrix y = matmul(matmul(t, x.m()), t);
      y.symmetrize();
      return spd_unchecked(sym_unchecked(std::move(y)));
    };
    const SpdMatrix a = congruence(mpow(p, 2.0 * theta), r);
    const SpdMatrix b = congruence(mpow(q, 2.0 * theta), r);
    const TangentAt bw = rielog_at(MetricSpec::bwm(0.5), a, b);
    Matrix pulled = matmul(matmul(rh, bw.vec.m()), rh);
    pulled.symmetrize();
    const SymMatrix expected =
        dmat_fun_inv(p, fns::pow(2.0 * theta), fns::dpow(2.0 * theta), sym_unchecked(pulled));
    CHECK((direct - expected.m()).frobenius_norm() / (1.0 + expected.m().frobenius_norm()) <
          1e-9);
  }
}

TEST_CASE("rielog_at: mixed-power metric requires commuting arguments") {
  Rng rng(31);
  const MetricSpec spec = MetricSpec::mpem(0.5, 1.0);
  const SpdMatrix p(Matrix{{4, 0}, {0, 1}});
  const SpdMatrix q(Matrix{{9, 0}, {0, 2}});
  const TangentAt t = rielog_at(spec, p, q);  // diagonal pair commutes
  // theta0 = 0.75; compare against the power-family formula evaluated directly.
  const SymMatrix w = sym_unchecked(mpow(q, 0.75).m() - mpow(p, 0.75).m());
  const SymMatrix want = dmat_fun_inv(p, fns::pow(0.75), fns::dpow(0.75), w);
  CHECK(rel_fro_err(t.vec.m(), want.m()) < 1e-12);

  const SpdMatrix pr = random_spd(3, 0.5, rng);
  const SpdMatrix qr = random_spd(3, 0.5, rng);
  CHECK_THROWS_AS(rielog_at(spec, pr, qr), NonCommutingError);
}

TEST_CASE("rieexp_at inverts rielog_at for the closed-form families") {
  Rng rng(32);
  for (int trial = 0; trial < 5; ++trial) {
    const SpdMatrix p = random_spd(5, 0.4, rng);
    const SpdMatrix q = random_spd(5, 0.4, rng);
    for (const MetricSpec& spec :
         {MetricSpec::lem(), MetricSpec::aim(1.0), MetricSpec::aim(0.5), MetricSpec::em(0.5)}) {
      const TangentAt t = rielog_at(spec, p, q);
      const SpdMatrix back = rieexp_at(spec, p, t.vec);
      CHECK(rel_fro_err(back.m(), q.m()) < 1e-9);
    }
  }
  CHECK_THROWS_AS(
      rieexp_at(MetricSpec::bwm(0.5), SpdMatrix::identity(3), SymMatrix::zeros(3)),
      UnsupportedError);
}

TEST_CASE("geodesic_dist: identity of indiscernibles and symmetry") {
  Rng rng(33);
  const SpdMatrix p = random_spd(4, 0.5, rng);
  const SpdMatrix q = random_spd(4, 0.5, rng);
  for (const MetricSpec& spec : {MetricSpec::lem(), MetricSpec::aim(1.0), MetricSpec::em(0.5),
                                 MetricSpec::lcm(0.8), MetricSpec::bwm(0.5)}) {
    CHECK(geodesic_dist(spec, p, p) == doctest::Approx(0.0).epsilon(1e-12));
    const double dpq = geodesic_dist(spec, p, q);
    CHECK(dpq > 0.0);
    CHECK(dpq == doctest::Approx(geodesic_dist(spec, q, p)).epsilon(1e-10));
  }
}

TEST_CASE("geodesic_dist: the worked power/log gap example") {
  const SpdMatrix p(Matrix{{4, 0}, {0, 1}});
  const SpdMatrix id = SpdMatrix::identity(2);

  const double d_pem = geodesic_dist(MetricSpec::em(0.5), p, id);
  CHECK(d_pem == doctest::Approx(2.0).epsilon(1e-13));

  const double d_lem = geodesic_dist(MetricSpec::lem(), p, id);
  CHECK(d_lem == doctest::Approx(std::log(4.0)).epsilon(1e-13));

  CHECK(d_pem - d_lem == doctest::Approx(0.6137056388801094).epsilon(1e-10));
}

TEST_CASE("geodesic_dist: Bures-Wasserstein closed form") {
  // tr(P) + tr(I) - 2 tr(P^{1/2}) = 5 + 2 - 6 = 1 at theta = 1/2.
  const SpdMatrix p(Matrix{{4, 0}, {0, 1}});
  CHECK(geodesic_dist(MetricSpec::bwm(0.5), p, SpdMatrix::identity(2)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("geodesic_dist: power metric approaches the log metric as the power vanishes") {
  Rng rng(34);
  for (int trial = 0; trial < 5; ++trial) {
    const SpdMatrix p = random_spd_spectrum(6, 0.1, 10.0, rng);  // cond <= 100
    const SpdMatrix q = random_spd_spectrum(6, 0.1, 10.0, rng);
    const double d_lem = geodesic_dist(MetricSpec::lem(), p, q);
    const double d_pem = geodesic_dist(MetricSpec::em(1e-3), p, q);
    CHECK(std::fabs(d_pem - d_lem) / d_lem < 1e-2);
  }
}

TEST_CASE("geodesic_dist: O(n)-invariant scaling enters through the norm") {
  Rng rng(35);
  const SpdMatrix p = random_spd(4, 0.5, rng);
  const SpdMatrix q = random_spd(4, 0.5, rng);
  for (auto family : {&MetricSpec::lem}) {
    const double base = geodesic_dist(family(1.0, 0.0), p, q);
    const double scaled = geodesic_dist(family(4.0, 0.0), p, q);
    CHECK(scaled == doctest::Approx(2.0 * base).epsilon(1e-12));
  }
  const double da = geodesic_dist(MetricSpec::aim(1.0, 1.0, 0.0), p, q);
  const double da4 = geodesic_dist(MetricSpec::aim(1.0, 4.0, 0.0), p, q);
  CHECK(da4 == doctest::Approx(2.0 * da).epsilon(1e-12));
}

TEST_CASE("geodesic_dist: commuting fallback and unsupported combinations") {
  const SpdMatrix p(Matrix{{4, 0}, {0, 1}});
  const SpdMatrix q(Matrix{{9, 0}, {0, 2}});

  // Commuting MPEM distance equals the effective-power PEM distance.
  const double d_mpem = geodesic_dist(MetricSpec::mpem(0.5, 1.0), p, q);
  const double d_pem = geodesic_dist(MetricSpec::em(0.75), p, q);
  CHECK(d_mpem == doctest::Approx(d_pem).epsilon(1e-12));

  // GBWM with a commuting anchor reduces to an anchor-weighted BWM sum.
  const double d_gbwm =
      geodesic_dist(MetricSpec::gbwm(0.5, SpdMatrix::identity(2)), p, q);
  const double d_bwm = geodesic_dist(MetricSpec::bwm(0.5), p, q);
  CHECK(d_gbwm == doctest::Approx(d_bwm).epsilon(1e-12));

  Rng rng(36);
  const SpdMatrix pr = random_spd(3, 0.5, rng);
  const SpdMatrix qr = random_spd(3, 0.5, rng);
  CHECK_THROWS_AS(geodesic_dist(MetricSpec::mpem(0.5, 1.0), pr, qr), UnsupportedError);
  CHECK_THROWS_AS(geodesic_dist(MetricSpec::gbwm(0.5), pr, qr), UnsupportedError);
}

TEST_CASE("gbwm_aim_check: identity-basepoint value and random agreement") {
  const int n = 3;
  const SymMatrix id = SymMatrix::identity(n);
  const auto [g1, g2] = gbwm_aim_check(0.5, SpdMatrix::identity(n), id, id);
  CHECK(g1 == doctest::Approx(n / 4.0).epsilon(1e-12));
  CHECK(g2 == doctest::Approx(n / 4.0).epsilon(1e-12));

  Rng rng(37);
  for (double theta : {0.25, 0.5, 1.0}) {
    for (int trial = 0; trial < 10; ++trial) {
      const SpdMatrix p = random_spd(5, 0.5, rng);
      const SymMatrix v = random_sym(5, 1.0, rng);
      const SymMatrix w = random_sym(5, 1.0, rng);
      const auto [a, b] = gbwm_aim_check(theta, p, v, w);
      CHECK(std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b)) < 1e-8);
    }
  }
}

TEST_CASE("gbwm_aim_check: both routes are bilinear") {
  Rng rng(38);
  const SpdMatrix p = random_spd(4, 0.5, rng);
  const SymMatrix v1 = random_sym(4, 1.0, rng);
  const SymMatrix v2 = random_sym(4, 1.0, rng);
  const SymMatrix w = random_sym(4, 1.0, rng);
  const SymMatrix combo = sym_unchecked(v1.m() * 1.5 + v2.m() * (-0.5));

  const auto [a_combo, b_combo] = gbwm_aim_check(0.5, p, combo, w);
  const auto [a1, b1] = gbwm_aim_check(0.5, p, v1, w);
  const auto [a2, b2] = gbwm_aim_check(0.5, p, v2, w);
  CHECK(a_combo == doctest::Approx(1.5 * a1 - 0.5 * a2).epsilon(1e-12));
  CHECK(b_combo == doctest::Approx(1.5 * b1 - 0.5 * b2).epsilon(1e-12));
}
