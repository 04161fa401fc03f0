// Hybrid-moment verification: closed forms against the quadrature
// oracle, derivative consistency by finite differences, degenerate
// variance limits, and the site-parameter conversion identities.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "epglm/special.hpp"
#include "epglm/tilted.hpp"

using namespace epglm;

namespace {

ModelSpec spec_of(ModelKind kind) {
  ModelSpec m;
  m.kind = kind;
  return m;
}

const std::vector<double> kLambdaGrid = {-3.0, -2.0, -1.0, -0.3, 0.0, 0.4, 1.0, 2.0, 3.0};
const std::vector<double> kRho2Grid = {0.1, 0.5, 1.0, 2.0, 5.0};

// Central differences of logZ for a closed-form family.
template <typename F>
void check_derivative_consistency(F tilted, double lam, double rho2,
                                  double tol) {
  const double h = 1e-5;
  const TiltedSummary c = tilted(lam, rho2);
  const TiltedSummary lp = tilted(lam + h, rho2);
  const TiltedSummary lm = tilted(lam - h, rho2);
  const double fd_lambda = (lp.logZ - lm.logZ) / (2.0 * h);
  CHECK(std::abs(c.theta - fd_lambda) < tol);

  const TiltedSummary rp = tilted(lam, rho2 + h);
  const TiltedSummary rm = tilted(lam, rho2 - h);
  const double fd_rho2 = (rp.logZ - rm.logZ) / (2.0 * h);
  const double drho2 = 0.5 * (c.delta + c.theta * c.theta);
  CHECK(std::abs(drho2 - fd_rho2) < tol);
}

}  // namespace

TEST_CASE("probit tilted summary is exact against quadrature") {
  for (int y : {0, 1}) {
    for (int i = 0; i < 7; ++i) {
      for (int j = 0; j < 7; ++j) {
        const double lam = -3.0 + i;
        const double rho2 = 0.1 * std::pow(100.0, j / 6.0);  // [0.1, 10]
        const CavityProjection cav{lam, rho2};
        const TiltedSummary closed = tilted_probit(y, cav);
        const TiltedSummary quad =
            tilted_quadrature(spec_of(ModelKind::probit), y, cav);
        CHECK(std::abs(closed.logZ - quad.logZ) < 1e-10);
        CHECK(std::abs(closed.mean(cav) - quad.mean(cav)) < 1e-10);
        CHECK(std::abs(closed.variance(cav) - quad.variance(cav)) < 1e-10);
      }
    }
  }
}

TEST_CASE("probit reference values at lambda=0, rho2=1") {
  const CavityProjection cav{0.0, 1.0};
  const TiltedSummary t1 = tilted_probit(1, cav);
  CHECK(t1.logZ == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  CHECK(t1.mean(cav) == doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-12));
  CHECK(t1.variance(cav) == doctest::Approx(0.6816901138162093).epsilon(1e-10));

  // Sign symmetry under y -> 1 - y at lambda = 0.
  const TiltedSummary t0 = tilted_probit(0, cav);
  CHECK(t0.mean(cav) == doctest::Approx(-t1.mean(cav)).epsilon(1e-13));
  CHECK(t0.variance(cav) == doctest::Approx(t1.variance(cav)).epsilon(1e-13));

  const CavityProjection cav2{2.0, 0.5};
  const TiltedSummary c = tilted_probit(1, cav2);
  const TiltedSummary q = tilted_quadrature(spec_of(ModelKind::probit), 1.0, cav2);
  CHECK(std::abs(c.logZ - q.logZ) < 1e-10);
  CHECK(std::abs(c.mean(cav2) - q.mean(cav2)) < 1e-10);
  CHECK(std::abs(c.variance(cav2) - q.variance(cav2)) < 1e-10);
}

TEST_CASE("logit closed form and its derivative structure") {
  for (double rho2 : {0.3, 1.0, 4.0}) {
    const CavityProjection cav{0.0, rho2};
    const TiltedSummary t = tilted_logit(1, cav);
    CHECK(std::exp(t.logZ) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(t.theta ==
          doctest::Approx(0.5 / std::sqrt(1.0 + rho2 * M_PI / 8.0)).epsilon(1e-13));
  }
  const CavityProjection cav{1.0, 8.0 / M_PI};
  const TiltedSummary t = tilted_logit(1, cav);
  const double expected = 1.0 / (1.0 + std::exp(-1.0 / std::sqrt(2.0)));
  CHECK(std::exp(t.logZ) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::exp(t.logZ) == doctest::Approx(0.6697616).epsilon(1e-7));

  // theta vs central difference at the spec'd point, tighter than grid tol.
  const double h = 1e-5;
  const CavityProjection c0{-1.3, 2.0};
  const TiltedSummary mid = tilted_logit(0, c0);
  const double fd = (tilted_logit(0, {c0.lambda + h, 2.0}).logZ -
                     tilted_logit(0, {c0.lambda - h, 2.0}).logZ) /
                    (2.0 * h);
  CHECK(std::abs(mid.theta - fd) < 1e-7);
}

TEST_CASE("logit displayed rho2-derivative residual is real and measured") {
  // The sqrt-denominator variant differs from the derivative of the
  // approximation itself by the factor 1/c; with the consistent form the
  // finite-difference check passes, with the displayed one it cannot.
  const CavityProjection cav{2.0, 3.0};
  const TiltedSummary t = tilted_logit(1, cav);
  const double consistent = 0.5 * (t.delta + t.theta * t.theta);
  const double displayed = logit_drho2_displayed(1, cav);
  const double c = std::sqrt(1.0 + cav.rho2 * M_PI / 8.0);
  CHECK(displayed == doctest::Approx(consistent * c).epsilon(1e-12));
  CHECK(std::abs(displayed - consistent) > 1e-3);

  const double h = 1e-5;
  const double fd = (tilted_logit(1, {2.0, 3.0 + h}).logZ -
                     tilted_logit(1, {2.0, 3.0 - h}).logZ) /
                    (2.0 * h);
  CHECK(std::abs(consistent - fd) < 1e-9);
  CHECK(std::abs(displayed - fd) > 1e-3);
}

TEST_CASE("poisson reference values and oracle agreement") {
  // W(e) = 1 gives Ztilde = e^{-1}/sqrt(2).
  const CavityProjection cav{0.0, 1.0};
  const TiltedSummary t = tilted_poisson(1, cav);
  CHECK(std::exp(t.logZ) ==
        doctest::Approx(std::exp(-1.0) / std::sqrt(2.0)).epsilon(1e-12));

  // Degenerate-variance limit equals the pmf at rate e^lambda.
  const CavityProjection tiny{0.0, 1e-8};
  CHECK(tilted_poisson(1, tiny).logZ == doctest::Approx(-1.0).epsilon(1e-6));

  // Asmussen vs quadrature at the spec'd interior point: logZ within
  // 0.02 and the tilted mean within 2%.
  const CavityProjection c3{1.0, 0.5};
  const TiltedSummary a = tilted_poisson(3, c3);
  const TiltedSummary q = tilted_quadrature(spec_of(ModelKind::poisson), 3.0, c3);
  CHECK(std::abs(a.logZ - q.logZ) < 0.02);
  CHECK(std::abs(a.mean(c3) - q.mean(c3)) < 0.02 * std::abs(q.mean(c3)));
}

TEST_CASE("poisson branch selection and threshold continuity") {
  // Branches agree within 5% relative on logZ at the switching threshold
  // where both are in their working range.
  for (double rho2 : {1.0, 2.0, 5.0}) {
    const CavityProjection cav{0.5, rho2};
    const double za = tilted_poisson_asmussen(0, cav).logZ;
    const double zr = tilted_poisson_rossberg(0, cav, 6).logZ;
    CHECK(std::abs(za - zr) < 0.05 * std::abs(za));
  }
  // Dispatch: below threshold and y=0 -> expansion branch; else Laplace.
  const CavityProjection cav{0.0, 2.0};
  CHECK(tilted_poisson(0, cav).logZ ==
        doctest::Approx(tilted_poisson_rossberg(0, cav, 6).logZ));
  CHECK(tilted_poisson(0, {0.7, 2.0}).logZ ==
        doctest::Approx(tilted_poisson_asmussen(0, {0.7, 2.0}).logZ));
  CHECK(tilted_poisson(2, cav).logZ ==
        doctest::Approx(tilted_poisson_asmussen(2, cav).logZ));
  CHECK_THROWS_AS(tilted_poisson(-1, cav), std::invalid_argument);
}

TEST_CASE("rossberg branch does not reach the degenerate-variance limit") {
  // The expansion is asymptotic in rho; as rho2 -> 0 it moves away from
  // the exact pmf instead of toward it. The engine relies on the Laplace
  // branch (exact in that limit) for such sites.
  const CavityProjection tiny{-0.5, 1e-8};
  const double exact = -std::exp(-0.5);  // log pmf of y=0 at rate e^{-0.5}
  const double ross = tilted_poisson_rossberg(0, tiny, 6).logZ;
  CHECK(std::abs(ross - exact) > 0.1);
  const double asm0 = tilted_poisson_asmussen(0, tiny).logZ;
  CHECK(asm0 == doctest::Approx(exact).epsilon(1e-4));
}

TEST_CASE("gamma tilted summary: limits, derivatives, oracle") {
  // Degenerate limit equals the Ga(y; ups, rate ups e^{-lambda}) density.
  const CavityProjection tiny{0.0, 1e-8};
  const double expected = std::log(4.0 * 1.0 * std::exp(-2.0));
  CHECK(tilted_gamma(1.0, 2.0, tiny).logZ == doctest::Approx(expected).epsilon(1e-5));

  // theta vs finite differences at the spec'd point.
  const double h = 1e-5;
  const TiltedSummary mid = tilted_gamma(0.7, 1.0, {0.3, 0.4});
  const double fd = (tilted_gamma(0.7, 1.0, {0.3 + h, 0.4}).logZ -
                     tilted_gamma(0.7, 1.0, {0.3 - h, 0.4}).logZ) /
                    (2.0 * h);
  CHECK(std::abs(mid.theta - fd) < 1e-5);

  // Against quadrature at an interior point.
  ModelSpec gamma_spec = spec_of(ModelKind::gamma);
  const CavityProjection cav{1.0, 0.25};
  const TiltedSummary a = tilted_gamma(2.0, 3.0, cav);
  const TiltedSummary q = tilted_quadrature(gamma_spec, 2.0, cav, 3.0);
  CHECK(std::abs(a.logZ - q.logZ) < 0.02);

  CHECK_THROWS_AS(tilted_gamma(-1.0, 2.0, cav), std::invalid_argument);
  CHECK_THROWS_AS(tilted_gamma(1.0, -2.0, cav), std::invalid_argument);
}

TEST_CASE("derivative consistency on the standard grid") {
  for (double lam : kLambdaGrid) {
    for (double rho2 : kRho2Grid) {
      for (int y : {0, 1}) {
        check_derivative_consistency(
            [y](double l, double r2) { return tilted_probit(y, {l, r2}); },
            lam, rho2, 1e-5);
        check_derivative_consistency(
            [y](double l, double r2) { return tilted_logit(y, {l, r2}); },
            lam, rho2, 1e-5);
      }
      for (long y : {0L, 1L, 3L}) {
        check_derivative_consistency(
            [y](double l, double r2) {
              return tilted_poisson_asmussen(y, {l, r2});
            },
            lam, rho2, 1e-5);
      }
      for (double y : {0.7, 2.0}) {
        for (double ups : {1.0, 3.0}) {
          check_derivative_consistency(
              [y, ups](double l, double r2) {
                return tilted_gamma(y, ups, {l, r2});
              },
              lam, rho2, 1e-5);
        }
      }
    }
  }
  // Expansion branch on its own grid (rho large enough for a positive,
  // smooth Gtilde), looser tolerance.
  for (double lam : {-3.0, -2.0, -1.0, -0.4, 0.0, 0.4}) {
    for (double rho2 : {1.0, 2.0, 5.0, 10.0}) {
      check_derivative_consistency(
          [](double l, double r2) { return tilted_poisson_rossberg(0, {l, r2}, 6); },
          lam, rho2, 1e-4);
    }
  }
}

TEST_CASE("degenerate-variance limits reproduce the likelihood") {
  const double r2 = 1e-8;
  for (double lam : {-1.5, 0.0, 0.8}) {
    for (int y : {0, 1}) {
      const double sign = 2.0 * y - 1.0;
      CHECK(std::exp(tilted_probit(y, {lam, r2}).logZ) ==
            doctest::Approx(std::exp(log_norm_cdf(sign * lam))).epsilon(1e-4));
      const double lgt = 1.0 / (1.0 + std::exp(-sign * lam));
      CHECK(std::exp(tilted_logit(y, {lam, r2}).logZ) ==
            doctest::Approx(lgt).epsilon(1e-4));
    }
  }
  // Poisson: the generic Laplace branch owns this limit (dispatch sends
  // y=0 with small lambda to the expansion branch, see the test above).
  for (double lam : {0.6, 1.5}) {
    for (long y : {0L, 2L, 5L}) {
      const double pmf = y * lam - std::exp(lam) - std::lgamma(double(y) + 1.0);
      CHECK(tilted_poisson(y, {lam, r2}).logZ == doctest::Approx(pmf).epsilon(1e-4));
    }
  }
  for (double lam : {-0.5, 0.5}) {
    const double y = 1.3, ups = 2.5;
    const double dens = ups * std::log(ups) - std::lgamma(ups) +
                        (ups - 1.0) * std::log(y) - ups * lam -
                        ups * y * std::exp(-lam);
    CHECK(tilted_gamma(y, ups, {lam, r2}).logZ == doctest::Approx(dens).epsilon(1e-4));
  }
}

TEST_CASE("tilted variance stays positive whenever an update is emitted") {
  for (double lam : kLambdaGrid) {
    for (double rho2 : kRho2Grid) {
      for (int y : {0, 1}) {
        const CavityProjection cav{lam, rho2};
        CHECK(tilted_probit(y, cav).variance(cav) > 0.0);
        CHECK(tilted_logit(y, cav).variance(cav) > 0.0);
      }
    }
  }
}

TEST_CASE("quadrature oracle sanity") {
  const CavityProjection cav{0.0, 1.0};
  const TiltedSummary q = tilted_quadrature(spec_of(ModelKind::probit), 1.0, cav);
  CHECK(q.logZ == doctest::Approx(std::log(0.5)).epsilon(1e-12));

  for (double lam : {-2.0, -0.5, 0.0, 1.0, 2.5}) {
    for (double rho2 : {0.2, 0.7, 1.0, 3.0, 8.0}) {
      for (int y : {0, 1}) {
        const CavityProjection c{lam, rho2};
        const TiltedSummary closed = tilted_probit(y, c);
        const TiltedSummary quad =
            tilted_quadrature(spec_of(ModelKind::probit), y, c);
        CHECK(std::abs(closed.logZ - quad.logZ) < 1e-10);
        CHECK(std::abs(closed.theta - quad.theta) < 1e-10);
        CHECK(std::abs(closed.delta - quad.delta) < 1e-10);
      }
    }
  }
}

TEST_CASE("tilted_to_site conversion identities") {
  // delta = 0 maps to (k, m) = (0, theta) for any lambda.
  TiltedSummary t;
  t.theta = 0.3;
  t.delta = 0.0;
  const SiteParams flat = tilted_to_site({17.0, 2.0}, t);
  CHECK(flat.k == 0.0);
  CHECK(flat.m == doctest::Approx(0.3).epsilon(1e-15));

  // Probit at lambda=0, rho2=1: k and m in closed form.
  const CavityProjection cav{0.0, 1.0};
  const SiteParams sp = tilted_to_site(cav, tilted_probit(1, cav));
  const double k_expected = (2.0 / M_PI) / (2.0 - 2.0 / M_PI);
  CHECK(sp.k == doctest::Approx(k_expected).epsilon(1e-12));
  CHECK(sp.k == doctest::Approx(0.4669423).epsilon(1e-7));
  // m = tilted-precision * tilted-mean - cavity part, via quadrature moments.
  const TiltedSummary q = tilted_quadrature(spec_of(ModelKind::probit), 1.0, cav);
  const double m_prop1 = q.mean(cav) / q.variance(cav) - cav.lambda / cav.rho2;
  CHECK(sp.m == doctest::Approx(m_prop1).epsilon(1e-10));

  // k = 1/var_h - 1/rho2 identity across a grid of summaries.
  for (double lam : {-2.0, 0.0, 1.5}) {
    for (double rho2 : {0.3, 1.0, 4.0}) {
      for (int y : {0, 1}) {
        const CavityProjection c{lam, rho2};
        const TiltedSummary s = tilted_probit(y, c);
        const SiteParams out = tilted_to_site(c, s);
        CHECK(out.k ==
              doctest::Approx(1.0 / s.variance(c) - 1.0 / c.rho2).epsilon(1e-12));
      }
    }
  }

  // Impossible variance rejected.
  TiltedSummary bad;
  bad.delta = -2.0;
  CHECK_THROWS_AS(tilted_to_site({0.0, 1.0}, bad), std::runtime_error);
}
