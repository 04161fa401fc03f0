// Special-function verification against independent oracles: long-double
// continued fractions for the normal tail, bisection for Lambert W,
// explicit polynomial expansion for Hermite, and direct quadrature for
// the log-normal Laplace transform and its expansion.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <vector>

#include "epglm/quadrature.hpp"
#include "epglm/special.hpp"

using namespace epglm;

namespace {

// Long-double Mills-ratio continued fraction: Phi(-z) = phi(z) R(z).
long double mills_cf_ld(long double z) {
  long double cf = 0.0L;
  for (int k = 120; k >= 1; --k) cf = k / (z + cf);
  return 1.0L / (z + cf);
}

long double log_phi_tail_ld(long double z) {
  // log Phi(-z) for z >> 0.
  const long double log_pdf =
      -0.5L * z * z - 0.918938533204672741780329736405617639L;
  return log_pdf + std::log(mills_cf_ld(z));
}

// Bisection oracle for w e^w = x on the principal branch.
double lambert_bisect(double x) {
  double lo = 0.0, hi = std::max(1.0, std::log(x + 1.0) + 40.0);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::exp(mid) < x ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double simpson(const std::function<double(double)>& f, double a, double b,
               int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// E[exp(-s e^{X})], X ~ N(mu, rho^2), by wide fixed Simpson.
double lognormal_laplace_quad(double s, double mu, double rho) {
  auto f = [&](double t) {
    const double x = mu + rho * t;
    return std::exp(-s * std::exp(x) - 0.5 * t * t) /
           std::sqrt(2.0 * M_PI);
  };
  return simpson(f, -14.0, 14.0, 20000);
}

}  // namespace

TEST_CASE("log_norm_cdf matches oracle across the supported range") {
  CHECK(log_norm_cdf(0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  CHECK(std::abs(log_norm_cdf(40.0)) < 1e-15);
  // Spec'd point, then a tail scan against the long-double oracle.
  CHECK(log_norm_cdf(-10.0) == doctest::Approx(-53.2312852).epsilon(1e-8));
  for (double x = -37.0; x <= -2.0; x += 0.5) {
    const double oracle = static_cast<double>(log_phi_tail_ld(-x));
    CHECK(log_norm_cdf(x) == doctest::Approx(oracle).epsilon(1e-12));
  }
  for (double x = -2.0; x <= 8.0; x += 0.25) {
    const double oracle =
        static_cast<double>(std::log(0.5L * erfcl(-static_cast<long double>(x) /
                                                  1.41421356237309504880L)));
    CHECK(log_norm_cdf(x) == doctest::Approx(oracle).epsilon(1e-13));
  }
}

TEST_CASE("log_norm_cdf is monotone and finite on [-37, 8]") {
  double prev = log_norm_cdf(-37.0);
  CHECK(std::isfinite(prev));
  for (double x = -36.9; x <= 8.0; x += 0.1) {
    const double cur = log_norm_cdf(x);
    CHECK(std::isfinite(cur));
    CHECK(cur >= prev);
    prev = cur;
  }
}

TEST_CASE("zeta1/zeta2 values and Mills-ratio positivity") {
  CHECK(zeta1(0.0) == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-14));
  CHECK(zeta2(0.0) == doctest::Approx(-2.0 / M_PI).epsilon(1e-13));
  // Mills-ratio oracle at the spec'd deep-tail point.
  const double oracle =
      static_cast<double>(1.0L / mills_cf_ld(10.0L));
  CHECK(zeta1(-10.0) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(zeta1(-10.0) == doctest::Approx(10.0980932).epsilon(1e-8));
  for (double x = -30.0; x <= 8.0; x += 0.37) {
    CHECK(zeta1(x) > 0.0);
    CHECK(zeta1(x) + x > 0.0);
    CHECK(zeta2(x) > -1.0);
    CHECK(zeta2(x) < 0.0);
  }
}

TEST_CASE("lambert_w round trip and reference points") {
  CHECK(lambert_w(0.0) == 0.0);
  CHECK(lambert_w(M_E) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lambert_w(1.0) ==
        doctest::Approx(lambert_bisect(1.0)).epsilon(1e-13));
  CHECK(lambert_w(1.0) == doctest::Approx(0.5671432904).epsilon(1e-9));
  CHECK_THROWS_AS(lambert_w(-0.1), std::domain_error);

  double prev = -1.0;
  for (double lx = -30.0; lx <= 300.0; lx += 1.7) {
    const double x = std::exp(lx);
    const double w = lambert_w(x);
    CHECK(std::abs(w * std::exp(w) - x) <= 1e-12 * std::max(1.0, x));
    CHECK(w > prev);
    prev = w;
  }
  // Log-argument variant continues smoothly past the overflow point.
  const double w_big = lambert_w_log(800.0);
  CHECK(w_big + std::log(w_big) == doctest::Approx(800.0).epsilon(1e-13));
}

TEST_CASE("hermite recurrence against explicit expansion") {
  CHECK(hermite(0, 3.7) == 1.0);
  CHECK(hermite(1, -2.0) == -4.0);
  CHECK(hermite(2, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  // H_6(x) = 64 x^6 - 480 x^4 + 720 x^2 - 120
  const double x = 0.5;
  const double h6 = 64 * std::pow(x, 6) - 480 * std::pow(x, 4) + 720 * x * x - 120;
  CHECK(hermite(6, x) == doctest::Approx(h6).epsilon(1e-12));
  CHECK_THROWS_AS(hermite(17, 0.0), std::domain_error);
}

TEST_CASE("rossberg coefficients match derived constants and are cached") {
  const auto& a = rossberg_coefficients(6);
  REQUIRE(a.size() == 7);
  CHECK(a[0] == 1.0);
  const double euler_gamma = 0.5772156649015329;
  CHECK(a[1] == doctest::Approx(euler_gamma).epsilon(1e-10));
  const double a2 = 0.5 * (euler_gamma * euler_gamma + M_PI * M_PI / 6.0);
  CHECK(a[2] == doctest::Approx(a2).epsilon(1e-10));
  for (double v : a) CHECK(std::isfinite(v));
  // Deterministic across calls (same cached object).
  const auto& again = rossberg_coefficients(6);
  CHECK(&a == &again);
}

TEST_CASE("laplace transform approximation: limits, exact point, quadrature") {
  CHECK(laplace_lognormal_asmussen(1e-300, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  // W(e) = 1 makes the value e^{-3/2}/sqrt(2).
  CHECK(laplace_lognormal_asmussen(M_E, 1.0) ==
        doctest::Approx(std::exp(-1.5) / std::sqrt(2.0)).epsilon(1e-12));
  const double quad = lognormal_laplace_quad(1.0, 0.0, 0.5);
  CHECK(laplace_lognormal_asmussen(1.0, 0.25) ==
        doctest::Approx(quad).epsilon(0.01));

  // Monotone decreasing in s on a 50-point log grid.
  double prev = 2.0;
  for (int i = 0; i < 50; ++i) {
    const double s = std::exp(-6.0 + 12.0 * i / 49.0);
    const double val = laplace_lognormal_asmussen(s, 0.7);
    CHECK(val < prev);
    CHECK(val > 0.0);
    CHECK(val <= 1.0);
    prev = val;
  }
}

TEST_CASE("erfcx agrees with the direct product and stays finite") {
  for (double z = 0.0; z <= 25.0; z += 0.7) {
    const long double direct =
        std::exp(static_cast<long double>(z) * z) * erfcl(z);
    CHECK(erfcx(z) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-12));
  }
  // Across the method switch and far beyond the overflow point of e^{z^2}.
  CHECK(erfcx(26.5) == doctest::Approx(1.0 / (26.5 * std::sqrt(M_PI))).epsilon(1e-3));
  CHECK(std::isfinite(erfcx(1e8)));
}

TEST_CASE("rossberg_g derivatives match finite differences of g") {
  const double rho = 2.0, h = 1e-5;
  const int M = 6;
  for (double x : {-1.5, 0.0, 0.8, 2.5}) {
    const RossbergEval c = rossberg_g(x, rho, M);
    const RossbergEval up = rossberg_g(x + h, rho, M);
    const RossbergEval dn = rossberg_g(x - h, rho, M);
    const double fd1 = (up.g - dn.g) / (2.0 * h);
    const double fd2 = (up.g - 2.0 * c.g + dn.g) / (h * h);
    CHECK(c.g1 == doctest::Approx(fd1).epsilon(1e-6));
    CHECK(std::abs(c.g2 - fd2) < 1e-4);
  }
}

TEST_CASE("rossberg_g matches the transform quadrature in its regime") {
  // G(x) = E[exp(-e^{rho (X - x)})], X ~ N(0,1); the spec's convolution
  // form integrates to the same function by parts.
  auto g_quad = [](double x, double rho) {
    auto f = [&](double t) {
      return std::exp(-std::exp(rho * (t - x)) - 0.5 * t * t) /
             std::sqrt(2.0 * M_PI);
    };
    return simpson(f, -14.0 - std::abs(x), 14.0 + std::abs(x), 40000);
  };
  auto g_conv = [](double x, double rho) {
    auto f = [&](double t) {
      const double u = rho * (t - x);
      if (u > 700.0) return 0.0;
      return rho * std::exp(u - std::exp(u)) * 0.5 * std::erfc(-t / std::sqrt(2.0));
    };
    return simpson(f, -40.0, 40.0, 60000);
  };
  // The two oracle routes agree with each other.
  CHECK(g_quad(0.0, 8.0) == doctest::Approx(g_conv(0.0, 8.0)).epsilon(1e-8));

  const RossbergEval at0 = rossberg_g(0.0, 8.0, 6);
  CHECK(std::abs(at0.g - g_quad(0.0, 8.0)) < 1e-4);

  // Saturation far to the right.
  CHECK(rossberg_g(20.0, 2.0, 6).g == doctest::Approx(1.0).epsilon(1e-6));
  for (double x : {-1.0, 0.0, 1.0, 3.0}) {
    const double g = rossberg_g(x, 8.0, 6).g;
    CHECK(g > 0.0);
    CHECK(g < 1.0 + 1e-12);
  }
}

TEST_CASE("gauss-hermite rules integrate known moments") {
  const GaussHermiteRule& rule = gauss_hermite(201);
  double s0 = 0.0, s2 = 0.0, s60 = 0.0;
  for (int k = 0; k < 201; ++k) {
    const double w = std::exp(rule.log_w[k]);
    const double t = rule.node[k];
    s0 += w;
    s2 += w * t * t;
    s60 += w * std::pow(t, 60);
  }
  CHECK(s0 == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
  CHECK(s2 == doctest::Approx(0.5 * std::sqrt(M_PI)).epsilon(1e-13));
  // int t^{2k} e^{-t^2} = (2k-1)!! sqrt(pi) / 2^k, k = 30.
  long double dfact = 1.0L;
  for (int j = 3; j <= 59; j += 2) dfact *= j;
  const double expected =
      static_cast<double>(dfact * std::sqrt((long double)M_PI) / std::pow(2.0L, 30));
  CHECK(s60 == doctest::Approx(expected).epsilon(1e-11));
}
