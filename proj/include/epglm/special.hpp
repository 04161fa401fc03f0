// Scalar special functions used by the tilted-moment computations:
// stable normal log-cdf, inverse Mills ratios, Lambert W, Hermite
// polynomials, and two log-normal Laplace-transform approximations.
#pragma once

#include <vector>

namespace epglm {

// log Phi(x), accurate over x in [-37, 8] with relative error ~1e-13.
// Uses a Mills-ratio continued fraction for x < -8 and the erfc-based
// cdf otherwise; never underflows to -inf for x >= -37.
double log_norm_cdf(double x);

// Standard normal log-density.
double log_norm_pdf(double x);

// zeta1(x) = phi(x) / Phi(x), evaluated as exp(log phi - log Phi) so the
// far-left tail does not cancel. zeta2(x) = -zeta1(x)^2 - x zeta1(x),
// always in (-1, 0).
double zeta1(double x);
double zeta2(double x);

// Scaled complementary error function exp(z^2) erfc(z), no overflow for
// large positive z.
double erfcx(double z);

// Principal-branch Lambert W for x >= 0: solves w e^w = x by Halley
// iteration to |w e^w - x| <= 1e-12 max(1, x). Throws std::domain_error
// for negative input.
double lambert_w(double x);

// W(e^{log_x}) for the principal branch, usable when e^{log_x} would
// overflow. Solves w + log w = log_x directly for large log_x.
double lambert_w_log(double log_x);

// Physicists' Hermite polynomial H_m(x) via the three-term recurrence;
// supported for m <= 16.
double hermite(int m, double x);

// Coefficients a_m = (-1)^m/m! int_0^inf e^{-u} (ln u)^m du, m = 0..M.
// a_0 = 1, a_1 = Euler-Mascheroni gamma. Computed once per M by adaptive
// quadrature (the integral is split at u = 1 and the ln-singularity is
// removed by substitution) and cached.
const std::vector<double>& rossberg_coefficients(int M);

// Laplace-method approximation of the log-normal Laplace transform
// L(s) = E[exp(-s e^X)], X ~ N(0, rho2):
//   Ltilde(s) = exp(-W(s rho2)/rho2 - W(s rho2)^2/(2 rho2)) / sqrt(1 + W(s rho2))
// Decreasing in s, with values in (0, 1].
double laplace_lognormal_asmussen(double s, double rho2);
// Same quantity in log form, taking log(s) so huge s does not overflow.
double log_laplace_lognormal_asmussen(double log_s, double rho2);

struct RossbergEval {
  double g;   // Gtilde(x)
  double g1;  // d/dx Gtilde(x)
  double g2;  // d^2/dx^2 Gtilde(x)
};

// Truncated large-rho expansion of G(x) = L(e^{-rho x}) written through
// erf/erfc and Hermite polynomials, together with its first two
// derivatives. Requires 2 <= M <= 10. The erfc * exp product is routed
// through erfcx so large (rho - x) does not overflow.
RossbergEval rossberg_g(double x, double rho, int M);

}  // namespace epglm
