#include "epglm/tilted.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "epglm/quadrature.hpp"
#include "epglm/special.hpp"

namespace epglm {

namespace {
constexpr double kPiOver8 = 0.39269908169872415480783042290994;

double log1pexp(double t) {
  // log(1 + e^t) without overflow.
  if (t > 33.0) return t;
  if (t < -37.0) return std::exp(t);
  return std::log1p(std::exp(t));
}
}  // namespace

TiltedSummary tilted_probit(int y, const CavityProjection& cav) {
  const double sign = 2.0 * y - 1.0;
  const double s = sign / std::sqrt(1.0 + cav.rho2);
  const double tau = s * cav.lambda;
  TiltedSummary t;
  t.logZ = log_norm_cdf(tau);
  t.theta = s * zeta1(tau);
  t.delta = s * s * zeta2(tau);
  return t;
}

TiltedSummary tilted_logit(int y, const CavityProjection& cav) {
  const double sign = 2.0 * y - 1.0;
  const double c2 = 1.0 + cav.rho2 * kPiOver8;
  const double c = std::sqrt(c2);
  const double t_arg = sign * cav.lambda / c;
  TiltedSummary t;
  t.logZ = -log1pexp(-t_arg);
  const double ztilde = std::exp(t.logZ);
  t.theta = sign * (1.0 - ztilde) / c;
  // d logZ / d rho2 by the chain rule through lambda/c; see
  // logit_drho2_displayed for the sqrt-denominator variant.
  const double drho2 = -0.5 * kPiOver8 * cav.lambda / c2 * t.theta;
  t.delta = 2.0 * drho2 - t.theta * t.theta;
  return t;
}

double logit_drho2_displayed(int y, const CavityProjection& cav) {
  const TiltedSummary t = tilted_logit(y, cav);
  const double c = std::sqrt(1.0 + cav.rho2 * kPiOver8);
  return -0.5 * kPiOver8 * cav.lambda / c * t.theta;
}

TiltedSummary tilted_poisson_asmussen(long y, const CavityProjection& cav) {
  const double rho2 = cav.rho2;
  const double log_u = cav.lambda + rho2 * y + std::log(rho2);
  const double w = lambert_w_log(log_u);
  const double yd = static_cast<double>(y);

  TiltedSummary t;
  t.logZ = -std::lgamma(yd + 1.0) + yd * cav.lambda + 0.5 * rho2 * yd * yd -
           (w + 0.5 * w * w) / rho2 - 0.5 * std::log1p(w);
  const double wp1 = 1.0 + w;
  t.theta = yd - w * (1.0 / rho2 + 0.5 / (wp1 * wp1));
  const double drho2 = 0.5 * yd * yd + (w / (rho2 * rho2)) * (1.0 + 0.5 * w) +
                       ((1.0 + rho2 * yd) / rho2) * (t.theta - yd);
  t.delta = 2.0 * drho2 - t.theta * t.theta;
  return t;
}

TiltedSummary tilted_poisson_rossberg(long y, const CavityProjection& cav,
                                      int order) {
  const double rho = std::sqrt(cav.rho2);
  const double x = -cav.lambda / rho - y * rho;
  const RossbergEval g = rossberg_g(x, rho, order);
  const double yd = static_cast<double>(y);

  TiltedSummary t;
  t.logZ = -std::lgamma(yd + 1.0) + yd * cav.lambda + 0.5 * cav.rho2 * yd * yd +
           std::log(g.g);
  const double r1 = g.g1 / g.g;
  const double r2 = g.g2 / g.g;
  t.theta = yd - r1 / rho;
  // delta from the second lambda-derivative of logZ.
  t.delta = (r2 - r1 * r1) / cav.rho2;
  return t;
}

TiltedSummary tilted_poisson(long y, const CavityProjection& cav,
                             const PoissonOptions& opts) {
  if (y < 0) throw std::invalid_argument("poisson response must be >= 0");
  if (y == 0 && cav.lambda < opts.rossberg_threshold) {
    const TiltedSummary t = tilted_poisson_rossberg(y, cav, opts.rossberg_order);
    // The expansion is asymptotic in rho; at small rho2 it can emit no
    // value at all (Gtilde <= 0) or an unusable one (implied tilted
    // variance <= 0). The Laplace branch is finite everywhere and exact
    // in the rho2 -> 0 limit, so it takes over in those cases.
    const bool usable = std::isfinite(t.logZ) && std::isfinite(t.theta) &&
                        std::isfinite(t.delta) &&
                        1.0 + cav.rho2 * t.delta > 0.0;
    if (usable) return t;
  }
  return tilted_poisson_asmussen(y, cav);
}

TiltedSummary tilted_gamma(double y, double upsilon,
                           const CavityProjection& cav) {
  if (!(y > 0.0)) throw std::invalid_argument("gamma response must be > 0");
  if (!(upsilon > 0.0)) throw std::invalid_argument("gamma shape must be > 0");
  const double rho2 = cav.rho2;
  const double log_s = std::log(upsilon * y) + rho2 * upsilon - cav.lambda;
  const double w = lambert_w_log(log_s + std::log(rho2));

  TiltedSummary t;
  t.logZ = upsilon * std::log(upsilon) - std::lgamma(upsilon) +
           (upsilon - 1.0) * std::log(y) - upsilon * cav.lambda +
           0.5 * rho2 * upsilon * upsilon - (w + 0.5 * w * w) / rho2 -
           0.5 * std::log1p(w);
  const double wp1 = 1.0 + w;
  // s carries -lambda, so the lambda-derivative flips sign relative to
  // the Poisson case.
  t.theta = -upsilon + w * (1.0 / rho2 + 0.5 / (wp1 * wp1));
  const double drho2 = 0.5 * upsilon * upsilon +
                       (w / (rho2 * rho2)) * (1.0 + 0.5 * w) -
                       ((1.0 + rho2 * upsilon) / rho2) * (t.theta + upsilon);
  t.delta = 2.0 * drho2 - t.theta * t.theta;
  return t;
}

namespace {

double log_likelihood(const ModelSpec& model, double y, double shape,
                      double eta) {
  switch (model.kind) {
    case ModelKind::probit:
      return log_norm_cdf((2.0 * y - 1.0) * eta);
    case ModelKind::logit:
      return -log1pexp(-(2.0 * y - 1.0) * eta);
    case ModelKind::poisson:
      return y * eta - std::exp(eta) - std::lgamma(y + 1.0);
    case ModelKind::gamma:
      return shape * std::log(shape) - std::lgamma(shape) +
             (shape - 1.0) * std::log(y) - shape * eta -
             shape * y * std::exp(-eta);
  }
  return -std::numeric_limits<double>::infinity();
}

}  // namespace

TiltedSummary tilted_quadrature(const ModelSpec& model, double y,
                                const CavityProjection& cav,
                                std::optional<double> shape_override,
                                int nodes) {
  const GaussHermiteRule& rule = gauss_hermite(nodes);
  const double scale = std::sqrt(2.0 * cav.rho2);
  const double shape =
      shape_override ? *shape_override
                     : (model.shape && model.shape->size() > 0 ? (*model.shape)(0) : 1.0);

  // int l(eta) phi(eta - lambda, rho2) deta = pi^{-1/2} sum w_k l(lambda
  // + scale t_k); everything is accumulated in log scale around the
  // largest term.
  const int n = nodes;
  std::vector<double> log_term(n);
  double max_term = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double eta = cav.lambda + scale * rule.node[k];
    const double ll = log_likelihood(model, y, shape, eta);
    if (std::isnan(ll) || ll == std::numeric_limits<double>::infinity()) {
      throw std::runtime_error("tilted_quadrature: non-finite integrand");
    }
    log_term[k] = rule.log_w[k] + ll;
    max_term = std::max(max_term, log_term[k]);
  }
  if (!std::isfinite(max_term)) {
    throw std::runtime_error("tilted_quadrature: integrand vanished everywhere");
  }

  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double u = std::exp(log_term[k] - max_term);
    const double eta = cav.lambda + scale * rule.node[k];
    s0 += u;
    s1 += u * eta;
    s2 += u * eta * eta;
  }
  const double mean = s1 / s0;
  const double var = s2 / s0 - mean * mean;

  TiltedSummary t;
  t.logZ = max_term + std::log(s0) - 0.5 * std::log(M_PI);
  t.theta = (mean - cav.lambda) / cav.rho2;
  t.delta = (var - cav.rho2) / (cav.rho2 * cav.rho2);
  return t;
}

TiltedSummary tilted_summary(const ModelSpec& model, double y, double shape,
                             const CavityProjection& cav,
                             const TiltedOptions& opts) {
  if (opts.use_quadrature) {
    return tilted_quadrature(model, y, cav, shape);
  }
  switch (model.kind) {
    case ModelKind::probit:
      return tilted_probit(static_cast<int>(y), cav);
    case ModelKind::logit:
      return tilted_logit(static_cast<int>(y), cav);
    case ModelKind::poisson:
      return tilted_poisson(static_cast<long>(y), cav, opts.poisson);
    case ModelKind::gamma:
      return tilted_gamma(y, shape, cav);
  }
  throw std::logic_error("unreachable model kind");
}

SiteParams tilted_to_site(const CavityProjection& cav, const TiltedSummary& t) {
  const double denom = 1.0 + cav.rho2 * t.delta;
  if (!(denom > 0.0)) throw std::runtime_error("invalid tilted variance");
  SiteParams s;
  s.k = -t.delta / denom;
  s.m = s.k * cav.lambda + t.theta / denom;
  return s;
}

}  // namespace epglm
