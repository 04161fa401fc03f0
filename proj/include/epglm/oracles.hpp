// Slow, independent reference implementations used to anchor every
// verification value: a textbook EP with explicit p x p inversions, a
// tensor-grid posterior for p <= 2, and a seeded Monte Carlo check of
// the predictive closed forms. Desk-scale only by design.
#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "epglm/engine.hpp"
#include "epglm/predict.hpp"

namespace epglm {

// Textbook EP: stores full r_i, Q_i = k_i x_i x_i^T and forms Q_{-i}^{-1}
// by direct inversion at every site visit (O(p^3) per site). Same tilted
// summaries, schedule, damping and guards as run_ep, so both converge to
// the same fixed point. Site constants come from direct Psi evaluations
// (dense solves and log-determinants), an algebraic route independent of
// the incremental updates.
EPResult naive_ep(const Dataset& data, const Prior& prior, const EPConfig& config);

struct GridPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double log_ml = 0.0;
};

// Trapezoid-rule posterior moments over [-bound, bound]^p, p <= 2, with
// log-sum-exp normalization. Throws when more than 1e-10 of the mass
// sits in the outermost grid ring (bound too small).
GridPosterior grid_posterior(const Dataset& data, const Prior& prior,
                             double bound, int nodes_per_dim);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Monte Carlo mean of the model's predictive functional under the
// Gaussian approximation, drawn through a Cholesky factor of the full
// covariance with a seeded deterministic generator.
MonteCarloEstimate mc_predictive(const EPResult& result, ModelKind model,
                                 const Eigen::VectorXd& x_new, int draws,
                                 std::uint64_t seed,
                                 bool probit_plugin_for_logit = false);

}  // namespace epglm
