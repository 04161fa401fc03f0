#include "epglm/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "epglm/rng.hpp"

namespace epglm {

SimulatedData simulate(const SimulateConfig& config) {
  if (config.p < 2) throw std::invalid_argument("simulate: p must be >= 2");
  if (config.n < 2) throw std::invalid_argument("simulate: n must be >= 2");

  Rng rng(config.seed);
  const Eigen::Index n = config.n;
  const Eigen::Index p = config.p;
  const Eigen::Index n_all = n + config.n_test;

  // Intercept first, then p-1 raw standard-normal covariates.
  Eigen::MatrixXd X(n_all, p);
  X.col(0).setOnes();
  for (Eigen::Index i = 0; i < n_all; ++i) {
    for (Eigen::Index j = 1; j < p; ++j) X(i, j) = rng.normal();
  }

  // Empirical centering and scaling of each covariate; log-link designs
  // shrink by the extra sqrt(p-1) so the predictor variance does not
  // grow with p.
  const bool log_link = is_log_link(config.model);
  const double dim_factor = log_link ? std::sqrt(static_cast<double>(p - 1)) : 1.0;
  for (Eigen::Index j = 1; j < p; ++j) {
    const double mean = X.col(j).mean();
    const double sd = std::sqrt((X.col(j).array() - mean).square().sum() /
                                static_cast<double>(n_all - 1));
    X.col(j) = (X.col(j).array() - mean) / (2.0 * dim_factor * sd);
  }

  Eigen::VectorXd beta(p);
  for (Eigen::Index j = 0; j < p; ++j) beta(j) = rng.uniform(-5.0, 5.0);
  if (log_link) beta(0) = 5.0;

  const Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    switch (config.model) {
      case ModelKind::probit: {
        const double z = rng.normal();
        y(i) = (z < eta(i)) ? 1.0 : 0.0;
        break;
      }
      case ModelKind::logit: {
        const double u = rng.uniform();
        const double prob = 1.0 / (1.0 + std::exp(-eta(i)));
        y(i) = (u < prob) ? 1.0 : 0.0;
        break;
      }
      case ModelKind::poisson:
        y(i) = static_cast<double>(rng.poisson(std::exp(eta(i))));
        break;
      case ModelKind::gamma: {
        const double mean = std::exp(eta(i));
        y(i) = rng.gamma(config.gamma_shape) * mean / config.gamma_shape;
        if (y(i) <= 0.0) y(i) = 1e-12;
        break;
      }
    }
  }

  SimulatedData out;
  out.data.X = X.topRows(n);
  out.data.y = y;
  out.data.model.kind = config.model;
  if (config.model == ModelKind::gamma) {
    out.data.model.shape = Eigen::VectorXd::Constant(n, config.gamma_shape);
  }
  out.X_test = X.bottomRows(config.n_test);
  out.beta = beta;
  return out;
}

}  // namespace epglm
