// Seeded synthetic-data generators mirroring the standard benchmark
// designs: standard-normal covariates behind an intercept, rescaled so
// the linear predictor keeps a dimension-independent variance, and
// coefficients drawn uniformly from [-5, 5].
#pragma once

#include <cstdint>

#include "epglm/model.hpp"

namespace epglm {

struct SimulatedData {
  Dataset data;             // n rows (training)
  Eigen::MatrixXd X_test;   // n_test rows for prediction queries
  Eigen::VectorXd beta;     // generating coefficients
};

struct SimulateConfig {
  ModelKind model = ModelKind::probit;
  Eigen::Index n = 100;
  Eigen::Index p = 20;       // including the intercept column
  Eigen::Index n_test = 0;
  double gamma_shape = 2.0;  // gamma responses only
  std::uint64_t seed = 1;
};

// Binary designs center and scale the p-1 covariates to mean 0,
// sd 0.5; log-link designs divide by 2 sqrt(p-1) sd_j instead and pin
// the intercept coefficient to 5. Responses are drawn from the model at
// the generated linear predictor.
SimulatedData simulate(const SimulateConfig& config);

}  // namespace epglm
