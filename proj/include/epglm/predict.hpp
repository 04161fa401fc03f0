// Closed-form predictive quantities from a fitted approximation, with
// kernel-aware quadratic forms:
//   dense   u = x^T Omega x                       O(p^2)
//   lowrank u = nu2 [x^T x - (V^T x)^T K (X x)]   O(p n)
#pragma once

#include <Eigen/Core>

#include "epglm/engine.hpp"

namespace epglm {

struct Predictor {
  ModelKind model = ModelKind::probit;
  Eigen::VectorXd xi;
  KernelState state;
};

Predictor make_predictor(ModelKind model, const EPResult& result);

// x^T Omega x >= 0 without reconstructing Omega in the lowrank kernel.
double quad_form(const KernelState& state, const Eigen::VectorXd& x_new);

// Phi((1 + u)^{-1/2} x^T xi); exact EP predictive probability for probit
// fits. Logit fits accept it only with probit_plugin = true.
double predict_probit(const Predictor& pred, const Eigen::VectorXd& x_new,
                      bool probit_plugin = false);

// Default logit predictive: sigma(x^T xi / sqrt(1 + u pi/8)), the same
// approximation chain used by the logit tilted moments.
double predict_logit(const Predictor& pred, const Eigen::VectorXd& x_new);

// exp(x^T xi + u/2) for log-link models (Poisson, gamma).
double predict_log_link_mean(const Predictor& pred, const Eigen::VectorXd& x_new);

// Model-appropriate scalar prediction: probability for binary models,
// mean response for log-link models.
double predict(const Predictor& pred, const Eigen::VectorXd& x_new,
               bool probit_plugin_for_logit = false);

}  // namespace epglm
