#include "epglm/predict.hpp"

#include <cmath>
#include <stdexcept>

#include "epglm/special.hpp"

namespace epglm {

Predictor make_predictor(ModelKind model, const EPResult& result) {
  if (result.state.kind == KernelKind::dense && result.state.omega.size() == 0) {
    throw std::invalid_argument(
        "make_predictor: fit was run without keep_state");
  }
  Predictor pred;
  pred.model = model;
  pred.xi = result.xi;
  pred.state = result.state;
  return pred;
}

double quad_form(const KernelState& state, const Eigen::VectorXd& x_new) {
  if (state.kind == KernelKind::dense) {
    if (x_new.size() != state.omega.rows()) {
      throw std::invalid_argument("quad_form: query dimension mismatch");
    }
    return x_new.dot(state.omega * x_new);
  }
  if (x_new.size() != state.V.rows()) {
    throw std::invalid_argument("quad_form: query dimension mismatch");
  }
  const Eigen::VectorXd vtx = state.V.transpose() * x_new;  // n
  const Eigen::VectorXd xx = state.X * x_new;               // n
  return state.nu2 * (x_new.squaredNorm() - vtx.dot(state.k.cwiseProduct(xx)));
}

double predict_probit(const Predictor& pred, const Eigen::VectorXd& x_new,
                      bool probit_plugin) {
  if (pred.model == ModelKind::logit && !probit_plugin) {
    throw std::invalid_argument(
        "predict_probit on a logit fit requires the probit-plugin flag");
  }
  if (!is_binary(pred.model)) {
    throw std::invalid_argument("predict_probit requires a binary-response fit");
  }
  const double u = quad_form(pred.state, x_new);
  const double proj = x_new.dot(pred.xi);
  return std::exp(log_norm_cdf(proj / std::sqrt(1.0 + u)));
}

double predict_logit(const Predictor& pred, const Eigen::VectorXd& x_new) {
  if (pred.model != ModelKind::logit) {
    throw std::invalid_argument("predict_logit requires a logit fit");
  }
  const double u = quad_form(pred.state, x_new);
  const double proj = x_new.dot(pred.xi);
  const double t = proj / std::sqrt(1.0 + u * M_PI / 8.0);
  if (t > 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double predict_log_link_mean(const Predictor& pred, const Eigen::VectorXd& x_new) {
  if (!is_log_link(pred.model)) {
    throw std::invalid_argument(
        "predict_log_link_mean requires a log-link (Poisson/gamma) fit");
  }
  const double u = quad_form(pred.state, x_new);
  return std::exp(x_new.dot(pred.xi) + 0.5 * u);
}

double predict(const Predictor& pred, const Eigen::VectorXd& x_new,
               bool probit_plugin_for_logit) {
  switch (pred.model) {
    case ModelKind::probit:
      return predict_probit(pred, x_new);
    case ModelKind::logit:
      return probit_plugin_for_logit ? predict_probit(pred, x_new, true)
                                     : predict_logit(pred, x_new);
    case ModelKind::poisson:
    case ModelKind::gamma:
      return predict_log_link_mean(pred, x_new);
  }
  throw std::logic_error("unreachable model kind");
}

}  // namespace epglm
