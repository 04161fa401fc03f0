// Model and data containers shared by the EP engines, the oracles and
// the CLI front end.
#pragma once

#include <Eigen/Core>
#include <optional>
#include <stdexcept>
#include <string>

namespace epglm {

enum class ModelKind { probit, logit, poisson, gamma };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

inline bool is_binary(ModelKind k) {
  return k == ModelKind::probit || k == ModelKind::logit;
}
inline bool is_log_link(ModelKind k) {
  return k == ModelKind::poisson || k == ModelKind::gamma;
}

// Likelihood family plus any fixed nuisance parameters. Gamma responses
// carry a fixed positive shape per observation; other families carry none.
struct ModelSpec {
  ModelKind kind = ModelKind::probit;
  std::optional<Eigen::VectorXd> shape;  // gamma only, all entries > 0

  void validate(Eigen::Index n) const;
};

struct Dataset {
  Eigen::MatrixXd X;  // n x p design, rows are x_i^T
  Eigen::VectorXd y;  // responses in the model's domain
  ModelSpec model;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }

  // Rejects non-finite entries, shape mismatches, and responses outside
  // the model domain (binary {0,1} / nonnegative integer / positive).
  void validate() const;
};

struct Prior {
  double nu2 = 1.0;  // spherical Gaussian variance, > 0

  void validate() const {
    if (!(nu2 > 0.0)) throw std::invalid_argument("prior variance must be > 0");
  }
};

}  // namespace epglm
