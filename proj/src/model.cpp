#include "epglm/model.hpp"

#include <cmath>

namespace epglm {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::probit: return "probit";
    case ModelKind::logit: return "logit";
    case ModelKind::poisson: return "poisson";
    case ModelKind::gamma: return "gamma";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "probit") return ModelKind::probit;
  if (name == "logit") return ModelKind::logit;
  if (name == "poisson") return ModelKind::poisson;
  if (name == "gamma") return ModelKind::gamma;
  throw std::invalid_argument("unknown model kind: " + name);
}

void ModelSpec::validate(Eigen::Index n) const {
  if (kind == ModelKind::gamma) {
    if (!shape) throw std::invalid_argument("gamma model requires shape values");
    if (shape->size() != n) {
      throw std::invalid_argument("gamma shape length does not match n");
    }
    for (Eigen::Index i = 0; i < shape->size(); ++i) {
      if (!((*shape)(i) > 0.0)) {
        throw std::invalid_argument("gamma shapes must be positive");
      }
    }
  } else if (shape) {
    throw std::invalid_argument("shape values only apply to the gamma model");
  }
}

void Dataset::validate() const {
  if (p() < 1) throw std::invalid_argument("design matrix needs p >= 1");
  if (y.size() != n()) throw std::invalid_argument("y length does not match X");
  if (!X.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("dataset contains non-finite entries");
  }
  model.validate(n());
  for (Eigen::Index i = 0; i < n(); ++i) {
    const double yi = y(i);
    switch (model.kind) {
      case ModelKind::probit:
      case ModelKind::logit:
        if (yi != 0.0 && yi != 1.0) {
          throw std::invalid_argument("binary response expected in row " +
                                      std::to_string(i + 1));
        }
        break;
      case ModelKind::poisson:
        if (yi < 0.0 || yi != std::floor(yi)) {
          throw std::invalid_argument(
              "nonnegative integer response expected in row " +
              std::to_string(i + 1));
        }
        break;
      case ModelKind::gamma:
        if (!(yi > 0.0)) {
          throw std::invalid_argument("positive response expected in row " +
                                      std::to_string(i + 1));
        }
        break;
    }
  }
}

}  // namespace epglm
