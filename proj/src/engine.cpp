#include "epglm/engine.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace epglm {

std::string to_string(KernelKind k) {
  return k == KernelKind::dense ? "dense" : "lowrank";
}

KernelChoice kernel_choice_from_string(const std::string& name) {
  if (name == "auto") return KernelChoice::automatic;
  if (name == "dense") return KernelChoice::dense;
  if (name == "lowrank") return KernelChoice::lowrank;
  throw std::invalid_argument("unknown kernel choice: " + name);
}

KernelKind choose_kernel(Eigen::Index n, Eigen::Index p, KernelChoice choice) {
  switch (choice) {
    case KernelChoice::dense: return KernelKind::dense;
    case KernelChoice::lowrank: return KernelKind::lowrank;
    case KernelChoice::automatic: break;
  }
  return p < n ? KernelKind::dense : KernelKind::lowrank;
}

void EPConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
  if (!(damping > 0.0) || damping > 1.0) {
    throw std::invalid_argument("damping must be in (0, 1]");
  }
}

double log_marginal_from_parts(const Eigen::VectorXd& r,
                               const Eigen::VectorXd& xi, double logdetQ,
                               Eigen::Index p, double nu2,
                               double sum_site_logZ) {
  return 0.5 * (r.dot(xi) - logdetQ - static_cast<double>(p) * std::log(nu2)) -
         sum_site_logZ;
}

bool cavity_from_product(const Eigen::VectorXd& v, double a, double k_i,
                         double m_i, const Eigen::VectorXd& r,
                         CavityProjection* cav, double* d, double guard_eps) {
  const double guard = 1.0 - k_i * a;
  if (!(a > 0.0) || guard <= guard_eps) return false;
  *d = 1.0 / guard;
  cav->rho2 = *d * a;
  cav->lambda = *d * (v.dot(r) - m_i * a);
  return true;
}

namespace {

constexpr double kGuardEps = 1e-12;

// Dense kernel: Omega held explicitly; rank-one Woodbury downdate per
// accepted site update.
struct DenseKernel {
  Eigen::MatrixXd omega;

  explicit DenseKernel(const Dataset& data, double nu2)
      : omega(Eigen::MatrixXd::Identity(data.p(), data.p()) * nu2) {}

  Eigen::VectorXd omega_x(const Dataset& data, Eigen::Index i) const {
    return omega * data.X.row(i).transpose();
  }
  void apply(const Dataset& data, Eigen::Index i, double c,
             const Eigen::VectorXd& v) {
    (void)data;
    (void)i;
    omega.noalias() -= c * v * v.transpose();
  }
  void end_of_sweep(int sweep) {
    if (sweep % 50 == 0) omega = 0.5 * (omega + omega.transpose()).eval();
  }
};

// Lowrank kernel: V = Omega X^T; every column is touched by each
// accepted update via the matrix-form rank-one correction.
struct LowRankKernel {
  Eigen::MatrixXd V;

  explicit LowRankKernel(const Dataset& data, double nu2)
      : V(nu2 * data.X.transpose()) {}

  Eigen::VectorXd omega_x(const Dataset& data, Eigen::Index i) const {
    (void)data;
    return V.col(i);
  }
  void apply(const Dataset& data, Eigen::Index i, double c,
             const Eigen::VectorXd& v) {
    (void)i;
    const Eigen::RowVectorXd xv = data.X.row(i) * V;  // x_i^T V, before update
    V.noalias() -= v * (c * xv);
  }
  void end_of_sweep(int) {}
};

struct SweepOutcome {
  double max_delta = 0.0;
  int skipped = 0;
};

template <typename Kernel>
SweepOutcome run_sweep(const Dataset& data, const EPConfig& config,
                       Kernel& kernel, Eigen::VectorXd& r, SiteState& sites,
                       double& logdetQ) {
  SweepOutcome out;
  const TiltedOptions tilted_opts{
      PoissonOptions{config.poisson_threshold, 6},
      config.use_quadrature_fallback};

  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd v = kernel.omega_x(data, i);
    const double a = data.X.row(i).dot(v);  // x_i^T Omega x_i
    CavityProjection cav;
    double d = 0.0;
    if (!cavity_from_product(v, a, sites.k(i), sites.m(i), r, &cav, &d,
                             kGuardEps)) {
      ++out.skipped;  // negative cavity variance
      continue;
    }

    TiltedSummary t;
    SiteParams target;
    try {
      const double shape =
          data.model.shape ? (*data.model.shape)(i) : 1.0;
      t = tilted_summary(data.model, data.y(i), shape, cav, tilted_opts);
      if (!std::isfinite(t.logZ) || !std::isfinite(t.theta) ||
          !std::isfinite(t.delta)) {
        ++out.skipped;
        continue;
      }
      target = tilted_to_site(cav, t);
    } catch (const std::runtime_error&) {
      ++out.skipped;  // invalid tilted variance or quadrature failure
      continue;
    }

    const double k_t = (1.0 - config.damping) * sites.k(i) + config.damping * target.k;
    const double m_t = (1.0 - config.damping) * sites.m(i) + config.damping * target.m;
    const double dk = k_t - sites.k(i);
    const double dm = m_t - sites.m(i);
    const double update_guard = 1.0 + dk * a;
    if (update_guard <= kGuardEps || !std::isfinite(k_t) || !std::isfinite(m_t)) {
      ++out.skipped;
      continue;
    }

    r.noalias() += dm * data.X.row(i).transpose();
    kernel.apply(data, i, dk / update_guard, v);
    logdetQ += std::log1p(dk * a);

    // Site proportionality constant from cavity inner products only.
    const double site_denom = 1.0 + k_t * cav.rho2;
    sites.logZ(i) =
        0.5 * ((2.0 * m_t * cav.lambda + m_t * m_t * cav.rho2 -
                k_t * cav.lambda * cav.lambda) /
                   site_denom -
               std::log(site_denom)) -
        t.logZ;
    sites.k(i) = k_t;
    sites.m(i) = m_t;
    out.max_delta = std::max(out.max_delta, std::abs(dk) + std::abs(dm));
  }
  return out;
}

template <typename Kernel>
void fit(const Dataset& data, const EPConfig& config, Kernel& kernel,
         Eigen::VectorXd& r, SiteState& sites, double& logdetQ,
         EPResult& result) {
  if (data.n() == 0) {
    result.converged = true;
    return;
  }
  for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    const SweepOutcome out = run_sweep(data, config, kernel, r, sites, logdetQ);
    kernel.end_of_sweep(sweep);
    result.sweeps = sweep;
    result.skipped_sites += out.skipped;
    result.max_site_delta = out.max_delta;
    // A sweep with any guard failure cannot declare convergence.
    if (out.skipped == 0 && out.max_delta < config.tol) {
      result.converged = true;
      break;
    }
  }
}

}  // namespace

EPResult run_ep(const Dataset& data, const Prior& prior, const EPConfig& config) {
  data.validate();
  prior.validate();
  config.validate();

  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  const double nu2 = prior.nu2;

  EPResult result;
  result.kernel_used = choose_kernel(n, p, config.kernel);
  result.sites.k = Eigen::VectorXd::Zero(n);
  result.sites.m = Eigen::VectorXd::Zero(n);
  result.sites.logZ = Eigen::VectorXd::Zero(n);

  Eigen::VectorXd r = Eigen::VectorXd::Zero(p);
  double logdetQ = -static_cast<double>(p) * std::log(nu2);

  if (result.kernel_used == KernelKind::dense) {
    DenseKernel kernel(data, nu2);
    fit(data, config, kernel, r, result.sites, logdetQ, result);

    Eigen::MatrixXd omega = 0.5 * (kernel.omega + kernel.omega.transpose());
    result.omega_diag = omega.diagonal();
    result.xi = omega * r;
    if (config.keep_state) {
      result.state.kind = KernelKind::dense;
      result.state.nu2 = nu2;
      result.state.omega = omega;
    }
    if (config.full_covariance) result.omega = std::move(omega);
  } else {
    LowRankKernel kernel(data, nu2);
    fit(data, config, kernel, r, result.sites, logdetQ, result);

    // Covariance reconstruction Omega = nu2 (I - V K X); the mean and the
    // diagonal need only O(p n) products.
    const Eigen::MatrixXd KX = result.sites.k.asDiagonal() * data.X;
    result.xi = nu2 * (r - kernel.V * (KX * r));
    result.omega_diag =
        nu2 * (Eigen::VectorXd::Ones(p) -
               kernel.V.cwiseProduct(KX.transpose()).rowwise().sum());
    if (config.full_covariance) {
      Eigen::MatrixXd omega =
          nu2 * (Eigen::MatrixXd::Identity(p, p) - kernel.V * KX);
      result.omega = 0.5 * (omega + omega.transpose());
    }
    if (config.keep_state) {
      result.state.kind = KernelKind::lowrank;
      result.state.nu2 = nu2;
      result.state.V = std::move(kernel.V);
      result.state.X = data.X;
      result.state.k = result.sites.k;
    }
  }

  result.logdetQ = logdetQ;
  result.log_ml = log_marginal_from_parts(r, result.xi, logdetQ, p, nu2,
                                          result.sites.logZ.sum());
  return result;
}

}  // namespace epglm
