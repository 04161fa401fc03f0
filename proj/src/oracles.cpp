#include "epglm/oracles.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "epglm/rng.hpp"
#include "epglm/special.hpp"

namespace epglm {

namespace {

constexpr double kGuardEps = 1e-12;

// log Psi(r, Q) = 1/2 r^T Q^{-1} r + p/2 log(2 pi) - 1/2 log|Q|.
double log_psi(const Eigen::VectorXd& r, const Eigen::MatrixXd& Q) {
  const Eigen::LLT<Eigen::MatrixXd> llt(Q);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("naive_ep: cavity precision not positive definite");
  }
  const Eigen::VectorXd sol = llt.solve(r);
  double logdet = 0.0;
  for (Eigen::Index j = 0; j < Q.rows(); ++j) {
    logdet += 2.0 * std::log(llt.matrixL()(j, j));
  }
  return 0.5 * r.dot(sol) +
         0.5 * static_cast<double>(Q.rows()) * std::log(2.0 * M_PI) -
         0.5 * logdet;
}

double log_likelihood_at(const Dataset& data, Eigen::Index i, double eta) {
  const double y = data.y(i);
  switch (data.model.kind) {
    case ModelKind::probit:
      return log_norm_cdf((2.0 * y - 1.0) * eta);
    case ModelKind::logit: {
      const double t = (2.0 * y - 1.0) * eta;
      return t > 33.0 ? 0.0 : (t < -33.0 ? t : -std::log1p(std::exp(-t)));
    }
    case ModelKind::poisson:
      return y * eta - std::exp(eta) - std::lgamma(y + 1.0);
    case ModelKind::gamma: {
      const double ups = (*data.model.shape)(i);
      return ups * std::log(ups) - std::lgamma(ups) + (ups - 1.0) * std::log(y) -
             ups * eta - ups * y * std::exp(-eta);
    }
  }
  return 0.0;
}

}  // namespace

EPResult naive_ep(const Dataset& data, const Prior& prior, const EPConfig& config) {
  data.validate();
  prior.validate();
  config.validate();
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  if (n > 100 || p > 100) {
    throw std::invalid_argument("naive_ep: desk scale only (n, p <= 100)");
  }

  const Eigen::MatrixXd Q0 =
      Eigen::MatrixXd::Identity(p, p) / prior.nu2;
  const Eigen::VectorXd r0 = Eigen::VectorXd::Zero(p);

  // Full per-site natural parameters.
  std::vector<Eigen::MatrixXd> Q_site(n, Eigen::MatrixXd::Zero(p, p));
  std::vector<Eigen::VectorXd> r_site(n, Eigen::VectorXd::Zero(p));
  EPResult result;
  result.kernel_used = choose_kernel(n, p, config.kernel);
  result.sites.k = Eigen::VectorXd::Zero(n);
  result.sites.m = Eigen::VectorXd::Zero(n);
  result.sites.logZ = Eigen::VectorXd::Zero(n);

  Eigen::MatrixXd Q_ep = Q0;
  Eigen::VectorXd r_ep = r0;

  const TiltedOptions tilted_opts{
      PoissonOptions{config.poisson_threshold, 6},
      config.use_quadrature_fallback};

  if (n == 0) result.converged = true;
  for (int sweep = 1; sweep <= config.max_sweeps && n > 0; ++sweep) {
    double max_delta = 0.0;
    int skipped = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd x = data.X.row(i).transpose();
      const Eigen::MatrixXd Q_cav = Q_ep - Q_site[i];
      const Eigen::VectorXd r_cav = r_ep - r_site[i];

      Eigen::MatrixXd omega_cav;
      try {
        const Eigen::LLT<Eigen::MatrixXd> llt(Q_cav);
        if (llt.info() != Eigen::Success) {
          ++skipped;
          continue;
        }
        omega_cav = llt.solve(Eigen::MatrixXd::Identity(p, p));
      } catch (...) {
        ++skipped;
        continue;
      }

      CavityProjection cav;
      cav.rho2 = x.dot(omega_cav * x);
      cav.lambda = x.dot(omega_cav * r_cav);
      // Mirror the incremental engine's guard on the pre-removal state.
      const double a = x.dot((Q_ep.llt().solve(x)));
      if (!(cav.rho2 > 0.0) || 1.0 - result.sites.k(i) * a <= kGuardEps) {
        ++skipped;
        continue;
      }

      TiltedSummary t;
      SiteParams target;
      try {
        const double shape = data.model.shape ? (*data.model.shape)(i) : 1.0;
        t = tilted_summary(data.model, data.y(i), shape, cav, tilted_opts);
        if (!std::isfinite(t.logZ) || !std::isfinite(t.theta) ||
            !std::isfinite(t.delta)) {
          ++skipped;
          continue;
        }
        target = tilted_to_site(cav, t);
      } catch (const std::runtime_error&) {
        ++skipped;
        continue;
      }

      const double k_t =
          (1.0 - config.damping) * result.sites.k(i) + config.damping * target.k;
      const double m_t =
          (1.0 - config.damping) * result.sites.m(i) + config.damping * target.m;
      const double dk = k_t - result.sites.k(i);
      const double dm = m_t - result.sites.m(i);
      if (1.0 + dk * a <= kGuardEps || !std::isfinite(k_t) || !std::isfinite(m_t)) {
        ++skipped;
        continue;
      }

      Q_site[i] = k_t * x * x.transpose();
      r_site[i] = m_t * x;
      Q_ep = Q_cav + Q_site[i];
      r_ep = r_cav + r_site[i];
      result.sites.k(i) = k_t;
      result.sites.m(i) = m_t;
      // Zeroth-moment constraint by direct Psi evaluation.
      result.sites.logZ(i) =
          log_psi(r_ep, Q_ep) - log_psi(r_cav, Q_cav) - t.logZ;
      max_delta = std::max(max_delta, std::abs(dk) + std::abs(dm));
    }
    result.sweeps = sweep;
    result.skipped_sites += skipped;
    result.max_site_delta = max_delta;
    if (skipped == 0 && max_delta < config.tol) {
      result.converged = true;
      break;
    }
  }

  const Eigen::LLT<Eigen::MatrixXd> llt(Q_ep);
  result.omega = llt.solve(Eigen::MatrixXd::Identity(p, p));
  result.omega = 0.5 * (result.omega + result.omega.transpose()).eval();
  result.omega_diag = result.omega.diagonal();
  result.xi = result.omega * r_ep;
  for (Eigen::Index j = 0; j < p; ++j) {
    result.logdetQ += 2.0 * std::log(llt.matrixL()(j, j));
  }
  result.log_ml =
      log_psi(r_ep, Q_ep) - log_psi(r0, Q0) - result.sites.logZ.sum();
  if (config.keep_state) {
    result.state.kind = KernelKind::dense;
    result.state.nu2 = prior.nu2;
    result.state.omega = result.omega;
  }
  return result;
}

GridPosterior grid_posterior(const Dataset& data, const Prior& prior,
                             double bound, int nodes_per_dim) {
  data.validate();
  prior.validate();
  const Eigen::Index p = data.p();
  if (p > 2) throw std::invalid_argument("grid_posterior: p <= 2 only");
  if (nodes_per_dim < 3 || nodes_per_dim > 2001) {
    throw std::invalid_argument("grid_posterior: nodes_per_dim in [3, 2001]");
  }
  const int N = nodes_per_dim;
  const double h = 2.0 * bound / (N - 1);

  std::vector<double> grid(N);
  for (int j = 0; j < N; ++j) grid[j] = -bound + j * h;

  const Eigen::Index n_rows = (p == 1) ? N : Eigen::Index(N) * N;
  Eigen::VectorXd log_joint(n_rows);
  Eigen::MatrixXd beta_at(n_rows, p);
  Eigen::VectorXd trap_logw(n_rows);

  auto trap = [&](int idx) { return (idx == 0 || idx == N - 1) ? 0.5 : 1.0; };

  Eigen::Index row = 0;
  for (int j0 = 0; j0 < N; ++j0) {
    const int j1_max = (p == 2) ? N : 1;
    for (int j1 = 0; j1 < j1_max; ++j1, ++row) {
      Eigen::VectorXd beta(p);
      beta(0) = grid[j0];
      double w = trap(j0) * h;
      if (p == 2) {
        beta(1) = grid[j1];
        w *= trap(j1) * h;
      }
      double lj = -0.5 * beta.squaredNorm() / prior.nu2 -
                  0.5 * p * std::log(2.0 * M_PI * prior.nu2);
      for (Eigen::Index i = 0; i < data.n(); ++i) {
        lj += log_likelihood_at(data, i, data.X.row(i).dot(beta));
      }
      log_joint(row) = lj;
      beta_at.row(row) = beta.transpose();
      trap_logw(row) = std::log(w);
    }
  }

  const Eigen::VectorXd log_term = log_joint + trap_logw;
  const double max_term = log_term.maxCoeff();
  const Eigen::VectorXd u = (log_term.array() - max_term).exp();
  const double total = u.sum();

  // Mass near the boundary must be negligible, otherwise the box is too
  // small for the requested accuracy.
  double edge_mass = 0.0;
  row = 0;
  for (int j0 = 0; j0 < N; ++j0) {
    const int j1_max = (p == 2) ? N : 1;
    for (int j1 = 0; j1 < j1_max; ++j1, ++row) {
      const bool edge =
          j0 == 0 || j0 == N - 1 || (p == 2 && (j1 == 0 || j1 == N - 1));
      if (edge) edge_mass += u(row);
    }
  }
  if (edge_mass > 1e-10 * total) {
    throw std::runtime_error("grid_posterior: boundary mass too large");
  }

  GridPosterior out;
  out.log_ml = max_term + std::log(total);
  out.mean = (beta_at.transpose() * u) / total;
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index r2 = 0; r2 < n_rows; ++r2) {
    second.noalias() += u(r2) * beta_at.row(r2).transpose() * beta_at.row(r2);
  }
  out.cov = second / total - out.mean * out.mean.transpose();
  return out;
}

MonteCarloEstimate mc_predictive(const EPResult& result, ModelKind model,
                                 const Eigen::VectorXd& x_new, int draws,
                                 std::uint64_t seed,
                                 bool probit_plugin_for_logit) {
  if (draws < 10000) {
    throw std::invalid_argument("mc_predictive: use at least 1e4 draws");
  }
  if (result.omega.size() == 0) {
    throw std::invalid_argument("mc_predictive: needs the full covariance");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(result.omega);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("mc_predictive: covariance not positive definite");
  }
  // Only the scalar projection eta = x^T beta matters, so draw eta
  // directly: eta ~ N(x^T xi, x^T Omega x) with the quadratic form taken
  // through the factor for positivity.
  const Eigen::VectorXd lx = llt.matrixL().transpose() * x_new;
  const double sd = lx.norm();
  const double center = x_new.dot(result.xi);

  Rng rng(seed);
  double sum = 0.0, sumsq = 0.0;
  for (int d = 0; d < draws; ++d) {
    const double eta = center + sd * rng.normal();
    double f = 0.0;
    switch (model) {
      case ModelKind::probit:
        f = std::exp(log_norm_cdf(eta));
        break;
      case ModelKind::logit:
        f = probit_plugin_for_logit
                ? std::exp(log_norm_cdf(eta))
                : 1.0 / (1.0 + std::exp(-eta));
        break;
      case ModelKind::poisson:
      case ModelKind::gamma:
        f = std::exp(eta);
        break;
    }
    sum += f;
    sumsq += f * f;
  }
  MonteCarloEstimate est;
  est.estimate = sum / draws;
  const double var = (sumsq / draws - est.estimate * est.estimate) /
                     static_cast<double>(draws - 1) * draws;
  est.std_error = std::sqrt(std::max(0.0, var) / draws);
  return est;
}

}  // namespace epglm
