// The EP fixed-point iteration for GLMs under a spherical Gaussian
// prior, in two kernels:
//   dense   - maintains Omega = Q^{-1} (p x p), O(p^2) work per site
//   lowrank - maintains V = Omega X^T (p x n), O(p n) work per site
// Both track the global natural mean r, the per-site scalars (k_i, m_i,
// log Z_i) and an incrementally updated log|Q|.
#pragma once

#include <Eigen/Core>

#include "epglm/model.hpp"
#include "epglm/tilted.hpp"

namespace epglm {

enum class KernelKind { dense, lowrank };
enum class KernelChoice { automatic, dense, lowrank };

std::string to_string(KernelKind k);
KernelChoice kernel_choice_from_string(const std::string& name);

// auto resolves to dense iff p < n (ties go to lowrank).
KernelKind choose_kernel(Eigen::Index n, Eigen::Index p, KernelChoice choice);

struct EPConfig {
  double tol = 1e-6;           // sweep convergence: max_i |dk_i| + |dm_i|
  int max_sweeps = 200;
  double damping = 1.0;        // in (0, 1]; 1 = undamped
  KernelChoice kernel = KernelChoice::automatic;
  double poisson_threshold = 0.5;
  bool use_quadrature_fallback = false;  // quadrature tilted moments everywhere
  bool keep_state = false;     // retain kernel state for exact prediction paths
  bool full_covariance = true; // materialize the p x p covariance on output

  void validate() const;
};

struct SiteState {
  Eigen::VectorXd k;
  Eigen::VectorXd m;
  Eigen::VectorXd logZ;
};

// Fitted-state snapshot sufficient to reproduce quadratic forms exactly.
struct KernelState {
  KernelKind kind = KernelKind::dense;
  double nu2 = 1.0;
  Eigen::MatrixXd omega;  // dense kernel
  Eigen::MatrixXd V;      // lowrank kernel, p x n
  Eigen::MatrixXd X;      // lowrank kernel needs the design for K X products
  Eigen::VectorXd k;      // site precisions (lowrank quadratic forms)
};

struct EPResult {
  Eigen::VectorXd xi;          // posterior mean
  Eigen::VectorXd omega_diag;  // posterior variances
  Eigen::MatrixXd omega;       // full covariance (when config.full_covariance)
  double log_ml = 0.0;
  double logdetQ = 0.0;        // incrementally maintained log|Q|
  bool converged = false;
  int sweeps = 0;
  int skipped_sites = 0;       // guard failures summed over all sweeps
  double max_site_delta = 0.0; // last sweep's max |dk| + |dm|
  KernelKind kernel_used = KernelKind::dense;
  SiteState sites;
  KernelState state;           // populated when config.keep_state
};

// Cavity quantities for one site from the global-state product
// v = Omega x_i (a dense mat-vec or a column of V) and a = x_i^T v.
// Gives w_i = d v with d = (1 - k_i a)^{-1}, rho2 = x^T w = d a and
// lambda = w^T (r - m_i x) = d (v^T r - m_i a). Returns false when the
// guard 1 - k_i a <= guard_eps fails (negative cavity variance).
bool cavity_from_product(const Eigen::VectorXd& v, double a, double k_i,
                         double m_i, const Eigen::VectorXd& r,
                         CavityProjection* cav, double* d,
                         double guard_eps = 1e-12);

// Runs sweeps over sites 1..n in fixed order until convergence or
// max_sweeps. Non-convergence is reported through converged=false; the
// result is still returned. Deterministic given inputs and config.
EPResult run_ep(const Dataset& data, const Prior& prior, const EPConfig& config);

// log m(y) = 1/2 [ r^T xi - log|Q| - 2 p log nu ] - sum_i log Z_i,
// exposed for oracle comparisons.
double log_marginal_from_parts(const Eigen::VectorXd& r,
                               const Eigen::VectorXd& xi, double logdetQ,
                               Eigen::Index p, double nu2,
                               double sum_site_logZ);

}  // namespace epglm
