#include "epglm/quadrature.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace epglm {

namespace {

// Hermite functions psi_k(x) = h_k(x) e^{-x^2/2}, with h_k orthonormal
// w.r.t. e^{-x^2}. They stay O(1), so no overflow up to large n.
//   psi_0 = pi^{-1/4} e^{-x^2/2}
//   psi_{k+1} = x sqrt(2/(k+1)) psi_k - sqrt(k/(k+1)) psi_{k-1}
void hermite_functions(int n, double x, double* psi_n, double* psi_nm1,
                       double* christoffel) {
  double pkm1 = 0.0;
  double pk = std::exp(-0.5 * x * x) / std::pow(M_PI, 0.25);
  double sumsq = pk * pk;
  for (int k = 0; k < n; ++k) {
    const double pkp1 =
        x * std::sqrt(2.0 / (k + 1)) * pk - std::sqrt(double(k) / (k + 1)) * pkm1;
    pkm1 = pk;
    pk = pkp1;
    if (k < n - 1) sumsq += pk * pk;
  }
  *psi_n = pk;
  *psi_nm1 = pkm1;
  *christoffel = sumsq;
}

GaussHermiteRule compute_rule(int n) {
  GaussHermiteRule rule;
  rule.node.resize(n);
  rule.log_w.resize(n);

  const int half = (n + 1) / 2;
  double z = 0.0, z_prev = 0.0, z_prev2 = 0.0;
  for (int i = 0; i < half; ++i) {
    // Initial guesses for the largest roots, then stepping inwards.
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z = z_prev - 1.14 * std::pow(n, 0.426) / z_prev;
    } else if (i == 2) {
      z = 1.86 * z_prev - 0.86 * z_prev2;
    } else if (i == 3) {
      z = 1.91 * z_prev - 0.91 * z_prev2;
    } else {
      z = 2.0 * z_prev - z_prev2;
    }
    double psi_n, psi_nm1, chris;
    for (int it = 0; it < 200; ++it) {
      hermite_functions(n, z, &psi_n, &psi_nm1, &chris);
      // psi_n'(z) = sqrt(2n) psi_{n-1}(z) - z psi_n(z)
      const double deriv = std::sqrt(2.0 * n) * psi_nm1 - z * psi_n;
      const double step = psi_n / deriv;
      z -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    hermite_functions(n, z, &psi_n, &psi_nm1, &chris);
    // Gauss weight: w = e^{-z^2} / sum_{k<n} psi_k(z)^2, so
    // log w = -z^2 - log(sum psi_k^2).
    const int hi = n - 1 - i;
    const int lo = i;
    rule.node[hi] = z;
    rule.node[lo] = -z;
    rule.log_w[hi] = -z * z - std::log(chris);
    rule.log_w[lo] = rule.log_w[hi];
    z_prev2 = z_prev;
    z_prev = z;
  }
  if (n % 2 == 1) rule.node[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int n) {
  if (n < 1 || n > 300) {
    throw std::domain_error("gauss_hermite: size must be in [1, 300]");
  }
  static std::mutex mu;
  static std::unordered_map<int, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

}  // namespace epglm
