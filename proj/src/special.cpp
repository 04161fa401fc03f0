#include "epglm/special.hpp"

#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace epglm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112353;
constexpr double kHalfLog2Pi = 0.5 * kLog2Pi;
constexpr double kSqrtPi = 1.7724538509055160272981674833411452;
constexpr double kSqrt2 = 1.4142135623730950488016887242096981;

// Mills ratio Phi(-z)/phi(z) for z >= 8 via the Laplace continued
// fraction R(z) = 1/(z + 1/(z + 2/(z + 3/(...)))), evaluated backwards.
double mills_ratio_cf(double z) {
  double cf = 0.0;
  for (int k = 60; k >= 1; --k) {
    cf = static_cast<double>(k) / (z + cf);
  }
  return 1.0 / (z + cf);
}

}  // namespace

double log_norm_pdf(double x) { return -0.5 * x * x - kHalfLog2Pi; }

double log_norm_cdf(double x) {
  if (x < -8.0) {
    const double z = -x;
    return log_norm_pdf(z) + std::log(mills_ratio_cf(z));
  }
  if (x <= 0.0) {
    return std::log(0.5 * std::erfc(-x / kSqrt2));
  }
  // Phi(x) close to 1: keep relative accuracy of the log through log1p.
  return std::log1p(-0.5 * std::erfc(x / kSqrt2));
}

double zeta1(double x) { return std::exp(log_norm_pdf(x) - log_norm_cdf(x)); }

double zeta2(double x) {
  const double z1 = zeta1(x);
  return -z1 * z1 - x * z1;
}

double erfcx(double z) {
  if (z < 26.0) {
    // erfc(z) is a normal double down here, the product keeps full
    // relative precision.
    return std::exp(z * z) * std::erfc(z);
  }
  // Asymptotic continued fraction
  // erfcx(z) = 1/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))).
  double cf = 0.0;
  for (int k = 20; k >= 1; --k) {
    cf = (0.5 * k) / (z + cf);
  }
  return 1.0 / (kSqrtPi * (z + cf));
}

double lambert_w(double x) {
  if (x < 0.0 || std::isnan(x)) {
    throw std::domain_error("lambert_w: argument must be nonnegative");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;

  double w = (x < 2.718281828459045) ? std::log1p(x)
                                     : std::log(x) - std::log(std::log(x));
  // Halley iteration on f(w) = w e^w - x.
  for (int it = 0; it < 50; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double fp = ew * (w + 1.0);
    const double step = f / (fp - f * (w + 2.0) / (2.0 * (w + 1.0)));
    w -= step;
    if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(w))) break;
  }
  return w;
}

double lambert_w_log(double log_x) {
  if (log_x < 700.0) return lambert_w(std::exp(log_x));
  // Solve w + log w = log_x; strictly convex in log w, Newton converges
  // from w = log_x in a few steps.
  double w = log_x;
  for (int it = 0; it < 50; ++it) {
    const double f = w + std::log(w) - log_x;
    const double step = f / (1.0 + 1.0 / w);
    w -= step;
    if (std::abs(step) <= 1e-14 * std::abs(w)) break;
  }
  return w;
}

double hermite(int m, double x) {
  if (m < 0 || m > 16) {
    throw std::domain_error("hermite: order must be in [0, 16]");
  }
  if (m == 0) return 1.0;
  double hkm1 = 1.0;
  double hk = 2.0 * x;
  for (int k = 1; k < m; ++k) {
    const double hkp1 = 2.0 * x * hk - 2.0 * k * hkm1;
    hkm1 = hk;
    hk = hkp1;
  }
  return hk;
}

namespace {

// Adaptive Simpson on [a, b] with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  const double m = 0.5 * (a + b);
  return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 48);
}

std::vector<double> compute_rossberg_coefficients(int M) {
  std::vector<double> a(M + 1);
  a[0] = 1.0;
  double factorial = 1.0;
  for (int m = 1; m <= M; ++m) {
    factorial *= m;
    // Piece on (0, 1]: substitute u = e^{-t}, removing the ln-singularity:
    //   int_0^1 e^{-u} (ln u)^m du = (-1)^m int_0^inf t^m e^{-t} e^{-e^{-t}} dt.
    auto left = [m](double t) {
      return std::pow(t, m) * std::exp(-t - std::exp(-t));
    };
    // Piece on [1, inf): smooth, truncated where e^{-u} (ln u)^m < 1e-300.
    auto right = [m](double u) {
      return std::exp(-u) * std::pow(std::log(u), m);
    };
    const double i_left = integrate(left, 0.0, 120.0, 1e-13);
    const double i_right = integrate(right, 1.0, 120.0, 1e-13);
    const double integral = ((m % 2) ? -1.0 : 1.0) * i_left + i_right;
    a[m] = (((m % 2) ? -1.0 : 1.0) / factorial) * integral;
    if (!std::isfinite(a[m])) {
      throw std::runtime_error("rossberg_coefficients: quadrature failed");
    }
  }
  return a;
}

}  // namespace

const std::vector<double>& rossberg_coefficients(int M) {
  if (M < 1 || M > 10) {
    throw std::domain_error("rossberg_coefficients: M must be in [1, 10]");
  }
  static std::mutex mu;
  static std::unordered_map<int, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(M);
  if (it == cache.end()) {
    it = cache.emplace(M, compute_rossberg_coefficients(M)).first;
  }
  return it->second;
}

double log_laplace_lognormal_asmussen(double log_s, double rho2) {
  if (!(rho2 > 0.0)) {
    throw std::domain_error("laplace_lognormal_asmussen: rho2 must be > 0");
  }
  const double w = lambert_w_log(log_s + std::log(rho2));
  return -(w + 0.5 * w * w) / rho2 - 0.5 * std::log1p(w);
}

double laplace_lognormal_asmussen(double s, double rho2) {
  if (!(s > 0.0)) {
    throw std::domain_error("laplace_lognormal_asmussen: s must be > 0");
  }
  return std::exp(log_laplace_lognormal_asmussen(std::log(s), rho2));
}

RossbergEval rossberg_g(double x, double rho, int M) {
  if (!(rho > 0.0)) throw std::domain_error("rossberg_g: rho must be > 0");
  if (M < 2 || M > 10) throw std::domain_error("rossberg_g: M must be in [2, 10]");
  const std::vector<double>& a = rossberg_coefficients(M);

  // E(x) = exp(rho^2/2 - x rho) erfc((rho - x)/sqrt(2)), via the scaled
  // complementary error function: E(x) = exp(-x^2/2) erfcx((rho - x)/sqrt(2)).
  const double z = (rho - x) / kSqrt2;
  double big_e;
  if (z >= 0.0) {
    big_e = std::exp(-0.5 * x * x) * erfcx(z);
  } else {
    big_e = std::exp(0.5 * rho * rho - x * rho) * std::erfc(z);
  }

  const double u = x / kSqrt2;
  const double rs = rho * kSqrt2;
  // b_m = (a_M - a_m) / (rho sqrt(2))^m, m = 1..M-1.
  double sum_g = 0.0, sum_g1 = 0.0, sum_g2 = 0.0;
  double hkm1 = 1.0;        // H_{m-1}(u)
  double hk = 2.0 * u;      // H_m(u)
  double scale = 1.0 / rs;  // (rho sqrt(2))^{-m}
  for (int m = 1; m <= M - 1; ++m) {
    const double bm = (a[M] - a[m]) * scale;
    const double hkp1 = 2.0 * u * hk - 2.0 * m * hkm1;  // H_{m+1}(u)
    sum_g += bm * hkm1;
    sum_g1 += bm * hk;
    sum_g2 += bm * hkp1;
    hkm1 = hk;
    hk = hkp1;
    scale /= rs;
  }

  const double expx = std::exp(-0.5 * x * x);
  const double phi_x = expx / std::sqrt(2.0 * M_PI);
  const double cdf_x = 0.5 * std::erfc(-u);

  RossbergEval out;
  out.g = cdf_x - 0.5 * a[M] * big_e + (expx / kSqrtPi) * sum_g;
  out.g1 = phi_x + 0.5 * a[M] * (rho * big_e - (kSqrt2 / kSqrtPi) * expx) -
           (expx / std::sqrt(2.0 * M_PI)) * sum_g1;
  out.g2 = -x * phi_x -
           0.5 * a[M] * (rho * rho * big_e - (rho + x) * (kSqrt2 / kSqrtPi) * expx) +
           (expx / (2.0 * kSqrtPi)) * sum_g2;
  return out;
}

}  // namespace epglm
