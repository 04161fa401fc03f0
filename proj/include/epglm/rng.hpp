// Seeded generators with fully specified output, so simulated data and
// Monte Carlo baselines reproduce bit-for-bit across platforms.
// (std::uniform_real_distribution / normal_distribution are
// implementation-defined; mt19937_64 itself is not.)
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace epglm {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Marsaglia polar; the spare is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Poisson draw; Knuth product method for small means, Atkinson's
  // logistic-envelope rejection (PA) for large ones.
  long poisson(double mean) {
    if (mean < 30.0) {
      const double limit = std::exp(-mean);
      long k = 0;
      double prod = uniform();
      while (prod > limit) {
        ++k;
        prod *= uniform();
      }
      return k;
    }
    const double c = 0.767 - 3.36 / mean;
    const double beta = M_PI / std::sqrt(3.0 * mean);
    const double alpha = beta * mean;
    const double k0 = std::log(c) - mean - std::log(beta);
    for (;;) {
      const double u = uniform();
      if (u <= 0.0 || u >= 1.0) continue;
      const double x = (alpha - std::log((1.0 - u) / u)) / beta;
      const long n = static_cast<long>(std::floor(x + 0.5));
      if (n < 0) continue;
      const double v = uniform();
      if (v <= 0.0) continue;
      const double y = alpha - beta * x;
      const double t = 1.0 + std::exp(y);
      const double lhs = y + std::log(v / (t * t));
      const double rhs = k0 + n * std::log(mean) - std::lgamma(n + 1.0);
      if (lhs <= rhs) return n;
    }
  }

  // Gamma(shape, scale=1) via Marsaglia-Tsang, with the boost for shape < 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u <= 0.0 ? 1e-300 : u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
        return d * v;
      }
    }
  }

  std::uint64_t next_raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace epglm
