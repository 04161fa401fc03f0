// Gauss-Hermite rules with log-scale weights, used by the quadrature
// oracle for tilted moments and by verification tests.
#pragma once

#include <vector>

namespace epglm {

struct GaussHermiteRule {
  // Nodes t_k of int f(t) e^{-t^2} dt ~ sum_k w_k f(t_k), and log w_k.
  // log_w is carried instead of w because the extreme weights of large
  // rules underflow in double precision.
  std::vector<double> node;
  std::vector<double> log_w;
};

// Rule of size n (n <= 300), cached per n. Nodes found by Newton on the
// scaled orthonormal recurrence, weights from the Christoffel sum.
const GaussHermiteRule& gauss_hermite(int n);

}  // namespace epglm
