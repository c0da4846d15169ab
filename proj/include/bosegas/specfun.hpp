#pragma once

#include <cstdint>

#include "bosegas/extreal.hpp"

namespace bosegas {

// Riemann zeta for s > 1. Throws DomainError otherwise.
double zeta(double s);

// Analytic continuation of zeta to s != 1 (Euler-Maclaurin for moderate s,
// reflection formula far left). Needed by the small-argument expansion of
// bose_g, which sums zeta at arguments marching down past 1.
double zeta_continued(double s);

struct BoseDiag {
  long terms = 0;          // series terms evaluated
  double tail_bound = 0;   // certified bound on the dropped tail
  bool truncated = false;  // hit the term cap before the target accuracy
};

// Bose function g(n, alpha) = sum_{k>=1} k^-n e^(-alpha k), alpha >= 0.
// Equals +infinity exactly when alpha = 0 and n <= 1. Throws DomainError
// for alpha < 0.
ExtReal bose_g(double n, double alpha, BoseDiag* diag = nullptr);

// Same, when the caller knows the result is finite (alpha > 0, or n > 1).
double bose_g_finite(double n, double alpha, BoseDiag* diag = nullptr);

// Partial tail sum_{k >= k_from} k^-n e^(-alpha k). May return +inf as an
// IEEE double when the full series diverges (alpha = 0, n <= 1); internal
// helper, callers wrap into ExtReal where the contract needs it.
double bose_tail(double n, double alpha, std::int64_t k_from);

enum class WBranch { Principal, Lower };

// Real Lambert W. Principal branch on [-1/e, inf), lower branch on
// [-1/e, 0). Residual |W e^W - x| driven below 1e-13 scale; Halley from
// asymptotic seeds, bisection fallback if the iteration cycles.
double lambert_w(WBranch branch, double x);

// dW/dx = W / (x (1 + W)). Requires x in the branch domain, x != 0 and
// x != -1/e (the derivative diverges at the branch point).
double lambert_w_prime(WBranch branch, double x);

}  // namespace bosegas
