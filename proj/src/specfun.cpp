#include "bosegas/specfun.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>
#include <vector>

#include "bosegas/errors.hpp"

namespace bosegas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Kahan {
  double s = 0, c = 0;
  void add(double x) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

// sin(pi s / 2) with the argument reduced in s-space, so large |s| does not
// lose precision through a rounded pi.
double sin_half_pi(double s) {
  double h = s / 2;
  double r = h - std::round(h);
  double v = std::sin(M_PI * r);
  return (static_cast<long long>(std::llround(h - r)) % 2 == 0) ? v : -v;
}

// Euler-Maclaurin evaluation of zeta, valid well left of the usual s > 1
// domain (the Bernoulli corrections continue it down to s > -13 or so
// before the dropped remainder matters).
double zeta_em(double s) {
  constexpr int N = 64;
  // B_2, B_4, ..., B_14
  constexpr double bern[] = {1.0 / 6,  -1.0 / 30,   1.0 / 42, -1.0 / 30,
                             5.0 / 66, -691.0 / 2730, 7.0 / 6};
  Kahan sum;
  for (int k = 1; k < N; ++k) sum.add(std::pow(double(k), -s));
  const double Nms = std::pow(double(N), -s);
  sum.add(Nms * N / (s - 1));
  sum.add(Nms / 2);
  double rising = s;           // s (s+1) ... (s+2j-2)
  double npow = Nms / N;       // N^{-s-2j+1}
  double fact = 2;             // (2j)!
  for (int j = 0; j < 7; ++j) {
    sum.add(bern[j] / fact * rising * npow);
    rising *= (s + 2 * j + 1) * (s + 2 * j + 2);
    npow /= double(N) * N;
    fact *= (2 * j + 3) * (2 * j + 4);
  }
  return sum.s;
}

bool is_integer(double x) { return x == std::floor(x) && std::abs(x) < 1e15; }

// Direct series sum_{k>=1} k^-n e^(-alpha k), alpha > 0.
double bose_series(double n, double alpha, BoseDiag* diag) {
  constexpr long kCap = 10'000'000;
  const double r0 = std::exp(-alpha);
  Kahan sum;
  double ek = 1;
  long k = 0;
  double tail = kInf;
  while (k < kCap) {
    ++k;
    ek *= r0;
    if ((k & 511) == 0) ek = std::exp(-alpha * k);  // clear drift
    const double term = std::pow(double(k), -n) * ek;
    sum.add(term);
    // Ratio of consecutive terms; below 1 it only shrinks further for
    // n >= 0, and decreases monotonically toward e^-alpha for n < 0.
    const double r = n >= 0 ? r0 : r0 * std::pow(double(k + 1) / k, -n);
    if (r < 1) {
      tail = term * r / (1 - r);
      if (term + tail <= 1e-14 * std::abs(sum.s)) break;
    }
    if (term == 0 && k > 4) {
      tail = 0;
      break;
    }
  }
  if (diag) {
    diag->terms += k;
    diag->tail_bound = tail;
    diag->truncated = diag->truncated || (k >= kCap && tail > 1e-14 * std::abs(sum.s));
  }
  return sum.s;
}

// Cache of continued-zeta values zeta(n - k), k = 0..kZMax, keyed by n.
constexpr int kZMax = 56;
const std::vector<double>& zeta_ladder(double n) {
  thread_local std::unordered_map<double, std::vector<double>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> v(kZMax + 1);
  for (int k = 0; k <= kZMax; ++k) {
    const double s = n - k;
    v[k] = (s == 1) ? kInf : zeta_continued(s);
  }
  return cache.emplace(n, std::move(v)).first->second;
}

// Small-argument expansion, non-integer n:
//   g(n, a) = Gamma(1-n) a^(n-1) + sum_{k>=0} zeta(n-k) (-a)^k / k!
// convergent for a < 2 pi; used for 0 < a < 1/2 where the direct series
// slows down.
double bose_expand_frac(double n, double alpha, BoseDiag* diag) {
  const auto& zl = zeta_ladder(n);
  double acc = std::tgamma(1 - n) * std::pow(alpha, n - 1);
  double p = 1;  // (-a)^k / k!
  long used = 0;
  int small_run = 0;
  for (int k = 0; k <= kZMax; ++k) {
    const double term = zl[k] * p;
    acc += term;
    p *= -alpha / (k + 1);
    ++used;
    if (std::abs(term) < 1e-17 * std::abs(acc)) {
      if (++small_run >= 2 && k > 6) break;
    } else {
      small_run = 0;
    }
  }
  if (diag) diag->terms += used;
  return acc;
}

// Small-argument expansion, integer n >= 1: the k = n-1 term of the ladder
// turns into a logarithm,
//   g(n, a) = ((-a)^(n-1)/(n-1)!) (H_{n-1} - log a)
//           + sum_{k>=0, k != n-1} zeta(n-k) (-a)^k / k!
double bose_expand_int(int n, double alpha, BoseDiag* diag) {
  const auto& zl = zeta_ladder(double(n));
  double harmonic = 0, fact = 1;
  for (int i = 1; i <= n - 1; ++i) {
    harmonic += 1.0 / i;
    fact *= i;
  }
  double acc = std::pow(-alpha, n - 1) / fact * (harmonic - std::log(alpha));
  double p = 1;
  long used = 0;
  int small_run = 0;
  for (int k = 0; k <= kZMax; ++k) {
    const double term = (k != n - 1) ? zl[k] * p : 0.0;
    acc += term;
    p *= -alpha / (k + 1);
    ++used;
    if (k >= n && std::abs(term) < 1e-17 * std::abs(acc)) {
      if (++small_run >= 2 && k > n + 6) break;
    } else {
      small_run = 0;
    }
  }
  if (diag) diag->terms += used;
  return acc;
}

}  // namespace

double zeta_continued(double s) {
  if (s == 1) throw DomainError("zeta_continued: pole at s = 1");
  if (s > -0.5) return zeta_em(s);
  if (is_integer(s) && static_cast<long long>(s) % 2 == 0) return 0;  // trivial zeros
  // Reflection onto 1 - s >= 1.5 where Euler-Maclaurin is solid.
  return std::pow(2, s) * std::pow(M_PI, s - 1) * sin_half_pi(s) *
         std::tgamma(1 - s) * zeta_em(1 - s);
}

double zeta(double s) {
  if (!(s > 1)) throw DomainError("zeta: requires s > 1");
  return zeta_em(s);
}

ExtReal bose_g(double n, double alpha, BoseDiag* diag) {
  if (!(alpha >= 0)) throw DomainError("bose_g: requires alpha >= 0");
  if (alpha == 0) {
    if (n <= 1) return ExtReal::inf();
    return ExtReal::finite(zeta_em(n));
  }
  if (n == 0) return ExtReal::finite(1.0 / std::expm1(alpha));
  if (n == -1) {
    const double e = std::expm1(alpha);
    return ExtReal::finite(std::exp(alpha) / (e * e));
  }
  if (alpha >= 0.5 || n <= 0)
    return ExtReal::finite(bose_series(n, alpha, diag));
  if (is_integer(n))
    return ExtReal::finite(bose_expand_int(int(n), alpha, diag));
  return ExtReal::finite(bose_expand_frac(n, alpha, diag));
}

double bose_g_finite(double n, double alpha, BoseDiag* diag) {
  ExtReal v = bose_g(n, alpha, diag);
  if (!v.is_finite()) throw DomainError("bose_g: series diverges here");
  return v.value();
}

double bose_tail(double n, double alpha, std::int64_t k_from) {
  if (k_from <= 1) return bose_g(n, alpha).as_double();
  if (alpha == 0) {
    if (n <= 1) return kInf;
    // Euler-Maclaurin tail. The correction stack only converges well for
    // K somewhat larger than n, so walk the start point up to 32 first.
    Kahan sum;
    std::int64_t K0 = k_from;
    while (K0 < 32) sum.add(std::pow(double(K0++), -n));
    const double K = double(K0);
    constexpr double bern[] = {1.0 / 6,  -1.0 / 30,   1.0 / 42, -1.0 / 30,
                               5.0 / 66, -691.0 / 2730, 7.0 / 6};
    const double Kms = std::pow(K, -n);
    sum.add(Kms * K / (n - 1));
    sum.add(Kms / 2);
    double rising = n, npow = Kms / K, fact = 2;
    for (int j = 0; j < 7; ++j) {
      sum.add(bern[j] / fact * rising * npow);
      rising *= (n + 2 * j + 1) * (n + 2 * j + 2);
      npow /= K * K;
      fact *= (2 * j + 3) * (2 * j + 4);
    }
    return sum.s;
  }
  if (alpha * double(k_from) > 3) {
    // Sum the tail directly: it decays within ~36/alpha terms, and the
    // full-minus-head route would cancel e^(alpha k) digits away.
    Kahan sum;
    const double r0 = std::exp(-alpha);
    double ek = std::exp(-alpha * double(k_from - 1));
    double term = 0, r = 0;
    const std::int64_t cap = k_from + 4'000'000;
    std::int64_t k = k_from;
    for (; k < cap; ++k) {
      ek *= r0;
      if (((k - k_from) & 511) == 511) ek = std::exp(-alpha * double(k));
      term = std::pow(double(k), -n) * ek;
      sum.add(term);
      r = n >= 0 ? r0 : r0 * std::pow(double(k + 1) / k, -n);
      if (r < 1 && term * r / (1 - r) <= 1e-16 * std::abs(sum.s)) break;
      if (term == 0) break;
    }
    // Geometric remainder if the cap cut the sum short.
    if (k == cap && r < 1) sum.add(term * r / (1 - r));
    return sum.s;
  }
  // Full series minus the head, compensated. Reached only with
  // alpha k_from <= 3, so the cancellation costs at most ~e^3 ulps.
  const double full = bose_g_finite(n, alpha);
  Kahan head;
  const double r0 = std::exp(-alpha);
  double ek = 1;
  for (std::int64_t k = 1; k < k_from; ++k) {
    ek *= r0;
    if ((k & 511) == 0) ek = std::exp(-alpha * double(k));
    head.add(std::pow(double(k), -n) * ek);
  }
  const double tail = full - head.s;
  return tail > 0 ? tail : 0;
}

namespace {

// Series around the branch point -1/e in p = sqrt(2 (e x + 1)); the sign of
// p selects the branch.
double branch_series(double p) {
  return -1 + p * (1 + p * (-1.0 / 3 + p * (11.0 / 72 + p * (-43.0 / 540 +
             p * (769.0 / 17280 + p * (-221.0 / 8505))))));
}

double halley_or_bisect(WBranch branch, double x, double w) {
  double dw_prev = kInf;
  for (int it = 0; it < 100; ++it) {
    const double e = std::exp(w);
    const double f = w * e - x;
    if (f == 0) return w;
    const double denom = e * (w + 1) - (w + 2) * f / (2 * w + 2);
    if (denom == 0) break;
    const double dw = f / denom;
    w -= dw;
    if (std::abs(dw) <= 4e-16 * (1 + std::abs(w))) return w;
    if (it > 4 && std::abs(dw) >= std::abs(dw_prev)) break;  // cycling
    dw_prev = dw;
  }
  // Bisection fallback. w e^w is increasing above -1 and decreasing
  // below, so each branch brackets cleanly.
  double lo, hi;
  if (branch == WBranch::Principal) {
    lo = -1;
    hi = x > 1 ? std::log(x) + 2 : 1;
  } else {
    lo = std::min(2 * std::log(-x), -2.0) - 10;
    hi = -1;
  }
  auto resid = [&](double v) { return v * std::exp(v) - x; };
  double flo = resid(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = (lo + hi) / 2;
    const double fm = resid(mid);
    if ((fm <= 0) == (flo <= 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

}  // namespace

double lambert_w(WBranch branch, double x) {
  const double disc = M_E * x + 1;  // 0 at the branch point
  if (branch == WBranch::Principal) {
    if (disc < -1e-12) throw DomainError("lambert_w: x below -1/e");
    if (disc <= 0) return -1;
    if (x == 0) return 0;
    const double p = std::sqrt(2 * disc);
    if (p < 1e-3) return branch_series(p);
    double seed;
    if (x < -0.25)
      seed = branch_series(p);
    else if (x <= 2)
      seed = x / (1 + x);
    else {
      const double l1 = std::log(x), l2 = std::log(l1);
      seed = l1 - l2 + l2 / l1;
    }
    return halley_or_bisect(branch, x, seed);
  }
  if (disc < -1e-12 || x >= 0)
    throw DomainError("lambert_w: lower branch needs -1/e <= x < 0");
  if (disc <= 0) return -1;
  const double p = -std::sqrt(2 * disc);
  if (-p < 1e-3) return branch_series(p);
  double seed;
  if (x < -0.25) {
    seed = branch_series(p);
  } else {
    const double l1 = std::log(-x);
    seed = l1 - std::log(-l1) + std::log(-l1) / l1;
  }
  return halley_or_bisect(branch, x, seed);
}

double lambert_w_prime(WBranch branch, double x) {
  if (x == 0)
    throw DomainError("lambert_w_prime: x = 0 outside the formula's domain");
  const double w = lambert_w(branch, x);
  if (std::abs(1 + w) < 1e-12)
    throw DomainError("lambert_w_prime: derivative singular at x = -1/e");
  return w / (x * (1 + w));
}

}  // namespace bosegas
