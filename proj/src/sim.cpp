#include "bosegas/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "bosegas/errors.hpp"
#include "parallel.hpp"

namespace bosegas {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- random streams ----------------------------------------------------
//
// Own generator instead of <random>: the standard distributions are not
// pinned across library implementations, and the reproducibility contract
// is bit-identical output for a given (seed, config). splitmix64 expands
// (seed, stream) into xoshiro256++ state; distinct streams pass through
// the finalizer, so chains never share a sequence.

struct SplitMix {
  std::uint64_t s;
  std::uint64_t next() {
    std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
};

struct Xoshiro {
  std::uint64_t s[4];

  Xoshiro(std::uint64_t seed, std::uint64_t stream) {
    SplitMix sm{seed ^ (0x9E3779B97F4A7C15ull * (stream + 1))};
    for (auto& w : s) w = sm.next();
    s[0] |= 1;  // the all-zero state is absorbing
  }

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t next() {
    std::uint64_t r = rotl(s[0] + s[3], 23) + s[0];
    std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return r;
  }

  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
};

// log n!, table below 1024 and a Stirling series above. Plain arithmetic
// only, no libm lgamma, to keep runs identical across platforms.
double log_factorial(std::int64_t n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(1024);
    t[0] = 0;
    for (std::size_t i = 1; i < t.size(); ++i)
      t[i] = t[i - 1] + std::log(double(i));
    return t;
  }();
  if (n < std::int64_t(table.size())) return table[std::size_t(n)];
  double x = double(n), inv = 1 / x, inv2 = inv * inv;
  return (x + 0.5) * std::log(x) - x + 0.5 * std::log(2 * kPi) +
         inv * (1.0 / 12 - inv2 * (1.0 / 360 - inv2 / 1260));
}

// Poisson draws: Knuth's product method for small means, Hormann's PTRS
// transformed rejection above. Both sample the exact law.
std::int64_t poisson_knuth(Xoshiro& g, double lam) {
  const double limit = std::exp(-lam);
  double prod = 1;
  std::int64_t k = 0;
  do {
    ++k;
    prod *= g.uniform();
  } while (prod > limit);
  return k - 1;
}

std::int64_t poisson_ptrs(Xoshiro& g, double lam) {
  const double loglam = std::log(lam);
  const double b = 0.931 + 2.53 * std::sqrt(lam);
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2);
  for (;;) {
    double u = g.uniform() - 0.5;
    double v = g.uniform();
    double us = 0.5 - std::abs(u);
    if (!(us > 0)) continue;
    double kf = std::floor((2 * a / us + b) * u + lam + 0.43);
    if (us >= 0.07 && v <= vr) return std::int64_t(kf);
    if (kf < 0 || (us < 0.013 && v > us)) continue;
    std::int64_t k = std::int64_t(kf);
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        double(k) * loglam - lam - log_factorial(k))
      return k;
  }
}

std::int64_t poisson(Xoshiro& g, double lam) {
  if (!(lam > 0)) return 0;
  return lam < 10 ? poisson_knuth(g, lam) : poisson_ptrs(g, lam);
}

// ---- tilted measure ----------------------------------------------------

// Lambda * H for integer counts x (densities x / volume). CMF folds
// mu + alpha into the reference weights, so its Hamiltonian is the bare
// squared total; PMF and HYL keep the effective potential here and
// sample against q^(0). Mirrors the rate-function split in model.cpp.
struct TiltCtx {
  Model model = Model::Ideal;
  double beta = 1, volume = 1, mu = 0, a = 0, b = 0;

  static TiltCtx make(const ModelParams& p, double volume) {
    TiltCtx t;
    t.model = p.model;
    t.beta = p.beta;
    t.volume = volume;
    t.a = p.a;
    t.b = p.b;
    if (p.model == Model::PMF || p.model == Model::HYL) t.mu = p.mu_eff();
    return t;
  }

  static double ref_eta(const ModelParams& p) {
    return (p.model == Model::PMF || p.model == Model::HYL) ? 0.0
                                                            : p.mu_eff();
  }

  double lam_h(std::span<const std::int64_t> x) const {
    if (model == Model::Ideal) return 0;
    double C = 0, M = 0, K2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double k = double(i + 1), xi = double(x[i]);
      C += xi;
      M += k * xi;
      K2 += k * k * xi * xi;
    }
    if (model == Model::CMF) return 0.5 * a * C * C / volume;
    double h = -mu * M + 0.5 * a * M * M / volume;
    if (model == Model::HYL) h -= 0.5 * b * K2 / volume;
    return h;
  }

  // Change in Lambda * H for x_k -> x_k + sigma, from the pre-move sums
  // C = sum x_j and M = sum j x_j. Integer sums make this exact, so the
  // chain never needs a drift-correcting recompute.
  double lam_h_delta(double C, double M, std::int64_t xk, std::int64_t k,
                     int sigma) const {
    if (model == Model::Ideal) return 0;
    double s = sigma, kk = double(k);
    if (model == Model::CMF) return 0.5 * a * (2 * C * s + 1) / volume;
    double d = -mu * s * kk + 0.5 * a * (2 * M * s * kk + kk * kk) / volume;
    if (model == Model::HYL)
      d -= 0.5 * b * kk * kk * (2 * double(xk) * s + 1) / volume;
    return d;
  }
};

// Acceptance probability of the move x_k -> x_k + sigma. Reflection maps
// both signs at x_k = 0 onto +1, so q(0 -> 1) = 1 while q(1 -> 0) = 1/2;
// `hast` is the resulting Hastings factor. Used verbatim by the chain and
// by the explicit transition matrix.
double accept_prob(const TiltCtx& t, std::span<const double> lamref, double C,
                   double M, std::int64_t xk, std::int64_t k, int sigma) {
  double hast = 1;
  if (xk == 0) {
    sigma = 1;
    hast = 0.5;
  } else if (xk == 1 && sigma == -1) {
    hast = 2;
  }
  double lam = lamref[std::size_t(k - 1)];
  double ref = sigma > 0 ? lam / (double(xk) + 1) : double(xk) / lam;
  double r = hast * ref * std::exp(-t.beta * t.lam_h_delta(C, M, xk, k, sigma));
  return r < 1 ? r : 1;
}

// ---- per-chain accumulation ---------------------------------------------

// Series layout: 0..k_max-1 hold N_k / V, index k_max the total count
// density, then optionally a ball indicator.
struct SeriesStats {
  std::int64_t n = 0;
  std::vector<double> sum, sumsq;
  std::vector<double> batch_means;  // nb blocks of nseries values
  std::int64_t nb = 0;
  std::int64_t accepted = 0, proposed = 0;
  std::vector<double> hist;
  std::vector<double> joint;
};

struct BallRef {
  const double* center;  // k_max coordinates
  double r2;
};

std::int64_t joint_states(std::int64_t cap, int k_max) {
  std::int64_t n = 1;
  for (int i = 0; i < k_max; ++i) {
    if (n > (std::int64_t(1) << 40) / (cap + 1)) return -1;
    n *= cap + 1;
  }
  return n;
}

void record_extras(const SimConfig& cfg, std::span<const std::int64_t> x,
                   SeriesStats& st) {
  if (cfg.histogram_k > 0) {
    std::int64_t v = x[std::size_t(cfg.histogram_k - 1)];
    if (v >= std::int64_t(st.hist.size()))
      st.hist.resize(std::size_t(v) + 1, 0.0);
    st.hist[std::size_t(v)] += 1;
  }
  if (cfg.joint_cap > 0) {
    std::int64_t idx = 0, mul = 1;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] > cfg.joint_cap) return;
      idx += x[i] * mul;
      mul *= cfg.joint_cap + 1;
    }
    st.joint[std::size_t(idx)] += 1;
  }
}

SeriesStats run_ideal_chain(const SimConfig& cfg,
                            const std::vector<double>& lam,
                            std::uint64_t stream, std::int64_t n,
                            const BallRef* ball) {
  const int K = cfg.k_max;
  const int ns = K + 1 + (ball ? 1 : 0);
  Xoshiro g(cfg.seed, stream);
  SeriesStats st;
  st.sum.assign(std::size_t(ns), 0.0);
  st.sumsq.assign(std::size_t(ns), 0.0);
  if (cfg.joint_cap > 0)
    st.joint.assign(std::size_t(joint_states(cfg.joint_cap, K)), 0.0);
  std::vector<std::int64_t> x(static_cast<std::size_t>(K));
  for (std::int64_t i = 0; i < n; ++i) {
    double tot = 0, d2 = 0;
    for (int k = 0; k < K; ++k) {
      x[std::size_t(k)] = poisson(g, lam[std::size_t(k)]);
      double v = double(x[std::size_t(k)]) / cfg.volume;
      tot += v;
      st.sum[std::size_t(k)] += v;
      st.sumsq[std::size_t(k)] += v * v;
      if (ball) {
        double dv = v - ball->center[k];
        d2 += dv * dv;
      }
    }
    st.sum[std::size_t(K)] += tot;
    st.sumsq[std::size_t(K)] += tot * tot;
    if (ball) {
      double ind = d2 <= ball->r2 ? 1.0 : 0.0;
      st.sum[std::size_t(K + 1)] += ind;
      st.sumsq[std::size_t(K + 1)] += ind;
    }
    record_extras(cfg, x, st);
    ++st.n;
  }
  return st;
}

SeriesStats run_tilted_chain(const SimConfig& cfg, const TiltCtx& t,
                             const std::vector<double>& lamref,
                             std::uint64_t stream, std::int64_t nsw,
                             const BallRef* ball) {
  const int K = cfg.k_max;
  const int ns = K + 1 + (ball ? 1 : 0);
  Xoshiro g(cfg.seed, stream);
  SeriesStats st;
  st.sum.assign(std::size_t(ns), 0.0);
  st.sumsq.assign(std::size_t(ns), 0.0);
  if (cfg.joint_cap > 0)
    st.joint.assign(std::size_t(joint_states(cfg.joint_cap, K)), 0.0);

  std::vector<std::int64_t> x(static_cast<std::size_t>(K));
  double C = 0, M = 0;
  for (int k = 0; k < K; ++k) {
    x[std::size_t(k)] = std::llround(lamref[std::size_t(k)]);
    C += double(x[std::size_t(k)]);
    M += double(k + 1) * double(x[std::size_t(k)]);
  }

  const std::int64_t mb = std::max<std::int64_t>(1, nsw / 64);
  std::vector<double> bacc(std::size_t(ns), 0.0);
  std::int64_t inb = 0;

  for (std::int64_t sweep = -cfg.burn_in; sweep < nsw; ++sweep) {
    for (int prop = 0; prop < K; ++prop) {
      std::int64_t k = 1 + std::int64_t(g.next() % std::uint64_t(K));
      int sigma = (g.next() & 1) ? 1 : -1;
      std::int64_t xk = x[std::size_t(k - 1)];
      double A = accept_prob(t, lamref, C, M, xk, k, sigma);
      double u = g.uniform();
      if (sweep >= 0) ++st.proposed;
      if (u < A) {
        if (xk == 0) sigma = 1;  // same reflection as accept_prob
        x[std::size_t(k - 1)] += sigma;
        C += sigma;
        M += sigma * double(k);
        if (sweep >= 0) ++st.accepted;
      }
    }
    if (sweep < 0) continue;

    double tot = 0, d2 = 0;
    for (int k = 0; k < K; ++k) {
      double v = double(x[std::size_t(k)]) / cfg.volume;
      tot += v;
      st.sum[std::size_t(k)] += v;
      st.sumsq[std::size_t(k)] += v * v;
      bacc[std::size_t(k)] += v;
      if (ball) {
        double dv = v - ball->center[k];
        d2 += dv * dv;
      }
    }
    st.sum[std::size_t(K)] += tot;
    st.sumsq[std::size_t(K)] += tot * tot;
    bacc[std::size_t(K)] += tot;
    if (ball) {
      double ind = d2 <= ball->r2 ? 1.0 : 0.0;
      st.sum[std::size_t(K + 1)] += ind;
      st.sumsq[std::size_t(K + 1)] += ind;
      bacc[std::size_t(K + 1)] += ind;
    }
    record_extras(cfg, x, st);
    ++st.n;
    if (++inb == mb) {  // incomplete last batch is dropped
      for (int s = 0; s < ns; ++s) {
        st.batch_means.push_back(bacc[std::size_t(s)] / double(mb));
        bacc[std::size_t(s)] = 0;
      }
      ++st.nb;
      inb = 0;
    }
  }
  return st;
}

// Deterministic reduction: chains fold in index order no matter which
// thread finished first.
SimEstimate reduce_stats(std::vector<SeriesStats>& parts, const SimConfig& cfg,
                         bool mcmc) {
  const int K = cfg.k_max;
  const int ns = int(parts[0].sum.size());
  SeriesStats tot;
  tot.sum.assign(std::size_t(ns), 0.0);
  tot.sumsq.assign(std::size_t(ns), 0.0);
  for (auto& p : parts) {
    tot.n += p.n;
    tot.accepted += p.accepted;
    tot.proposed += p.proposed;
    tot.nb += p.nb;
    for (int s = 0; s < ns; ++s) {
      tot.sum[std::size_t(s)] += p.sum[std::size_t(s)];
      tot.sumsq[std::size_t(s)] += p.sumsq[std::size_t(s)];
    }
    if (p.hist.size() > tot.hist.size()) tot.hist.resize(p.hist.size(), 0.0);
    for (std::size_t i = 0; i < p.hist.size(); ++i) tot.hist[i] += p.hist[i];
    if (!p.joint.empty()) {
      if (tot.joint.empty()) tot.joint.assign(p.joint.size(), 0.0);
      for (std::size_t i = 0; i < p.joint.size(); ++i)
        tot.joint[i] += p.joint[i];
    }
  }

  const double n = double(tot.n);
  std::vector<double> mean(static_cast<std::size_t>(ns));
  std::vector<double> var(static_cast<std::size_t>(ns));
  for (int s = 0; s < ns; ++s) {
    mean[std::size_t(s)] = tot.sum[std::size_t(s)] / n;
    double v = 0;
    if (tot.n > 1)
      v = (tot.sumsq[std::size_t(s)] -
           n * mean[std::size_t(s)] * mean[std::size_t(s)]) /
          (n - 1);
    var[std::size_t(s)] = v > 0 ? v : 0;
  }

  std::vector<double> se(static_cast<std::size_t>(ns));
  std::vector<double> ess(static_cast<std::size_t>(ns));
  if (!mcmc || tot.nb < 2) {
    for (int s = 0; s < ns; ++s) {
      se[std::size_t(s)] = std::sqrt(var[std::size_t(s)] / n);
      ess[std::size_t(s)] = n;
    }
  } else {
    // batch-means variance of the run mean, pooled over chains
    std::vector<double> bdev(std::size_t(ns), 0.0);
    for (auto& p : parts)
      for (std::int64_t bi = 0; bi < p.nb; ++bi)
        for (int s = 0; s < ns; ++s) {
          double d = p.batch_means[std::size_t(bi * ns + s)] -
                     mean[std::size_t(s)];
          bdev[std::size_t(s)] += d * d;
        }
    const double B = double(tot.nb);
    for (int s = 0; s < ns; ++s) {
      double vmean = bdev[std::size_t(s)] / (B - 1) / B;
      se[std::size_t(s)] = std::sqrt(vmean);
      ess[std::size_t(s)] =
          vmean > 0 ? std::min(var[std::size_t(s)] / vmean, n) : n;
    }
  }

  SimEstimate est;
  est.mean.assign(mean.begin(), mean.begin() + K);
  est.std_error.assign(se.begin(), se.begin() + K);
  est.total_mean = mean[std::size_t(K)];
  est.total_std_error = se[std::size_t(K)];
  est.acceptance_rate =
      tot.proposed ? double(tot.accepted) / double(tot.proposed) : 1.0;
  est.ess = n;
  for (int s = 0; s <= K; ++s)
    est.ess = std::min(est.ess, ess[std::size_t(s)]);
  if (!tot.hist.empty()) {
    est.histogram.resize(tot.hist.size());
    for (std::size_t i = 0; i < tot.hist.size(); ++i)
      est.histogram[i] = tot.hist[i] / n;
  }
  if (!tot.joint.empty()) {
    est.joint_freq.resize(tot.joint.size());
    for (std::size_t i = 0; i < tot.joint.size(); ++i)
      est.joint_freq[i] = tot.joint[i] / n;
  }
  return est;
}

// Certified bound on sum_{k > K} q_k^(eta): first term plus the integral
// of the decreasing summand.
double ref_tail_bound(const WeightSeq& w, double eta, std::int64_t K) {
  double k1 = double(K + 1);
  return w.q(K + 1, eta) + std::exp(w.beta * eta * k1) *
                               std::pow(k1, -0.5 * w.d) * (2.0 / w.d) / w.lat;
}

void validate_cfg(const SimConfig& cfg) {
  cfg.params.validate();
  if (!(cfg.volume > 0) || !std::isfinite(cfg.volume))
    throw DomainError("volume must be positive and finite");
  if (cfg.k_max < 1) throw DomainError("k_max must be >= 1");
  if (cfg.n_samples < 1) throw DomainError("n_samples must be >= 1");
  if (cfg.burn_in < 0) throw DomainError("burn_in must be >= 0");
  if (cfg.histogram_k < 0 || cfg.histogram_k > cfg.k_max)
    throw DomainError("histogram_k must be one of the simulated lengths");
  if (cfg.joint_cap < 0) throw DomainError("joint_cap must be >= 0");
  if (cfg.joint_cap > 0) {
    std::int64_t n = joint_states(cfg.joint_cap, cfg.k_max);
    if (n < 0 || n > 10000000)
      throw DomainError("joint frequency table too large");
  }
}

std::vector<double> ref_means(const WeightSeq& w, double eta, double volume,
                              int k_max) {
  std::vector<double> lam(static_cast<std::size_t>(k_max));
  for (int k = 1; k <= k_max; ++k)
    lam[std::size_t(k - 1)] = volume * w.q(k, eta);
  return lam;
}

// Split n_samples across chains, earlier chains taking the remainder.
std::vector<std::int64_t> chain_split(std::int64_t n, int chains) {
  std::vector<std::int64_t> out(std::size_t(chains), n / chains);
  for (int c = 0; c < int(n % chains); ++c) ++out[std::size_t(c)];
  return out;
}

// ---- exact enumeration helpers -------------------------------------------

std::int64_t table_states(int k_max, std::int64_t n_cap) {
  std::int64_t n = 1;
  for (int i = 0; i < k_max; ++i) {
    if (n > 2000000 / (n_cap + 1) + 1) return -1;
    n *= n_cap + 1;
  }
  return n;
}

// P(Poisson(lam) <= n), summed outward from the in-range mode so the
// recursion never leaves the representable range.
double pois_cdf(double lam, std::int64_t n) {
  if (n < 0) return 0;
  if (!(lam > 0)) return 1;
  std::int64_t m = std::min(n, std::int64_t(lam));
  double pm = std::exp(double(m) * std::log(lam) - lam - log_factorial(m));
  double acc = pm, p = pm;
  for (std::int64_t i = m + 1; i <= n; ++i) {
    p *= lam / double(i);
    acc += p;
    if (p < acc * 1e-20) break;
  }
  p = pm;
  for (std::int64_t i = m; i >= 1; --i) {
    p *= double(i) / lam;
    acc += p;
    if (p < acc * 1e-20) break;
  }
  return acc < 1 ? acc : 1;
}

// sup over count vectors of exp(-beta Lambda H); 1 when H >= 0, the
// completed-square bound otherwise. Infinite only for PMF with a = 0 and
// positive effective potential, where no certificate exists.
double tilt_sup(const ModelParams& p, double volume) {
  if (p.model == Model::Ideal || p.model == Model::CMF) return 1;
  double mu = p.mu_eff();
  if (mu <= 0) return 1;
  double quad = p.model == Model::PMF ? p.a : p.a - p.b;
  if (quad <= 0)
    throw DomainError("tilt unbounded off the table: a = 0 with mu + alpha > 0");
  return std::exp(p.beta * volume * mu * mu / (2 * quad));
}

}  // namespace

SimEstimate sample_ideal(const SimConfig& cfg) {
  validate_cfg(cfg);
  const ModelParams& p = cfg.params;
  if (p.mu_eff() > 0)
    throw DomainError("ideal sampling needs mu + alpha <= 0");
  const WeightSeq w(p);
  const double eta = p.mu_eff();
  const std::vector<double> lam = ref_means(w, eta, cfg.volume, cfg.k_max);

  const int chains = std::max(1, cfg.threads);
  const std::vector<std::int64_t> split = chain_split(cfg.n_samples, chains);
  std::vector<SeriesStats> parts(static_cast<std::size_t>(chains));
  parallel_for(std::size_t(chains), cfg.threads, [&](std::size_t c) {
    parts[c] = run_ideal_chain(cfg, lam, c, split[c], nullptr);
  });
  SimEstimate est = reduce_stats(parts, cfg, false);
  est.tail_bound = ref_tail_bound(w, eta, cfg.k_max);
  return est;
}

SimEstimate sample_tilted(const SimConfig& cfg) {
  validate_cfg(cfg);
  const ModelParams& p = cfg.params;
  if (p.model == Model::Ideal)
    throw DomainError("tilted sampling covers cmf, pmf and hyl");
  const TiltCtx t = TiltCtx::make(p, cfg.volume);
  const double eta = TiltCtx::ref_eta(p);
  const WeightSeq w(p);
  const std::vector<double> lam = ref_means(w, eta, cfg.volume, cfg.k_max);

  const int chains = std::max(1, cfg.threads);
  const std::vector<std::int64_t> split = chain_split(cfg.n_samples, chains);
  std::vector<SeriesStats> parts(static_cast<std::size_t>(chains));
  parallel_for(std::size_t(chains), cfg.threads, [&](std::size_t c) {
    parts[c] = run_tilted_chain(cfg, t, lam, c, split[c], nullptr);
  });
  SimEstimate est = reduce_stats(parts, cfg, true);
  est.tail_bound = ref_tail_bound(w, eta, cfg.k_max);
  return est;
}

std::size_t ExactTable::index(std::span<const std::int64_t> x) const {
  std::size_t idx = 0, mul = 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    idx += std::size_t(x[i]) * mul;
    mul *= std::size_t(n_cap + 1);
  }
  return idx;
}

void ExactTable::decode(std::size_t idx, std::span<std::int64_t> x) const {
  std::size_t dim = std::size_t(n_cap + 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::int64_t(idx % dim);
    idx /= dim;
  }
}

std::vector<double> ExactTable::marginal(int k) const {
  std::size_t dim = std::size_t(n_cap + 1);
  std::vector<double> out(dim, 0.0);
  std::vector<std::int64_t> x(static_cast<std::size_t>(k_max));
  for (std::size_t i = 0; i < prob.size(); ++i) {
    decode(i, x);
    out[std::size_t(x[std::size_t(k - 1)])] += prob[i];
  }
  return out;
}

ExactTable bruteforce_measure(const ModelParams& p, double volume, int k_max,
                              std::int64_t n_cap) {
  p.validate();
  if (!(volume > 0) || !std::isfinite(volume))
    throw DomainError("volume must be positive and finite");
  if (k_max < 1 || k_max > 3)
    throw DomainError("exact enumeration covers k_max in 1..3");
  if (n_cap < 0) throw DomainError("n_cap must be >= 0");
  const std::int64_t n = table_states(k_max, n_cap);
  if (n < 0 || n > 1000000)
    throw DomainError("state space exceeds the enumeration cap");

  const TiltCtx t = TiltCtx::make(p, volume);
  const double eta = TiltCtx::ref_eta(p);
  const WeightSeq w(p);
  const std::vector<double> lam = ref_means(w, eta, volume, k_max);

  // per-coordinate log Poisson pmf
  std::vector<std::vector<double>> lpmf(static_cast<std::size_t>(k_max));
  for (int k = 0; k < k_max; ++k) {
    double l = lam[std::size_t(k)];
    auto& row = lpmf[std::size_t(k)];
    row.resize(static_cast<std::size_t>(n_cap + 1));
    for (std::int64_t v = 0; v <= n_cap; ++v)
      row[std::size_t(v)] =
          v > 0 ? double(v) * std::log(l) - l - log_factorial(v) : -l;
  }

  ExactTable tab;
  tab.k_max = k_max;
  tab.n_cap = n_cap;
  tab.volume = volume;
  tab.prob.resize(static_cast<std::size_t>(n));

  std::vector<double> logw(static_cast<std::size_t>(n));
  double lwmax = -kInf;
  std::vector<std::int64_t> x(static_cast<std::size_t>(k_max));
  for (std::int64_t i = 0; i < n; ++i) {
    tab.decode(std::size_t(i), x);
    double lw = 0;
    for (int k = 0; k < k_max; ++k)
      lw += lpmf[std::size_t(k)][std::size_t(x[std::size_t(k)])];
    if (t.model != Model::Ideal) lw -= t.beta * t.lam_h(x);
    logw[std::size_t(i)] = lw;
    if (lw > lwmax) lwmax = lw;
  }
  double wsum = 0;
  for (std::int64_t i = 0; i < n; ++i)
    wsum += std::exp(logw[std::size_t(i)] - lwmax);

  // weight outside the table: tilt sup times the reference mass out there
  double pout = 1;
  for (int k = 0; k < k_max; ++k) pout *= pois_cdf(lam[std::size_t(k)], n_cap);
  pout = pout < 1 ? 1 - pout : 0;
  const double rabs = tilt_sup(p, volume) * pout;

  double denom = wsum;
  if (rabs > 0) denom += std::exp(std::log(rabs) - lwmax);
  for (std::int64_t i = 0; i < n; ++i)
    tab.prob[std::size_t(i)] = std::exp(logw[std::size_t(i)] - lwmax) / denom;
  tab.tail_bound =
      rabs > 0 ? 1 / (1 + std::exp(lwmax + std::log(wsum) - std::log(rabs)))
               : 0;
  return tab;
}

std::vector<double> mh_transition_matrix(const ModelParams& p, double volume,
                                         int k_max, std::int64_t n_cap) {
  p.validate();
  if (p.model == Model::Ideal)
    throw DomainError("the chain covers cmf, pmf and hyl");
  if (!(volume > 0) || !std::isfinite(volume))
    throw DomainError("volume must be positive and finite");
  if (k_max < 1 || k_max > 3)
    throw DomainError("exact enumeration covers k_max in 1..3");
  const std::int64_t n = table_states(k_max, n_cap);
  if (n < 0 || n > 2048)
    throw DomainError("transition matrix needs at most 2048 states");

  const TiltCtx t = TiltCtx::make(p, volume);
  const WeightSeq w(p);
  const std::vector<double> lam =
      ref_means(w, TiltCtx::ref_eta(p), volume, k_max);

  ExactTable shape;  // only for index/decode
  shape.k_max = k_max;
  shape.n_cap = n_cap;

  std::vector<double> P(std::size_t(n * n), 0.0);
  std::vector<std::int64_t> x(static_cast<std::size_t>(k_max));
  const double pw = 1.0 / (2.0 * k_max);
  for (std::int64_t i = 0; i < n; ++i) {
    shape.decode(std::size_t(i), x);
    double C = 0, M = 0;
    for (int k = 0; k < k_max; ++k) {
      C += double(x[std::size_t(k)]);
      M += double(k + 1) * double(x[std::size_t(k)]);
    }
    for (std::int64_t k = 1; k <= k_max; ++k) {
      std::int64_t xk = x[std::size_t(k - 1)];
      for (int sigma : {1, -1}) {
        double A = accept_prob(t, lam, C, M, xk, k, sigma);
        std::int64_t yk = xk + (xk == 0 ? 1 : sigma);
        P[std::size_t(i * n + i)] += pw * (1 - A);
        if (yk > n_cap) continue;  // accepted flow leaves the table
        std::int64_t j = i + (yk - xk) * (k == 1 ? 1
                               : k == 2 ? (n_cap + 1)
                                        : (n_cap + 1) * (n_cap + 1));
        P[std::size_t(i * n + j)] += pw * A;
      }
    }
  }
  return P;
}

std::vector<RatePoint> empirical_rate(const ModelParams& p,
                                      std::span<const double> volumes,
                                      std::span<const double> center,
                                      double radius, std::int64_t n_samples,
                                      std::int64_t burn_in,
                                      std::uint64_t seed) {
  p.validate();
  if (center.empty()) throw DomainError("ball needs at least one coordinate");
  for (double c : center)
    if (!std::isfinite(c) || c < 0)
      throw DomainError("ball center must be finite and nonnegative");
  if (!(radius > 0) || !std::isfinite(radius))
    throw DomainError("ball radius must be positive");
  if (n_samples < 1) throw DomainError("n_samples must be >= 1");

  const int K = int(center.size());
  const WeightSeq w(p);
  const double eta = TiltCtx::ref_eta(p);
  const double r2 = radius * radius;

  std::vector<RatePoint> out;
  for (double V : volumes) {
    if (!(V > 0) || !std::isfinite(V))
      throw DomainError("volumes must be positive and finite");
    RatePoint rp;
    rp.volume = V;
    const std::vector<double> lam = ref_means(w, eta, V, K);

    double prob = -1, se = 0;
    bool exact = false;

    if (p.model == Model::Ideal) {
      // product Poisson, already normalised: enumerate the bounding box
      std::vector<std::int64_t> lo(static_cast<std::size_t>(K));
      std::vector<std::int64_t> hi(static_cast<std::size_t>(K));
      double states = 1;
      bool empty = false;
      for (int k = 0; k < K; ++k) {
        lo[std::size_t(k)] = std::max<std::int64_t>(
            0, std::int64_t(std::ceil(V * (center[std::size_t(k)] - radius))));
        hi[std::size_t(k)] =
            std::int64_t(std::floor(V * (center[std::size_t(k)] + radius)));
        if (hi[std::size_t(k)] < lo[std::size_t(k)]) empty = true;
        states *= double(hi[std::size_t(k)] - lo[std::size_t(k)] + 1);
      }
      if (empty) {
        prob = 0;
        exact = true;
      } else if (states <= 2e6) {
        std::vector<std::vector<double>> pmf(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) {
          auto& row = pmf[std::size_t(k)];
          row.resize(std::size_t(hi[std::size_t(k)] - lo[std::size_t(k)] + 1));
          double l = lam[std::size_t(k)];
          std::int64_t v0 = lo[std::size_t(k)];
          row[0] = l > 0 ? std::exp(double(v0) * std::log(l) - l -
                                    log_factorial(v0))
                         : (v0 == 0 ? 1.0 : 0.0);
          for (std::size_t j = 1; j < row.size(); ++j)
            row[j] = row[j - 1] * l / double(v0 + std::int64_t(j));
        }
        std::vector<std::int64_t> x(lo);
        double acc = 0;
        for (;;) {
          double d2 = 0, pr = 1;
          for (int k = 0; k < K; ++k) {
            double dv = double(x[std::size_t(k)]) / V - center[std::size_t(k)];
            d2 += dv * dv;
            pr *= pmf[std::size_t(k)]
                     [std::size_t(x[std::size_t(k)] - lo[std::size_t(k)])];
          }
          if (d2 <= r2) acc += pr;
          int k = 0;
          while (k < K && ++x[std::size_t(k)] > hi[std::size_t(k)]) {
            x[std::size_t(k)] = lo[std::size_t(k)];
            ++k;
          }
          if (k == K) break;
        }
        prob = acc;
        exact = true;
      }
    } else if (K <= 3) {
      // need the whole table for the normaliser; grow the cap until the
      // boundary slab is negligible
      std::int64_t cap = 8;
      for (int k = 0; k < K; ++k) {
        double l = lam[std::size_t(k)];
        cap = std::max(cap, std::int64_t(l + 12 * std::sqrt(l) + 20));
        cap = std::max(cap, std::int64_t(V * (center[std::size_t(k)] + radius)) + 1);
      }
      while (table_states(K, cap) > 0 && table_states(K, cap) <= 1000000) {
        ExactTable tab = bruteforce_measure(p, V, K, cap);
        double slab = 0, acc = 0;
        std::vector<std::int64_t> x(static_cast<std::size_t>(K));
        for (std::size_t i = 0; i < tab.prob.size(); ++i) {
          tab.decode(i, x);
          bool atcap = false;
          double d2 = 0;
          for (int k = 0; k < K; ++k) {
            if (x[std::size_t(k)] == cap) atcap = true;
            double dv = double(x[std::size_t(k)]) / V - center[std::size_t(k)];
            d2 += dv * dv;
          }
          if (atcap) slab += tab.prob[i];
          if (d2 <= r2) acc += tab.prob[i];
        }
        if (slab < 1e-10 && tab.tail_bound < 1e-8) {
          prob = acc;
          exact = true;
          break;
        }
        cap *= 2;
      }
    }

    if (!exact) {
      // sampling fallback
      SimConfig cfg;
      cfg.volume = V;
      cfg.k_max = K;
      cfg.n_samples = n_samples;
      cfg.burn_in = burn_in;
      cfg.seed = seed;
      cfg.params = p;
      BallRef ball{center.data(), r2};
      std::vector<SeriesStats> parts(1);
      if (p.model == Model::Ideal) {
        parts[0] = run_ideal_chain(cfg, lam, 0, n_samples, &ball);
      } else {
        const TiltCtx t = TiltCtx::make(p, V);
        parts[0] = run_tilted_chain(cfg, t, lam, 0, n_samples, &ball);
      }
      SeriesStats& st = parts[0];
      const double n = double(st.n);
      prob = st.sum[std::size_t(K + 1)] / n;
      if (st.nb >= 2) {
        double dev = 0;
        for (std::int64_t bi = 0; bi < st.nb; ++bi) {
          double d = st.batch_means[std::size_t(bi * (K + 2) + K + 1)] - prob;
          dev += d * d;
        }
        se = std::sqrt(dev / double(st.nb - 1) / double(st.nb));
      } else {
        se = std::sqrt(std::max(prob * (1 - prob), 0.0) / n);
      }
    }

    if (prob > 0) {
      rp.rate = -std::log(prob) / V;
      rp.rate_std_error = exact ? 0 : se / (prob * V);
    } else {
      rp.rate = kInf;
      rp.zero_mass = true;
    }
    rp.exact = exact;
    out.push_back(rp);
  }
  return out;
}

}  // namespace bosegas
