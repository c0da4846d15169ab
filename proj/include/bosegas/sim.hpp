#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bosegas/model.hpp"

namespace bosegas {

// Monte Carlo configuration. The model tag inside params picks the
// reference weights and the tilt; volume only enters through the Poisson
// means volume * q_k and the Hamiltonian scale, so it is a free positive
// real rather than a box side length.
struct SimConfig {
  double volume = 1.0;
  int k_max = 16;  // counts are truncated to cycle lengths 1..k_max
  std::int64_t n_samples = 100000;
  std::int64_t burn_in = 10000;  // MCMC sweeps discarded up front
  std::uint64_t seed = 1;
  int threads = 1;  // independent chains, one per thread
  ModelParams params;

  // Optional extras, off by default. histogram_k collects the empirical
  // pmf of N_k for that single k; joint_cap collects frequencies of whole
  // count vectors with all entries <= joint_cap (k_max <= 3 only), indexed
  // like ExactTable below.
  int histogram_k = 0;
  std::int64_t joint_cap = 0;
};

// Empirical summary of one run. Same seed and config reproduce this bit
// for bit: the generator, the Poisson sampler and the reductions are all
// our own fixed arithmetic, with chains merged in index order.
struct SimEstimate {
  std::vector<double> mean;       // per length k: mean of N_k / volume
  std::vector<double> std_error;  // per length k; batch means for MCMC
  double total_mean = 0;          // mean of sum_k N_k / volume
  double total_std_error = 0;
  double acceptance_rate = 1.0;  // MCMC only; direct sampling reports 1
  double ess = 0;                // effective sample size, min over lengths
  double tail_bound = 0;         // certified reference mass beyond k_max
  std::vector<double> histogram;   // pmf of N_{histogram_k}, if requested
  std::vector<double> joint_freq;  // per-state frequencies, if requested
};

// Independent draws N_k ~ Poisson(volume q_k^(mu_eff)), k = 1..k_max.
// Requires mu + alpha <= 0. burn_in is ignored; tail_bound certifies the
// reference cycle density that the truncation drops.
SimEstimate sample_ideal(const SimConfig& cfg);

// Metropolis-Hastings on integer count vectors targeting the tilted
// measure exp(-beta Lambda H) d(reference). Proposals move one uniformly
// chosen coordinate by +-1 and reflect at zero; the boundary makes the
// proposal asymmetric (q(0 -> 1) = 1 against q(1 -> 0) = 1/2) and the
// acceptance ratio carries that factor, so detailed balance is exact.
// CMF keeps mu + alpha in the reference weights with the bare squared
// total as Hamiltonian; PMF and HYL sample against q^(0) and put the
// effective potential inside H. One sample = one sweep of k_max proposals.
SimEstimate sample_tilted(const SimConfig& cfg);

// Exact law of the truncated count vector, every entry capped at n_cap.
// Probabilities are normalised against the table weight plus a certified
// bound on the weight outside, so they sum to 1 - tail_bound and each
// entry is exact-or-lower within that bound.
struct ExactTable {
  int k_max = 0;
  std::int64_t n_cap = 0;
  double volume = 0;
  std::vector<double> prob;  // mixed radix, x_1 fastest; see index()
  double tail_bound = 0;     // mass outside the table, upper bound

  std::size_t size() const { return prob.size(); }
  std::size_t index(std::span<const std::int64_t> x) const;
  void decode(std::size_t idx, std::span<std::int64_t> x) const;
  std::vector<double> marginal(int k) const;  // law of N_k within the table
};

ExactTable bruteforce_measure(const ModelParams& p, double volume, int k_max,
                              std::int64_t n_cap);

// Single-proposal transition matrix of the sample_tilted chain over the
// (n_cap+1)^k_max table states, row major. Shares the proposal and
// acceptance arithmetic with the chain, so pi_i P_ij = pi_j P_ji holds
// against bruteforce_measure to machine precision. Rows at the cap sum
// to less than one: accepted moves past n_cap leave the table.
std::vector<double> mh_transition_matrix(const ModelParams& p, double volume,
                                         int k_max, std::int64_t n_cap);

// Finite-volume rate estimate -log P(ball) / volume for a Euclidean ball
// around `center` in the density coordinates (N_1/V, ..., N_K/V) with
// K = center.size(). Exact enumeration when the relevant state space is
// small, otherwise sampling; zero estimated mass is flagged rather than
// silently reported as an infinite rate estimate.
struct RatePoint {
  double volume = 0;
  double rate = 0;            // +inf when zero_mass
  double rate_std_error = 0;  // 0 for exact enumeration
  bool zero_mass = false;
  bool exact = false;
};

std::vector<RatePoint> empirical_rate(const ModelParams& p,
                                      std::span<const double> volumes,
                                      std::span<const double> center,
                                      double radius,
                                      std::int64_t n_samples = 200000,
                                      std::int64_t burn_in = 20000,
                                      std::uint64_t seed = 1);

}  // namespace bosegas
