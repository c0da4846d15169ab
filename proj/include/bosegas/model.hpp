#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bosegas/extreal.hpp"

namespace bosegas {

enum class Model { Ideal, CMF, PMF, HYL };

const char* model_name(Model m);
std::optional<Model> model_from_name(std::string_view s);

// Interacting Bose gas in the cycle-count representation. The pair
// (mu, alpha) only ever enters through mu + alpha, and everything
// downstream reduces to the effective potential mu_eff = mu + alpha.
struct ModelParams {
  Model model = Model::Ideal;
  int d = 3;          // dimension
  double beta = 1.0;  // inverse temperature
  double mu = 0.0;    // chemical potential
  double alpha = 0.0; // reference tilt, <= 0
  double a = 0.0;     // mean-field coupling
  double b = 0.0;     // HYL counterterm coupling, a > b >= 0

  double mu_eff() const { return mu + alpha; }
  void validate() const;  // throws DomainError
};

// The ideal cycle weights q_k^(eta) = e^(beta eta k) / ((4 pi beta)^(d/2) k^(1+d/2))
// and their summed series.
struct WeightSeq {
  int d;
  double beta;
  double lat;  // (4 pi beta)^(d/2)

  WeightSeq(int d_, double beta_);
  explicit WeightSeq(const ModelParams& p);

  double q(std::int64_t k, double eta) const;
  double log_q(std::int64_t k, double eta) const;
  double qbar(double eta) const;      // sum_k q_k, finite for eta <= 0
  double qdensity(double eta) const;  // sum_k k q_k, IEEE +inf for d <= 2, eta = 0
  double qbar_tail(double eta, std::int64_t k_from) const;
  double qdensity_tail(double eta, std::int64_t k_from) const;
};

// A cycle-count sequence: explicit values x_1..x_K plus an analytic tail.
//  Zero   x_k = 0 beyond K
//  Ideal  x_k = tail_scale * q_k^(tail_eta)
//  Hyl    x_k = -W0(-u_k)/(tail_b beta k^2),  u_k = tail_b beta k^2 q_k^(0) e^(beta tail_eta k)
// The Hyl form is what the stationarity equation produces past the head;
// an Ideal tail there would shift densities at the 1e-2 level.
struct CycleCounts {
  std::vector<double> values;

  enum class Tail { Zero, Ideal, Hyl };
  Tail tail = Tail::Zero;
  double tail_eta = 0;
  double tail_scale = 1;  // Ideal only
  double tail_b = 0;      // Hyl only

  std::int64_t k_max() const { return static_cast<std::int64_t>(values.size()); }
  double at(std::int64_t k) const { return values[static_cast<size_t>(k - 1)]; }

  static CycleCounts zeros(std::int64_t k_max);
  static CycleCounts truncated(std::vector<double> v);
  static CycleCounts ideal(const WeightSeq& w, double eta, std::int64_t k_max,
                           double scale = 1);
};

// Tail contributions beyond k_max: S0 = sum x_k, S1 = sum k x_k,
// S2 = sum k^2 x_k^2. S1 and S2 may be IEEE +inf in dimensions <= 2.
struct TailSums {
  double S0 = 0, S1 = 0, S2 = 0;
};
TailSums tail_sums(const WeightSeq& w, const CycleCounts& x);
// S1 alone, skipping the other two sums. Iterative solvers call this in
// their inner loop, where the full bundle costs three times as much.
double tail_density(const WeightSeq& w, const CycleCounts& x);

ExtReal density(const WeightSeq& w, const CycleCounts& x);     // sum k x_k
double total_count(const WeightSeq& w, const CycleCounts& x);  // sum x_k
double sum_k2x2(const WeightSeq& w, const CycleCounts& x);     // sum k^2 x_k^2

// Interaction energy per volume. Raw version; PMF and HYL use the
// effective potential mu + alpha.
ExtReal hamiltonian(const ModelParams& p, const CycleCounts& x);
// Lower-semicontinuous regularisation (subtracts the positive-part
// square correction for PMF and HYL; identity for Ideal and CMF).
ExtReal hamiltonian_lsc(const ModelParams& p, const CycleCounts& x);

// Relative-entropy rate functional against the weights q^(mu):
//   I_mu(x) = sum_k x_k (log(x_k / q_k^(mu)) - 1) + qbar(mu),
// with 0 log 0 = 0, +inf off [0,inf)^N. Requires mu <= 0.
ExtReal rate_ideal(const WeightSeq& w, const CycleCounts& x, double mu);
ExtReal rate_ideal(const ModelParams& p, const CycleCounts& x);

// Full model rate function: I + beta H(_lsc) - normalizer. CMF keeps the
// potential in the reference weights (I_mu_eff + beta H); PMF and HYL move
// it into the Hamiltonian (I_0 + beta H_lsc).
ExtReal rate_model(const ModelParams& p, const CycleCounts& x,
                   double normalizer);

// Log moment generating function of the cycle counts under the ideal
// weights, sequence-tilt version: sum_k q_k^(mu_eff) (e^(t_k) - 1).
double cumulant_seq(const ModelParams& p, std::span<const double> t);

// Density-tilt version: sum_k q_k^(mu_eff) (e^(t k) - 1); +inf for
// t > -beta mu_eff, finite at the boundary.
ExtReal cumulant_density(const ModelParams& p, double t);

}  // namespace bosegas
