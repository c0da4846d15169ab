#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bosegas/model.hpp"

namespace bosegas {

struct SolveOptions {
  std::int64_t k_max = 4096;  // stored head length of returned sequences
  bool use_tail = true;       // false: truncate every consistency sum at k_max
  double tol = 1e-13;         // relative tolerance for fixed-point solves
  int hyl_j_max = 8;          // lower-branch candidates live on 1..j_max
  int hyl_s_max = 2;          // at most this many lower-branch indices at once
  int scan_points = 320;      // base grid for the HYL fixed-point scan
};

// A zero of the rate function (or a stationary candidate, for HYL where
// several coexist).
struct MinimizerSolution {
  CycleCounts xi;
  double objective = 0;  // rate functional at xi, no normalizer
  double density = 0;    // sum k xi_k; IEEE +inf when the series diverges
  double residual = 0;   // self-consistency defect of the solve
  bool unique = true;
  bool plateau = false;                    // PMF: delta pinned at the critical density
  std::optional<double> delta_star;        // PMF/HYL consistency density
  std::vector<std::int64_t> lower_branch;  // HYL: indices on the lower W branch
  std::optional<double> cmf_total;         // CMF: total cycle count
  std::optional<double> cmf_scale;         // CMF: uniform scale W0(K)/K
};

MinimizerSolution zero_ideal(const ModelParams& p, const SolveOptions& o = {});
MinimizerSolution zero_cmf(const ModelParams& p, const SolveOptions& o = {});
MinimizerSolution zero_pmf(const ModelParams& p, const SolveOptions& o = {});

// All HYL stationary sequences found by enumerating lower-branch patterns
// (at most s_max flips among indices 1..j_max) and solving each pattern's
// consistency equation. Sorted by objective, ties by density.
std::vector<MinimizerSolution> hyl_solutions(const ModelParams& p,
                                             const SolveOptions& o = {});

// delta intervals where mode j leaves the domain of the W branches
// (b beta j^2 q_j^0 e^{beta j eta(delta)} > 1/e). Empty above beta_star.
struct HylDomainGap {
  std::int64_t j;
  double delta_lo, delta_hi;
};
std::vector<HylDomainGap> hyl_domain_gaps(const ModelParams& p,
                                          std::int64_t j_max = 8);
// The minimizing HYL solution (front of hyl_solutions).
MinimizerSolution zero_hyl(const ModelParams& p, const SolveOptions& o = {});

// Dispatch on p.model.
MinimizerSolution find_zero(const ModelParams& p, const SolveOptions& o = {});

// Coupling threshold (b^2 e^2 / (4 pi)^d)^(1/(d-2)) above which the HYL
// consistency map is defined through the kink; d >= 3.
double hyl_beta_star(int d, double b);

// Value of the HYL consistency map at the kink delta = mu_eff/a. It does
// not depend on mu, and exists for d >= 3, beta >= beta_star. p.mu ignored.
double hyl_kink_density(const ModelParams& p);

// mu at which the two upper solution branches merge at the kink:
// mu_bar = a * hyl_kink_density. p.mu ignored.
double hyl_mu_bar(const ModelParams& p);

// One sample of one solution family at one grid mu.
struct FamilyPoint {
  double mu = 0;
  int family = 0;       // stable id, assigned in order of first appearance
  double delta = 0;     // consistency density of the solution
  double density = 0;
  double pressure = 0;  // candidate p(beta,0) - objective/beta
  double objective = 0;
  std::vector<std::int64_t> lower_branch;
};

// A change in the number of coexisting solutions between neighbouring
// grid points; brackets a fold of the consistency map.
struct FoldEvent {
  double mu_before = 0, mu_after = 0;
  int count_before = 0, count_after = 0;
};

struct FamilyScan {
  std::vector<FamilyPoint> points;  // ascending mu, then ascending delta
  std::vector<FoldEvent> folds;
  // Smallest grid mu where the family of maximal pressure changes; the
  // pressure is not differentiable somewhere in the preceding grid cell.
  std::optional<double> branch_switch_mu;
  std::vector<std::string> warnings;  // ambiguous continuation steps
};

// Solve the HYL consistency system on a uniform mu grid and join the
// solutions into families by nearest-delta continuation. p.mu and p.alpha
// are ignored; the grid supplies the effective potential. The per-grid
// solves are independent and spread over `threads`; the continuation pass
// is sequential, so results do not depend on the thread count.
FamilyScan hyl_family_scan(const ModelParams& p, double mu_lo, double mu_hi,
                           int n_points, const SolveOptions& o = {},
                           int threads = 1);
FamilyScan hyl_family_scan_grid(const ModelParams& p,
                                std::span<const double> mu_grid,
                                const SolveOptions& o = {}, int threads = 1);

}  // namespace bosegas
