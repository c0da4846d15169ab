#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bosegas/errors.hpp"
#include "bosegas/minimize.hpp"
#include "bosegas/specfun.hpp"
#include "reference_values.hpp"

using namespace bosegas;

namespace {
const double kBnorm = 1.0 / (4 * 3.14159265358979323846);

double rel(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}
}  // namespace

TEST_CASE("ideal zero is the reference sequence") {
  ModelParams p;
  p.model = Model::Ideal;
  p.d = 3;
  p.beta = kBnorm;
  p.mu = -0.7;
  MinimizerSolution s = zero_ideal(p);
  CHECK(std::abs(s.objective) <= 1e-12);
  CHECK(rel(s.density, WeightSeq(p).qdensity(-0.7)) <= 1e-13);
  CHECK(s.unique);
  CHECK(s.residual == 0.0);
  CHECK(rel(s.xi.at(1), WeightSeq(p).q(1, -0.7)) <= 1e-15);
}

TEST_CASE("cmf zero: lambert form, closed-form objective, frozen oracle") {
  ModelParams p;
  p.model = Model::CMF;
  p.d = 3;
  p.beta = kBnorm;
  p.mu = -0.5;
  p.a = 2.0;
  MinimizerSolution s = zero_cmf(p);
  WeightSeq w(p);

  double K = p.a * p.beta * w.qbar(-0.5);
  CHECK(rel(K, refvals::cmf_K_d3_bnorm_a2_mum05) <= 1e-14);
  CHECK(rel(s.cmf_total.value(), refvals::cmf_gamma_d3_bnorm_a2_mum05) <=
        1e-13);

  double W = lambert_w(WBranch::Principal, K);
  CHECK(rel(s.cmf_scale.value(), W / K) <= 1e-13);
  CHECK(rel(s.objective, (K - W - W * W / 2) / (p.a * p.beta)) <= 1e-13);
  CHECK(s.residual <= 1e-12);
  // a uniform rescale of the reference weights
  CHECK(rel(s.xi.at(3), s.cmf_scale.value() * w.q(3, -0.5)) <= 1e-14);
  // coupling off: plain ideal zero
  ModelParams p0 = p;
  p0.a = 0;
  MinimizerSolution s0 = zero_cmf(p0);
  CHECK(rel(s0.cmf_scale.value(), 1.0) <= 1e-15);
  CHECK(std::abs(s0.objective) <= 1e-12);
}

TEST_CASE("pmf zero: frozen oracle, plateau, monotonicity") {
  ModelParams p;
  p.model = Model::PMF;
  p.d = 3;
  p.beta = kBnorm;
  p.a = 1.0;
  p.mu = 0.5;
  MinimizerSolution s = zero_pmf(p);
  CHECK(rel(s.delta_star.value(), refvals::pmf_delta_d3_bnorm_a1_mu05) <=
        1e-13);
  CHECK(s.residual <= 1e-12);
  CHECK(std::abs(s.density - s.delta_star.value()) <= 1e-10);
  CHECK_FALSE(s.plateau);

  // supercritical: delta pinned at the critical density, xi untilted
  p.mu = 5.0;
  MinimizerSolution sc = zero_pmf(p);
  WeightSeq w(p);
  CHECK(sc.plateau);
  CHECK(rel(sc.delta_star.value(), refvals::zeta_3_2 / w.lat) <= 1e-13);
  CHECK(rel(sc.xi.at(1), w.q(1, 0.0)) <= 1e-14);

  // delta* grows with mu
  double prev = -1;
  for (double mu : {-1.0, -0.3, 0.2, 0.8, 1.4}) {
    p.mu = mu;
    double d = zero_pmf(p).delta_star.value();
    CHECK(d > prev);
    prev = d;
  }

  // unbounded configuration is refused
  ModelParams bad = p;
  bad.a = 0;
  bad.mu = 0.5;
  CHECK_THROWS_AS(zero_pmf(bad), DomainError);
}

TEST_CASE("find_zero dispatches on the model tag") {
  ModelParams p;
  p.d = 3;
  p.beta = kBnorm;
  p.mu = -0.5;
  p.a = 2.0;
  p.model = Model::CMF;
  CHECK(find_zero(p).objective == zero_cmf(p).objective);
  p.model = Model::PMF;
  p.mu = 0.5;
  p.a = 1.0;
  CHECK(find_zero(p).objective == zero_pmf(p).objective);
}

TEST_CASE("hyl: coupling threshold and the unique far-subcritical zero") {
  CHECK(rel(hyl_beta_star(3, 1.0), refvals::hyl_beta_star_d3_b1) <= 1e-13);

  ModelParams p;
  p.model = Model::HYL;
  p.d = 3;
  p.a = 2.0;
  p.b = 1.0;
  p.beta = 1.5 * hyl_beta_star(3, 1.0);
  p.mu = -50.0;
  std::vector<MinimizerSolution> sols = hyl_solutions(p);
  REQUIRE(sols.size() == 1);
  CHECK(rel(sols[0].delta_star.value(), refvals::hyl_delta_d3_b1_a2_mum50) <=
        1e-12);
  CHECK(sols[0].residual <= 1e-10);
  CHECK(sols[0].unique);
  CHECK(zero_hyl(p).objective == sols[0].objective);
}

TEST_CASE("hyl: three solutions between the folds, merged pair at mu_bar") {
  ModelParams p;
  p.model = Model::HYL;
  p.d = 3;
  p.a = 2.0;
  p.b = 1.0;
  p.beta = hyl_beta_star(3, 1.0);
  SolveOptions o;
  o.k_max = 128;
  o.hyl_s_max = 0;

  double mubar = hyl_mu_bar(p);
  CHECK(rel(mubar, p.a * hyl_kink_density(p)) <= 1e-15);

  p.mu = 500.0;  // inside the coexistence window
  std::vector<MinimizerSolution> sols = hyl_solutions(p, o);
  REQUIRE(sols.size() == 3);
  // sorted by objective, none of them tol-degenerate here
  CHECK(sols[0].objective <= sols[1].objective);
  CHECK(sols[1].objective <= sols[2].objective);
  for (const auto& s : sols) CHECK(s.residual <= 1e-9 * (1 + s.delta_star.value()));

  // exactly at mu_bar two branches merge at the kink density
  p.mu = mubar;
  std::vector<MinimizerSolution> ms = hyl_solutions(p, o);
  REQUIRE(ms.size() >= 2);
  double kink = hyl_kink_density(p);
  double best_gap = 1e300;
  for (const auto& s : ms)
    best_gap = std::min(best_gap, std::abs(s.delta_star.value() - kink));
  CHECK(best_gap <= 1e-6 * kink);
}

TEST_CASE("hyl solutions dodge the domain gaps below the threshold") {
  ModelParams p;
  p.model = Model::HYL;
  p.d = 3;
  p.a = 2.0;
  p.b = 1.0;
  p.beta = 0.7 * hyl_beta_star(3, 1.0);
  p.mu = 450.0;
  SolveOptions o;
  o.k_max = 128;
  o.hyl_s_max = 0;

  std::vector<HylDomainGap> gaps = hyl_domain_gaps(p);
  REQUIRE_FALSE(gaps.empty());
  std::vector<MinimizerSolution> sols = hyl_solutions(p, o);
  REQUIRE_FALSE(sols.empty());
  for (const auto& s : sols) {
    double d = s.delta_star.value();
    for (const auto& g : gaps) CHECK((d <= g.delta_lo || d >= g.delta_hi));
    CHECK(s.residual <= 1e-9 * (1 + d));
  }
}

TEST_CASE("family scan: folds bracket the count changes, switch in window") {
  ModelParams p;
  p.model = Model::HYL;
  p.d = 3;
  p.a = 2.0;
  p.b = 1.0;
  p.beta = hyl_beta_star(3, 1.0);
  SolveOptions o;
  o.k_max = 128;
  o.hyl_s_max = 0;

  double mubar = hyl_mu_bar(p);
  FamilyScan scan = hyl_family_scan(p, 0.25 * mubar, 1.03 * mubar, 61, o, 2);
  REQUIRE(scan.folds.size() == 2);
  for (const FoldEvent& f : scan.folds) {
    CHECK(std::abs(f.count_after - f.count_before) == 2);
    CHECK(f.mu_after > f.mu_before);
  }
  // pressure switches branch strictly inside the coexistence window
  REQUIRE(scan.branch_switch_mu.has_value());
  CHECK(*scan.branch_switch_mu > scan.folds[0].mu_before);
  CHECK(*scan.branch_switch_mu < scan.folds[1].mu_after);

  // coexisting-solution counts per grid point peak at exactly 3
  int worst = 0, run = 0;
  double run_mu = -1e300;
  for (const FamilyPoint& fp : scan.points) {
    run = (fp.mu == run_mu) ? run + 1 : 1;
    run_mu = fp.mu;
    if (run > worst) worst = run;
  }
  CHECK(worst == 3);

  CHECK_THROWS_AS(hyl_family_scan(p, 100.0, 200.0, 1, o), DomainError);
}

TEST_CASE("tail toggle barely moves a strongly subcritical solve") {
  ModelParams p;
  p.model = Model::PMF;
  p.d = 3;
  p.beta = 1.0;
  p.a = 0.8;
  p.mu = -2.0;
  SolveOptions with;
  SolveOptions without;
  without.use_tail = false;
  double a = zero_pmf(p, with).delta_star.value();
  double b = zero_pmf(p, without).delta_star.value();
  CHECK(rel(a, b) <= 1e-10);
}
