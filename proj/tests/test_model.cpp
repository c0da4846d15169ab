#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bosegas/errors.hpp"
#include "bosegas/model.hpp"
#include "bosegas/specfun.hpp"
#include "reference_values.hpp"

using namespace bosegas;

namespace {
const double kBnorm = 1.0 / (4 * 3.14159265358979323846);

double rel(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// the Hyl-form coordinate used by the analytic tail, spelled out locally
double hyl_coord(const WeightSeq& w, double b, double eta, std::int64_t k) {
  double u = b * w.beta * double(k) * double(k) * w.q(k, 0.0) *
             std::exp(w.beta * eta * double(k));
  return -lambert_w(WBranch::Principal, -u) / (b * w.beta * double(k) * double(k));
}
}  // namespace

TEST_CASE("cycle weights match the closed form and their summed series") {
  WeightSeq w(3, 1.0);
  CHECK(rel(w.q(2, -1.0), refvals::q_d3_b1_em1_k2) <= 1e-15);
  CHECK(rel(w.q(5, -0.3),
            std::exp(-0.3 * 5) / (w.lat * std::pow(5.0, 2.5))) <= 1e-15);
  CHECK(rel(std::exp(w.log_q(7, -0.2)), w.q(7, -0.2)) <= 1e-14);

  WeightSeq w2(3, 0.1);
  CHECK(rel(w2.qbar(-0.7), refvals::qbar_d3_beta01_em07) <= 1e-14);
  CHECK(rel(w2.qdensity(-0.7), refvals::qdens_d3_beta01_em07) <= 1e-14);
  // qbar is the Bose sum at shifted order
  CHECK(rel(w2.qbar(-0.7), bose_g_finite(2.5, 0.7 * w2.beta) / w2.lat) <=
        1e-14);
  CHECK(rel(w2.qdensity(-0.7), bose_g_finite(1.5, 0.7 * w2.beta) / w2.lat) <=
        1e-14);

  // head + analytic tail reassembles the full series exactly
  for (double eta : {-0.4, 0.0}) {
    double head = 0;
    for (int k = 1; k < 50; ++k) head += w.q(k, eta);
    CHECK(rel(head + w.qbar_tail(eta, 50), w.qbar(eta)) <= 1e-14);
  }
  // divergence channel in low dimension
  WeightSeq wl(2, 1.0);
  CHECK(std::isinf(wl.qdensity(0.0)));
  CHECK(std::isfinite(wl.qbar(0.0)));
}

TEST_CASE("the ideal reference sequence has zero rate and known density") {
  WeightSeq w(3, 1.0);
  for (double mu : {-1.0, -0.1, 0.0}) {
    CycleCounts x = CycleCounts::ideal(w, mu, 64);
    CHECK(std::abs(rate_ideal(w, x, mu).value()) <= 1e-12);
    CHECK(rel(density(w, x).value(), w.qdensity(mu)) <= 1e-12);
    CHECK(rel(total_count(w, x), w.qbar(mu)) <= 1e-12);
  }
  // any other admissible sequence pays a positive rate
  CycleCounts y = CycleCounts::ideal(w, -0.5, 64, 1.3);
  CHECK(rate_ideal(w, y, -0.5).value() > 0);
  // negative coordinates are off the domain
  CycleCounts z = CycleCounts::truncated({0.5, -0.1});
  CHECK(rate_ideal(w, z, -0.5).is_inf());
}

TEST_CASE("hyl tail sums match brute force") {
  for (double eta : {-0.2, -0.01}) {
    for (double beta : {1.0, kBnorm}) {
      WeightSeq w(3, beta);
      const double b = 1.0;
      CycleCounts x = CycleCounts::zeros(30);
      x.tail = CycleCounts::Tail::Hyl;
      x.tail_eta = eta;
      x.tail_b = b;
      TailSums t = tail_sums(w, x);
      double S0 = 0, S1 = 0, S2 = 0;
      for (long k = 31;; ++k) {
        double xk = hyl_coord(w, b, eta, k);
        if (!(xk > 1e-320)) break;
        S0 += xk;
        S1 += double(k) * xk;
        S2 += double(k) * double(k) * xk * xk;
      }
      CAPTURE(eta);
      CAPTURE(beta);
      CHECK(rel(t.S0, S0) <= 1e-10);
      CHECK(rel(t.S1, S1) <= 1e-10);
      CHECK(rel(t.S2, S2) <= 1e-10);
      CHECK(rel(tail_density(w, x), S1) <= 1e-10);
    }
  }
}

TEST_CASE("head length does not move full-sequence functionals") {
  WeightSeq w(3, 1.0);
  const double b = 1.0, eta = -0.05, mu = -0.3;
  auto build = [&](std::int64_t K) {
    CycleCounts x = CycleCounts::zeros(K);
    for (std::int64_t k = 1; k <= K; ++k)
      x.values[std::size_t(k - 1)] = hyl_coord(w, b, eta, k);
    x.tail = CycleCounts::Tail::Hyl;
    x.tail_eta = eta;
    x.tail_b = b;
    return x;
  };
  CycleCounts xa = build(40), xb = build(400);
  CHECK(rel(rate_ideal(w, xa, mu).value(), rate_ideal(w, xb, mu).value()) <=
        1e-12);
  CHECK(rel(density(w, xa).value(), density(w, xb).value()) <= 1e-12);
  CHECK(rel(sum_k2x2(w, xa), sum_k2x2(w, xb)) <= 1e-12);
  CHECK(rel(total_count(w, xa), total_count(w, xb)) <= 1e-12);
}

TEST_CASE("hamiltonians and the lsc regularisation") {
  CycleCounts x = CycleCounts::truncated({0.3, 0.1});
  WeightSeq w3(3, 1.0);
  double D = density(w3, x).value();       // 0.3 + 2*0.1
  double S = total_count(w3, x);           // 0.4
  double Q = sum_k2x2(w3, x);              // 0.09 + 4*0.01

  ModelParams p;
  p.d = 3;
  p.beta = 1.0;

  p.model = Model::Ideal;
  p.mu = -0.2;
  CHECK(hamiltonian(p, x).value() == 0.0);
  CHECK(hamiltonian_lsc(p, x) == hamiltonian(p, x));

  p.model = Model::CMF;
  p.a = 1.4;
  CHECK(rel(hamiltonian(p, x).value(), 0.5 * 1.4 * S * S) <= 1e-15);
  CHECK(hamiltonian_lsc(p, x) == hamiltonian(p, x));

  p.model = Model::PMF;
  p.mu = 0.9;  // above a D: the lsc correction bites
  p.a = 1.0;
  double H = -0.9 * D + 0.5 * D * D;
  CHECK(rel(hamiltonian(p, x).value(), H) <= 1e-15);
  double gap = 0.9 - D;
  CHECK(rel(hamiltonian_lsc(p, x).value(), H - gap * gap / 2) <= 1e-15);
  p.mu = 0.2;  // below a D: nothing to regularise
  CHECK(hamiltonian_lsc(p, x) == hamiltonian(p, x));

  p.model = Model::HYL;
  p.mu = 0.9;
  p.a = 1.0;
  p.b = 0.4;
  double Hh = -0.9 * D + 0.5 * D * D - 0.5 * 0.4 * Q;
  CHECK(rel(hamiltonian(p, x).value(), Hh) <= 1e-15);
  CHECK(rel(hamiltonian_lsc(p, x).value(), Hh - gap * gap / (2 * (1.0 - 0.4))) <=
        1e-15);
}

TEST_CASE("rate_model assembles rate plus interaction") {
  WeightSeq w(3, 1.0);
  CycleCounts x = CycleCounts::ideal(w, -0.6, 48, 0.8);

  ModelParams p;
  p.d = 3;
  p.beta = 1.0;
  p.mu = -0.1;
  p.alpha = -0.3;

  p.model = Model::CMF;
  p.a = 0.7;
  double want = rate_ideal(w, x, p.mu_eff()).value() +
                p.beta * hamiltonian(p, x).value();
  CHECK(rel(rate_model(p, x, 0.0).value(), want) <= 1e-13);

  p.model = Model::HYL;
  p.a = 0.7;
  p.b = 0.2;
  want = rate_ideal(w, x, 0.0).value() + p.beta * hamiltonian_lsc(p, x).value();
  CHECK(rel(rate_model(p, x, 0.0).value(), want) <= 1e-13);
  // the normalizer just shifts
  CHECK(rel(rate_model(p, x, 2.5).value(), want - 2.5) <= 1e-13);
}

TEST_CASE("cumulant generating functions") {
  ModelParams p;
  p.model = Model::Ideal;
  p.d = 3;
  p.beta = 1.0;
  p.mu = -0.4;
  WeightSeq w(p);

  std::vector<double> t = {0.3, -0.2, 0.05};
  double direct = 0;
  for (int k = 1; k <= 3; ++k)
    direct += w.q(k, -0.4) * std::expm1(t[std::size_t(k - 1)]);
  CHECK(rel(cumulant_seq(p, t), direct) <= 1e-14);

  // density tilt: finite strictly below and exactly at the boundary slope
  double tb = -p.beta * p.mu_eff();
  CHECK(cumulant_density(p, 0.5 * tb).is_finite());
  CHECK(cumulant_density(p, tb).is_finite());
  CHECK(cumulant_density(p, tb + 1e-6).is_inf());
  // at the boundary the sum telescopes to qbar(0) - qbar(mu_eff)
  CHECK(rel(cumulant_density(p, tb).value(), w.qbar(0) - w.qbar(-0.4)) <=
        1e-12);
}

TEST_CASE("parameter validation") {
  ModelParams p;
  p.d = 3;
  p.beta = 1.0;

  p.model = Model::Ideal;
  p.mu = 0.1;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p.mu = 0.1;
  p.alpha = -0.2;  // mu_eff < 0 is fine even with mu > 0
  CHECK_NOTHROW(p.validate());
  p.alpha = 0.2;  // positive tilt never is
  CHECK_THROWS_AS(p.validate(), DomainError);

  p.model = Model::PMF;
  p.mu = 3.0;
  p.alpha = 0.0;
  p.a = 1.0;
  CHECK_NOTHROW(p.validate());
  p.a = -0.5;
  CHECK_THROWS_AS(p.validate(), DomainError);

  p.model = Model::HYL;
  p.a = 1.0;
  p.b = 1.0;  // needs a > b
  CHECK_THROWS_AS(p.validate(), DomainError);
  p.b = 0.3;
  CHECK_NOTHROW(p.validate());
}
