#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bosegas/minimize.hpp"
#include "bosegas/thermo.hpp"
#include "reference_values.hpp"

using namespace bosegas;

namespace {
const double kBnorm = 1.0 / (4 * 3.14159265358979323846);

double rel(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}
}  // namespace

TEST_CASE("pressures and derivatives at pinned points") {
  ModelParams id;
  id.model = Model::Ideal;
  id.d = 3;
  id.beta = kBnorm;
  id.mu = 0;
  CHECK(rel(pressure(id), refvals::pressure_ideal_d3_bnorm_mu0) <= 1e-14);
  id.mu = -0.7;
  CHECK(rel(dpressure_dmu(id).value(), WeightSeq(id).qdensity(-0.7)) <= 1e-15);

  ModelParams pm;
  pm.model = Model::PMF;
  pm.d = 3;
  pm.beta = kBnorm;
  pm.mu = 0.5;
  pm.a = 1;
  CHECK(rel(pressure(pm), refvals::pmf_pressure_d3_bnorm_a1_mu05) <= 1e-13);
  CHECK(rel(dpressure_dmu(pm).value(), refvals::pmf_delta_d3_bnorm_a1_mu05) <=
        1e-13);

  ModelParams cm;
  cm.model = Model::CMF;
  cm.d = 3;
  cm.beta = kBnorm;
  cm.mu = -0.5;
  cm.a = 2;
  CHECK(rel(pressure(cm), refvals::cmf_pressure_d3_bnorm_a2_mum05) <= 1e-14);
}

TEST_CASE("free energy: frozen point, duality, condensation plateau") {
  ModelParams p;
  p.model = Model::Ideal;
  p.d = 3;
  p.beta = kBnorm;
  p.mu = 0;

  FreeEnergyPoint pt = free_energy(p, 1.0);
  CHECK(rel(pt.maximizing_alpha, refvals::fe_alpha_d3_bnorm_rho1) <= 1e-13);
  CHECK(rel(pt.f, refvals::fe_value_d3_bnorm_rho1) <= 1e-13);
  CHECK_FALSE(pt.saturated);

  double rc = critical_density(p).value();
  CHECK(rel(rc, refvals::zeta_3_2) <= 1e-14);  // lat = 1 at this beta

  // constant above the critical density, equal to -p(0)
  FreeEnergyPoint plat1 = free_energy(p, rc * 1.2);
  FreeEnergyPoint plat2 = free_energy(p, rc * 1.9);
  CHECK(rel(plat1.f, plat2.f) <= 1e-15);
  CHECK(rel(plat1.f, -pressure(p)) <= 1e-15);
  CHECK(plat1.saturated);

  // Legendre duality against a grid supremum
  double rho = 1.3, best = -1e300;
  for (int i = 1; i <= 20000; ++i) {
    double al = -12.0 * i / 20000;
    ModelParams q = p;
    q.mu = al;
    best = std::max(best, al * rho - pressure(q));
  }
  CHECK(rel(free_energy(p, rho).f, best) <= 1e-6);
}

TEST_CASE("pmf supercritical branch") {
  ModelParams p;
  p.model = Model::PMF;
  p.d = 3;
  p.beta = kBnorm;
  p.a = 1;
  ModelParams id = p;
  id.model = Model::Ideal;
  id.a = 0;
  id.mu = 0;
  double rc = critical_density(id).value();

  p.mu = rc;  // the edge
  CHECK(rel(dpressure_dmu(p).value(), rc) <= 1e-12);
  p.mu = 2 * rc;
  CHECK(rel(condensate(p).value(), rc) <= 1e-13);
  // p = mu^2/(2a) + p_ideal(0) above the edge
  CHECK(rel(pressure(p), p.mu * p.mu / 2 + pressure(id)) <= 1e-14);
  CHECK(rel(dpressure_dmu(p).value(), p.mu / p.a) <= 1e-14);
}

TEST_CASE("density rate functions vanish at equilibrium, positive away") {
  ModelParams p;
  p.model = Model::Ideal;
  p.d = 3;
  p.beta = kBnorm;
  p.mu = 0;
  p.alpha = -0.8;
  double rc = critical_density(p).value();

  double deq = WeightSeq(p).qdensity(-0.8);
  CHECK(std::abs(density_rate(p, deq, DensityRateKind::Ideal).value()) <=
        1e-10);
  CHECK(density_rate(p, deq * 1.2, DensityRateKind::Ideal).value() > 0);
  // beyond the critical density the ideal-tilt rate is infinite
  CHECK(density_rate(p, rc * 1.01, DensityRateKind::Ideal).is_inf());

  // the quadratic variant vanishes at the consistency density instead
  ModelParams q = p;
  q.mu = 0.4;
  q.a = 0.9;
  ModelParams qp = q;
  qp.model = Model::PMF;
  double dstar = find_zero(qp).delta_star.value();
  CHECK(std::abs(density_rate(q, dstar, DensityRateKind::Pmf).value()) <=
        1e-10);
  double lowest = 1e300;
  for (int i = 0; i <= 400; ++i) {
    double v = density_rate(q, rc * i / 400, DensityRateKind::Pmf).as_double();
    lowest = std::min(lowest, v);
  }
  CHECK(lowest >= -1e-12);
}

TEST_CASE("condensate conventions at the boundary") {
  ModelParams p;
  p.model = Model::Ideal;
  p.d = 3;
  p.beta = kBnorm;
  p.mu = 0;
  CHECK(condensate(p).value() == 0.0);
  CHECK(condensate(p, true).is_inf());
  p.d = 2;
  p.beta = 1;
  CHECK(condensate(p).is_inf());
}

TEST_CASE("pmf sweep straddling the condensation edge") {
  ModelParams t;
  t.model = Model::PMF;
  t.d = 3;
  t.beta = kBnorm;
  t.a = 1.0;
  double rc = critical_density(t).value();

  std::vector<double> grid;
  for (int i = -8; i <= 8; ++i) grid.push_back(rc + 0.02 * i);
  std::vector<ThermoPoint> pts = sweep(t, grid, {}, 4);

  int ncrit = 0, nsub = 0, nsup = 0;
  double prev_dp = -1;
  for (const ThermoPoint& pt : pts) {
    REQUIRE(pt.error.empty());
    if (pt.regime == Regime::Critical) ++ncrit;
    if (pt.regime == Regime::Subcritical) ++nsub;
    if (pt.regime == Regime::Supercritical) ++nsup;
    double dp = pt.dp_dmu.value();
    if (prev_dp >= 0) {
      CHECK(dp >= prev_dp - 1e-12);          // monotone
      CHECK(std::abs(dp - prev_dp) < 0.05);  // no jump at the edge
    }
    prev_dp = dp;
    if (pt.regime == Regime::Supercritical) {
      CHECK(std::abs(dp - pt.mu_eff / t.a) < 1e-12);
      CHECK(pt.condensate.value() > 0);
    }
    if (pt.regime == Regime::Subcritical) CHECK(pt.condensate.value() == 0.0);
  }
  CHECK(ncrit == 1);
  CHECK(nsub >= 7);
  CHECK(nsup >= 7);
}

TEST_CASE("ideal sweep: derivative rises to the critical density") {
  ModelParams t;
  t.model = Model::Ideal;
  t.d = 3;
  t.beta = kBnorm;
  double rc = critical_density(t).value();
  std::vector<double> grid = {-0.5, -0.1, -1e-3, -1e-6, 0.0};
  std::vector<ThermoPoint> pts = sweep(t, grid, {}, 1);
  CHECK(pts[3].dp_dmu.value() > 0.99 * rc);
  CHECK(pts[3].dp_dmu.value() < rc);
  CHECK(rel(pts[4].dp_dmu.value(), rc) <= 1e-12);
  CHECK(pts[4].regime == Regime::Critical);
  CHECK(pts[0].condensate.value() == 0.0);
}

TEST_CASE("hyl sweep marks the derivative jump as non-smooth") {
  ModelParams t;
  t.model = Model::HYL;
  t.d = 3;
  t.b = 1.0;
  t.a = 2.0;
  t.beta = hyl_beta_star(3, 1.0);
  std::vector<double> grid;
  for (int i = 0; i <= 32; ++i) grid.push_back(300.0 + 650.0 * i / 32);
  SolveOptions o;
  o.hyl_s_max = 0;
  std::vector<ThermoPoint> pts = sweep(t, grid, o, 4);

  int nonsmooth = 0, multi = 0;
  for (const ThermoPoint& pt : pts) {
    REQUIRE(pt.error.empty());
    if (pt.regime == Regime::NonSmooth) {
      ++nonsmooth;
      CHECK(pt.dp_dmu.is_undefined());
    }
    if (pt.families > 1) ++multi;
  }
  CHECK(nonsmooth >= 1);
  CHECK(multi >= 3);
}

TEST_CASE("sweep carries partial failures as per-point errors") {
  ModelParams t;
  t.model = Model::Ideal;
  t.d = 3;
  t.beta = kBnorm;
  std::vector<double> grid = {-0.1, 0.0, 0.1};
  std::vector<ThermoPoint> pts = sweep(t, grid, {}, 1);
  CHECK(pts[0].error.empty());
  CHECK(pts[1].error.empty());
  CHECK_FALSE(pts[2].error.empty());
}
