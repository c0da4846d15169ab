#include "bosegas/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bosegas/errors.hpp"
#include "bosegas/minimize.hpp"
#include "bosegas/model.hpp"
#include "bosegas/sim.hpp"
#include "bosegas/specfun.hpp"
#include "bosegas/thermo.hpp"
#include "parallel.hpp"

namespace bosegas {
namespace {

// zeta(3/2), used as an oracle independent of the library's own series.
constexpr double kZeta32 = 2.6123753486854883;

void push(std::vector<CheckResult>& cs, std::string name, double measured,
          double bound, std::string note = "") {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.bound = bound;
  c.pass = measured <= bound;
  c.note = std::move(note);
  cs.push_back(std::move(c));
}

void push_flag(std::vector<CheckResult>& cs, std::string name, bool pass,
               double measured, double bound, std::string note = "") {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.bound = bound;
  c.pass = pass;
  c.note = std::move(note);
  cs.push_back(std::move(c));
}

// splitmix64, enough randomness for drawing parameter sets reproducibly
struct Rng {
  std::uint64_t s;
  std::uint64_t next() {
    s += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double logrange(double lo, double hi) {
    return std::exp(range(std::log(lo), std::log(hi)));
  }
};

// ---------------------------------------------------------------- specfun

// Newton iteration for w e^w = x, seeded away from the root. Written here
// so the check does not share a single line with the library solver.
double newton_w(double x, double w) {
  for (int it = 0; it < 200; ++it) {
    double ew = std::exp(w);
    double step = (w * ew - x) / (ew * (1.0 + w));
    w -= step;
    if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(w))) break;
  }
  return w;
}

// Direct zeta summation with an Euler-Maclaurin tail taken at N, good to
// far below the 1e-6 gate.
double zeta_direct(double s) {
  const std::int64_t N = 1000000;
  double sum = 0;
  for (std::int64_t n = N - 1; n >= 1; --n) sum += std::pow(double(n), -s);
  double tail = std::pow(double(N), 1.0 - s) / (s - 1.0) +
                0.5 * std::pow(double(N), -s) +
                s / 12.0 * std::pow(double(N), -s - 1.0);
  return sum + tail;
}

CriterionResult crit_specfun(int) {
  CriterionResult r;
  r.id = "specfun";
  r.title = "Lambert W and Bose series against independent oracles";
  auto& cs = r.checks;
  const double einv = std::exp(-1.0);

  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    double x = -einv + (i + 0.5) / 1000.0 * (10.0 + einv);
    double w = lambert_w(WBranch::Principal, x);
    worst = std::max(worst, std::abs(w * std::exp(w) - x));
  }
  push(cs, "principal branch defining identity", worst, 1e-12);

  worst = 0;
  for (int i = 0; i < 1000; ++i) {
    double x = -einv * (i + 0.5) / 1000.0;
    double w = lambert_w(WBranch::Lower, x);
    worst = std::max(worst, std::abs(w * std::exp(w) - x));
  }
  push(cs, "lower branch defining identity", worst, 1e-12);

  double w1 = lambert_w(WBranch::Principal, 1.0);
  push(cs, "W0(1) against the eight-digit value", std::abs(w1 - 0.5671433),
       1e-6);
  push(cs, "W0(1) against bare Newton", std::abs(w1 - newton_w(1.0, 1.0)),
       1e-13);

  push(cs, "zeta(3/2) against direct summation",
       std::abs(zeta(1.5) - zeta_direct(1.5)), 1e-6);
  push(cs, "zeta(3/2) against the eight-digit value",
       std::abs(zeta(1.5) - 2.6123753), 1e-6);
  push(cs, "zeta(5/2) against direct summation",
       std::abs(zeta(2.5) - zeta_direct(2.5)), 1e-6);
  push(cs, "zeta(5/2) against the eight-digit value",
       std::abs(zeta(2.5) - 1.3414873), 1e-6);

  // d/dalpha g(n, alpha) = -g(n-1, alpha), probed by central differences
  worst = 0;
  const double ns[] = {1.5, 2.0, 2.5, 3.5};
  const double alphas[] = {0.1, 0.5, 1.25, 3.0};
  for (double n : ns) {
    for (double al : alphas) {
      double h = 1e-5;
      double cd =
          (bose_g_finite(n, al + h) - bose_g_finite(n, al - h)) / (2 * h);
      double target = -bose_g_finite(n - 1.0, al);
      worst = std::max(worst, std::abs(cd - target) /
                                  std::max(1.0, std::abs(target)));
    }
  }
  push(cs, "g recursion against central differences", worst, 1e-6);
  return r;
}

// ------------------------------------------------------- zero-stationarity

// Coordinate derivative of I + beta H_lsc at x_k, written out from the
// functional itself rather than taken from the solver's update rule.
double stat_grad(const ModelParams& p, const WeightSeq& w,
                 const CycleCounts& xi, double dens, double total,
                 std::int64_t k) {
  const double mu = p.mu_eff();
  const double xk = xi.at(k);
  const double ref =
      (p.model == Model::PMF || p.model == Model::HYL) ? 0.0 : mu;
  double g = std::log(xk) - w.log_q(k, ref);
  const double kk = double(k);
  const double gap_pos = std::max(0.0, mu - p.a * dens);
  switch (p.model) {
    case Model::Ideal:
      break;
    case Model::CMF:
      g += p.beta * p.a * total;
      break;
    case Model::PMF:
      g += p.beta * kk * (-mu + p.a * dens + gap_pos);
      break;
    case Model::HYL:
      g += p.beta * (kk * (-mu + p.a * dens) - p.b * kk * kk * xk +
                     gap_pos * p.a * kk / (p.a - p.b));
      break;
  }
  return g;
}

ModelParams random_params(Model m, Rng& rng) {
  ModelParams p;
  p.model = m;
  switch (m) {
    case Model::Ideal:
    case Model::CMF: {
      p.d = 1 + int(rng.next() % 4);
      p.beta = rng.logrange(0.03, 2.0);
      double mu_eff = -rng.logrange(1e-3, 5.0);
      p.alpha = -rng.range(0.0, 0.5) * std::abs(mu_eff);
      p.mu = mu_eff - p.alpha;
      if (m == Model::CMF) p.a = rng.logrange(0.05, 4.0);
      break;
    }
    case Model::PMF: {
      p.d = 1 + int(rng.next() % 4);
      p.beta = rng.logrange(0.05, 1.5);
      p.a = rng.logrange(0.05, 4.0);
      WeightSeq w(p.d, p.beta);
      double scale = p.d >= 3 ? std::max(0.5, p.a * w.qdensity(0.0)) : 1.5;
      double mu_eff = rng.range(-1.5, 1.8) * scale;
      // d = 2: the subcritical gap closes like exp(-lat mu/a) and the map
      // slope grows at the same rate, so past a few decades the residual
      // floor of double arithmetic crosses the 1e-10 gate
      if (p.d == 2 && mu_eff > 0)
        mu_eff = std::min(mu_eff, 8.0 * p.a / w.lat);
      p.alpha = -rng.range(0.0, 0.3) * std::abs(mu_eff);
      p.mu = mu_eff - p.alpha;
      break;
    }
    case Model::HYL: {
      p.d = 3;
      p.b = rng.logrange(0.4, 1.6);
      p.a = p.b * (1.3 + 1.7 * rng.uniform());
      p.beta = hyl_beta_star(3, p.b) * (1.0 + rng.uniform());
      double mu_eff = rng.range(-0.4, 0.97) * hyl_mu_bar(p);
      p.alpha = -rng.range(0.0, 0.3) * std::abs(mu_eff);
      p.mu = mu_eff - p.alpha;
      break;
    }
  }
  p.validate();
  return p;
}

CriterionResult crit_zero_stationarity(int threads) {
  CriterionResult r;
  r.id = "zero-stationarity";
  r.title = "returned zeroes are stationary, self-consistent and labelled";
  auto& cs = r.checks;

  const Model models[] = {Model::Ideal, Model::CMF, Model::PMF, Model::HYL};
  const int per_model = 20;
  std::vector<ModelParams> sets;
  for (Model m : models) {
    Rng rng{0x5eedull + std::uint64_t(m)};
    for (int i = 0; i < per_model; ++i) sets.push_back(random_params(m, rng));
  }

  // per set: worst gradient, fixed-point residual, density mismatch
  std::vector<std::array<double, 3>> defect(sets.size());
  parallel_for(sets.size(), threads, [&](std::size_t i) {
    const ModelParams& p = sets[i];
    SolveOptions o;
    if (p.model == Model::HYL) {
      o.hyl_s_max = 1;
      o.scan_points = 160;
    }
    MinimizerSolution sol = find_zero(p, o);
    WeightSeq w(p);
    double dens = density(w, sol.xi).as_double();
    if (!std::isfinite(dens)) {
      // fail visibly instead of throwing out of the worker
      defect[i] = {1e300, 1e300, 1e300};
      return;
    }
    double total = total_count(w, sol.xi);

    double grad = 0;
    std::int64_t kchk = std::min<std::int64_t>(48, sol.xi.k_max());
    for (std::int64_t k = 1; k <= kchk; ++k)
      grad = std::max(grad, std::abs(stat_grad(p, w, sol.xi, dens, total, k)));

    double resid = 0;
    double dmatch = 0;
    const double mu = p.mu_eff();
    if (p.model == Model::PMF) {
      double ds = sol.delta_star.value();
      resid =
          std::abs(ds - w.qdensity(std::min(0.0, mu - p.a * ds)));
      dmatch = std::abs(dens - ds);
    } else if (p.model == Model::HYL) {
      double ds = sol.delta_star.value();
      resid = std::abs(ds - dens);
      dmatch = resid;
    } else {
      double expect = w.qdensity(mu);
      if (p.model == Model::CMF) expect *= sol.cmf_scale.value();
      dmatch = std::abs(dens - expect);
    }
    defect[i] = {grad, resid, dmatch};
  });

  for (std::size_t mi = 0; mi < 4; ++mi) {
    double g = 0, res = 0, dm = 0;
    for (int i = 0; i < per_model; ++i) {
      const auto& d = defect[mi * per_model + std::size_t(i)];
      g = std::max(g, d[0]);
      res = std::max(res, d[1]);
      dm = std::max(dm, d[2]);
    }
    std::string mn = model_name(models[mi]);
    push(cs, mn + ": stationarity of the rate functional", g, 1e-8,
         "20 random parameter sets");
    if (models[mi] == Model::PMF || models[mi] == Model::HYL)
      push(cs, mn + ": consistency density residual", res, 1e-10);
    push(cs, mn + ": density of the zero", dm, 1e-8);
  }
  return r;
}

// ----------------------------------------------------- pressure-identities

CriterionResult crit_pressure_identities(int) {
  CriterionResult r;
  r.id = "pressure-identities";
  r.title = "closed-form pressures equal reference pressure minus rate";
  auto& cs = r.checks;

  // CMF across a (d, beta, mu, a) grid
  double worst = 0;
  for (int d : {2, 3}) {
    for (double beta : {0.08, 1.0 / (4.0 * 3.14159265358979324), 0.6}) {
      for (double mu : {-0.15, -0.9, -2.5}) {
        for (double a : {0.35, 1.0, 2.2}) {
          ModelParams p;
          p.model = Model::CMF;
          p.d = d;
          p.beta = beta;
          p.mu = mu;
          p.a = a;
          double closed = pressure(p);
          MinimizerSolution sol = zero_cmf(p);
          WeightSeq w(p);
          double varia =
              w.qbar(mu) / beta - rate_model(p, sol.xi, 0.0).value() / beta;
          worst = std::max(worst, std::abs(closed - varia) /
                                      std::max(1.0, std::abs(closed)));
        }
      }
    }
  }
  push(cs, "cmf closed form vs variational value", worst, 1e-10,
       "54-point grid");

  // PMF in both regimes, d = 2 has no condensed side
  worst = 0;
  for (int d : {2, 3}) {
    for (double beta : {1.0 / (4.0 * 3.14159265358979324), 0.45}) {
      for (double a : {0.5, 1.6}) {
        WeightSeq w(d, beta);
        std::vector<double> mus = {-1.1, 0.8};
        if (d >= 3) {
          double edge = a * w.qdensity(0.0);
          mus = {-1.1, 0.55 * edge, 1.7 * edge};
        }
        for (double mu : mus) {
          ModelParams p;
          p.model = Model::PMF;
          p.d = d;
          p.beta = beta;
          p.mu = mu;
          p.a = a;
          double closed = pressure(p);
          MinimizerSolution sol = zero_pmf(p);
          double varia =
              w.qbar(0.0) / beta - rate_model(p, sol.xi, 0.0).value() / beta;
          worst = std::max(worst, std::abs(closed - varia) /
                                      std::max(1.0, std::abs(closed)));
        }
      }
    }
  }
  push(cs, "pmf closed form vs variational value", worst, 1e-9,
       "both sides of the condensation edge");
  return r;
}

// ----------------------------------------------------- derivative-density

CriterionResult crit_derivative_density(int) {
  CriterionResult r;
  r.id = "derivative-density";
  r.title = "pressure slope equals the density of the zero";
  auto& cs = r.checks;
  const double bnorm = 1.0 / (4.0 * 3.14159265358979324);

  struct Case {
    const char* name;
    ModelParams p;
    SolveOptions o;
  };
  std::vector<Case> cases;
  {
    ModelParams p;
    p.model = Model::Ideal;
    p.d = 3;
    p.beta = bnorm;
    p.mu = -0.7;
    cases.push_back({"ideal d=3", p, {}});
    p.d = 2;
    p.beta = 0.9;
    p.mu = -0.3;
    cases.push_back({"ideal d=2", p, {}});
    p = ModelParams{};
    p.model = Model::CMF;
    p.d = 3;
    p.beta = bnorm;
    p.mu = -0.6;
    p.a = 1.2;
    cases.push_back({"cmf d=3", p, {}});
    p.d = 2;
    p.beta = 0.35;
    p.mu = -1.1;
    p.a = 0.5;
    cases.push_back({"cmf d=2", p, {}});
    p = ModelParams{};
    p.model = Model::PMF;
    p.d = 3;
    p.beta = bnorm;
    p.a = 1.0;
    p.mu = 0.5 * p.a * WeightSeq(3, bnorm).qdensity(0.0);
    cases.push_back({"pmf subcritical", p, {}});
    p.d = 2;
    p.beta = 0.5;
    p.a = 0.7;
    p.mu = 1.3;
    cases.push_back({"pmf d=2", p, {}});
    p = ModelParams{};
    p.model = Model::HYL;
    p.d = 3;
    p.b = 1.0;
    p.a = 2.0;
    p.beta = 1.5 * hyl_beta_star(3, 1.0);
    p.mu = 0.3 * hyl_mu_bar(p);
    SolveOptions oh;
    oh.hyl_s_max = 1;
    oh.scan_points = 160;
    cases.push_back({"hyl subcritical", p, oh});
  }

  double worst_an = 0, worst_fd = 0;
  for (const Case& c : cases) {
    double dp = dpressure_dmu(c.p, c.o).value();
    MinimizerSolution sol = find_zero(c.p, c.o);
    double dens = density(WeightSeq(c.p), sol.xi).value();
    worst_an = std::max(
        worst_an, std::abs(dp - dens) / std::max(1.0, std::abs(dens)));
    double h = 1e-6 * std::max(1.0, std::abs(c.p.mu_eff()));
    ModelParams pl = c.p, ph = c.p;
    pl.mu -= h;
    ph.mu += h;
    double fd = (pressure(ph, c.o) - pressure(pl, c.o)) / (2 * h);
    worst_fd = std::max(
        worst_fd, std::abs(dp - fd) / std::max(1.0, std::abs(dens)));
  }
  push(cs, "analytic slope vs density of the zero", worst_an, 1e-8,
       "smooth points of all four models");
  push(cs, "analytic slope vs central differences", worst_fd, 5e-6);

  // condensed PMF: the slope is (mu + alpha)/a with no solver in the loop
  {
    ModelParams p;
    p.model = Model::PMF;
    p.d = 3;
    p.beta = bnorm;
    p.a = 1.0;
    double edge = p.a * WeightSeq(3, bnorm).qdensity(0.0);
    p.alpha = -0.1 * edge;
    p.mu = 1.6 * edge - p.alpha;
    double dp = dpressure_dmu(p).value();
    push(cs, "condensed pmf slope is exactly mu_eff / a",
         std::abs(dp - p.mu_eff() / p.a), 0.0);
  }

  // condensed HYL still has a slope, it just exceeds the normal density
  // by the condensate; probe it against differences only
  {
    ModelParams p;
    p.model = Model::HYL;
    p.d = 3;
    p.b = 1.0;
    p.a = 2.0;
    p.beta = 1.5 * hyl_beta_star(3, 1.0);
    p.mu = 1.01 * hyl_mu_bar(p);
    SolveOptions oh;
    oh.hyl_s_max = 1;
    oh.scan_points = 160;
    double dp = dpressure_dmu(p, oh).value();
    double h = 1e-6 * p.mu;
    ModelParams pl = p, ph = p;
    pl.mu -= h;
    ph.mu += h;
    double fd = (pressure(ph, oh) - pressure(pl, oh)) / (2 * h);
    push(cs, "condensed hyl slope vs central differences",
         std::abs(dp - fd) / std::max(1.0, std::abs(dp)), 5e-6);
  }
  return r;
}

// --------------------------------------------------------- bec-structure

CriterionResult crit_bec_structure(int) {
  CriterionResult r;
  r.id = "bec-structure";
  r.title = "condensation onset, free-energy plateau, condensate kink";
  auto& cs = r.checks;

  const double beta = 10.0;
  const double lat = std::pow(40.0 * 3.14159265358979324, 1.5);
  const double rho_c = kZeta32 / lat;

  ModelParams p;
  p.model = Model::Ideal;
  p.d = 3;
  p.beta = beta;
  p.alpha = -1e-8;
  push(cs, "ideal slope approaches the critical density",
       std::abs(dpressure_dmu(p).value() - rho_c), 1e-6,
       "mu_eff = -1e-8");

  p.alpha = 0;
  double f0 = free_energy(p, rho_c).f;
  double spread = 0;
  bool saturated = true;
  for (int i = 0; i <= 10; ++i) {
    FreeEnergyPoint fp = free_energy(p, rho_c * (1.0 + i / 10.0));
    spread = std::max(spread, std::abs(fp.f - f0));
    saturated = saturated && fp.saturated;
  }
  push(cs, "ideal free energy flat above the critical density", spread,
       1e-10);
  push_flag(cs, "plateau points report a saturated transform", saturated,
            saturated ? 1 : 0, 1);

  ModelParams q;
  q.model = Model::PMF;
  q.d = 3;
  q.beta = beta;
  q.a = 1.0;
  double worst = 0;
  int first_pos = -1;
  for (int i = 0; i <= 10; ++i) {
    q.mu = (0.5 + 0.1 * i) * q.a * rho_c;
    double cond = condensate(q).value();
    double want = std::max(0.0, q.mu / q.a - rho_c);
    worst = std::max(worst, std::abs(cond - want));
    if (first_pos < 0 && cond > 1e-12) first_pos = i;
  }
  push(cs, "pmf condensate matches its closed form", worst, 1e-10,
       "grid straddling the critical coupling");
  push_flag(cs, "condensate switches on at the first grid point past onset",
            first_pos == 6, double(first_pos), 6);
  return r;
}

// -------------------------------------------------------- hyl-transition

CriterionResult crit_hyl_transition(int threads) {
  CriterionResult r;
  r.id = "hyl-transition";
  r.title = "coexisting families, strict pressure gap, non-smooth sweep";
  auto& cs = r.checks;

  for (double fac : {1.0, 1.5}) {
    std::string tag = fac == 1.0 ? "at threshold" : "above threshold";
    ModelParams p;
    p.model = Model::HYL;
    p.d = 3;
    p.b = 1.0;
    p.a = 2.0;
    p.beta = fac * hyl_beta_star(3, 1.0);
    const double mu_bar = hyl_mu_bar(p);

    SolveOptions os;
    os.hyl_s_max = 0;  // the scan itself enumerates the coexisting deltas
    FamilyScan scan =
        hyl_family_scan(p, 0.28 * mu_bar, 1.04 * mu_bar, 33, os, threads);

    // count solutions per grid mu
    int pts3 = 0, worst_count = 0;
    {
      std::size_t i = 0;
      while (i < scan.points.size()) {
        std::size_t j = i;
        while (j < scan.points.size() &&
               scan.points[j].mu == scan.points[i].mu)
          ++j;
        int n = int(j - i);
        worst_count = std::max(worst_count, n);
        if (n == 3) ++pts3;
        i = j;
      }
    }
    push_flag(cs, tag + ": an interval of exactly three solutions",
              pts3 >= 3 && worst_count == 3, double(pts3), 3,
              "grid points carrying three families");
    bool fold2 = false;
    for (const FoldEvent& f : scan.folds)
      fold2 = fold2 || std::abs(f.count_after - f.count_before) == 2;
    push_flag(cs, tag + ": folds change the solution count by two", fold2,
              double(scan.folds.size()), 1);

    // strict pressure gap between the condensed branch and the branch
    // that dies at the merge point mu_bar
    p.mu = mu_bar;
    SolveOptions od;
    od.hyl_s_max = 2;
    std::vector<MinimizerSolution> sols = hyl_solutions(p, od);
    const double kink = hyl_kink_density(p);
    double best_obj = sols.front().objective;
    double kink_obj = 0, kink_gap = 1e300;
    for (const MinimizerSolution& s : sols) {
      double g = std::abs(s.delta_star.value_or(s.density) - kink);
      if (g < kink_gap) {
        kink_gap = g;
        kink_obj = s.objective;
      }
    }
    double margin = (kink_obj - best_obj) / p.beta;
    double floor10 =
        10.0 * od.tol * std::max(1.0, std::abs(best_obj) / p.beta);
    push_flag(cs, tag + ": condensed branch wins at the merge point",
              margin > floor10, margin, floor10,
              "pressure margin over the merging branch");

    // the pressure sweep must flag the branch switch as non-smooth
    std::vector<double> grid;
    for (int i = 0; i < 27; ++i)
      grid.push_back((0.30 + 0.72 * i / 26.0) * mu_bar);
    std::vector<ThermoPoint> pts = sweep(p, grid, os, threads);
    int nonsmooth = 0, multi = 0;
    for (const ThermoPoint& t : pts) {
      if (t.error.empty() && t.regime == Regime::NonSmooth &&
          t.dp_dmu.is_undefined())
        ++nonsmooth;
      if (t.error.empty() && t.families >= 2) ++multi;
    }
    push_flag(cs, tag + ": sweep marks a non-smooth point", nonsmooth >= 1,
              double(nonsmooth), 1);
    push_flag(cs, tag + ": sweep sees coexisting families", multi >= 1,
              double(multi), 1);
  }
  return r;
}

// ----------------------------------------------------------- monte-carlo

CriterionResult crit_monte_carlo(int) {
  CriterionResult r;
  r.id = "monte-carlo";
  r.title = "sampler agrees with weights, exact measure and rate function";
  auto& cs = r.checks;
  const double bnorm = 1.0 / (4.0 * 3.14159265358979324);

  // product-Poisson sampler vs the cycle weights
  {
    SimConfig cfg;
    cfg.params.model = Model::Ideal;
    cfg.params.d = 3;
    cfg.params.beta = bnorm;
    cfg.params.alpha = -0.3;
    cfg.volume = 1000.0;
    cfg.k_max = 20;
    cfg.n_samples = 100000;
    cfg.burn_in = 0;
    cfg.seed = 2026;
    cfg.threads = 4;  // chain count is part of the pinned estimate
    SimEstimate est = sample_ideal(cfg);
    WeightSeq w(cfg.params);
    double worst = 0;
    for (std::int64_t k = 1; k <= cfg.k_max; ++k) {
      double z = std::abs(est.mean[std::size_t(k - 1)] - w.q(k, -0.3)) /
                 est.std_error[std::size_t(k - 1)];
      worst = std::max(worst, z);
    }
    push(cs, "ideal means within four standard errors", worst, 4.0,
         "k <= 20, volume 1000, 100000 samples");
  }

  // chain kernel vs the enumerated measure: pi_i P_ij symmetric
  {
    auto balance = [](const ModelParams& p, double volume, int k_max,
                      std::int64_t n_cap) {
      ExactTable tab = bruteforce_measure(p, volume, k_max, n_cap);
      std::vector<double> P = mh_transition_matrix(p, volume, k_max, n_cap);
      std::size_t n = tab.size();
      double worst = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          worst = std::max(worst, std::abs(tab.prob[i] * P[i * n + j] -
                                           tab.prob[j] * P[j * n + i]));
      return worst;
    };
    ModelParams p;
    p.model = Model::CMF;
    p.d = 3;
    p.beta = bnorm;
    p.mu = -0.25;
    p.a = 0.8;
    double w1 = balance(p, 1.0, 2, 9);
    p.model = Model::HYL;
    p.beta = 1.0;
    p.mu = 0.2;
    p.a = 1.5;
    p.b = 0.6;
    double w2 = balance(p, 1.0, 2, 8);
    push(cs, "detailed balance of the chain kernel", std::max(w1, w2),
         1e-12, "cmf and hyl, k_max 2, volume 1");
  }

  // tilted chain concentrates on the pmf zero
  {
    ModelParams p;
    p.model = Model::PMF;
    p.d = 3;
    p.beta = 1.0;
    p.mu = -0.35;
    p.a = 0.8;
    MinimizerSolution sol = zero_pmf(p);
    SimConfig cfg;
    cfg.params = p;
    cfg.volume = 1000.0;
    cfg.k_max = 12;
    cfg.n_samples = 200000;
    cfg.burn_in = 100000;
    cfg.seed = 77;
    cfg.threads = 4;
    SimEstimate est = sample_tilted(cfg);
    double worst = 0;
    for (std::int64_t k = 1; k <= 5; ++k) {
      double z = std::abs(est.mean[std::size_t(k - 1)] - sol.xi.at(k)) /
                 est.std_error[std::size_t(k - 1)];
      worst = std::max(worst, z);
    }
    push(cs, "tilted means sit on the zero", worst, 4.0,
         "pmf, k <= 5, volume 1000, burn-in 100000");
  }

  // empirical rate of a ball away from the zero vs a dense grid infimum
  {
    ModelParams p;
    p.model = Model::Ideal;
    p.d = 3;
    p.beta = bnorm;
    p.alpha = -0.3;
    WeightSeq w(p);
    const double q1 = w.q(1, -0.3), q2 = w.q(2, -0.3);
    const std::array<double, 2> center = {2 * q1, 2 * q2};
    const double radius = 0.08;

    double inf = 1e300;
    const int n = 600;
    for (int i = 0; i <= n; ++i) {
      double x1 = center[0] - radius + 2 * radius * i / n;
      for (int j = 0; j <= n; ++j) {
        double x2 = center[1] - radius + 2 * radius * j / n;
        double d1 = x1 - center[0], d2 = x2 - center[1];
        if (d1 * d1 + d2 * d2 > radius * radius) continue;
        double v = x1 * (std::log(x1 / q1) - 1) + q1 +
                   x2 * (std::log(x2 / q2) - 1) + q2;
        inf = std::min(inf, v);
      }
    }

    std::vector<double> vols = {64.0};
    std::vector<RatePoint> rp =
        empirical_rate(p, vols, std::span<const double>(center), radius);
    push_flag(cs, "finite-volume rate near the grid infimum",
              rp[0].exact && !rp[0].zero_mass &&
                  std::abs(rp[0].rate - inf) <= 0.25 * inf,
              rp[0].rate, inf, "volume 64, exact enumeration");
  }
  return r;
}

// ---------------------------------------------------- coupling-reductions

CriterionResult crit_coupling_reductions(int) {
  CriterionResult r;
  r.id = "coupling-reductions";
  r.title = "vanishing couplings collapse the models into each other";
  auto& cs = r.checks;
  const double bnorm = 1.0 / (4.0 * 3.14159265358979324);
  const double couplings[] = {1e-2, 1e-3, 1e-4};

  auto slope_check = [&cs](const char* name, const std::array<double, 3>& d) {
    if (!(d[0] > 0 && d[1] > 0 && d[2] > 0)) {
      push_flag(cs, name, false, 0, 0, "gap vanished, no trend to fit");
      return;
    }
    double slope = std::log(d[0] / d[2]) / std::log(1e2);
    push(cs, name, std::abs(slope - 1.0), 0.15,
         "log-log slope over two decades of coupling");
  };

  ModelParams base;
  base.d = 3;
  base.beta = bnorm;
  base.mu = -0.6;
  double pid = pressure([&] {
    ModelParams p = base;
    p.model = Model::Ideal;
    return p;
  }());
  double rid = WeightSeq(3, bnorm).qdensity(-0.6);

  std::array<double, 3> dc{}, dpm{}, dro{};
  for (int i = 0; i < 3; ++i) {
    ModelParams p = base;
    p.model = Model::CMF;
    p.a = couplings[i];
    dc[std::size_t(i)] = std::abs(pressure(p) - pid);
    p.model = Model::PMF;
    dpm[std::size_t(i)] = std::abs(pressure(p) - pid);
    dro[std::size_t(i)] =
        std::abs(zero_pmf(p).delta_star.value() - rid);
  }
  slope_check("cmf pressure collapses onto ideal", dc);
  slope_check("pmf pressure collapses onto ideal", dpm);
  slope_check("pmf density collapses onto ideal", dro);

  ModelParams h;
  h.model = Model::HYL;
  h.d = 3;
  h.beta = 2.0 * hyl_beta_star(3, 1.0);
  h.a = 2.0;
  h.mu = -5.0;
  ModelParams pm = h;
  pm.model = Model::PMF;
  double ppm = pressure(pm);
  SolveOptions oh;
  oh.hyl_s_max = 1;
  oh.scan_points = 160;
  std::array<double, 3> dh{};
  for (int i = 0; i < 3; ++i) {
    h.b = couplings[i];
    dh[std::size_t(i)] = std::abs(pressure(h, oh) - ppm);
  }
  slope_check("hyl pressure collapses onto pmf", dh);
  return r;
}

}  // namespace

const std::vector<std::string>& acceptance_ids() {
  static const std::vector<std::string> ids = {
      "specfun",          "zero-stationarity", "pressure-identities",
      "derivative-density", "bec-structure",   "hyl-transition",
      "monte-carlo",      "coupling-reductions"};
  return ids;
}

std::vector<CriterionResult> run_acceptance(const std::string& filter,
                                            int threads) {
  using Fn = CriterionResult (*)(int);
  static const std::pair<const char*, Fn> table[] = {
      {"specfun", crit_specfun},
      {"zero-stationarity", crit_zero_stationarity},
      {"pressure-identities", crit_pressure_identities},
      {"derivative-density", crit_derivative_density},
      {"bec-structure", crit_bec_structure},
      {"hyl-transition", crit_hyl_transition},
      {"monte-carlo", crit_monte_carlo},
      {"coupling-reductions", crit_coupling_reductions},
  };
  std::vector<CriterionResult> out;
  for (const auto& [id, fn] : table) {
    if (!filter.empty() && std::string(id).find(filter) == std::string::npos)
      continue;
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r = fn(threads);
    r.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    r.pass = !r.checks.empty();
    for (const CheckResult& c : r.checks) r.pass = r.pass && c.pass;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace bosegas
