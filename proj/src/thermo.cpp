#include "bosegas/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bosegas/errors.hpp"
#include "bosegas/specfun.hpp"
#include "parallel.hpp"

namespace bosegas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ideal_pressure(const WeightSeq& w, double eta) {
  return w.qbar(eta) / w.beta;
}

// W0(K)/K with the a -> 0 limit; the uniform scale of the CMF zero and
// the factor between the CMF and ideal critical densities.
double cmf_scale(double K) {
  return K == 0 ? 1.0 : lambert_w(WBranch::Principal, K) / K;
}

double cmf_pressure(const ModelParams& p, const WeightSeq& w) {
  if (p.a == 0) return ideal_pressure(w, p.mu_eff());
  const double K = p.a * p.beta * w.qbar(p.mu_eff());
  const double W = lambert_w(WBranch::Principal, K);
  return W * (1 + W / 2) / (p.a * p.beta * p.beta);
}

ExtReal ideal_critical(const WeightSeq& w) {
  if (w.d <= 2) return ExtReal::inf();
  return ExtReal::finite(zeta(w.d / 2.0) / w.lat);
}

// Density of the minimizing HYL solution plus its condensed part; exact
// on every smooth stretch of the pressure.
double hyl_slope(const ModelParams& p, const MinimizerSolution& s) {
  const double gap = p.mu_eff() - p.a * s.density;
  return s.density + (gap > 0 ? gap / (p.a - p.b) : 0.0);
}

// One-sided difference gap of the HYL pressure at shrinking steps. The
// derivative exists iff the gap decays like the step; a jump keeps it at
// the size of the density difference between branches.
bool hyl_nonsmooth(const ModelParams& p, const SolveOptions& o,
                   double pressure_here, double slope_guess) {
  SolveOptions oq = o;
  oq.hyl_s_max = 0;  // pressure branches live on the principal patterns
  auto press = [&](double mu) {
    ModelParams q = p;
    q.mu = mu;
    q.alpha = 0;
    const WeightSeq w(q);
    return w.qbar(0) / q.beta - zero_hyl(q, oq).objective / q.beta;
  };
  const double mu = p.mu_eff();
  double gap4 = 0, gap6 = 0;
  for (double h : {1e-4, 1e-5, 1e-6}) {
    double L = (pressure_here - press(mu - h)) / h;
    double R = (press(mu + h) - pressure_here) / h;
    double g = std::abs(R - L);
    if (h == 1e-4) gap4 = g;
    if (h == 1e-6) gap6 = g;
  }
  // Subtractive cancellation floors the measurable gap near
  // eps * |p| / h; anything under a few of those is numerically smooth.
  const double noise = 64 * 2.3e-16 * std::max(1.0, std::abs(pressure_here)) / 1e-6;
  const double tol = std::max(100 * o.tol * std::max(1.0, std::abs(slope_guess)), noise);
  return gap6 > tol && gap6 > 0.25 * gap4;
}

Regime classify_pmf(const ModelParams& p, const WeightSeq& w) {
  if (p.a == 0) return p.mu_eff() < 0 ? Regime::Subcritical : Regime::Critical;
  if (w.d <= 2) return Regime::Subcritical;
  const double edge = p.a * (zeta(w.d / 2.0) / w.lat);
  const double mu = p.mu_eff();
  if (std::abs(mu - edge) <= 1e-12 * std::max(1.0, std::abs(edge)))
    return Regime::Critical;
  return mu < edge ? Regime::Subcritical : Regime::Supercritical;
}

FreeEnergyPoint transform_plateau(double rho, double f_at_zero) {
  FreeEnergyPoint pt;
  pt.rho = rho;
  pt.f = -f_at_zero;
  pt.maximizing_alpha = 0;
  pt.saturated = true;
  return pt;
}

// Solve slope(alpha) = rho for alpha < 0 by bisection; slope must be
// continuous and increasing with slope(0-) > rho.
template <typename SlopeFn>
double invert_slope(double beta, double rho, SlopeFn&& slope) {
  double lo = -1e3 / beta, hi = 0;
  for (int it = 0; slope(lo) > rho; ++it) {
    lo *= 4;
    if (it > 60) throw SolverError("free energy: no bracket for the slope");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, -lo); ++it) {
    double mid = 0.5 * (lo + hi);
    (slope(mid) < rho ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ExtReal ideal_condensate(const ModelParams& p, bool periodic) {
  const double mu = p.mu_eff();
  if (mu < 0) return ExtReal::finite(0);
  if (p.d <= 2) return ExtReal::inf();
  return periodic ? ExtReal::inf() : ExtReal::finite(0);
}

ThermoPoint sweep_point(const ModelParams& tmpl, double mu,
                        const SolveOptions& o, bool periodic) {
  ModelParams p = tmpl;
  p.mu = mu;
  p.alpha = 0;
  ThermoPoint pt;
  pt.mu_eff = mu;
  pt.model = p.model;
  try {
    pt.pressure = pressure(p, o);
    pt.dp_dmu = dpressure_dmu(p, o);
    pt.condensate = condensate(p, periodic, o);
    switch (p.model) {
      case Model::Ideal:
      case Model::CMF:
        pt.regime = mu < 0 ? Regime::Subcritical : Regime::Critical;
        break;
      case Model::PMF:
        pt.regime = classify_pmf(p, WeightSeq(p));
        break;
      case Model::HYL:
        break;  // assigned by the caller from the family scan
    }
  } catch (const DomainError& e) {
    pt.error = e.what();
  } catch (const SolverError& e) {
    pt.error = e.what();
  }
  return pt;
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Subcritical: return "subcritical";
    case Regime::Critical: return "critical";
    case Regime::Supercritical: return "supercritical";
    case Regime::NonSmooth: return "nonsmooth";
  }
  return "?";
}

double pressure(const ModelParams& p, const SolveOptions& o) {
  p.validate();
  const WeightSeq w(p);
  const double mu = p.mu_eff();
  switch (p.model) {
    case Model::Ideal:
      return ideal_pressure(w, mu);
    case Model::CMF:
      return cmf_pressure(p, w);
    case Model::PMF: {
      if (p.a == 0) {
        if (mu > 0)
          throw DomainError("pmf pressure diverges: a = 0 and mu + alpha > 0");
        return ideal_pressure(w, mu);
      }
      MinimizerSolution s = zero_pmf(p, o);
      if (s.plateau) return mu * mu / (2 * p.a) + ideal_pressure(w, 0);
      const double d = *s.delta_star;
      return 0.5 * p.a * d * d + ideal_pressure(w, std::min(0.0, mu - p.a * d));
    }
    case Model::HYL:
      return ideal_pressure(w, 0) - zero_hyl(p, o).objective / p.beta;
  }
  throw std::logic_error("bad model");
}

ExtReal dpressure_dmu(const ModelParams& p, const SolveOptions& o) {
  p.validate();
  const WeightSeq w(p);
  const double mu = p.mu_eff();
  switch (p.model) {
    case Model::Ideal:
      return ExtReal::from_double(bose_g(w.d / 2.0, -w.beta * mu).as_double() /
                                  w.lat);
    case Model::CMF: {
      ExtReal dens =
          ExtReal::from_double(bose_g(w.d / 2.0, -w.beta * mu).as_double() / w.lat);
      if (!dens.is_finite()) return dens;
      const double K = p.a * p.beta * w.qbar(mu);
      return ExtReal::finite(cmf_scale(K) * dens.value());
    }
    case Model::PMF: {
      if (p.a == 0) {
        ModelParams q = p;
        q.model = Model::Ideal;
        if (mu > 0)
          throw DomainError("pmf pressure diverges: a = 0 and mu + alpha > 0");
        return dpressure_dmu(q, o);
      }
      MinimizerSolution s = zero_pmf(p, o);
      return ExtReal::finite(s.plateau ? mu / p.a : *s.delta_star);
    }
    case Model::HYL: {
      auto sols = hyl_solutions(p, o);
      if (sols.empty()) throw SolverError("hyl: no stationary solution found");
      const MinimizerSolution& best = sols.front();
      if (!best.unique) return ExtReal::undefined();
      int principals = 0;
      for (const auto& s : sols) principals += s.lower_branch.empty() ? 1 : 0;
      const double slope = hyl_slope(p, best);
      if (principals <= 1 && best.lower_branch.empty())
        return ExtReal::finite(slope);
      // Several coexisting branches: the minimizer may be about to switch,
      // which the envelope formula cannot see. Probe the pressure itself.
      const double here = ideal_pressure(w, 0) - best.objective / p.beta;
      if (hyl_nonsmooth(p, o, here, slope)) return ExtReal::undefined();
      return ExtReal::finite(slope);
    }
  }
  throw std::logic_error("bad model");
}

ExtReal critical_density(const ModelParams& p) {
  p.validate();
  const WeightSeq w(p);
  ExtReal base = ideal_critical(w);
  if (p.model != Model::CMF || p.a == 0 || !base.is_finite()) return base;
  const double K0 = p.a * p.beta * w.qbar(0);
  return ExtReal::finite(cmf_scale(K0) * base.value());
}

FreeEnergyPoint free_energy(const ModelParams& p, double rho,
                            const SolveOptions&) {
  p.validate();
  if (!(rho >= 0) || !std::isfinite(rho))
    throw DomainError("free energy needs rho >= 0");
  const WeightSeq w(p);

  auto ideal_point = [&]() -> FreeEnergyPoint {
    if (rho == 0) return {0, 0, -kInf, false};
    ExtReal rc = ideal_critical(w);
    if (rc.is_finite() && rho >= rc.value())
      return transform_plateau(rho, ideal_pressure(w, 0));
    double alpha =
        invert_slope(w.beta, rho, [&](double t) { return w.qdensity(t); });
    return {rho, rho * alpha - ideal_pressure(w, alpha), alpha, false};
  };

  switch (p.model) {
    case Model::Ideal:
      return ideal_point();
    case Model::CMF: {
      if (p.a == 0 || rho == 0) return ideal_point();
      auto slope = [&](double t) {
        return cmf_scale(p.a * p.beta * w.qbar(t)) * w.qdensity(t);
      };
      ExtReal rc = critical_density(p);
      if (rc.is_finite() && rho >= rc.value()) {
        ModelParams q = p;
        q.mu = 0;
        q.alpha = 0;
        return transform_plateau(rho, cmf_pressure(q, w));
      }
      double alpha = invert_slope(w.beta, rho, slope);
      ModelParams q = p;
      q.mu = alpha;
      q.alpha = 0;
      return {rho, rho * alpha - cmf_pressure(q, w), alpha, false};
    }
    case Model::PMF: {
      FreeEnergyPoint pt = ideal_point();
      pt.f += 0.5 * p.a * rho * rho;
      return pt;
    }
    case Model::HYL:
      throw DomainError("free energy covers ideal, cmf and pmf only");
  }
  throw std::logic_error("bad model");
}

ExtReal condensate(const ModelParams& p, bool periodic, const SolveOptions& o) {
  p.validate();
  const WeightSeq w(p);
  const double mu = p.mu_eff();
  switch (p.model) {
    case Model::Ideal:
      return ideal_condensate(p, periodic);
    case Model::CMF:
      return ExtReal::finite(0);
    case Model::PMF: {
      if (p.a == 0) {
        if (mu > 0)
          throw DomainError("pmf condensate needs a > 0 when mu + alpha > 0");
        return ideal_condensate(p, periodic);
      }
      ExtReal rc = ideal_critical(w);
      if (!rc.is_finite()) return ExtReal::finite(0);
      return ExtReal::finite(std::max(0.0, mu / p.a - rc.value()));
    }
    case Model::HYL: {
      MinimizerSolution s = zero_hyl(p, o);
      if (!s.unique) return ExtReal::undefined();
      const double gap = mu - p.a * s.density;
      return ExtReal::finite(gap > 0 ? gap / (p.a - p.b) : 0.0);
    }
  }
  throw std::logic_error("bad model");
}

ExtReal density_rate(const ModelParams& p, double x, DensityRateKind kind,
                     const SolveOptions& o) {
  p.validate();
  if (!(p.alpha < 0)) throw DomainError("density rate needs alpha < 0");
  const WeightSeq w(p);
  ModelParams ref = p;
  ref.model = Model::Ideal;
  ref.mu = p.alpha;  // reference tilt alone; p.mu stays out of J
  ref.alpha = 0;

  const ExtReal rc = ideal_critical(w);
  auto J = [&](double y) -> double {
    // +inf outside [0, rho_c] (d >= 3) or [0, inf) (d <= 2)
    if (y < 0 || (rc.is_finite() && y > rc.value())) return kInf;
    FreeEnergyPoint fe = free_energy(ref, y, o);
    return w.beta * (ideal_pressure(w, p.alpha) + fe.f - p.alpha * y);
  };

  if (kind == DensityRateKind::Ideal) return ExtReal::from_double(J(x));

  auto base = [&](double y) {
    return w.beta * (-p.mu * y + 0.5 * p.a * y * y) + J(y);
  };
  if (!std::isfinite(base(x))) return ExtReal::inf();

  // Normalizer: infimum of the convex objective, located by a coarse grid
  // and golden-section refinement.
  double hi;
  if (rc.is_finite()) {
    hi = rc.value();
  } else {
    hi = std::max(1.0, 2 * w.qdensity(p.alpha));
    while (base(hi) < base(hi / 2) && hi < 1e12) hi *= 2;
  }
  const int N = 96;
  double bestx = 0, bestv = base(0);
  for (int i = 1; i <= N; ++i) {
    double y = hi * double(i) / N;
    double v = base(y);
    if (v < bestv) bestv = v, bestx = y;
  }
  double lo = std::max(0.0, bestx - hi / N), up = std::min(hi, bestx + hi / N);
  constexpr double kGold = 0.61803398874989484820;
  double x1 = up - kGold * (up - lo), x2 = lo + kGold * (up - lo);
  double f1 = base(x1), f2 = base(x2);
  for (int it = 0; it < 160 && up - lo > 1e-14 * std::max(1.0, up); ++it) {
    if (f1 < f2) {
      up = x2, x2 = x1, f2 = f1;
      x1 = up - kGold * (up - lo), f1 = base(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + kGold * (up - lo), f2 = base(x2);
    }
  }
  const double N0 = std::min(bestv, std::min(f1, f2));
  return ExtReal::from_double(base(x) - N0);
}

std::vector<ThermoPoint> sweep(const ModelParams& tmpl,
                               std::span<const double> mu_grid,
                               const SolveOptions& o, int threads,
                               bool periodic) {
  for (size_t i = 0; i + 1 < mu_grid.size(); ++i)
    if (!(mu_grid[i] < mu_grid[i + 1]))
      throw DomainError("sweep needs a strictly increasing mu grid");
  std::vector<ThermoPoint> out(mu_grid.size());

  if (tmpl.model == Model::HYL && tmpl.b > 0) {
    // One family scan serves the whole grid: its per-point solution sets
    // give pressure and slope directly, and the continuation tells us
    // where the maximizing family changes hands, which is where the
    // derivative jumps.
    ModelParams p = tmpl;
    p.alpha = 0;
    FamilyScan scan = hyl_family_scan_grid(p, mu_grid, o, threads);
    size_t at = 0;
    std::vector<const FamilyPoint*> here;
    for (size_t i = 0; i < mu_grid.size(); ++i) {
      const double mu = mu_grid[i];
      here.clear();
      for (; at < scan.points.size() && scan.points[at].mu == mu; ++at)
        here.push_back(&scan.points[at]);
      ThermoPoint& pt = out[i];
      pt.mu_eff = mu;
      pt.model = Model::HYL;
      pt.families = int(here.size());
      if (here.empty()) {
        pt.error = "no consistency solution found";
        continue;
      }
      const FamilyPoint* best = here.front();
      for (auto* f : here)
        if (f->pressure > best->pressure) best = f;
      p.mu = mu;
      pt.pressure = best->pressure;
      const double gap = mu - p.a * best->density;
      pt.condensate = ExtReal::finite(gap > 0 ? gap / (p.a - p.b) : 0.0);
      pt.regime = gap > 0 ? Regime::Supercritical : Regime::Subcritical;
      pt.dp_dmu = ExtReal::finite(best->density + (gap > 0 ? gap / (p.a - p.b) : 0.0));
      // Runner-up within tolerance: the branches cross at this resolution.
      for (auto* f : here)
        if (f != best && best->pressure - f->pressure <=
                             o.tol * std::max(1.0, std::abs(best->pressure))) {
          pt.regime = Regime::NonSmooth;
          pt.dp_dmu = ExtReal::undefined();
          pt.condensate = ExtReal::undefined();
        }
      if (scan.branch_switch_mu && *scan.branch_switch_mu == mu) {
        pt.regime = Regime::NonSmooth;
        pt.dp_dmu = ExtReal::undefined();
      }
    }
    return out;
  }

  parallel_for(mu_grid.size(), threads, [&](size_t i) {
    out[i] = sweep_point(tmpl, mu_grid[i], o, periodic);
  });
  return out;
}

}  // namespace bosegas
