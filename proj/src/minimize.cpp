#include "bosegas/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "bosegas/errors.hpp"
#include "bosegas/specfun.hpp"
#include "parallel.hpp"

namespace bosegas {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvE = 0.36787944117144232160;
constexpr double kE = 2.71828182845904523536;

struct Kahan {
  double s = 0, c = 0;
  void add(double x) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

void check_k_max(const SolveOptions& o) {
  if (o.k_max < 1 || o.k_max > (std::int64_t(1) << 22))
    throw DomainError("k_max out of range");
}

// ------------------------------------------------------------------- pmf

// Consistency density h(delta) = sum_k k q_k^0 e^(beta k min(0, mu - a delta)).
struct PmfMap {
  const WeightSeq& w;
  double a, mu;
  std::int64_t k_limit;  // -1: full series

  double tilt(double delta) const { return std::min(0.0, mu - a * delta); }

  double h_at_tilt(double eta) const {
    if (k_limit < 0) return w.qdensity(eta);
    Kahan s;
    for (std::int64_t k = k_limit; k >= 1; --k) s.add(double(k) * w.q(k, eta));
    return s.s;
  }
  double h(double delta) const { return h_at_tilt(tilt(delta)); }
};

MinimizerSolution materialize_ideal_form(const ModelParams& p,
                                         const WeightSeq& w, double eta,
                                         double scale,
                                         const SolveOptions& o) {
  MinimizerSolution s;
  s.xi = CycleCounts::ideal(w, eta, o.k_max, scale);
  if (!o.use_tail) s.xi.tail = CycleCounts::Tail::Zero;
  s.density = density(w, s.xi).as_double();
  s.objective = rate_model(p, s.xi, 0).as_double();
  return s;
}

// ------------------------------------------------------------------- hyl

// One lower-branch pattern of the HYL stationarity system. Solutions have
// x_k = w_k / (b beta k^2) with w_k e^(-w_k) = v_k(eta) and eta tied to the
// density through eta_of; the consistency map g returns the density the
// pattern produces at a trial delta.
struct HylMap {
  const WeightSeq& w;
  double a, b, mu;
  std::int64_t j_head;
  std::int64_t k_limit;  // -1: full (analytic tail past j_head)
  std::vector<std::int64_t> flips;  // sorted

  double eta_of(double delta) const {
    double e = mu - a * delta;
    return e <= 0 ? e : -b / (a - b) * e;
  }
  double kink() const { return mu / a; }

  double vpref(double j) const {
    return b * w.beta / w.lat * std::pow(j, 1.0 - w.d / 2.0);
  }
  double v_at(double j, double eta) const {
    return vpref(j) * std::exp(w.beta * eta * j);
  }
  bool flipped(std::int64_t j) const {
    return std::binary_search(flips.begin(), flips.end(), j);
  }

  double g_at_eta(double eta) const {
    const std::int64_t head_n =
        k_limit < 0 ? j_head : std::min(j_head, k_limit);
    Kahan acc;
    for (std::int64_t j = 1; j <= head_n; ++j) {
      double v = v_at(double(j), eta);
      if (kE * v - 1 > 1e-12 || !std::isfinite(v)) return kNaN;
      double wj;
      if (flipped(j)) {
        if (v <= 0) return kNaN;  // lower branch dies at v = 0
        wj = -lambert_w(WBranch::Lower, -v);
      } else {
        wj = v == 0 ? 0.0 : -lambert_w(WBranch::Principal, -v);
      }
      acc.add(wj / double(j));
    }
    for (std::int64_t j = head_n + 1; j <= k_limit; ++j) {  // truncated mode
      double v = v_at(double(j), eta);
      if (kE * v - 1 > 1e-12 || !std::isfinite(v)) return kNaN;
      acc.add((v == 0 ? 0.0 : -lambert_w(WBranch::Principal, -v)) / double(j));
    }
    double g = acc.s / (b * w.beta);
    if (k_limit < 0) {
      CycleCounts stub = CycleCounts::zeros(j_head);
      stub.tail = CycleCounts::Tail::Hyl;
      stub.tail_eta = eta;
      stub.tail_b = b;
      try {
        g += tail_density(w, stub);
      } catch (const DomainError&) {
        return kNaN;
      } catch (const SolverError&) {
        return kNaN;
      }
    }
    return g;
  }
  double g(double delta) const { return g_at_eta(eta_of(delta)); }
  double f(double delta) const {
    double gg = g(delta);
    return std::isnan(gg) ? kNaN : gg - delta;
  }
};

void add_cluster(std::vector<double>& grid, double bp, double span) {
  if (!(bp > 0) || !std::isfinite(bp)) return;
  grid.push_back(bp);
  for (int m = 1; m <= 45; ++m) {
    double off = span * std::pow(0.5, m);
    grid.push_back(bp - off);
    grid.push_back(bp + off);
  }
}

std::vector<double> find_fixed_points(const HylMap& m, const SolveOptions& o) {
  const double kink = m.kink();

  // Upper end of the scan window. For the all-principal pattern g is
  // bounded and decreasing past the kink, so f < 0 eventually; patterns
  // with flipped modes grow superlinearly once every flipped mode is deep
  // in its logarithmic regime, so f > 0 eventually.
  double hi = std::max(1.0, 2 * kink);
  for (int it = 0;; ++it) {
    double fv = m.f(hi);
    bool done;
    if (m.flips.empty()) {
      done = !std::isnan(fv) && fv < 0;
    } else {
      double eta = m.eta_of(hi), vf = 0;
      for (auto j : m.flips) vf = std::max(vf, m.v_at(double(j), eta));
      done = !std::isnan(fv) && fv > 0 && vf < 1e-3;
    }
    if (done) break;
    hi *= 2;
    if (hi > 1e12 || it > 200) {
      if (m.flips.empty()) throw SolverError("hyl scan: no upper bound");
      break;  // flipped pattern without a dip; scan what we have
    }
  }

  std::vector<double> grid;
  const int N = std::max(64, m.flips.empty() ? o.scan_points : o.scan_points / 3);
  grid.reserve(size_t(N) + 512);
  for (int i = 1; i <= N; ++i) grid.push_back(hi * double(i) / N);
  for (int mexp = 1; mexp <= 50; ++mexp)
    grid.push_back(hi * std::pow(0.5, mexp));  // log sub-grid near 0

  // Refine near structural breakpoints: the kink, and the edges of the
  // bands where some v_j exceeds 1/e (solutions cannot exist inside).
  const double span = hi / 16;
  if (kink > 0) add_cluster(grid, kink, span);
  auto band_edges = [&](std::int64_t j) {
    double vb = m.vpref(double(j));
    if (vb <= kInvE) return;  // this mode is always in the W domain
    double etas = -(1 + std::log(vb)) / (m.w.beta * double(j));
    add_cluster(grid, (m.mu - etas) / m.a, span);
    add_cluster(grid, (m.mu + etas * (m.a - m.b) / m.b) / m.a, span);
  };
  band_edges(1);
  for (auto j : m.flips) band_edges(j);

  std::sort(grid.begin(), grid.end());
  grid.erase(std::remove_if(grid.begin(), grid.end(),
                            [&](double x) { return !(x > 0) || x > 2 * hi; }),
             grid.end());

  std::vector<double> roots;
  double px = 0, pf = kNaN;
  for (double x : grid) {
    double fv = m.f(x);
    if (std::isnan(fv)) {
      pf = kNaN;
      continue;
    }
    if (fv == 0) {
      roots.push_back(x);
    } else if (!std::isnan(pf) && (pf < 0) != (fv < 0)) {
      double lo = px, hi2 = x, flo = pf;
      bool valid = true;
      for (int it = 0; it < 200 && hi2 - lo > 1e-16 * hi2; ++it) {
        double mid = 0.5 * (lo + hi2);
        double fm = m.f(mid);
        if (std::isnan(fm)) {
          valid = false;  // an excluded band sits inside; not a crossing
          break;
        }
        ((fm < 0) == (flo < 0) ? (lo = mid, flo = fm) : hi2 = mid);
      }
      if (valid) roots.push_back(0.5 * (lo + hi2));
    }
    px = x;
    pf = fv;
  }

  // The exact double root at the kink leaves no sign change; accept the
  // kink itself when the defect there is at the solve's noise floor.
  if (kink > 0) {
    double fk = m.f(kink);
    if (!std::isnan(fk) && std::abs(fk) <= 1e-11 * std::max(1.0, kink))
      roots.push_back(kink);
  }

  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots)
    if (out.empty() || r - out.back() > 1e-9 * std::max(1.0, r))
      out.push_back(r);
  return out;
}

MinimizerSolution hyl_materialize(const ModelParams& p, const HylMap& m,
                                  double delta, const SolveOptions& o) {
  const double eta = m.eta_of(delta);
  MinimizerSolution s;
  s.delta_star = delta;
  s.lower_branch = m.flips;
  s.xi = CycleCounts::zeros(o.k_max);
  for (std::int64_t k = 1; k <= o.k_max; ++k) {
    double v = m.v_at(double(k), eta);
    double wk;
    if (m.flipped(k))
      wk = -lambert_w(WBranch::Lower, -v);
    else
      wk = v == 0 ? 0.0 : -lambert_w(WBranch::Principal, -v);
    s.xi.values[size_t(k - 1)] = wk / (m.b * m.w.beta * double(k) * double(k));
  }
  if (o.use_tail) {
    s.xi.tail = CycleCounts::Tail::Hyl;
    s.xi.tail_eta = eta;
    s.xi.tail_b = m.b;
  }
  s.density = density(m.w, s.xi).as_double();
  s.residual = std::abs(s.density - delta);
  s.objective = rate_model(p, s.xi, 0).as_double();
  return s;
}

void enumerate_patterns(int j_max, int s_max, std::int64_t limit,
                        std::vector<std::vector<std::int64_t>>& out) {
  out.push_back({});
  std::vector<std::int64_t> cur;
  auto rec = [&](auto&& self, int from) -> void {
    if (int(cur.size()) >= s_max) return;
    for (int j = from; j <= j_max; ++j) {
      if (limit > 0 && j > limit) break;
      cur.push_back(j);
      out.push_back(cur);
      self(self, j + 1);
      cur.pop_back();
    }
  };
  rec(rec, 1);
}

}  // namespace

MinimizerSolution zero_ideal(const ModelParams& p, const SolveOptions& o) {
  p.validate();
  if (p.model != Model::Ideal) throw DomainError("zero_ideal needs model = ideal");
  check_k_max(o);
  const WeightSeq w(p);
  MinimizerSolution s = materialize_ideal_form(p, w, p.mu_eff(), 1.0, o);
  s.residual = 0;
  return s;
}

MinimizerSolution zero_cmf(const ModelParams& p, const SolveOptions& o) {
  p.validate();
  if (p.model != Model::CMF) throw DomainError("zero_cmf needs model = cmf");
  check_k_max(o);
  const WeightSeq w(p);
  const double mu = p.mu_eff();
  double qb;
  if (o.use_tail) {
    qb = w.qbar(mu);
  } else {
    Kahan acc;
    for (std::int64_t k = 1; k <= o.k_max; ++k) acc.add(w.q(k, mu));
    qb = acc.s;
  }
  const double Kt = p.a * p.beta * qb;
  const double c = Kt == 0 ? 1.0 : lambert_w(WBranch::Principal, Kt) / Kt;
  MinimizerSolution s = materialize_ideal_form(p, w, mu, c, o);
  s.cmf_scale = c;
  s.cmf_total = c * qb;
  s.residual = std::abs(c - std::exp(-p.a * p.beta * c * qb));
  return s;
}

MinimizerSolution zero_pmf(const ModelParams& p, const SolveOptions& o) {
  p.validate();
  if (p.model != Model::PMF) throw DomainError("zero_pmf needs model = pmf");
  check_k_max(o);
  const WeightSeq w(p);
  const double mu = p.mu_eff();
  const PmfMap m{w, p.a, mu, o.use_tail ? -1 : o.k_max};

  double delta;
  bool on_plateau = false;
  if (p.a == 0) {
    if (mu > 0)
      throw DomainError("rate function unbounded: a = 0 and mu + alpha > 0");
    delta = m.h_at_tilt(mu);
  } else {
    const double plateau = m.h_at_tilt(0.0);  // +inf in low dimension
    if (std::isfinite(plateau) && mu >= p.a * plateau) {
      delta = plateau;
      on_plateau = true;
    } else {
      // h is flat left of mu/a and strictly decreasing to its right, so
      // f(delta) = delta - h(delta) changes sign exactly once.
      double lo = std::max(0.0, mu / p.a);
      double hi = std::max(2 * lo, 1.0);
      while (hi - m.h(hi) <= 0) {
        hi *= 2;
        if (hi > 1e300) throw SolverError("pmf: consistency point diverges");
      }
      for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (mid - m.h(mid) < 0 ? lo : hi) = mid;
      }
      delta = 0.5 * (lo + hi);
      if (o.use_tail) {
        // Newton polish with the closed-form slope of the series.
        for (int it = 0; it < 3; ++it) {
          double alpha = p.beta * (p.a * delta - mu);
          if (!(alpha > 0)) break;
          double f = delta - m.h(delta);
          double fp =
              1 + p.beta * p.a * bose_g_finite(w.d / 2.0 - 1, alpha) / w.lat;
          double step = f / fp;
          if (!std::isfinite(step)) break;
          delta -= step;
          if (std::abs(step) <= 1e-16 * delta) break;
        }
      }
    }
  }

  const double eta = std::isfinite(delta) ? m.tilt(delta) : std::min(0.0, mu);
  MinimizerSolution s = materialize_ideal_form(p, w, eta, 1.0, o);
  s.delta_star = delta;
  s.plateau = on_plateau;
  s.residual = std::isfinite(delta) ? std::abs(m.h(delta) - delta) : 0.0;
  return s;
}

std::vector<MinimizerSolution> hyl_solutions(const ModelParams& p,
                                             const SolveOptions& o) {
  p.validate();
  if (p.model != Model::HYL) throw DomainError("hyl_solutions needs model = hyl");
  check_k_max(o);

  if (p.b == 0) {
    // The counterterm vanishes; the stationarity system is the PMF one.
    ModelParams q = p;
    q.model = Model::PMF;
    MinimizerSolution s = zero_pmf(q, o);
    s.objective = rate_model(p, s.xi, 0).as_double();
    return {s};
  }

  const WeightSeq w(p);
  const double mu = p.mu_eff();
  const std::int64_t j_head = std::max<std::int64_t>(64, o.hyl_j_max);
  const std::int64_t k_limit = o.use_tail ? -1 : o.k_max;

  std::vector<std::vector<std::int64_t>> patterns;
  enumerate_patterns(o.hyl_j_max, o.hyl_s_max, o.use_tail ? 0 : o.k_max,
                     patterns);

  std::vector<MinimizerSolution> out;
  for (auto& fl : patterns) {
    HylMap m{w, p.a, p.b, mu, j_head, k_limit, std::move(fl)};
    for (double r : find_fixed_points(m, o)) {
      MinimizerSolution s = hyl_materialize(p, m, r, o);
      if (std::isnan(s.objective)) continue;
      out.push_back(std::move(s));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const MinimizerSolution& x, const MinimizerSolution& y) {
              if (x.objective != y.objective) return x.objective < y.objective;
              return *x.delta_star < *y.delta_star;
            });
  if (!out.empty()) {
    // Objective ties go to the smaller density, and are never unique.
    const double band = o.tol * std::max(1.0, std::abs(out[0].objective));
    size_t pick = 0;
    for (size_t i = 1; i < out.size(); ++i)
      if (out[i].objective - out[0].objective <= band &&
          *out[i].delta_star < *out[pick].delta_star)
        pick = i;
    if (pick != 0) std::swap(out[0], out[pick]);
    bool uniq = out.size() == 1 || out[1].objective - out[0].objective > band;
    for (auto& s : out) s.unique = uniq;
  }
  return out;
}

MinimizerSolution zero_hyl(const ModelParams& p, const SolveOptions& o) {
  auto sols = hyl_solutions(p, o);
  if (sols.empty()) throw SolverError("hyl: no stationary solution found");
  return std::move(sols.front());
}

MinimizerSolution find_zero(const ModelParams& p, const SolveOptions& o) {
  switch (p.model) {
    case Model::Ideal: return zero_ideal(p, o);
    case Model::CMF: return zero_cmf(p, o);
    case Model::PMF: return zero_pmf(p, o);
    case Model::HYL: return zero_hyl(p, o);
  }
  throw DomainError("unknown model");
}

double hyl_beta_star(int d, double b) {
  if (d < 3) throw DomainError("beta_star needs d >= 3");
  if (!(b > 0) || !std::isfinite(b)) throw DomainError("beta_star needs b > 0");
  constexpr double kPi = 3.14159265358979323846;
  return std::pow(b * b * std::exp(2.0) / std::pow(4 * kPi, double(d)),
                  1.0 / (d - 2));
}

double hyl_kink_density(const ModelParams& p) {
  p.validate();
  if (p.model != Model::HYL) throw DomainError("kink density needs model = hyl");
  if (p.b == 0) throw DomainError("kink density needs b > 0");
  if (p.d < 3) throw DomainError("kink density diverges for d < 3");
  const WeightSeq w(p);
  const HylMap m{w, p.a, p.b, 0.0, 64, -1, {}};
  double g = m.g_at_eta(0.0);
  if (std::isnan(g))
    throw DomainError("kink outside the W domain: beta below beta_star");
  return g;
}

double hyl_mu_bar(const ModelParams& p) { return p.a * hyl_kink_density(p); }

std::vector<HylDomainGap> hyl_domain_gaps(const ModelParams& p,
                                          std::int64_t j_max) {
  p.validate();
  if (p.model != Model::HYL || p.b == 0) return {};
  const WeightSeq w(p);
  const double mu = p.mu_eff();
  const HylMap m{w, p.a, p.b, mu, 1, -1, {}};
  std::vector<HylDomainGap> gaps;
  for (std::int64_t j = 1; j <= j_max; ++j) {
    double vb = m.vpref(double(j));
    if (vb <= kInvE) continue;  // and so is every larger j
    // v_j(eta) > 1/e for eta above eta_s; eta(delta) is tent-shaped with
    // its peak 0 at the kink, so the gap is an interval around the kink.
    double etas = -(1 + std::log(vb)) / (w.beta * double(j));
    double lo = (mu + etas * (p.a - p.b) / p.b) / p.a;
    double hi = (mu - etas) / p.a;
    if (hi <= 0) continue;
    gaps.push_back({j, std::max(0.0, lo), hi});
  }
  return gaps;
}

FamilyScan hyl_family_scan_grid(const ModelParams& p,
                                std::span<const double> mu_grid,
                                const SolveOptions& o, int threads) {
  ModelParams q = p;
  q.alpha = 0;
  q.mu = mu_grid.empty() ? 0.0 : mu_grid.front();
  q.validate();
  if (q.model != Model::HYL || !(q.b > 0))
    throw DomainError("family scan needs model = hyl with b > 0");
  for (size_t i = 0; i + 1 < mu_grid.size(); ++i)
    if (!(mu_grid[i] < mu_grid[i + 1]))
      throw DomainError("family scan needs a strictly increasing mu grid");
  const WeightSeq w(q);
  const double p0 = w.qbar(0) / q.beta;  // free pressure, the candidates' anchor

  std::vector<std::vector<MinimizerSolution>> per_mu(mu_grid.size());
  parallel_for(mu_grid.size(), threads, [&](size_t i) {
    ModelParams qi = q;
    qi.mu = mu_grid[i];
    per_mu[i] = hyl_solutions(qi, o);
    std::sort(per_mu[i].begin(), per_mu[i].end(),
              [](const MinimizerSolution& x, const MinimizerSolution& y) {
                return *x.delta_star < *y.delta_star;
              });
  });

  FamilyScan scan;
  char buf[160];
  int next_family = 0;
  std::vector<std::pair<int, double>> live;  // (family id, delta at previous mu)
  int prev_count = -1, prev_argmax = -1;
  double prev_mu = 0;

  for (size_t i = 0; i < mu_grid.size(); ++i) {
    const double mu = mu_grid[i];
    auto& sols = per_mu[i];

    // Continue each solution from the nearest live family, tolerating a
    // 5% relative jump in delta. Leftover solutions open new families.
    std::vector<int> claim(sols.size(), -1);
    std::vector<char> used(live.size(), 0);
    for (size_t s = 0; s < sols.size(); ++s) {
      double d = *sols[s].delta_star;
      int best = -1;
      double bestgap = 0.05 * std::max(1.0, std::abs(d));
      for (size_t f = 0; f < live.size(); ++f) {
        if (used[f]) continue;
        double gap = std::abs(live[f].second - d);
        if (gap <= bestgap) bestgap = gap, best = int(f);
      }
      if (best >= 0) {
        used[size_t(best)] = 1;
        claim[s] = live[size_t(best)].first;
        // A runner-up family at a comparable distance means the
        // continuation is not well determined at this grid spacing.
        for (size_t f = 0; f < live.size(); ++f) {
          double gap = std::abs(live[f].second - d);
          if (!used[f] && gap <= 0.05 * std::max(1.0, std::abs(d)) &&
              bestgap > 0.25 * gap) {
            std::snprintf(buf, sizeof buf,
                          "ambiguous continuation at mu=%.17g delta=%.17g",
                          mu, d);
            scan.warnings.push_back(buf);
            break;
          }
        }
      }
    }
    std::vector<std::pair<int, double>> next_live;
    double best_pressure = -kInf;
    int argmax = -1;
    for (size_t s = 0; s < sols.size(); ++s) {
      FamilyPoint pt;
      pt.mu = mu;
      pt.family = claim[s] >= 0 ? claim[s] : next_family++;
      pt.delta = *sols[s].delta_star;
      pt.density = sols[s].density;
      pt.objective = sols[s].objective;
      pt.pressure = p0 - sols[s].objective / q.beta;
      pt.lower_branch = sols[s].lower_branch;
      if (pt.pressure > best_pressure)
        best_pressure = pt.pressure, argmax = pt.family;
      next_live.emplace_back(pt.family, pt.delta);
      scan.points.push_back(std::move(pt));
    }
    live = std::move(next_live);

    const int count = int(sols.size());
    if (prev_count >= 0 && count != prev_count)
      scan.folds.push_back({prev_mu, mu, prev_count, count});
    if (prev_argmax >= 0 && argmax >= 0 && argmax != prev_argmax &&
        !scan.branch_switch_mu)
      scan.branch_switch_mu = mu;
    prev_count = count;
    if (argmax >= 0) prev_argmax = argmax;
    prev_mu = mu;
  }
  return scan;
}

FamilyScan hyl_family_scan(const ModelParams& p, double mu_lo, double mu_hi,
                           int n_points, const SolveOptions& o, int threads) {
  if (!(mu_hi > mu_lo) || !std::isfinite(mu_lo) || !std::isfinite(mu_hi))
    throw DomainError("family scan needs a finite mu interval");
  if (n_points < 2) throw DomainError("family scan needs at least 2 points");
  std::vector<double> grid(static_cast<size_t>(n_points));
  for (int i = 0; i < n_points; ++i)
    grid[size_t(i)] = mu_lo + (mu_hi - mu_lo) * double(i) / (n_points - 1);
  return hyl_family_scan_grid(p, grid, o, threads);
}

}  // namespace bosegas
