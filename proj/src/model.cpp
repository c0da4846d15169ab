#include "bosegas/model.hpp"

#include <cmath>
#include <stdexcept>

#include "bosegas/errors.hpp"
#include "bosegas/specfun.hpp"

namespace bosegas {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Kahan {
  double s = 0, c = 0;
  void add(double x) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

// Tail sums for the stationary HYL form x_k = -W0(-v_k)/(b beta k^2) with
// v_k = (b beta / lat) k^(1-d/2) e^(beta eta k). Terms are summed
// explicitly until v is small and decreasing, then the W0 Taylor series
// w = sum_m a_m v^m (a_m = m^(m-1)/m!, all positive) turns each power of v
// into a polylog-type tail:
//   S0 = sum_m a_m r^(m-1) / lat * T(2 + m(d/2-1), m beta|eta|, k)
//   S1 = sum_m a_m r^(m-1) / lat * T(1 + m(d/2-1), m beta|eta|, k)
//   S2 = sum_m A_m r^(m-2) / lat^2 * T(2 + m(d/2-1), m beta|eta|, k)
// with r = b beta / lat, T the bose_tail sums, and A_m the coefficients of
// w^2. At the switch point v < 0.045, so e*v < 0.13 and twenty terms put
// the truncation far below double precision.
TailSums hyl_tail_sums(const WeightSeq& w, double b, double eta,
                       std::int64_t k_from, bool density_only) {
  if (!(b > 0)) throw DomainError("hyl tail needs b > 0");
  if (eta > 0) throw DomainError("hyl tail needs eta <= 0");
  const double r = b * w.beta / w.lat;
  auto v_of = [&](double k) {
    return r * std::pow(k, 1.0 - w.d / 2.0) * std::exp(w.beta * eta * k);
  };

  Kahan s0, s1, s2;
  std::int64_t k = k_from;
  const double vcut = 0.045;
  const std::int64_t cap = k_from + (std::int64_t(1) << 22);
  while (true) {
    double v = v_of(double(k));
    if (v < vcut && v_of(double(k) + 1) <= v) break;
    if (k >= cap) throw SolverError("hyl tail: weights fail to decay");
    double wk = -lambert_w(WBranch::Principal, -v);
    double xk = wk / (b * w.beta * double(k) * double(k));
    s1.add(double(k) * xk);
    if (!density_only) {
      s0.add(xk);
      s2.add(double(k) * double(k) * xk * xk);
    }
    ++k;
  }

  constexpr int M = 20;
  double am[M + 1], Am[M + 1];
  am[0] = Am[0] = Am[1] = 0;
  for (int m = 1; m <= M; ++m)
    am[m] = std::exp((m - 1) * std::log(double(m)) - std::lgamma(double(m) + 1));
  for (int m = 2; m <= M; ++m) {
    Am[m] = 0;
    for (int i = 1; i < m; ++i) Am[m] += am[i] * am[m - i];
  }

  TailSums t;
  t.S0 = s0.s;
  t.S1 = s1.s;
  t.S2 = s2.s;
  double rpow = 1;  // r^(m-1)
  for (int m = 1; m <= M; ++m) {
    const double n2 = 2 + m * (w.d / 2.0 - 1);
    const double alpha = -m * w.beta * eta;
    const double T1 = bose_tail(n2 - 1, alpha, k);
    const double d1 = am[m] * rpow / w.lat * T1;
    t.S1 += d1;
    if (!density_only) {
      const double T2 = bose_tail(n2, alpha, k);
      t.S0 += am[m] * rpow / w.lat * T2;
      if (m >= 2) t.S2 += Am[m] * rpow / (r * w.lat * w.lat) * T2;
    }
    rpow *= r;
    // Every term is positive and the ratio shrinks like e*v(k) < 0.13, so
    // once a term stops mattering the rest never will. T1 bounds T2's
    // relative size, which makes the density increment the right sentinel.
    if (d1 <= 1e-18 * t.S1) break;
  }
  return t;
}

struct HamParts {
  ExtReal D;
  ExtReal H;
};

HamParts ham_parts(const ModelParams& p, const CycleCounts& x) {
  const WeightSeq w(p);
  switch (p.model) {
    case Model::Ideal:
      return {density(w, x), ExtReal::finite(0)};
    case Model::CMF: {
      double s = total_count(w, x);
      return {density(w, x), ExtReal::from_double(0.5 * p.a * s * s)};
    }
    case Model::PMF:
    case Model::HYL: {
      ExtReal D = density(w, x);
      const double mu = p.mu_eff();
      if (D.is_inf()) {
        // Quadratic part dominates: a D^2/2 - b sum k^2 x^2 / 2 is at least
        // (a-b) D^2 / 2 because sum k^2 x_k^2 <= (sum k x_k)^2.
        double quad = (p.model == Model::HYL) ? p.a - p.b : p.a;
        if (quad > 0 || mu < 0) return {D, ExtReal::inf()};
        if (mu == 0) return {D, ExtReal::finite(0)};
        throw DomainError(
            "hamiltonian unbounded below: a = 0 with mu + alpha > 0");
      }
      double Dv = D.value();
      double h = -mu * Dv + 0.5 * p.a * Dv * Dv;
      if (p.model == Model::HYL) h -= 0.5 * p.b * sum_k2x2(w, x);
      return {D, ExtReal::from_double(h)};
    }
  }
  throw std::logic_error("bad model");
}

}  // namespace

const char* model_name(Model m) {
  switch (m) {
    case Model::Ideal: return "ideal";
    case Model::CMF: return "cmf";
    case Model::PMF: return "pmf";
    case Model::HYL: return "hyl";
  }
  return "?";
}

std::optional<Model> model_from_name(std::string_view s) {
  if (s == "ideal") return Model::Ideal;
  if (s == "cmf") return Model::CMF;
  if (s == "pmf") return Model::PMF;
  if (s == "hyl") return Model::HYL;
  return std::nullopt;
}

void ModelParams::validate() const {
  if (d < 1) throw DomainError("d must be a positive integer");
  if (!(beta > 0) || !std::isfinite(beta))
    throw DomainError("beta must be positive and finite");
  if (!std::isfinite(mu)) throw DomainError("mu must be finite");
  if (!std::isfinite(alpha) || alpha > 0)
    throw DomainError("alpha must be <= 0");
  if (!std::isfinite(a) || a < 0) throw DomainError("a must be >= 0");
  if (!std::isfinite(b) || b < 0) throw DomainError("b must be >= 0");
  switch (model) {
    case Model::Ideal:
    case Model::CMF:
      if (mu_eff() > 0)
        throw DomainError("ideal and cmf need mu + alpha <= 0");
      break;
    case Model::PMF:
      break;
    case Model::HYL:
      if (!(a > b)) throw DomainError("hyl needs a > b");
      break;
  }
}

WeightSeq::WeightSeq(int d_, double beta_)
    : d(d_), beta(beta_), lat(std::pow(4 * kPi * beta_, d_ / 2.0)) {
  if (d < 1 || !(beta > 0) || !std::isfinite(beta))
    throw DomainError("weights need d >= 1 and beta > 0");
}

WeightSeq::WeightSeq(const ModelParams& p) : WeightSeq(p.d, p.beta) {}

double WeightSeq::q(std::int64_t k, double eta) const {
  if (k < 1) throw DomainError("cycle index must be >= 1");
  return std::exp(beta * eta * double(k)) /
         (lat * std::pow(double(k), 1 + d / 2.0));
}

double WeightSeq::log_q(std::int64_t k, double eta) const {
  if (k < 1) throw DomainError("cycle index must be >= 1");
  return beta * eta * double(k) - std::log(lat) -
         (1 + d / 2.0) * std::log(double(k));
}

double WeightSeq::qbar(double eta) const {
  return bose_g_finite(1 + d / 2.0, -beta * eta) / lat;
}

double WeightSeq::qdensity(double eta) const {
  return bose_g(d / 2.0, -beta * eta).as_double() / lat;
}

double WeightSeq::qbar_tail(double eta, std::int64_t k_from) const {
  return bose_tail(1 + d / 2.0, -beta * eta, k_from) / lat;
}

double WeightSeq::qdensity_tail(double eta, std::int64_t k_from) const {
  return bose_tail(d / 2.0, -beta * eta, k_from) / lat;
}

CycleCounts CycleCounts::zeros(std::int64_t k_max) {
  CycleCounts x;
  x.values.assign(static_cast<size_t>(k_max), 0.0);
  return x;
}

CycleCounts CycleCounts::truncated(std::vector<double> v) {
  CycleCounts x;
  x.values = std::move(v);
  return x;
}

CycleCounts CycleCounts::ideal(const WeightSeq& w, double eta,
                               std::int64_t k_max, double scale) {
  CycleCounts x;
  x.values.reserve(static_cast<size_t>(k_max));
  for (std::int64_t k = 1; k <= k_max; ++k) x.values.push_back(scale * w.q(k, eta));
  x.tail = Tail::Ideal;
  x.tail_eta = eta;
  x.tail_scale = scale;
  return x;
}

TailSums tail_sums(const WeightSeq& w, const CycleCounts& x) {
  const std::int64_t K = x.k_max();
  switch (x.tail) {
    case CycleCounts::Tail::Zero:
      return {};
    case CycleCounts::Tail::Ideal: {
      const double c = x.tail_scale, eta = x.tail_eta;
      TailSums t;
      t.S0 = c * w.qbar_tail(eta, K + 1);
      t.S1 = c * w.qdensity_tail(eta, K + 1);
      t.S2 = c * c * bose_tail(double(w.d), -2 * w.beta * eta, K + 1) /
             (w.lat * w.lat);
      return t;
    }
    case CycleCounts::Tail::Hyl:
      return hyl_tail_sums(w, x.tail_b, x.tail_eta, K + 1, false);
  }
  throw std::logic_error("bad tail kind");
}

double tail_density(const WeightSeq& w, const CycleCounts& x) {
  if (x.tail == CycleCounts::Tail::Hyl)
    return hyl_tail_sums(w, x.tail_b, x.tail_eta, x.k_max() + 1, true).S1;
  return tail_sums(w, x).S1;
}

ExtReal density(const WeightSeq& w, const CycleCounts& x) {
  Kahan acc;
  for (std::int64_t k = 1; k <= x.k_max(); ++k) acc.add(double(k) * x.at(k));
  return ExtReal::from_double(acc.s + tail_density(w, x));
}

double total_count(const WeightSeq& w, const CycleCounts& x) {
  Kahan acc;
  for (std::int64_t k = 1; k <= x.k_max(); ++k) acc.add(x.at(k));
  return acc.s + tail_sums(w, x).S0;
}

double sum_k2x2(const WeightSeq& w, const CycleCounts& x) {
  Kahan acc;
  for (std::int64_t k = 1; k <= x.k_max(); ++k) {
    double kx = double(k) * x.at(k);
    acc.add(kx * kx);
  }
  return acc.s + tail_sums(w, x).S2;
}

ExtReal hamiltonian(const ModelParams& p, const CycleCounts& x) {
  p.validate();
  return ham_parts(p, x).H;
}

ExtReal hamiltonian_lsc(const ModelParams& p, const CycleCounts& x) {
  p.validate();
  HamParts parts = ham_parts(p, x);
  if (p.model == Model::Ideal || p.model == Model::CMF) return parts.H;
  if (!parts.H.is_finite() || !parts.D.is_finite()) return parts.H;
  double gap = p.mu_eff() - p.a * parts.D.value();
  if (gap <= 0) return parts.H;
  if (p.model == Model::PMF && p.a == 0)
    throw DomainError("lsc correction needs a > 0");
  double denom = (p.model == Model::PMF) ? 2 * p.a : 2 * (p.a - p.b);
  return ExtReal::from_double(parts.H.value() - gap * gap / denom);
}

ExtReal rate_ideal(const WeightSeq& w, const CycleCounts& x, double mu) {
  if (mu > 0) throw DomainError("rate functional needs mu <= 0");
  Kahan acc;
  const std::int64_t K = x.k_max();
  for (std::int64_t k = 1; k <= K; ++k) {
    double xk = x.at(k);
    if (xk < 0) return ExtReal::inf();
    if (xk == 0) continue;  // x log x -> 0
    acc.add(xk * (std::log(xk) - w.log_q(k, mu) - 1));
  }
  double total = acc.s + w.qbar(mu);

  switch (x.tail) {
    case CycleCounts::Tail::Zero:
      break;
    case CycleCounts::Tail::Ideal: {
      const double c = x.tail_scale, eta = x.tail_eta;
      if (c < 0) return ExtReal::inf();
      if (c > 0) {
        // x_k (log(x_k/q_k^mu) - 1) = c q_k^eta (log c - 1 + beta (eta-mu) k)
        total += (std::log(c) - 1) * c * w.qbar_tail(eta, K + 1);
        double coef = w.beta * (eta - mu);
        if (coef != 0) total += coef * c * w.qdensity_tail(eta, K + 1);
      }
      break;
    }
    case CycleCounts::Tail::Hyl: {
      // log(x_k / q_k^0) = beta eta k + w_k exactly (w e^-w = v), so the
      // tail of I collapses to beta (eta-mu) S1 + b beta S2 - S0.
      TailSums t = tail_sums(w, x);
      double coef = w.beta * (x.tail_eta - mu);
      if (coef != 0) total += coef * t.S1;
      total += x.tail_b * w.beta * t.S2 - t.S0;
      break;
    }
  }
  return ExtReal::from_double(total);
}

ExtReal rate_ideal(const ModelParams& p, const CycleCounts& x) {
  p.validate();
  const WeightSeq w(p);
  return rate_ideal(w, x, p.mu_eff());
}

ExtReal rate_model(const ModelParams& p, const CycleCounts& x,
                   double normalizer) {
  p.validate();
  const WeightSeq w(p);
  ExtReal base, ham;
  switch (p.model) {
    case Model::Ideal:
      base = rate_ideal(w, x, p.mu_eff());
      ham = ExtReal::finite(0);
      break;
    case Model::CMF:
      base = rate_ideal(w, x, p.mu_eff());
      ham = hamiltonian(p, x);
      break;
    case Model::PMF:
    case Model::HYL:
      base = rate_ideal(w, x, 0.0);
      ham = hamiltonian_lsc(p, x);
      break;
  }
  if (base.is_undefined() || ham.is_undefined()) return ExtReal::undefined();
  // H_lsc is bounded below whenever the model is (a > b), so inf - inf
  // cannot occur here.
  if (base.is_inf() || ham.is_inf()) return ExtReal::inf();
  return ExtReal::from_double(base.value() + p.beta * ham.value() -
                              normalizer);
}

double cumulant_seq(const ModelParams& p, std::span<const double> t) {
  p.validate();
  const double mu = p.mu_eff();
  if (mu > 0) throw DomainError("cumulant needs mu + alpha <= 0");
  const WeightSeq w(p);
  Kahan acc;
  for (size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i])) throw DomainError("tilt entries must be finite");
    acc.add(w.q(std::int64_t(i) + 1, mu) * std::expm1(t[i]));
  }
  return acc.s;
}

ExtReal cumulant_density(const ModelParams& p, double t) {
  p.validate();
  const double mu = p.mu_eff();
  if (mu > 0) throw DomainError("cumulant needs mu + alpha <= 0");
  if (!std::isfinite(t)) throw DomainError("t must be finite");
  if (t > -p.beta * mu) return ExtReal::inf();
  const WeightSeq w(p);
  double shifted = mu + t / p.beta;
  if (shifted > 0) shifted = 0;  // only rounding can push it past the edge
  return ExtReal::finite(w.qbar(shifted) - w.qbar(mu));
}

}  // namespace bosegas
