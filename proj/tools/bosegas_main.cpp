// command-line front end: single-point evaluation, grid sweeps, sampling
// runs, special-function probes and the acceptance suite, serialised as
// CSV (with # metadata comments) or JSON. Every run echoes its fully
// resolved configuration, including defaults and the mu + alpha reduction.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bosegas/errors.hpp"
#include "bosegas/minimize.hpp"
#include "bosegas/model.hpp"
#include "bosegas/sim.hpp"
#include "bosegas/specfun.hpp"
#include "bosegas/thermo.hpp"
#include "bosegas/verify.hpp"

using nlohmann::json;
using namespace bosegas;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// extended reals: CSV strings "inf"/"undefined", JSON tagged objects
std::string csv_ext(const ExtReal& v) {
  if (v.is_inf()) return "inf";
  if (v.is_undefined()) return "undefined";
  return fmt17(v.value());
}

json json_ext(const ExtReal& v) {
  if (v.is_inf()) return json{{"kind", "inf"}};
  if (v.is_undefined()) return json{{"kind", "undefined"}};
  return json{{"kind", "finite"}, {"value", v.value()}};
}

// all flags shared by the model-evaluating subcommands
struct Common {
  std::string model = "ideal";
  int d = 3;
  double beta = 1.0;
  bool beta_norm = false;
  double mu = 0.0;
  double alpha = 0.0;
  double a = 0.0;
  double b = 0.0;
  std::int64_t kmax = 32;
  double tol = 1e-13;
  std::string format = "csv";
  std::string out;
  int threads = 1;
  std::uint64_t seed = 1;

  ModelParams params() const {
    ModelParams p;
    p.model = *model_from_name(model);
    p.d = d;
    p.beta = beta_norm ? 1.0 / (4.0 * 3.14159265358979324) : beta;
    p.mu = mu;
    p.alpha = alpha;
    p.a = a;
    p.b = b;
    return p;
  }

  SolveOptions solve() const {
    SolveOptions o;
    o.k_max = kmax;
    o.tol = tol;
    return o;
  }

  bool is_json() const { return format == "json"; }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--model", c.model, "ideal, cmf, pmf or hyl")
      ->check(CLI::IsMember({"ideal", "cmf", "pmf", "hyl"}));
  sub->add_option("--d", c.d, "dimension");
  auto* beta = sub->add_option("--beta", c.beta, "inverse temperature");
  sub->add_flag("--beta-norm", c.beta_norm,
                "set beta = 1/(4 pi), so (4 pi beta)^(d/2) = 1")
      ->excludes(beta);
  sub->add_option("--mu", c.mu, "chemical potential");
  sub->add_option("--alpha", c.alpha, "reference tilt, <= 0");
  sub->add_option("--a", c.a, "mean-field coupling");
  sub->add_option("--b", c.b, "counterterm coupling (hyl)");
  sub->add_option("--kmax", c.kmax, "stored head length of sequences")
      ->check(CLI::PositiveNumber);
  sub->add_option("--tol", c.tol, "relative solver tolerance");
  sub->add_option("--format", c.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", c.out, "write output to this file");
  sub->add_option("--seed", c.seed, "rng seed (sampling runs)");
  sub->add_option("--threads", c.threads, "internal parallelism cap")
      ->check(CLI::PositiveNumber);
}

json config_json(const Common& c, const char* sub) {
  ModelParams p = c.params();
  return json{{"subcommand", sub},
              {"model", model_name(p.model)},
              {"d", p.d},
              {"beta", p.beta},
              {"mu", p.mu},
              {"alpha", p.alpha},
              {"mu_eff", p.mu_eff()},
              {"a", p.a},
              {"b", p.b},
              {"k_max", c.kmax},
              {"tol", c.tol},
              {"threads", c.threads},
              {"format", c.format}};
}

std::string config_comment(const Common& c, const char* sub) {
  ModelParams p = c.params();
  std::string s = "# subcommand=";
  s += sub;
  s += " model=";
  s += model_name(p.model);
  s += " d=" + std::to_string(p.d);
  s += " beta=" + fmt17(p.beta);
  s += " mu=" + fmt17(p.mu);
  s += " alpha=" + fmt17(p.alpha);
  s += " mu_eff=" + fmt17(p.mu_eff());
  s += " a=" + fmt17(p.a);
  s += " b=" + fmt17(p.b);
  s += " k_max=" + std::to_string(c.kmax);
  s += " tol=" + fmt17(c.tol);
  s += " threads=" + std::to_string(c.threads);
  s += " format=" + c.format;
  return s;
}

struct Sink {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw DomainError("cannot open output file: " + path);
      os = &file;
    }
  }
  std::ostream& out() { return *os; }
};

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n), lo);
  for (int i = 1; i < n; ++i)
    g[std::size_t(i)] = lo + (hi - lo) * i / double(n - 1);
  return g;
}

// ------------------------------------------------------------------ zero

json tail_json(const CycleCounts& x) {
  json t;
  switch (x.tail) {
    case CycleCounts::Tail::Zero:
      t["form"] = "zero";
      break;
    case CycleCounts::Tail::Ideal:
      t["form"] = "ideal";
      t["eta"] = x.tail_eta;
      t["scale"] = x.tail_scale;
      break;
    case CycleCounts::Tail::Hyl:
      t["form"] = "hyl";
      t["eta"] = x.tail_eta;
      t["b"] = x.tail_b;
      break;
  }
  return t;
}

json solution_json(const ModelParams& p, const WeightSeq& w,
                   const MinimizerSolution& s) {
  json xi = json::array();
  for (std::int64_t k = 1; k <= s.xi.k_max(); ++k) xi.push_back(s.xi.at(k));
  json j{{"xi", xi},
         {"tail", tail_json(s.xi)},
         {"objective", s.objective},
         {"density", json_ext(ExtReal::from_double(s.density))},
         {"residual", s.residual},
         {"minimizer_unique", s.unique},
         {"plateau", s.plateau}};
  if (s.delta_star) j["delta_star"] = *s.delta_star;
  if (p.model == Model::HYL) j["lower_branch"] = s.lower_branch;
  if (p.model == Model::CMF) {
    double K = p.a * p.beta * w.qbar(p.mu_eff());
    j["K"] = K;
    j["scale"] = s.cmf_scale.value();
    j["total"] = s.cmf_total.value();
  }
  if (p.model == Model::PMF)
    j["fixed_point_form"] =
        "xi_k = q_k(0) exp(beta k min(0, mu_eff - a delta))";
  return j;
}

int run_zero(const Common& c) {
  ModelParams p = c.params();
  SolveOptions o = c.solve();
  WeightSeq w(p);

  std::vector<MinimizerSolution> fam;
  std::vector<HylDomainGap> gaps;
  if (p.model == Model::HYL) {
    fam = hyl_solutions(p, o);
    gaps = hyl_domain_gaps(p, o.hyl_j_max);
  } else {
    fam.push_back(find_zero(p, o));
  }
  const MinimizerSolution& sol = fam.front();
  const bool unique = fam.size() == 1 && sol.unique;

  Sink sink(c.out);
  auto& os = sink.out();
  if (c.is_json()) {
    json j{{"config", config_json(c, "zero")},
           {"solution", solution_json(p, w, sol)},
           {"unique", unique}};
    if (p.model == Model::HYL) {
      json fs = json::array();
      for (const auto& s : fam) fs.push_back(solution_json(p, w, s));
      j["families"] = fs;
      json gs = json::array();
      for (const auto& g : gaps)
        gs.push_back(json{{"j", g.j},
                          {"delta_lo", g.delta_lo},
                          {"delta_hi", g.delta_hi}});
      j["domain_gaps"] = gs;
    }
    os << j.dump(2) << '\n';
    return 0;
  }

  os << config_comment(c, "zero") << '\n';
  os << "# objective=" << fmt17(sol.objective)
     << " density=" << csv_ext(ExtReal::from_double(sol.density))
     << " residual=" << fmt17(sol.residual)
     << " unique=" << (unique ? "true" : "false")
     << " plateau=" << (sol.plateau ? "true" : "false");
  if (sol.delta_star) os << " delta_star=" << fmt17(*sol.delta_star);
  if (p.model == Model::CMF) {
    double K = p.a * p.beta * w.qbar(p.mu_eff());
    os << " K=" << fmt17(K) << " scale=" << fmt17(sol.cmf_scale.value())
       << " total=" << fmt17(sol.cmf_total.value());
  }
  os << '\n';
  if (p.model == Model::PMF)
    os << "# fixed_point_form: xi_k = q_k(0) exp(beta k min(0, mu_eff - a "
          "delta))\n";
  switch (sol.xi.tail) {
    case CycleCounts::Tail::Zero:
      os << "# tail: form=zero\n";
      break;
    case CycleCounts::Tail::Ideal:
      os << "# tail: form=ideal eta=" << fmt17(sol.xi.tail_eta)
         << " scale=" << fmt17(sol.xi.tail_scale) << '\n';
      break;
    case CycleCounts::Tail::Hyl:
      os << "# tail: form=hyl eta=" << fmt17(sol.xi.tail_eta)
         << " b=" << fmt17(sol.xi.tail_b) << '\n';
      break;
  }
  if (p.model == Model::HYL) {
    for (std::size_t i = 0; i < fam.size(); ++i) {
      const auto& s = fam[i];
      os << "# family " << i << ": delta_star="
         << (s.delta_star ? fmt17(*s.delta_star) : "none")
         << " objective=" << fmt17(s.objective) << " lower_branch=[";
      for (std::size_t l = 0; l < s.lower_branch.size(); ++l)
        os << (l ? " " : "") << s.lower_branch[l];
      os << "]\n";
    }
    for (const auto& g : gaps)
      os << "# domain_gap: j=" << g.j << " delta_lo=" << fmt17(g.delta_lo)
         << " delta_hi=" << fmt17(g.delta_hi) << '\n';
  }
  os << "k,xi\n";
  for (std::int64_t k = 1; k <= sol.xi.k_max(); ++k)
    os << k << ',' << fmt17(sol.xi.at(k)) << '\n';
  return 0;
}

// ------------------------------------------------- pressure, sweep tables

const char kSweepHeader[] =
    "mu_eff,pressure,dp_dmu,condensate,regime,model,d,beta,a,b";

void sweep_row_csv(std::ostream& os, const ModelParams& p,
                   const ThermoPoint& t) {
  os << fmt17(t.mu_eff) << ',';
  if (!t.error.empty()) {
    os << "error,error,error,error";
  } else {
    os << fmt17(t.pressure) << ',' << csv_ext(t.dp_dmu) << ','
       << csv_ext(t.condensate) << ',' << regime_name(t.regime);
  }
  os << ',' << model_name(p.model) << ',' << p.d << ',' << fmt17(p.beta)
     << ',' << fmt17(p.a) << ',' << fmt17(p.b) << '\n';
}

json sweep_row_json(const ModelParams& p, const ThermoPoint& t) {
  json j{{"mu_eff", t.mu_eff},
         {"model", model_name(p.model)},
         {"d", p.d},
         {"beta", p.beta},
         {"a", p.a},
         {"b", p.b}};
  if (!t.error.empty()) {
    j["error"] = t.error;
    return j;
  }
  j["pressure"] = t.pressure;
  j["dp_dmu"] = json_ext(t.dp_dmu);
  j["condensate"] = json_ext(t.condensate);
  j["regime"] = regime_name(t.regime);
  j["families"] = t.families;
  return j;
}

int emit_sweep(const Common& c, const char* sub,
               const std::vector<double>& grid, bool periodic,
               const std::string& extra_comment) {
  ModelParams p = c.params();
  SolveOptions o = c.solve();
  std::vector<ThermoPoint> pts = sweep(p, grid, o, c.threads, periodic);

  int failed = 0;
  for (const ThermoPoint& t : pts)
    if (!t.error.empty()) {
      ++failed;
      std::cerr << "mu_eff=" << fmt17(t.mu_eff) << ": " << t.error << '\n';
    }

  Sink sink(c.out);
  auto& os = sink.out();
  if (c.is_json()) {
    json rows = json::array();
    for (const ThermoPoint& t : pts) rows.push_back(sweep_row_json(p, t));
    json j{{"config", config_json(c, sub)}, {"points", rows}};
    os << j.dump(2) << '\n';
  } else {
    os << config_comment(c, sub) << '\n';
    if (!extra_comment.empty()) os << extra_comment << '\n';
    os << kSweepHeader << '\n';
    for (const ThermoPoint& t : pts) sweep_row_csv(os, p, t);
  }
  // per-row markers cover partial failure; only a fully failed grid is fatal
  return failed == int(pts.size()) ? 2 : 0;
}

int run_pressure(const Common& c) {
  std::vector<double> grid = {c.params().mu_eff()};
  return emit_sweep(c, "pressure", grid, false, "");
}

struct SweepFlags {
  double mu_start = 0, mu_stop = 0;
  int points = 0;
  bool periodic = false;
};

int run_sweep(const Common& c, const SweepFlags& f) {
  if (f.points < 2) throw DomainError("sweep needs --points >= 2");
  if (!(f.mu_stop > f.mu_start))
    throw DomainError("sweep needs --mu-stop > --mu-start");
  std::string comment = "# grid: mu_eff from " + fmt17(f.mu_start) + " to " +
                        fmt17(f.mu_stop) + " in " + std::to_string(f.points) +
                        " points";
  return emit_sweep(c, "sweep", linspace(f.mu_start, f.mu_stop, f.points),
                    f.periodic, comment);
}

// --------------------------------------------------------- free-energy

struct RhoFlags {
  double rho = 0, rho_stop = 0;
  int points = 0;
  bool have_stop = false;
};

int run_free_energy(const Common& c, const RhoFlags& f) {
  ModelParams p = c.params();
  SolveOptions o = c.solve();
  std::vector<double> grid;
  if (f.have_stop) {
    if (f.points < 2)
      throw DomainError("a density grid needs --points >= 2");
    if (!(f.rho_stop > f.rho))
      throw DomainError("a density grid needs --rho-stop > --rho");
    grid = linspace(f.rho, f.rho_stop, f.points);
  } else {
    grid = {f.rho};
  }

  std::vector<FreeEnergyPoint> pts;
  pts.reserve(grid.size());
  for (double rho : grid) pts.push_back(free_energy(p, rho, o));

  Sink sink(c.out);
  auto& os = sink.out();
  if (c.is_json()) {
    json rows = json::array();
    for (const FreeEnergyPoint& t : pts) {
      json j{{"rho", t.rho}, {"f", t.f}, {"saturated", t.saturated}};
      if (std::isfinite(t.maximizing_alpha))
        j["maximizing_alpha"] = t.maximizing_alpha;
      else
        j["maximizing_alpha"] = json{{"kind", "-inf"}};
      rows.push_back(j);
    }
    json j{{"config", config_json(c, "free-energy")}, {"points", rows}};
    os << j.dump(2) << '\n';
    return 0;
  }
  os << config_comment(c, "free-energy") << '\n';
  os << "rho,free_energy,maximizing_alpha,saturated,model,d,beta,a,b\n";
  for (const FreeEnergyPoint& t : pts) {
    os << fmt17(t.rho) << ',' << fmt17(t.f) << ','
       << (std::isfinite(t.maximizing_alpha) ? fmt17(t.maximizing_alpha)
                                             : std::string("-inf"))
       << ',' << (t.saturated ? "true" : "false") << ','
       << model_name(p.model) << ',' << p.d << ',' << fmt17(p.beta) << ','
       << fmt17(p.a) << ',' << fmt17(p.b) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------- condensate

int run_condensate(const Common& c, bool periodic) {
  ModelParams p = c.params();
  SolveOptions o = c.solve();
  ExtReal cond = condensate(p, periodic, o);

  Sink sink(c.out);
  auto& os = sink.out();
  if (c.is_json()) {
    json j{{"config", config_json(c, "condensate")},
           {"periodic", periodic},
           {"condensate", json_ext(cond)}};
    os << j.dump(2) << '\n';
    return 0;
  }
  os << config_comment(c, "condensate") << '\n';
  os << "# periodic=" << (periodic ? "true" : "false") << '\n';
  os << "mu_eff,condensate,model,d,beta,a,b\n";
  os << fmt17(p.mu_eff()) << ',' << csv_ext(cond) << ','
     << model_name(p.model) << ',' << p.d << ',' << fmt17(p.beta) << ','
     << fmt17(p.a) << ',' << fmt17(p.b) << '\n';
  return 0;
}

// ------------------------------------------------------------ simulate

struct SimFlags {
  double volume = 1.0;
  std::int64_t samples = 100000;
  std::int64_t burn_in = 10000;
  bool verify_zero = false;
};

int run_simulate(const Common& c, const SimFlags& f) {
  ModelParams p = c.params();
  SimConfig cfg;
  cfg.params = p;
  cfg.volume = f.volume;
  cfg.k_max = static_cast<int>(c.kmax);
  cfg.n_samples = f.samples;
  cfg.burn_in = f.burn_in;
  cfg.seed = c.seed;
  cfg.threads = c.threads;

  SimEstimate est = p.model == Model::Ideal ? sample_ideal(cfg)
                                            : sample_tilted(cfg);

  // z-scores of the sampled means against the computed zero
  std::vector<double> zero, zscore;
  if (f.verify_zero) {
    SolveOptions o = c.solve();
    MinimizerSolution sol = find_zero(p, o);
    for (std::int64_t k = 1; k <= cfg.k_max; ++k) {
      double xk = sol.xi.at(k);
      double se = est.std_error[std::size_t(k - 1)];
      zero.push_back(xk);
      zscore.push_back(se > 0 ? (est.mean[std::size_t(k - 1)] - xk) / se
                              : 0.0);
    }
  }

  Sink sink(c.out);
  auto& os = sink.out();
  if (c.is_json()) {
    json j{{"config", config_json(c, "simulate")},
           {"volume", cfg.volume},
           {"samples", cfg.n_samples},
           {"burn_in", cfg.burn_in},
           {"seed", cfg.seed},
           {"chains", cfg.threads},
           {"means", est.mean},
           {"std_errors", est.std_error},
           {"total_mean", est.total_mean},
           {"total_std_error", est.total_std_error},
           {"diagnostics",
            json{{"acceptance_rate", est.acceptance_rate},
                 {"ess", est.ess},
                 {"tail_bound", est.tail_bound}}}};
    if (f.verify_zero) {
      j["verify_zero"] = json{{"zero", zero}, {"z_scores", zscore}};
    }
    os << j.dump(2) << '\n';
    return 0;
  }
  os << config_comment(c, "simulate") << '\n';
  os << "# volume=" << fmt17(cfg.volume) << " samples=" << cfg.n_samples
     << " burn_in=" << cfg.burn_in << " seed=" << cfg.seed
     << " chains=" << cfg.threads << '\n';
  os << "# total_mean=" << fmt17(est.total_mean)
     << " total_std_error=" << fmt17(est.total_std_error)
     << " acceptance_rate=" << fmt17(est.acceptance_rate)
     << " ess=" << fmt17(est.ess) << " tail_bound=" << fmt17(est.tail_bound)
     << '\n';
  os << (f.verify_zero ? "k,mean,std_error,zero,z_score\n"
                       : "k,mean,std_error\n");
  for (std::int64_t k = 1; k <= cfg.k_max; ++k) {
    os << k << ',' << fmt17(est.mean[std::size_t(k - 1)]) << ','
       << fmt17(est.std_error[std::size_t(k - 1)]);
    if (f.verify_zero)
      os << ',' << fmt17(zero[std::size_t(k - 1)]) << ','
         << fmt17(zscore[std::size_t(k - 1)]);
    os << '\n';
  }
  return 0;
}

// -------------------------------------------------------------- verify

std::string csv_quote(const std::string& s) {
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  q += '"';
  return q;
}

int run_verify(const Common& c, const std::string& only) {
  std::vector<CriterionResult> rs = run_acceptance(only, c.threads);
  if (rs.empty())
    throw DomainError("no acceptance criterion id contains '" + only + "'");

  bool all = true;
  for (const CriterionResult& r : rs) all = all && r.pass;

  Sink sink(c.out);
  auto& os = sink.out();
  if (c.is_json()) {
    json crits = json::array();
    for (const CriterionResult& r : rs) {
      json checks = json::array();
      for (const CheckResult& ck : r.checks)
        checks.push_back(json{{"name", ck.name},
                              {"pass", ck.pass},
                              {"measured", ck.measured},
                              {"bound", ck.bound},
                              {"note", ck.note}});
      crits.push_back(json{{"id", r.id},
                           {"title", r.title},
                           {"pass", r.pass},
                           {"seconds", r.seconds},
                           {"checks", checks}});
    }
    json j{{"config", config_json(c, "verify")},
           {"criteria", crits},
           {"pass", all}};
    os << j.dump(2) << '\n';
  } else {
    os << config_comment(c, "verify") << '\n';
    os << "criterion,check,pass,measured,bound,note\n";
    for (const CriterionResult& r : rs)
      for (const CheckResult& ck : r.checks)
        os << r.id << ',' << csv_quote(ck.name) << ','
           << (ck.pass ? "true" : "false") << ',' << fmt17(ck.measured)
           << ',' << fmt17(ck.bound) << ',' << csv_quote(ck.note) << '\n';
    os << "# " << (all ? "PASS" : "FAIL") << " (" << rs.size()
       << " criteria)\n";
  }
  return all ? 0 : 1;
}

// ------------------------------------------------------------- specfun

struct FnFlags {
  std::string fn;
  double x = 0;
  double n = 0;
};

int run_specfun(const Common& c, const FnFlags& f) {
  json j{{"subcommand", "specfun"},
         {"fn", f.fn},
         {"x", f.x},
         {"format", c.format}};
  std::string csv_head = "fn,n,x,value";
  std::string csv_row;
  if (f.fn == "zeta") {
    double v = zeta(f.x);
    j["value"] = v;
    csv_row = "zeta,," + fmt17(f.x) + ',' + fmt17(v);
  } else if (f.fn == "g") {
    BoseDiag diag;
    ExtReal v = bose_g(f.n, f.x, &diag);
    j["n"] = f.n;
    j["value"] = json_ext(v);
    j["terms"] = diag.terms;
    j["tail_bound"] = diag.tail_bound;
    j["truncated"] = diag.truncated;
    csv_row = "g," + fmt17(f.n) + ',' + fmt17(f.x) + ',' + csv_ext(v);
  } else if (f.fn == "w0" || f.fn == "wm1") {
    WBranch br = f.fn == "w0" ? WBranch::Principal : WBranch::Lower;
    double v = lambert_w(br, f.x);
    j["value"] = v;
    j["residual"] = std::abs(v * std::exp(v) - f.x);
    csv_row = f.fn + ",," + fmt17(f.x) + ',' + fmt17(v);
  } else {
    throw DomainError("unknown --fn: " + f.fn);
  }

  Sink sink(c.out);
  auto& os = sink.out();
  if (c.is_json()) {
    os << j.dump(2) << '\n';
  } else {
    os << "# subcommand=specfun fn=" << f.fn << " n=" << fmt17(f.n)
       << " x=" << fmt17(f.x) << " format=" << c.format << '\n';
    os << csv_head << '\n' << csv_row << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grand-canonical cycle-count models: zeroes, pressures, "
               "sweeps and sampling"};
  app.require_subcommand(1);
  Common c;

  auto* s_zero = app.add_subcommand("zero", "solve for the rate-function zero");
  add_common(s_zero, c);

  auto* s_pressure = app.add_subcommand("pressure", "pressure at one point");
  add_common(s_pressure, c);

  SweepFlags sw;
  auto* s_sweep = app.add_subcommand("sweep", "pressure table over a mu_eff grid");
  add_common(s_sweep, c);
  s_sweep->add_option("--mu-start", sw.mu_start, "first mu_eff")->required();
  s_sweep->add_option("--mu-stop", sw.mu_stop, "last mu_eff")->required();
  s_sweep->add_option("--points", sw.points, "grid size, >= 2")->required();
  s_sweep->add_flag("--periodic", sw.periodic,
                    "periodic boundary convention at mu_eff = 0");

  RhoFlags rf;
  auto* s_fe = app.add_subcommand("free-energy", "free energy at fixed density");
  add_common(s_fe, c);
  s_fe->add_option("--rho", rf.rho, "density (grid start)")->required();
  auto* rstop = s_fe->add_option("--rho-stop", rf.rho_stop, "grid end");
  s_fe->add_option("--points", rf.points, "grid size, >= 2");

  bool periodic = false;
  auto* s_cond = app.add_subcommand("condensate", "condensed density at one point");
  add_common(s_cond, c);
  s_cond->add_flag("--periodic", periodic,
                   "periodic boundary convention at mu_eff = 0");

  SimFlags sf;
  auto* s_sim = app.add_subcommand("simulate", "Monte Carlo cycle-count sampling");
  add_common(s_sim, c);
  s_sim->add_option("--volume", sf.volume, "system volume")->required();
  s_sim->add_option("--samples", sf.samples, "samples per chain");
  s_sim->add_option("--burn-in", sf.burn_in, "discarded leading sweeps");
  s_sim->add_flag("--verify-zero", sf.verify_zero,
                  "emit per-k z-scores against the computed zero");

  std::string only;
  auto* s_ver = app.add_subcommand("verify", "run the acceptance suite");
  add_common(s_ver, c);
  s_ver->add_option("--only", only, "restrict to criteria whose id contains this");

  FnFlags ff;
  auto* s_fn = app.add_subcommand("specfun", "evaluate a special function");
  add_common(s_fn, c);
  s_fn->add_option("--fn", ff.fn, "zeta, g, w0 or wm1")->required();
  s_fn->add_option("--x", ff.x, "argument (alpha for g)")->required();
  s_fn->add_option("--n", ff.n, "order of g");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*s_zero) return run_zero(c);
    if (*s_pressure) return run_pressure(c);
    if (*s_sweep) return run_sweep(c, sw);
    if (*s_fe) {
      rf.have_stop = rstop->count() > 0;
      return run_free_energy(c, rf);
    }
    if (*s_cond) return run_condensate(c, periodic);
    if (*s_sim) return run_simulate(c, sf);
    if (*s_ver) return run_verify(c, only);
    if (*s_fn) return run_specfun(c, ff);
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
