#pragma once

#include <span>
#include <string>
#include <vector>

#include "bosegas/minimize.hpp"
#include "bosegas/model.hpp"

namespace bosegas {

enum class Regime { Subcritical, Critical, Supercritical, NonSmooth };
const char* regime_name(Regime r);

// One evaluated point of the phase diagram.
struct ThermoPoint {
  double mu_eff = 0;
  double pressure = 0;
  ExtReal dp_dmu;      // Undefined at detected non-smooth points
  ExtReal condensate;  // Undefined for HYL when the minimizer is not unique
  Regime regime = Regime::Subcritical;
  Model model = Model::Ideal;
  int families = 1;    // HYL: coexisting consistency solutions at this mu
  std::string error;   // non-empty: this grid point failed, rest is unset
};

// Legendre transform sample f(rho) = sup_{alpha <= 0} {alpha rho - p(alpha)}.
struct FreeEnergyPoint {
  double rho = 0;
  double f = 0;
  double maximizing_alpha = 0;  // -inf at rho = 0
  bool saturated = false;       // supremum pinned at alpha = 0 (plateau)
};

// Pressure of the chosen model at p.mu_eff(). Ideal and CMF require
// mu_eff <= 0; HYL evaluates p(beta,0) minus the minimal rate objective
// over beta.
double pressure(const ModelParams& p, const SolveOptions& o = {});

// First mu-derivative of the pressure. Closed forms everywhere except
// HYL with coexisting solution families, where one-sided finite
// differences guard against the derivative jump; at a detected jump the
// result is Undefined.
ExtReal dpressure_dmu(const ModelParams& p, const SolveOptions& o = {});

// zeta(d/2)/(4 pi beta)^{d/2} for d >= 3, +infinity below; CMF scales it
// by W0(K0)/K0 with K0 = a beta qbar(0).
ExtReal critical_density(const ModelParams& p);

// Free energy at density rho for Ideal, CMF (each by monotone bisection
// of the stationarity equation, constant above the critical density) and
// PMF (ideal value plus a rho^2 / 2).
FreeEnergyPoint free_energy(const ModelParams& p, double rho,
                            const SolveOptions& o = {});

// Condensed density. `periodic` selects the boundary-condition convention
// for the ideal gas exactly at mu_eff = 0 in d >= 3, where the value is
// +infinity under periodic conditions and 0 otherwise.
ExtReal condensate(const ModelParams& p, bool periodic = false,
                   const SolveOptions& o = {});

// Density-level rate functions. These keep the reference tilt p.alpha and
// the interaction potential p.mu separate rather than folding them: the
// reference process is tilted by alpha alone, and mu enters only the
// quadratic term of the PMF variant.
enum class DensityRateKind { Ideal, Pmf };
ExtReal density_rate(const ModelParams& p, double x, DensityRateKind kind,
                     const SolveOptions& o = {});

// Evaluate pressure, derivative, condensate and regime on an ascending mu
// grid (entries are mu_eff values; the template's mu and alpha are
// ignored). Points failing their domain checks carry an error string
// instead of values. HYL grids run through the family scan once, so the
// per-point family counts and the non-smooth marking come from the same
// continuation the scan reports.
std::vector<ThermoPoint> sweep(const ModelParams& tmpl,
                               std::span<const double> mu_grid,
                               const SolveOptions& o = {}, int threads = 1,
                               bool periodic = false);

}  // namespace bosegas
