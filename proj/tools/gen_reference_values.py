#!/usr/bin/env python3
"""Generate tests/reference_values.hpp.

Computes reference values for the unit tests with mpmath at 30 significant
digits, independently of the C++ implementation. Rerun after editing:

    python3 tools/gen_reference_values.py > tests/reference_values.hpp
"""

import sys

import mpmath as mp

mp.mp.dps = 30


def bose(n, alpha):
    """g(n, alpha) = sum_{k>=1} k^-n e^(-alpha k) = Li_n(e^-alpha)."""
    if alpha == 0:
        return mp.zeta(n)
    z = mp.exp(-mp.mpf(alpha))
    return z * mp.lerchphi(z, mp.mpf(n), 1)


def lattice_factor(d, beta):
    return (4 * mp.pi * beta) ** (mp.mpf(d) / 2)


def qbar(d, beta, eta):
    return bose(1 + mp.mpf(d) / 2, -beta * eta) / lattice_factor(d, beta)


def qdensity(d, beta, eta):
    return bose(mp.mpf(d) / 2, -beta * eta) / lattice_factor(d, beta)


def pmf_delta_star(d, beta, a, mu):
    def F(delta):
        alpha = beta * max(a * delta - mu, mp.mpf(0))
        return delta - bose(mp.mpf(d) / 2, alpha) / lattice_factor(d, beta)

    return mp.findroot(F, mp.mpf("1.0"))


def cmf_values(d, beta, a, mu):
    qb = qbar(d, beta, mu)
    K = a * beta * qb
    W = mp.lambertw(K, 0).real
    gamma = W / (a * beta)
    pressure = W * (1 + W / 2) / (a * beta * beta)
    return K, gamma, pressure


def ideal_free_energy(d, beta, rho):
    lat = lattice_factor(d, beta)

    def F(t):  # t = -beta * alpha > 0
        return bose(mp.mpf(d) / 2, t) / lat - rho

    t = mp.findroot(F, mp.mpf("0.2"))
    alpha = -t / beta
    p = bose(1 + mp.mpf(d) / 2, t) / (beta * lat)
    return alpha, rho * alpha - p


def hyl_delta_star(d, beta, a, b, mu, jmax=20000):
    lat = lattice_factor(d, beta)

    def g0(delta):
        fact = mp.mpf(1) if a * delta >= mu else mp.mpf(-b) / (a - b)
        s = mp.mpf(0)
        for j in range(1, jmax + 1):
            qj = mp.exp(0) / (lat * mp.mpf(j) ** (1 + mp.mpf(d) / 2))
            u = -b * beta * j * j * qj * mp.exp(beta * j * (mu - a * delta) * fact)
            term = -mp.lambertw(u, 0).real / (b * beta * j)
            s += term
            if abs(term) < mp.mpf("1e-40") and j > 50:
                break
        return s

    return mp.findroot(lambda dd: dd - g0(dd), mp.mpf("15.0"))


def emit(name, value, comment=""):
    s = mp.nstr(mp.mpf(value), 20, strip_zeros=False)
    pad = " " * max(1, 34 - len(name))
    c = f"  // {comment}" if comment else ""
    print(f"constexpr double {name}{pad}= {s};{c}")


def main():
    fourpi = 4 * mp.pi
    beta_norm = 1 / fourpi

    print("// Reference values for the unit tests.")
    print("// Generated by tools/gen_reference_values.py (mpmath, 30 digits); do not edit by hand.")
    print("#pragma once")
    print()
    print("namespace refvals {")
    print()
    emit("zeta_3_2", mp.zeta(mp.mpf(3) / 2))
    emit("zeta_5_2", mp.zeta(mp.mpf(5) / 2))
    emit("zeta_2", mp.zeta(2))
    emit("zeta_3", mp.zeta(3))
    emit("zeta_7_2", mp.zeta(mp.mpf(7) / 2))
    emit("zeta_half", mp.zeta(mp.mpf(1) / 2), "analytic continuation")
    emit("zeta_m1_2", mp.zeta(mp.mpf(-1) / 2))
    emit("zeta_m3_2", mp.zeta(mp.mpf(-3) / 2))
    print()
    emit("omega", mp.lambertw(1, 0).real, "W0(1)")
    emit("w0_half", mp.lambertw(mp.mpf("0.5"), 0).real)
    emit("w0_m02", mp.lambertw(mp.mpf("-0.2"), 0).real)
    emit("wm1_m02", mp.lambertw(mp.mpf("-0.2"), -1).real)
    emit("wm1_m01", mp.lambertw(mp.mpf("-0.1"), -1).real)
    print()
    emit("g_52_03", bose(mp.mpf(5) / 2, mp.mpf("0.3")))
    emit("g_32_025", bose(mp.mpf(3) / 2, mp.mpf("0.25")))
    emit("g_12_003", bose(mp.mpf(1) / 2, mp.mpf("0.03")))
    emit("g_1_1", -mp.log(1 - mp.exp(-1)), "g(1,1)")
    emit("g_1_004", bose(1, mp.mpf("0.04")))
    emit("g_2_02", bose(2, mp.mpf("0.2")))
    emit("g_3_01", bose(3, mp.mpf("0.1")))
    emit("g_52_30", bose(mp.mpf(5) / 2, 30))
    emit("g_m12_07", bose(mp.mpf(-1) / 2, mp.mpf("0.7")))
    emit("g_0_002", 1 / mp.expm1(mp.mpf("0.02")), "g(0,0.02)")
    print()
    emit("q_d3_b1_em1_k2", mp.exp(-2) / (fourpi ** mp.mpf("1.5") * 2 ** mp.mpf("2.5")),
         "cycle weight d=3 beta=1 eta=-1 k=2")
    emit("qbar_d3_beta01_em07", qbar(3, mp.mpf("0.1"), mp.mpf("-0.7")))
    emit("qdens_d3_beta01_em07", qdensity(3, mp.mpf("0.1"), mp.mpf("-0.7")))
    emit("pressure_ideal_d3_bnorm_mu0", fourpi * mp.zeta(mp.mpf(5) / 2), "4*pi*zeta(5/2)")
    print()
    # PMF fixed point, subcritical: d=3, beta=1/(4pi), a=1, mu_eff=0.5
    ds = pmf_delta_star(3, beta_norm, 1, mp.mpf("0.5"))
    emit("pmf_delta_d3_bnorm_a1_mu05", ds)
    p_pmf = ds * ds / 2 + bose(mp.mpf(5) / 2, beta_norm * (ds - mp.mpf("0.5"))) / beta_norm
    emit("pmf_pressure_d3_bnorm_a1_mu05", p_pmf)
    print()
    # CMF point: d=3, beta=1/(4pi), a=2, mu_eff=-0.5
    K, gamma, p_cmf = cmf_values(3, beta_norm, 2, mp.mpf("-0.5"))
    emit("cmf_K_d3_bnorm_a2_mum05", K)
    emit("cmf_gamma_d3_bnorm_a2_mum05", gamma)
    emit("cmf_pressure_d3_bnorm_a2_mum05", p_cmf)
    print()
    # Ideal free energy: d=3, beta=1/(4pi), rho=1
    alpha_star, fval = ideal_free_energy(3, beta_norm, 1)
    emit("fe_alpha_d3_bnorm_rho1", alpha_star)
    emit("fe_value_d3_bnorm_rho1", fval)
    print()
    # HYL fixed point, unique regime: d=3, b=1, a=2, beta=1.5*beta_star, mu_eff=-50
    beta_star = mp.e ** 2 / fourpi ** 3
    emit("hyl_beta_star_d3_b1", beta_star)
    dh = hyl_delta_star(3, mp.mpf("1.5") * beta_star, 2, 1, mp.mpf(-50))
    emit("hyl_delta_d3_b1_a2_mum50", dh, "at beta = 1.5*beta_star")
    print()
    print("}  // namespace refvals")


if __name__ == "__main__":
    sys.exit(main())
