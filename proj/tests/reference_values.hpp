// Reference values for the unit tests.
// Generated by tools/gen_reference_values.py (mpmath, 30 digits); do not edit by hand.
#pragma once

namespace refvals {

constexpr double zeta_3_2                          = 2.6123753486854883433;
constexpr double zeta_5_2                          = 1.3414872572509171798;
constexpr double zeta_2                            = 1.6449340668482264365;
constexpr double zeta_3                            = 1.2020569031595942854;
constexpr double zeta_7_2                          = 1.1267338673170566464;
constexpr double zeta_half                         = -1.4603545088095868129;  // analytic continuation
constexpr double zeta_m1_2                         = -0.20788622497735456602;
constexpr double zeta_m3_2                         = -0.025485201889833035950;

constexpr double omega                             = 0.56714329040978387300;  // W0(1)
constexpr double w0_half                           = 0.35173371124919582602;
constexpr double w0_m02                            = -0.25917110181907374506;
constexpr double wm1_m02                           = -2.5426413577735264243;
constexpr double wm1_m01                           = -3.5771520639572972184;

constexpr double g_52_03                           = 0.88131060117512142335;
constexpr double g_32_025                          = 1.1985813972279348649;
constexpr double g_12_003                          = 8.7791376508880962626;
constexpr double g_1_1                             = 0.45867514538708189102;  // g(1,1)
constexpr double g_1_004                           = 3.2388091590904003971;
constexpr double g_2_02                            = 1.1131575732603674807;
constexpr double g_3_01                            = 1.0566594080624260713;
constexpr double g_52_30                           = 9.3576229688403293996e-14;
constexpr double g_m12_07                          = 1.3249647818245774533;
constexpr double g_0_002                           = 49.501666655555661375;  // g(0,0.02)

constexpr double q_d3_b1_em1_k2                    = 0.00053705807518017944704;  // cycle weight d=3 beta=1 eta=-1 k=2
constexpr double qbar_d3_beta01_em07               = 0.85102125638139538460;
constexpr double qdens_d3_beta01_em07              = 1.2608881215928716074;
constexpr double pressure_ideal_d3_bnorm_mu0       = 16.857626049055210013;  // 4*pi*zeta(5/2)

constexpr double pmf_delta_d3_bnorm_a1_mu05        = 1.6668688681852255329;
constexpr double pmf_pressure_d3_bnorm_a1_mu05     = 15.960098843828588976;

constexpr double cmf_K_d3_bnorm_a2_mum05           = 0.19976283967187163342;
constexpr double cmf_gamma_d3_bnorm_a2_mum05       = 1.0602535297414134177;
constexpr double cmf_pressure_d3_bnorm_a2_mum05    = 14.447676347242213210;

constexpr double fe_alpha_d3_bnorm_rho1            = -4.5070091534027063156;
constexpr double fe_value_d3_bnorm_rho1            = -14.809024472625156140;

constexpr double hyl_beta_star_d3_b1               = 0.0037235687063047587040;
constexpr double hyl_delta_d3_b1_a2_mum50          = 38.374483830799598920;  // at beta = 1.5*beta_star

}  // namespace refvals
