#pragma once

#include "ris/types.hpp"

namespace ris {

/// Single-user single-antenna link parameters. Powers in W, gains linear.
struct AsymptoticParams {
  double n = 256;
  double p_bs_max = 1.0;    // BS power of the active-RIS system
  double p_a_max = 1.0;
  double p_bs_p_max = 2.0;  // BS power of the passive-RIS system
  double sigma2 = 1e-13;
  double sigma_v2 = 1e-13;
  double rho_f2 = 1e-7;     // RIS-user path gain
  double rho_g2 = 1e-7;     // BS-RIS path gain

  void validate() const;
};

/// N^2 P_BS-P pi^2 rho_f2 rho_g2 / (16 sigma2)
double snr_passive_asymptotic(const AsymptoticParams& p);

/// N P_BS P_A pi^2 rho_f2 rho_g2 / (16 (P_A sigma_v2 rho_f2 + P_BS sigma2 rho_g2 + sigma2 sigma_v2))
double snr_active_asymptotic(const AsymptoticParams& p);

/// Limits of the active asymptote as one of the two budgets grows without bound.
double snr_active_limit_bs_unbounded(const AsymptoticParams& p);   // N P_A pi^2 rho_f2 / (16 sigma2)
double snr_active_limit_ris_unbounded(const AsymptoticParams& p);  // N P_BS pi^2 rho_g2 / (16 sigma_v2)

/// Real-valued element count above which the passive surface wins.
double crossover_elements(const AsymptoticParams& p);

struct CoverageThreshold {
  double d_r = 0.0;          // meters; +inf when no RIS-user distance qualifies
  bool attainable = true;
};

/// Smallest RIS-user distance for which the active surface beats the passive
/// one with total power p_max split as P_BS-A = P_A = p_max/2, sigma_v2 = sigma2.
/// Throws DomainError unless p_max > 4 N sigma2.
CoverageThreshold min_distance_active_wins(double d_t, double alpha, double beta, double l0, double p_max,
                                           double sigma2, double n);

/// 1 / (d_t^-alpha + d_r^-beta) and 2 N P L0 / (P - 4 N sigma2), the two sides of the coverage condition.
double coverage_lhs(double d_t, double alpha, double d_r, double beta);
double coverage_rhs(double l0, double p_max, double sigma2, double n);

struct SuSisoConfig {
  double p_bs_max = 1.0;
  double p_a_max = 1.0;
  double sigma2 = 1e-13;
  double sigma_v2 = 1e-13;
};

/// Optimal single-user solution. The reflected signal is p f^H diag(e^{j theta}) g w.
struct SuSisoSolution {
  cdouble w;
  RVec theta;
  double p = 0.0;
};

SuSisoSolution su_siso_optimal(const CVec& f, const CVec& g, const SuSisoConfig& cfg);

/// Reflect power p^2 (|w|^2 sum |g_n|^2 + N sigma_v2) of a single-user solution.
double su_siso_reflect_power(const SuSisoSolution& s, const CVec& g, double sigma_v2);

/// SNR of an arbitrary single-user configuration.
double su_siso_snr(const CVec& f, const CVec& g, const SuSisoSolution& s, const SuSisoConfig& cfg);

double snr_active_exact(const CVec& f, const CVec& g, const SuSisoConfig& cfg);
double snr_passive_exact(const CVec& f, const CVec& g, double p_bs, double sigma2);

/// snr_active_exact with P_BS -> inf and with P_A -> inf respectively.
double snr_active_exact_limit_bs_unbounded(const CVec& f, const CVec& g, const SuSisoConfig& cfg);
double snr_active_exact_limit_ris_unbounded(const CVec& f, const CVec& g, const SuSisoConfig& cfg);

/// Output power of one amplifying element: G P_x + G sigma_v2 + sigma_s2.
/// Noise arguments are spectral densities (W/Hz) multiplied by bandwidth_hz.
double element_power_model(double g_gain, double p_x, double sigma_v2, double sigma_s2, double bandwidth_hz = 1.0);

}  // namespace ris
