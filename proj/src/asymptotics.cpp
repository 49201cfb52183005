#include "ris/asymptotics.hpp"

#include <cmath>
#include <limits>

namespace ris {

namespace {

struct ChannelSums {
  double fg = 0.0;  // sum |f_n||g_n|
  double f2 = 0.0;
  double g2 = 0.0;
};

ChannelSums channel_sums(const CVec& f, const CVec& g) {
  require_dims(f.size() == g.size() && f.size() > 0, "f and g must be nonempty and of equal length");
  ChannelSums s;
  s.fg = f.cwiseAbs().dot(g.cwiseAbs());
  s.f2 = f.squaredNorm();
  s.g2 = g.squaredNorm();
  return s;
}

}  // namespace

void AsymptoticParams::validate() const {
  if (!(n >= 1.0)) throw DomainError("n must be >= 1");
  for (double v : {p_bs_max, p_a_max, p_bs_p_max, sigma2, sigma_v2, rho_f2, rho_g2})
    if (!(v > 0.0)) throw DomainError("powers and gains must be positive");
}

double snr_passive_asymptotic(const AsymptoticParams& p) {
  return p.n * p.n * p.p_bs_p_max * kPi * kPi * p.rho_f2 * p.rho_g2 / (16.0 * p.sigma2);
}

double snr_active_asymptotic(const AsymptoticParams& p) {
  const double den = p.p_a_max * p.sigma_v2 * p.rho_f2 + p.p_bs_max * p.sigma2 * p.rho_g2 + p.sigma2 * p.sigma_v2;
  return p.n * p.p_bs_max * p.p_a_max * kPi * kPi * p.rho_f2 * p.rho_g2 / (16.0 * den);
}

double snr_active_limit_bs_unbounded(const AsymptoticParams& p) {
  return p.n * p.p_a_max * kPi * kPi * p.rho_f2 / (16.0 * p.sigma2);
}

double snr_active_limit_ris_unbounded(const AsymptoticParams& p) {
  return p.n * p.p_bs_max * kPi * kPi * p.rho_g2 / (16.0 * p.sigma_v2);
}

double crossover_elements(const AsymptoticParams& p) {
  const double den = p.p_a_max * p.sigma_v2 * p.rho_f2 + p.p_bs_max * p.sigma2 * p.rho_g2 + p.sigma2 * p.sigma_v2;
  return (p.p_bs_max / p.p_bs_p_max) * p.p_a_max * p.sigma2 / den;
}

double coverage_lhs(double d_t, double alpha, double d_r, double beta) {
  return 1.0 / (std::pow(d_t, -alpha) + std::pow(d_r, -beta));
}

double coverage_rhs(double l0, double p_max, double sigma2, double n) {
  return 2.0 * n * p_max * l0 / (p_max - 4.0 * n * sigma2);
}

CoverageThreshold min_distance_active_wins(double d_t, double alpha, double beta, double l0, double p_max,
                                           double sigma2, double n) {
  if (!(d_t > 0.0) || !(alpha > 0.0) || !(beta > 0.0) || !(l0 > 0.0) || !(sigma2 > 0.0) || !(n >= 1.0))
    throw DomainError("coverage: distances, exponents, L0, noise and N must be positive");
  if (!(p_max > 4.0 * n * sigma2)) throw DomainError("coverage: requires P_max > 4 N sigma2");
  const double bracket = (p_max - 4.0 * n * sigma2) / (2.0 * n * p_max * l0) - std::pow(d_t, -alpha);
  if (bracket <= 0.0) return {std::numeric_limits<double>::infinity(), false};
  return {std::pow(bracket, -1.0 / beta), true};
}

SuSisoSolution su_siso_optimal(const CVec& f, const CVec& g, const SuSisoConfig& cfg) {
  require_dims(f.size() == g.size() && f.size() > 0, "f and g must be nonempty and of equal length");
  const double n = static_cast<double>(f.size());
  SuSisoSolution s;
  s.w = std::sqrt(cfg.p_bs_max);
  s.theta.resize(f.size());
  for (Index i = 0; i < f.size(); ++i) s.theta[i] = std::arg(f[i]) - std::arg(g[i]);
  s.p = std::sqrt(cfg.p_a_max / (cfg.p_bs_max * g.squaredNorm() + n * cfg.sigma_v2));
  return s;
}

double su_siso_reflect_power(const SuSisoSolution& s, const CVec& g, double sigma_v2) {
  const double n = static_cast<double>(g.size());
  return s.p * s.p * (std::norm(s.w) * g.squaredNorm() + n * sigma_v2);
}

double su_siso_snr(const CVec& f, const CVec& g, const SuSisoSolution& s, const SuSisoConfig& cfg) {
  cdouble gain = 0.0;
  double noise = 0.0;
  for (Index i = 0; i < f.size(); ++i) {
    gain += std::conj(f[i]) * std::polar(1.0, s.theta[i]) * g[i];
    noise += std::norm(f[i]);
  }
  return std::norm(s.p * gain * s.w) / (s.p * s.p * noise * cfg.sigma_v2 + cfg.sigma2);
}

double snr_active_exact(const CVec& f, const CVec& g, const SuSisoConfig& cfg) {
  const ChannelSums s = channel_sums(f, g);
  const double n = static_cast<double>(f.size());
  return cfg.p_bs_max * cfg.p_a_max * s.fg * s.fg /
         (cfg.p_a_max * cfg.sigma_v2 * s.f2 + cfg.sigma2 * (cfg.p_bs_max * s.g2 + n * cfg.sigma_v2));
}

double snr_passive_exact(const CVec& f, const CVec& g, double p_bs, double sigma2) {
  const ChannelSums s = channel_sums(f, g);
  return p_bs * s.fg * s.fg / sigma2;
}

double snr_active_exact_limit_bs_unbounded(const CVec& f, const CVec& g, const SuSisoConfig& cfg) {
  const ChannelSums s = channel_sums(f, g);
  return cfg.p_a_max * s.fg * s.fg / (cfg.sigma2 * s.g2);
}

double snr_active_exact_limit_ris_unbounded(const CVec& f, const CVec& g, const SuSisoConfig& cfg) {
  const ChannelSums s = channel_sums(f, g);
  return cfg.p_bs_max * s.fg * s.fg / (cfg.sigma_v2 * s.f2);
}

double element_power_model(double g_gain, double p_x, double sigma_v2, double sigma_s2, double bandwidth_hz) {
  if (g_gain < 0.0 || p_x < 0.0 || sigma_v2 < 0.0 || sigma_s2 < 0.0 || !(bandwidth_hz > 0.0))
    throw DomainError("element_power_model: arguments must be nonnegative");
  return g_gain * p_x + g_gain * sigma_v2 * bandwidth_hz + sigma_s2 * bandwidth_hz;
}

}  // namespace ris
