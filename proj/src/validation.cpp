#include "ris/validation.hpp"

#include "ris/asymptotics.hpp"
#include "ris/baselines.hpp"
#include "ris/experiment.hpp"
#include "ris/fp_beamforming.hpp"
#include "ris/si_suppression.hpp"
#include "ris/units.hpp"

#include <cmath>
#include <sstream>

namespace ris {

namespace {

std::string fmt(double v) { return format_number(v); }

ChannelSet rayleigh_instance(RandomStream& rng, Index m, Index k, Index n, double scale) {
  ChannelSet ch;
  ch.G.resize(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) ch.G(i, j) = rng.complex_normal(scale);
  for (Index u = 0; u < k; ++u) {
    ch.h.push_back(rayleigh_vector(rng, m, scale));
    ch.f.push_back(rayleigh_vector(rng, n, scale));
  }
  return ch;
}

CheckResult check_golden() {
  AsymptoticParams p = reference_asymptotic_params();
  p.n = 256;
  const double passive = units::linear_to_db(snr_passive_asymptotic(p));
  const double active = units::linear_to_db(snr_active_asymptotic(p));
  const bool ok = std::abs(passive - 39.0) <= 0.1 && std::abs(active - 79.0) <= 0.1;
  return {"asymptotic SNR at N=256", ok, "passive " + fmt(passive) + " dB, active " + fmt(active) + " dB"};
}

CheckResult check_crossover() {
  const double n = crossover_elements(reference_asymptotic_params());
  return {"crossover element count", std::abs(n / 2.5e6 - 1.0) <= 0.01, fmt(n)};
}

CheckResult check_coverage() {
  const auto c = min_distance_active_wins(20.0, 2.0, 2.0, 1e-3, 2.0, units::dbm_to_watt(-100.0), 1024);
  return {"coverage distance", c.attainable && std::abs(c.d_r - 1.43) <= 0.01, fmt(c.d_r) + " m"};
}

CheckResult check_monte_carlo(std::uint64_t seed) {
  AsymptoticParams p = reference_asymptotic_params();
  p.n = 1024;
  SuSisoConfig cfg{p.p_bs_max, p.p_a_max, p.sigma2, p.sigma_v2};
  RandomStream rng(derive_seed(seed, {1}));
  double mean = 0.0;
  const int draws = 200;
  for (int i = 0; i < draws; ++i) {
    const CVec f = rayleigh_vector(rng, 1024, p.rho_f2);
    const CVec g = rayleigh_vector(rng, 1024, p.rho_g2);
    mean += snr_active_exact(f, g, cfg) / draws;
  }
  const double err = std::abs(units::linear_to_db(mean) - units::linear_to_db(snr_active_asymptotic(p)));
  return {"active SNR Monte-Carlo vs asymptote (N=1024)", err <= 1.0, fmt(err) + " dB"};
}

CheckResult check_fp(std::uint64_t seed) {
  std::ostringstream detail;
  bool ok = true;
  for (int t = 0; t < 3; ++t) {
    RandomStream rng(derive_seed(seed, {2, static_cast<std::uint64_t>(t)}));
    const ChannelSet ch = rayleigh_instance(rng, 4, 4, 16, 1.0);
    SystemConfig cfg;
    cfg.m = 4;
    cfg.k = 4;
    cfg.n = 16;
    cfg.p_bs_max = 1.0;
    cfg.p_a_max = 0.1;
    cfg.sigma2 = 0.1;
    cfg.sigma_v2 = 0.1;
    SolverOptions opts;
    const JointSolution sol = solve_joint(ch, cfg, opts, initial_precoder(ch, cfg, rng));
    for (std::size_t i = 1; i < sol.rate_history.size(); ++i)
      ok = ok && sol.rate_history[i] >= sol.rate_history[i - 1] - 1e-9 * std::abs(sol.rate_history[i - 1]);
    ok = ok && sol.result.p_bs_realized <= cfg.p_bs_max * (1 + 1e-6) &&
         sol.result.p_a_realized <= cfg.p_a_max * (1 + 1e-6);
    detail << (t ? ", " : "") << fmt(sol.result.sum_rate);
  }
  return {"joint FP monotone and feasible", ok, "rates " + detail.str()};
}

CheckResult check_si(std::uint64_t seed) {
  RandomStream rng(derive_seed(seed, {3}));
  const Index n = 8;
  CVec psi(n);
  for (Index i = 0; i < n; ++i) psi[i] = std::polar(1.0, rng.uniform_phase());
  std::vector<CVec> f{rayleigh_vector(rng, n, 1.0), rayleigh_vector(rng, n, 1.0)};
  const SiSolution ideal = suppress(SiProblem::build(psi, CMat::Zero(n, n), f));
  const SiSolution real = suppress(SiProblem::build(psi, self_interference_matrix(rng, n, 0.01), f));
  bool monotone = true;
  for (const auto& s : real.trace)
    monotone = monotone && s.q_after_phi <= s.q_before * (1 + 1e-12) + 1e-15 &&
               s.q_after_phi_prime <= s.q_after_phi * (1 + 1e-12) + 1e-15;
  const bool ok = ideal.phi == psi && ideal.cost == 0.0 && monotone;
  return {"self-interference suppression", ok, "final cost " + fmt(real.cost)};
}

CheckResult check_wmmse(std::uint64_t seed) {
  RandomStream rng(derive_seed(seed, {4}));
  const CVec h = rayleigh_vector(rng, 4, 1.0);
  const WmmseResult r = wmmse_beamforming({h}, 2.0, 0.5);
  const double rate = broadcast_sum_rate({h}, r.w, RVec::Constant(1, 0.5));
  const double expect = std::log2(1.0 + 2.0 * h.squaredNorm() / 0.5);
  return {"WMMSE single-user rate", std::abs(rate - expect) <= 1e-6 * expect, fmt(rate) + " vs " + fmt(expect)};
}

}  // namespace

std::vector<CheckResult> run_validation(std::uint64_t seed) {
  return {check_golden(), check_crossover(), check_coverage(), check_monte_carlo(seed),
          check_fp(seed), check_si(seed), check_wmmse(seed)};
}

}  // namespace ris
