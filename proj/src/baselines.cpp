#include "ris/baselines.hpp"

#include "ris/qcqp.hpp"

#include <cmath>

namespace ris {

namespace {

std::vector<CVec> effective_channels(const ChannelSet& ch, const Reflection& refl) {
  std::vector<CVec> out;
  for (Index k = 0; k < ch.users(); ++k) out.push_back(equivalent_channel(ch.h[k], ch.f[k], refl, ch.G));
  return out;
}

CVec mrt_start(const std::vector<CVec>& channels, double p_bs_max) {
  const Index m = channels.front().size();
  const Index k_users = static_cast<Index>(channels.size());
  CVec w = CVec::Zero(m * k_users);
  const double per_user = std::sqrt(p_bs_max / static_cast<double>(k_users));
  for (Index k = 0; k < k_users; ++k) {
    const double norm = channels[k].norm();
    w.segment(k * m, m) = norm > 0.0 ? CVec(per_user * channels[k] / norm) : CVec(CVec::Constant(m, per_user / std::sqrt(double(m))));
  }
  return w;
}

}  // namespace

double broadcast_sum_rate(const std::vector<CVec>& channels, const CVec& w, const RVec& noise) {
  const Index k_users = static_cast<Index>(channels.size());
  const Index m = channels.front().size();
  double rate = 0.0;
  for (Index k = 0; k < k_users; ++k) {
    double desired = 0.0;
    double rest = noise[k];
    for (Index j = 0; j < k_users; ++j) {
      const double p = std::norm(channels[k].dot(w.segment(j * m, m)));
      (j == k ? desired : rest) += p;
    }
    rate += std::log2(1.0 + desired / rest);
  }
  return rate;
}

WmmseResult wmmse_beamforming(const std::vector<CVec>& channels, double p_bs_max, const RVec& noise,
                              const WmmseOptions& opts) {
  require_dims(!channels.empty(), "wmmse: need at least one user");
  const Index k_users = static_cast<Index>(channels.size());
  const Index m = channels.front().size();
  require_dims(noise.size() == k_users, "wmmse: one noise power per user");
  for (const CVec& h : channels) require_dims(h.size() == m, "wmmse: channels must share length M");

  WmmseResult out;
  CVec w = mrt_start(channels, p_bs_max);
  double rate = broadcast_sum_rate(channels, w, noise);
  out.rate_history.push_back(rate);

  for (int it = 1; it <= opts.max_iters; ++it) {
    // receive filters u_k and MSE weights v_k = 1 + SINR_k
    CVec u(k_users);
    RVec v(k_users);
    for (Index k = 0; k < k_users; ++k) {
      double total = noise[k];
      for (Index j = 0; j < k_users; ++j) total += std::norm(channels[k].dot(w.segment(j * m, m)));
      const cdouble g = channels[k].dot(w.segment(k * m, m));
      u[k] = g / total;
      v[k] = total / (total - std::norm(g));
    }

    CMat s = CMat::Zero(m, m);
    CMat rhs(m, k_users);
    for (Index k = 0; k < k_users; ++k) {
      s += v[k] * std::norm(u[k]) * channels[k] * channels[k].adjoint();
      rhs.col(k) = v[k] * u[k] * channels[k];
    }
    const qcqp::SpectralSystem sys(s, rhs);
    const double lambda = qcqp::bisect_multiplier(sys, p_bs_max, opts.tol_bisect);
    const CMat wm = sys.solve(lambda);
    const CVec next_w = Eigen::Map<const CVec>(wm.data(), wm.size());

    const double next = broadcast_sum_rate(channels, next_w, noise);
    out.iterations = it;
    if (next < rate) {
      // only bisection round-off can get here; keep the better point
      out.converged = true;
      break;
    }
    w = next_w;
    out.rate_history.push_back(next);
    const double change = next - rate;
    rate = next;
    if (change <= opts.tol_rate * std::max(rate, 1e-12)) {
      out.converged = true;
      break;
    }
  }
  out.w = w;
  return out;
}

WmmseResult wmmse_beamforming(const std::vector<CVec>& channels, double p_bs_max, double sigma2,
                              const WmmseOptions& opts) {
  return wmmse_beamforming(channels, p_bs_max, RVec::Constant(static_cast<Index>(channels.size()), sigma2), opts);
}

BaselineResult no_ris_baseline(const ChannelSet& ch, const SystemConfig& cfg, const WmmseOptions& opts) {
  SystemConfig c = cfg;
  c.mode = RisMode::NoRis;
  BaselineResult out;
  out.precoder.psi = CVec::Zero(ch.elements());
  out.precoder.w = wmmse_beamforming(ch.h, c.p_bs_max, c.sigma2, opts).w;
  out.result = evaluate(ch, out.precoder.w, Reflection::none(ch.elements()), c);
  return out;
}

BaselineResult random_phase_baseline(const ChannelSet& ch, const SystemConfig& cfg, RandomStream& rng,
                                     const WmmseOptions& opts) {
  SystemConfig c = cfg;
  c.mode = RisMode::RandomPhase;
  BaselineResult out;
  out.precoder.psi.resize(ch.elements());
  for (Index i = 0; i < ch.elements(); ++i) out.precoder.psi[i] = std::polar(1.0, rng.uniform_phase());
  const Reflection refl = Reflection::diagonal(out.precoder.psi);
  out.precoder.w = wmmse_beamforming(effective_channels(ch, refl), c.p_bs_max, c.sigma2, opts).w;
  out.result = evaluate(ch, out.precoder.w, refl, c);
  return out;
}

CVec project_unit_modulus(const CVec& psi) {
  CVec out(psi.size());
  for (Index i = 0; i < psi.size(); ++i) out[i] = std::polar(1.0, psi[i] == cdouble(0.0) ? 0.0 : std::arg(psi[i]));
  return out;
}

BaselineResult passive_ris_fp(const ChannelSet& ch, const SystemConfig& cfg, const SolverOptions& opts,
                              const Precoder& init) {
  SystemConfig c = cfg;
  c.mode = RisMode::PassiveRis;
  LoopPolicy policy;
  policy.keep_incumbent = true;
  policy.reflection = [](const FpWorkspace& ws, const Precoder&, const SystemConfig&, const SolverOptions& o) {
    FpWorkspace relaxed = ws;
    relaxed.pi_diag = RVec::Ones(ws.omega.rows());
    return project_unit_modulus(update_psi(relaxed, static_cast<double>(ws.omega.rows()), o).psi);
  };
  Precoder start = init;
  start.psi = project_unit_modulus(init.psi);
  const JointSolution sol = run_fp_loop(ch, c, opts, start, policy);
  return {sol.precoder, sol.result};
}

}  // namespace ris
