#include "ris/fp_beamforming.hpp"

#include "ris/qcqp.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace ris {

namespace {

Reflection reflection_for(const Precoder& pc, const SystemConfig& cfg, Index n) {
  return cfg.mode == RisMode::NoRis ? Reflection::none(n) : Reflection::diagonal(pc.psi);
}

std::vector<CVec> equivalent_channels(const ChannelSet& ch, const Reflection& refl) {
  std::vector<CVec> out;
  out.reserve(ch.h.size());
  for (Index k = 0; k < ch.users(); ++k) out.push_back(equivalent_channel(ch.h[k], ch.f[k], refl, ch.G));
  return out;
}

CMat block_diagonal(const CMat& block, Index copies) {
  const Index m = block.rows();
  CMat out = CMat::Zero(m * copies, m * copies);
  for (Index k = 0; k < copies; ++k) out.block(k * m, k * m, m, m) = block;
  return out;
}

// Columns of the M x K matrix are w_1 ... w_K (or b_1 ... b_K).
Eigen::Map<const CMat> as_columns(const CVec& v, Index m) { return {v.data(), m, v.size() / m}; }

}  // namespace

CMat FpWorkspace::A() const { return block_diagonal(a_block, b.size() / a_block.rows()); }
CMat FpWorkspace::Xi() const { return block_diagonal(xi_block, b.size() / xi_block.rows()); }
CMat FpWorkspace::Pi() const { return pi_diag.cast<cdouble>().asDiagonal(); }

RVec compute_xi(const ChannelSet& ch, const Precoder& pc, const CVec& varpi, const SystemConfig& cfg) {
  const Index m = ch.antennas();
  const auto hbar = equivalent_channels(ch, reflection_for(pc, cfg, ch.elements()));
  RVec xi(ch.users());
  for (Index k = 0; k < ch.users(); ++k)
    xi[k] = (std::conj(varpi[k]) * hbar[k].dot(pc.w.segment(k * m, m))).real();
  return xi;
}

RVec update_rho(const RVec& xi) {
  RVec rho(xi.size());
  for (Index k = 0; k < xi.size(); ++k) {
    const double x = xi[k];
    rho[k] = (x * x + x * std::sqrt(x * x + 4.0)) / 2.0;
  }
  return rho;
}

CVec update_varpi(const ChannelSet& ch, const Precoder& pc, const RVec& rho, const SystemConfig& cfg) {
  const Index m = ch.antennas();
  const Index k_users = ch.users();
  const Reflection refl = reflection_for(pc, cfg, ch.elements());
  const double sv2 = cfg.effective_sigma_v2();
  CVec varpi(k_users);
  for (Index k = 0; k < k_users; ++k) {
    const CVec fk_psi = refl.apply_adjoint(ch.f[k]);
    const CVec hbar = ch.h[k] + ch.G.adjoint() * fk_psi;
    double denom = fk_psi.squaredNorm() * sv2 + cfg.sigma2;
    for (Index j = 0; j < k_users; ++j) denom += std::norm(hbar.dot(pc.w.segment(j * m, m)));
    varpi[k] = std::sqrt(1.0 + rho[k]) * hbar.dot(pc.w.segment(k * m, m)) / denom;
  }
  return varpi;
}

double surrogate_rate(const ChannelSet& ch, const Precoder& pc, const AuxiliaryState& aux,
                      const SystemConfig& cfg) {
  const Index m = ch.antennas();
  const Index k_users = ch.users();
  const Reflection refl = reflection_for(pc, cfg, ch.elements());
  const double sv2 = cfg.effective_sigma_v2();
  double total = 0.0;
  for (Index k = 0; k < k_users; ++k) {
    const CVec fk_psi = refl.apply_adjoint(ch.f[k]);
    const CVec hbar = ch.h[k] + ch.G.adjoint() * fk_psi;
    double denom = fk_psi.squaredNorm() * sv2 + cfg.sigma2;
    for (Index j = 0; j < k_users; ++j) denom += std::norm(hbar.dot(pc.w.segment(j * m, m)));
    const double rho = aux.rho[k];
    const cdouble a = hbar.dot(pc.w.segment(k * m, m));
    const double g = 2.0 * std::sqrt(1.0 + rho) * (std::conj(aux.varpi[k]) * a).real() -
                     std::norm(aux.varpi[k]) * denom;
    total += std::log1p(rho) - rho + g;
  }
  return total;
}

void fill_beamforming_terms(FpWorkspace& ws, const ChannelSet& ch, const Precoder& pc,
                            const AuxiliaryState& aux, const SystemConfig& cfg) {
  const Index m = ch.antennas();
  const Index k_users = ch.users();
  const auto hbar = equivalent_channels(ch, reflection_for(pc, cfg, ch.elements()));
  ws.a_block = CMat::Zero(m, m);
  ws.b.resize(m * k_users);
  for (Index k = 0; k < k_users; ++k) {
    ws.a_block += std::norm(aux.varpi[k]) * hbar[k] * hbar[k].adjoint();
    ws.b.segment(k * m, m) = std::sqrt(1.0 + aux.rho[k]) * aux.varpi[k] * hbar[k];
  }
  if (cfg.mode == RisMode::ActiveRis) {
    ws.xi_block = ch.G.adjoint() * pc.psi.cwiseAbs2().cast<cdouble>().asDiagonal() * ch.G;
    ws.p_m_max = cfg.p_a_max - pc.psi.squaredNorm() * cfg.sigma_v2;
    ws.c2_active = true;
  } else {
    ws.xi_block = CMat::Zero(m, m);
    ws.p_m_max = std::numeric_limits<double>::infinity();
    ws.c2_active = false;
  }
}

void fill_reflection_terms(FpWorkspace& ws, const ChannelSet& ch, const Precoder& pc,
                           const AuxiliaryState& aux, const SystemConfig& cfg) {
  const Index m = ch.antennas();
  const Index n = ch.elements();
  const Index k_users = ch.users();
  const double sv2 = cfg.effective_sigma_v2();

  const CMat gw = ch.G * as_columns(pc.w, m);  // column j = G w_j
  const CMat t = gw * gw.adjoint();             // sum_j G w_j w_j^H G^H

  // Omega = T o (sum_k |varpi_k|^2 conj(f_k) f_k^T) + diag(sigma_v^2 sum_k |varpi_k|^2 |f_k|^2)
  CMat f_outer = CMat::Zero(n, n);
  RVec noise_diag = RVec::Zero(n);
  ws.upsilon = CVec::Zero(n);
  for (Index k = 0; k < k_users; ++k) {
    const double v2 = std::norm(aux.varpi[k]);
    const CVec fc = ch.f[k].conjugate();
    f_outer += v2 * fc * ch.f[k].transpose();
    noise_diag += v2 * sv2 * ch.f[k].cwiseAbs2();

    // a_kj = conj(f_k) o (G w_j)
    ws.upsilon += std::sqrt(1.0 + aux.rho[k]) * std::conj(aux.varpi[k]) * fc.cwiseProduct(gw.col(k));
    for (Index j = 0; j < k_users; ++j) {
      const cdouble wj_hk = pc.w.segment(j * m, m).dot(ch.h[k]);  // w_j^H h_k
      ws.upsilon -= v2 * wj_hk * fc.cwiseProduct(gw.col(j));
    }
  }
  ws.omega = t.cwiseProduct(f_outer);
  ws.omega.diagonal() += noise_diag.cast<cdouble>();

  ws.pi_diag = gw.rowwise().squaredNorm();
  ws.pi_diag.array() += cfg.sigma_v2;
}

FpWorkspace make_workspace(const ChannelSet& ch, const Precoder& pc, const AuxiliaryState& aux,
                           const SystemConfig& cfg) {
  FpWorkspace ws;
  fill_beamforming_terms(ws, ch, pc, aux, cfg);
  fill_reflection_terms(ws, ch, pc, aux, cfg);
  return ws;
}

double beamforming_objective(const FpWorkspace& ws, const CVec& w) {
  const Index m = ws.a_block.rows();
  const auto wm = as_columns(w, m);
  const auto bm = as_columns(ws.b, m);
  const double linear = 2.0 * (bm.adjoint() * wm).trace().real();
  const double quad = (wm.adjoint() * ws.a_block * wm).trace().real();
  return linear - quad;
}

double reflection_objective(const FpWorkspace& ws, const CVec& psi) {
  return 2.0 * psi.dot(ws.upsilon).real() - psi.dot(ws.omega * psi).real();
}

BeamformingUpdate update_w(const FpWorkspace& ws, const SystemConfig& cfg, const SolverOptions& opts) {
  const Index m = ws.a_block.rows();
  if (ws.c2_active && ws.p_m_max < 0.0)
    throw InfeasibleError("RIS noise power alone exceeds the reflect power budget (P_m < 0)");

  const auto bm = as_columns(ws.b, m);
  auto solve_at = [&](double lambda2) {
    const qcqp::SpectralSystem sys(ws.a_block + lambda2 * ws.xi_block, bm);
    const double lambda1 = qcqp::bisect_multiplier(sys, cfg.p_bs_max, opts.tol_bisect);
    return std::pair{lambda1, CMat(sys.solve(lambda1))};
  };
  auto c2_power = [&](const CMat& wm) { return (wm.adjoint() * ws.xi_block * wm).trace().real(); };
  auto pack = [&](double l1, double l2, const CMat& wm) {
    BeamformingUpdate u;
    u.w = Eigen::Map<const CVec>(wm.data(), wm.size());
    u.lambda1 = l1;
    u.lambda2 = l2;
    return u;
  };

  auto [l1, wm] = solve_at(0.0);
  if (!ws.c2_active || c2_power(wm) <= ws.p_m_max) return pack(l1, 0.0, wm);

  // Coarse logarithmic scan over lambda2 to bracket the C2 boundary; lambda1 is
  // re-optimized at every probe so C1 stays satisfied along the whole path.
  const double xi_scale = ws.xi_block.trace().real();
  const double scale = std::max(ws.a_block.trace().real(), 1e-300) / xi_scale;
  const int points = std::max(opts.grid_points, 2);
  double lo = 0.0;
  double hi = 0.0;
  bool bracketed = false;
  for (int i = 0; i < points; ++i) {
    const double probe = scale * std::pow(10.0, -8.0 + 16.0 * i / (points - 1));
    auto [pl1, pw] = solve_at(probe);
    if (c2_power(pw) <= ws.p_m_max) {
      hi = probe;
      bracketed = true;
      break;
    }
    lo = probe;
  }
  if (!bracketed) {
    hi = lo;
    for (int i = 0; i < 400 && !bracketed; ++i) {
      lo = hi;
      hi *= 2.0;
      bracketed = c2_power(solve_at(hi).second) <= ws.p_m_max;
    }
    if (!bracketed) throw InfeasibleError("could not satisfy the RIS power constraint");
  }

  auto [hl1, hw] = solve_at(hi);
  for (int it = 0; it < 400; ++it) {
    if (ws.p_m_max - c2_power(hw) <= opts.tol_bisect * ws.p_m_max) break;
    const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
    if (mid <= lo || mid >= hi) break;
    auto [ml1, mw] = solve_at(mid);
    if (c2_power(mw) > ws.p_m_max) {
      lo = mid;
    } else {
      hi = mid;
      hl1 = ml1;
      hw = std::move(mw);
    }
  }
  return pack(hl1, hi, hw);
}

ReflectionUpdate update_psi(const FpWorkspace& ws, double budget, const SolverOptions& opts) {
  const RVec inv_sqrt_pi = ws.pi_diag.cwiseSqrt().cwiseInverse();
  const auto d = inv_sqrt_pi.cast<cdouble>().asDiagonal();
  const CMat omega_t = d * ws.omega * d;
  const CVec upsilon_t = inv_sqrt_pi.cast<cdouble>().cwiseProduct(ws.upsilon);
  const qcqp::SpectralSystem sys(omega_t, upsilon_t);
  ReflectionUpdate out;
  out.mu = qcqp::bisect_multiplier(sys, budget, opts.tol_bisect);
  out.psi = inv_sqrt_pi.cast<cdouble>().cwiseProduct(sys.solve(out.mu).col(0));
  return out;
}

ReflectionUpdate update_psi(const FpWorkspace& ws, const SystemConfig& cfg, const SolverOptions& opts) {
  return update_psi(ws, cfg.p_a_max, opts);
}

Precoder initial_precoder(const ChannelSet& ch, const SystemConfig& cfg, RandomStream& rng) {
  const Index m = ch.antennas();
  const Index n = ch.elements();
  const Index k_users = ch.users();
  Precoder pc;
  pc.w = CVec::Zero(m * k_users);
  const double per_user = std::sqrt(cfg.p_bs_max / static_cast<double>(k_users));
  for (Index k = 0; k < k_users; ++k) {
    CVec dir = ch.h[k];
    if (dir.norm() == 0.0) dir = ch.G.adjoint() * ch.f[k];
    if (dir.norm() == 0.0) dir = CVec::Unit(m, 0);
    pc.w.segment(k * m, m) = per_user * dir.normalized();
  }

  pc.psi = CVec::Zero(n);
  if (cfg.mode == RisMode::NoRis) return pc;
  for (Index i = 0; i < n; ++i) pc.psi[i] = std::polar(1.0, rng.uniform_phase());
  if (cfg.mode == RisMode::ActiveRis) {
    const double unit_power = ris_power(pc.psi, ch.G, pc.w, cfg.sigma_v2);
    pc.psi *= std::sqrt(cfg.p_a_max / unit_power);
  }
  return pc;
}

JointSolution run_fp_loop(const ChannelSet& ch, const SystemConfig& cfg, const SolverOptions& opts,
                          const Precoder& init, const LoopPolicy& policy, const FpObserver& observer) {
  ch.validate(cfg.m, cfg.k, cfg.n);
  const Index n = ch.elements();
  const Index k_users = ch.users();

  JointSolution sol;
  Precoder pc = init;
  if (cfg.mode == RisMode::NoRis) pc.psi = CVec::Zero(n);
  AuxiliaryState aux{RVec::Zero(k_users), CVec::Zero(k_users)};

  auto emit = [&](int it, FpStage stage, double l1, double l2, double mu) {
    if (!observer) return;
    FpEvent e;
    e.iteration = it;
    e.stage = stage;
    e.surrogate = surrogate_rate(ch, pc, aux, cfg);
    e.sum_rate = sum_rate(ch, pc, cfg);
    e.p_bs = bs_power(pc.w);
    e.p_a = cfg.mode == RisMode::ActiveRis ? ris_power(pc.psi, ch.G, pc.w, cfg.sigma_v2) : 0.0;
    e.lambda1 = l1;
    e.lambda2 = l2;
    e.mu = mu;
    observer(e);
  };

  double rate = sum_rate(ch, pc, cfg);
  sol.rate_history.push_back(rate);
  Precoder best = pc;
  AuxiliaryState best_aux = aux;
  double best_rate = rate;
  bool converged = false;
  int it = 0;

  while (it < opts.max_iters) {
    ++it;
    if (opts.exact_aux_block) {
      aux.rho = sinr_all(ch, pc, cfg);
    } else {
      aux.rho = update_rho(compute_xi(ch, pc, aux.varpi, cfg));
    }
    aux.varpi = update_varpi(ch, pc, aux.rho, cfg);
    emit(it, FpStage::AfterAux, 0.0, 0.0, 0.0);

    FpWorkspace ws;
    fill_beamforming_terms(ws, ch, pc, aux, cfg);
    BeamformingUpdate bu;
    try {
      bu = update_w(ws, cfg, opts);
    } catch (const InfeasibleError&) {
      if (cfg.mode != RisMode::ActiveRis) throw;
      pc.psi *= std::sqrt(0.99 * cfg.p_a_max / ris_power(pc.psi, ch.G, pc.w, cfg.sigma_v2));
      ++sol.psi_rescales;
      fill_beamforming_terms(ws, ch, pc, aux, cfg);
      bu = update_w(ws, cfg, opts);
    }
    if (!policy.monotone_guard || beamforming_objective(ws, bu.w) >= beamforming_objective(ws, pc.w))
      pc.w = bu.w;
    emit(it, FpStage::AfterW, bu.lambda1, bu.lambda2, 0.0);

    double mu = 0.0;
    if (cfg.mode != RisMode::NoRis) {
      fill_reflection_terms(ws, ch, pc, aux, cfg);
      if (policy.reflection) {
        pc.psi = policy.reflection(ws, pc, cfg, opts);
      } else {
        const ReflectionUpdate ru = update_psi(ws, cfg, opts);
        mu = ru.mu;
        if (!policy.monotone_guard || reflection_objective(ws, ru.psi) >= reflection_objective(ws, pc.psi))
          pc.psi = ru.psi;
      }
    }
    emit(it, FpStage::AfterPsi, 0.0, 0.0, mu);

    const double next = sum_rate(ch, pc, cfg);
    sol.rate_history.push_back(next);
    if (next > best_rate) {
      best_rate = next;
      best = pc;
      best_aux = aux;
    }
    const double change = std::abs(next - rate);
    rate = next;
    if (change <= opts.tol_rate * std::max(std::abs(rate), 1e-12)) {
      converged = true;
      break;
    }
  }

  if (policy.keep_incumbent) {
    pc = best;
    aux = best_aux;
  }
  sol.precoder = pc;
  sol.aux = aux;
  sol.result = evaluate(ch, pc.w, reflection_for(pc, cfg, n), cfg);
  sol.result.iterations = it;
  sol.result.converged = converged;
  return sol;
}

JointSolution solve_joint(const ChannelSet& ch, const SystemConfig& cfg, const SolverOptions& opts,
                          const Precoder& init, const FpObserver& observer) {
  return run_fp_loop(ch, cfg, opts, init, LoopPolicy{}, observer);
}

}  // namespace ris
