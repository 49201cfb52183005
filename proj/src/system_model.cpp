#include "ris/system_model.hpp"

#include <cmath>

namespace ris {

void SystemConfig::validate() const {
  if (m < 1 || k < 1 || n < 1) throw DomainError("M, K, N must be >= 1");
  if (!(p_bs_max > 0.0) || !(p_a_max > 0.0)) throw DomainError("power budgets must be positive");
  if (!(sigma2 > 0.0) || !(sigma_v2 > 0.0)) throw DomainError("noise powers must be positive");
}

Reflection Reflection::diagonal(const CVec& psi) {
  Reflection r;
  r.psi_ = psi;
  return r;
}

Reflection Reflection::dense(CMat matrix) {
  require_dims(matrix.rows() == matrix.cols(), "reflection matrix must be square");
  Reflection r;
  r.is_dense_ = true;
  r.dense_ = std::move(matrix);
  return r;
}

Reflection Reflection::none(Index n) { return diagonal(CVec::Zero(n)); }

CVec Reflection::apply(const CVec& x) const {
  if (is_dense_) return dense_ * x;
  return psi_.conjugate().cwiseProduct(x);
}

CVec Reflection::apply_adjoint(const CVec& y) const {
  if (is_dense_) return dense_.adjoint() * y;
  return psi_.cwiseProduct(y);
}

double Reflection::frobenius_norm2() const { return is_dense_ ? dense_.squaredNorm() : psi_.squaredNorm(); }

CMat Reflection::matrix() const {
  if (is_dense_) return dense_;
  return psi_.conjugate().asDiagonal();
}

CVec equivalent_channel(const CVec& h_k, const CVec& f_k, const CVec& psi, const CMat& G) {
  require_dims(G.cols() == h_k.size() && G.rows() == f_k.size() && psi.size() == f_k.size(),
               "equivalent_channel: dimension mismatch");
  return h_k + G.adjoint() * psi.cwiseProduct(f_k);
}

CVec equivalent_channel(const CVec& h_k, const CVec& f_k, const Reflection& refl, const CMat& G) {
  require_dims(G.cols() == h_k.size() && G.rows() == f_k.size() && refl.size() == f_k.size(),
               "equivalent_channel: dimension mismatch");
  return h_k + G.adjoint() * refl.apply_adjoint(f_k);
}

RVec sinr_all(const ChannelSet& ch, const CVec& w, const Reflection& refl, const SystemConfig& cfg) {
  const Index m = ch.antennas();
  const Index k_users = ch.users();
  require_dims(w.size() == m * k_users, "w must have length M*K");
  const double sv2 = cfg.effective_sigma_v2();
  RVec out(k_users);
  for (Index k = 0; k < k_users; ++k) {
    const CVec fk_psi = refl.apply_adjoint(ch.f[k]);  // (f_k^H Psi)^H
    const CVec hbar = ch.h[k] + ch.G.adjoint() * fk_psi;
    double desired = 0.0;
    double interference = 0.0;
    for (Index j = 0; j < k_users; ++j) {
      const double p = std::norm(hbar.dot(w.segment(j * m, m)));
      (j == k ? desired : interference) += p;
    }
    out[k] = desired / (interference + fk_psi.squaredNorm() * sv2 + cfg.sigma2);
  }
  return out;
}

RVec sinr_all(const ChannelSet& ch, const Precoder& pc, const SystemConfig& cfg) {
  if (cfg.mode == RisMode::NoRis) return sinr_all(ch, pc.w, Reflection::none(ch.elements()), cfg);
  return sinr_all(ch, pc.w, Reflection::diagonal(pc.psi), cfg);
}

double sinr(Index k, const ChannelSet& ch, const Precoder& pc, const SystemConfig& cfg) {
  return sinr_all(ch, pc, cfg)[k];
}

double sum_rate_from_sinr(const RVec& s) {
  double r = 0.0;
  for (Index k = 0; k < s.size(); ++k) r += std::log2(1.0 + s[k]);
  return r;
}

double sum_rate(const ChannelSet& ch, const Precoder& pc, const SystemConfig& cfg) {
  return sum_rate_from_sinr(sinr_all(ch, pc, cfg));
}

double sum_rate(const ChannelSet& ch, const CVec& w, const Reflection& refl, const SystemConfig& cfg) {
  return sum_rate_from_sinr(sinr_all(ch, w, refl, cfg));
}

double bs_power(const CVec& w) { return w.squaredNorm(); }

double ris_power(const Reflection& refl, const CMat& G, const CVec& w, double sigma_v2) {
  const Index m = G.cols();
  const Index k_users = w.size() / m;
  double p = refl.frobenius_norm2() * sigma_v2;
  for (Index k = 0; k < k_users; ++k) p += refl.apply(G * w.segment(k * m, m)).squaredNorm();
  return p;
}

double ris_power(const CVec& psi, const CMat& G, const CVec& w, double sigma_v2) {
  return ris_power(Reflection::diagonal(psi), G, w, sigma_v2);
}

RVec simulate_reception(const ChannelSet& ch, const Precoder& pc, const SystemConfig& cfg, RandomStream& rng,
                        long draws) {
  if (draws < 1) throw DomainError("simulate_reception needs at least one draw");
  const Index m = ch.antennas();
  const Index k_users = ch.users();
  const Index n = ch.elements();
  const Reflection refl =
      cfg.mode == RisMode::NoRis ? Reflection::none(n) : Reflection::diagonal(pc.psi);
  const double sv2 = cfg.effective_sigma_v2();

  // gains(k, j) = h_bar_k^H w_j ; noise_rows.row(k) = f_k^H Psi
  CMat gains(k_users, k_users);
  CMat noise_rows(k_users, n);
  for (Index k = 0; k < k_users; ++k) {
    const CVec fk_psi = refl.apply_adjoint(ch.f[k]);
    noise_rows.row(k) = fk_psi.adjoint();
    const CVec hbar = ch.h[k] + ch.G.adjoint() * fk_psi;
    for (Index j = 0; j < k_users; ++j) gains(k, j) = hbar.dot(pc.w.segment(j * m, m));
  }

  RVec signal = RVec::Zero(k_users);
  RVec rest = RVec::Zero(k_users);
  CVec s(k_users);
  CVec v(n);
  for (long t = 0; t < draws; ++t) {
    for (Index j = 0; j < k_users; ++j) s[j] = rng.complex_normal(1.0);
    for (Index i = 0; i < n; ++i) v[i] = rng.complex_normal(sv2);
    const CVec ris_noise = noise_rows * v;
    for (Index k = 0; k < k_users; ++k) {
      const cdouble desired = gains(k, k) * s[k];
      cdouble r = ris_noise[k] + rng.complex_normal(cfg.sigma2);
      for (Index j = 0; j < k_users; ++j) r += gains(k, j) * s[j];
      signal[k] += std::norm(desired);
      rest[k] += std::norm(r - desired);
    }
  }
  return signal.cwiseQuotient(rest);
}

TrialResult evaluate(const ChannelSet& ch, const CVec& w, const Reflection& refl, const SystemConfig& cfg) {
  TrialResult r;
  r.sinr = sinr_all(ch, w, refl, cfg);
  r.sum_rate = sum_rate_from_sinr(r.sinr);
  r.p_bs_realized = bs_power(w);
  r.p_a_realized = cfg.mode == RisMode::ActiveRis ? ris_power(refl, ch.G, w, cfg.sigma_v2) : 0.0;
  return r;
}

}  // namespace ris
