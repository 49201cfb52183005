#pragma once

#include "ris/channel_model.hpp"
#include "ris/random.hpp"
#include "ris/types.hpp"

#include <vector>

namespace ris {

enum class RisMode { ActiveRis, PassiveRis, NoRis, RandomPhase };

struct SystemConfig {
  Index m = 4;             // BS antennas
  Index k = 4;             // users
  Index n = 64;            // RIS elements
  double p_bs_max = 1.0;   // W
  double p_a_max = 1.0;    // W
  double sigma2 = 1e-13;   // W, user noise
  double sigma_v2 = 1e-13; // W, RIS dynamic noise
  RisMode mode = RisMode::ActiveRis;

  void validate() const;

  /// Dynamic-noise power that reaches the users. Only an active surface
  /// amplifies its own noise; every other mode treats it as zero.
  double effective_sigma_v2() const { return mode == RisMode::ActiveRis ? sigma_v2 : 0.0; }
};

/// BS beamformer and RIS reflection vector.
///
/// Storage convention (used everywhere, conjugates applied at evaluation):
///   w   = [w_1; ...; w_K], length M*K
///   psi : length N, the reflection matrix is Psi = diag(conj(psi)),
///         i.e. psi_n = p_n * exp(-j theta_n).
struct Precoder {
  CVec w;
  CVec psi;

  Index users(Index m) const { return w.size() / m; }
  auto beam(Index k, Index m) const { return w.segment(k * m, m); }
  auto beam(Index k, Index m) { return w.segment(k * m, m); }
};

struct AuxiliaryState {
  RVec rho;
  CVec varpi;
};

struct TrialResult {
  double sum_rate = 0.0;  // bits/s/Hz
  RVec sinr;
  int iterations = 0;
  double p_bs_realized = 0.0;
  double p_a_realized = 0.0;
  bool converged = false;
};

/// The RIS linear map. Diagonal for the ideal models; dense once
/// self-interference turns diag(phi^H) into (I - Phi H)^-1 Phi.
class Reflection {
 public:
  static Reflection diagonal(const CVec& psi);
  static Reflection dense(CMat matrix);
  static Reflection none(Index n);

  Index size() const { return is_dense_ ? dense_.rows() : psi_.size(); }
  bool is_dense() const { return is_dense_; }

  CVec apply(const CVec& x) const;          // Psi x
  CVec apply_adjoint(const CVec& y) const;  // Psi^H y
  double frobenius_norm2() const;
  CMat matrix() const;

 private:
  bool is_dense_ = false;
  CVec psi_;
  CMat dense_;
};

/// h_bar_k = h_k + G^H Psi^H f_k, so that h_bar_k^H = h_k^H + f_k^H Psi G.
CVec equivalent_channel(const CVec& h_k, const CVec& f_k, const CVec& psi, const CMat& G);
CVec equivalent_channel(const CVec& h_k, const CVec& f_k, const Reflection& refl, const CMat& G);

double sinr(Index k, const ChannelSet& ch, const Precoder& pc, const SystemConfig& cfg);
RVec sinr_all(const ChannelSet& ch, const CVec& w, const Reflection& refl, const SystemConfig& cfg);
RVec sinr_all(const ChannelSet& ch, const Precoder& pc, const SystemConfig& cfg);

double sum_rate_from_sinr(const RVec& sinr);
double sum_rate(const ChannelSet& ch, const Precoder& pc, const SystemConfig& cfg);
double sum_rate(const ChannelSet& ch, const CVec& w, const Reflection& refl, const SystemConfig& cfg);

double bs_power(const CVec& w);
double ris_power(const CVec& psi, const CMat& G, const CVec& w, double sigma_v2);
double ris_power(const Reflection& refl, const CMat& G, const CVec& w, double sigma_v2);

/// Monte-Carlo reception: draws unit-power symbols, RIS noise and user noise,
/// forms r_k, and returns the empirical desired / (interference + noise) power ratio.
RVec simulate_reception(const ChannelSet& ch, const Precoder& pc, const SystemConfig& cfg, RandomStream& rng,
                        long draws);

TrialResult evaluate(const ChannelSet& ch, const CVec& w, const Reflection& refl, const SystemConfig& cfg);

}  // namespace ris
