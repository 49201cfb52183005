#pragma once

#include "ris/fp_beamforming.hpp"
#include "ris/random.hpp"
#include "ris/system_model.hpp"

#include <vector>

namespace ris {

enum class BaselineKind { NoRisWmmse, RandomPhaseWmmse, PassiveRisFp };

struct WmmseOptions {
  int max_iters = 200;
  double tol_rate = 1e-5;
  double tol_bisect = 1e-10;
};

struct WmmseResult {
  CVec w;
  std::vector<double> rate_history;  // sum rate of the initial point and after every iteration
  int iterations = 0;
  bool converged = false;
};

/// Sum-rate WMMSE for the MISO broadcast channel y_k = hbar_k^H sum_j w_j s_j + n_k.
/// noise[k] is the total noise power seen by user k.
WmmseResult wmmse_beamforming(const std::vector<CVec>& channels, double p_bs_max, const RVec& noise,
                              const WmmseOptions& opts = {});
WmmseResult wmmse_beamforming(const std::vector<CVec>& channels, double p_bs_max, double sigma2,
                              const WmmseOptions& opts = {});

/// Sum rate of a beamformer for fixed effective channels, in bits/s/Hz.
double broadcast_sum_rate(const std::vector<CVec>& channels, const CVec& w, const RVec& noise);

struct BaselineResult {
  Precoder precoder;
  TrialResult result;
};

/// Direct links only, WMMSE beamforming.
BaselineResult no_ris_baseline(const ChannelSet& ch, const SystemConfig& cfg, const WmmseOptions& opts = {});

/// Unit-modulus random phases (no RIS noise), WMMSE on the resulting channels.
BaselineResult random_phase_baseline(const ChannelSet& ch, const SystemConfig& cfg, RandomStream& rng,
                                     const WmmseOptions& opts = {});

/// Alternating FP loop without the reflect-power constraint. Each reflection
/// update solves the relaxed problem ||psi||^2 <= N and then projects onto
/// unit modulus. Returns the best iterate seen.
BaselineResult passive_ris_fp(const ChannelSet& ch, const SystemConfig& cfg, const SolverOptions& opts,
                              const Precoder& init);

/// psi_n <- exp(j arg psi_n), with arg 0 taken as phase 0.
CVec project_unit_modulus(const CVec& psi);

}  // namespace ris
