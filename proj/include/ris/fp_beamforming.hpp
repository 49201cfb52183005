#pragma once

#include "ris/random.hpp"
#include "ris/system_model.hpp"

#include <functional>
#include <vector>

namespace ris {

/// Quadratic-transform terms for the two block subproblems.
///
///   beamforming block:  max 2Re{b^H w} - w^H A w
///                       s.t. ||w||^2 <= P_BS,  w^H Xi w <= P_m
///   reflection block:   max 2Re{psi^H upsilon} - psi^H Omega psi
///                       s.t. psi^H Pi psi <= P_A
///
/// A = I_K (x) a_block and Xi = I_K (x) xi_block, so only the M x M blocks
/// are stored. Pi is diagonal for a diagonal RIS and is kept as its diagonal.
struct FpWorkspace {
  CVec b;
  CMat a_block;
  CMat xi_block;
  double p_m_max = 0.0;
  bool c2_active = true;

  CVec upsilon;
  CMat omega;
  RVec pi_diag;

  CMat A() const;
  CMat Xi() const;
  CMat Pi() const;
};

struct SolverOptions {
  int max_iters = 100;
  double tol_rate = 1e-4;
  double tol_bisect = 1e-8;
  int grid_points = 33;
  /// Maximize the (rho, varpi) block jointly (rho_k = gamma_k, then varpi).
  /// When false, rho follows the stationarity formula with the previous varpi.
  bool exact_aux_block = true;
};

struct BeamformingUpdate {
  CVec w;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

struct ReflectionUpdate {
  CVec psi;
  double mu = 0.0;
};

/// xi_k = Re{ conj(varpi_k) h_bar_k^H w_k }
RVec compute_xi(const ChannelSet& ch, const Precoder& pc, const CVec& varpi, const SystemConfig& cfg);

/// rho_k = (xi_k^2 + xi_k sqrt(xi_k^2 + 4)) / 2
RVec update_rho(const RVec& xi);

/// varpi_k = sqrt(1+rho_k) h_bar_k^H w_k / (sum_j |h_bar_k^H w_j|^2 + ||f_k^H Psi||^2 sigma_v^2 + sigma^2)
CVec update_varpi(const ChannelSet& ch, const Precoder& pc, const RVec& rho, const SystemConfig& cfg);

/// Natural-log surrogate sum_k ln(1+rho_k) - rho_k + g_k(w, Psi, rho_k, varpi_k).
double surrogate_rate(const ChannelSet& ch, const Precoder& pc, const AuxiliaryState& aux,
                      const SystemConfig& cfg);

void fill_beamforming_terms(FpWorkspace& ws, const ChannelSet& ch, const Precoder& pc,
                            const AuxiliaryState& aux, const SystemConfig& cfg);
void fill_reflection_terms(FpWorkspace& ws, const ChannelSet& ch, const Precoder& pc,
                           const AuxiliaryState& aux, const SystemConfig& cfg);
FpWorkspace make_workspace(const ChannelSet& ch, const Precoder& pc, const AuxiliaryState& aux,
                           const SystemConfig& cfg);

double beamforming_objective(const FpWorkspace& ws, const CVec& w);
double reflection_objective(const FpWorkspace& ws, const CVec& psi);

/// Closed-form QCQP solution w = (A + l1 I + l2 Xi)^-1 b with multipliers
/// chosen by complementary slackness. Throws InfeasibleError if P_m < 0.
BeamformingUpdate update_w(const FpWorkspace& ws, const SystemConfig& cfg, const SolverOptions& opts);

/// psi = (Omega + mu Pi)^-1 upsilon with mu the smallest multiplier keeping
/// psi^H Pi psi <= budget (P_A for an active surface).
ReflectionUpdate update_psi(const FpWorkspace& ws, double budget, const SolverOptions& opts);
ReflectionUpdate update_psi(const FpWorkspace& ws, const SystemConfig& cfg, const SolverOptions& opts);

/// Equal-power MRT on the direct channels plus random RIS phases. For an
/// active surface the common amplitude is scaled so the RIS power equals
/// P_A exactly; passive/random surfaces get unit modulus; NoRis gets zero.
Precoder initial_precoder(const ChannelSet& ch, const SystemConfig& cfg, RandomStream& rng);

enum class FpStage { AfterAux, AfterW, AfterPsi };

struct FpEvent {
  int iteration = 0;
  FpStage stage = FpStage::AfterAux;
  double surrogate = 0.0;
  double sum_rate = 0.0;
  double p_bs = 0.0;
  double p_a = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double mu = 0.0;
};

using FpObserver = std::function<void(const FpEvent&)>;

struct JointSolution {
  Precoder precoder;
  AuxiliaryState aux;
  TrialResult result;
  std::vector<double> rate_history;  // R_sum before the first and after every iteration
  int psi_rescales = 0;
};

/// Replaces the reflection block of the alternating loop. Receives the
/// current reflection-block workspace and precoder; returns the new psi.
using ReflectionStep =
    std::function<CVec(const FpWorkspace&, const Precoder&, const SystemConfig&, const SolverOptions&)>;

struct LoopPolicy {
  ReflectionStep reflection;     // empty -> the QCQP update_psi under C2
  bool keep_incumbent = false;   // return the best iterate instead of the last
  bool monotone_guard = true;    // reject block updates that lower their own objective
};

JointSolution run_fp_loop(const ChannelSet& ch, const SystemConfig& cfg, const SolverOptions& opts,
                          const Precoder& init, const LoopPolicy& policy, const FpObserver& observer = {});

/// Alternating rho -> varpi -> w -> psi updates until the relative sum-rate
/// change falls below tol_rate. cfg.mode == NoRis freezes psi at zero.
JointSolution solve_joint(const ChannelSet& ch, const SystemConfig& cfg, const SolverOptions& opts,
                          const Precoder& init, const FpObserver& observer = {});

}  // namespace ris
