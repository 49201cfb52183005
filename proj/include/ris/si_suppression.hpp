#pragma once

#include "ris/channel_model.hpp"
#include "ris/system_model.hpp"

#include <vector>

namespace ris {

/// Approximation target for a surface with self-interference H.
/// h_k[k] = diag(conj f_k) H diag(conj f_k)^-1.
struct SiProblem {
  CVec psi_opt;
  CMat H;
  std::vector<CMat> h_k;
  std::vector<CVec> f;
  bool f_floored = false;  // some |f_kn| was below the floor and got lifted

  static SiProblem build(const CVec& psi_opt, const CMat& H, const std::vector<CVec>& f);
  Index users() const { return static_cast<Index>(h_k.size()); }
};

struct SiOptions {
  double zeta_init = 1e-3;
  double zeta_max = 1e8;
  double tol_q = 1e-6;    // relative change of q between penalty steps
  double tol_gap = 1e-6;  // ||phi - phi'||
};

struct SiStep {
  double zeta = 0.0;
  double q_before = 0.0;
  double q_after_phi = 0.0;
  double q_after_phi_prime = 0.0;
  double gap = 0.0;   // ||phi - phi'|| after the step
  double cost = 0.0;  // f(phi) after the step
};

struct SiSolution {
  CVec phi;
  CVec phi_prime;
  double tau = 1.0;
  double cost = 0.0;           // f(phi)
  double penalty_final = 0.0;  // zeta at exit
  bool converged = false;
  bool warning = false;        // hit zeta_max; phi is the lowest-cost iterate
  std::vector<SiStep> trace;
};

/// (I - Phi H)^-1 Phi with Phi = diag(conj(phi)). Throws SelfExcitationError
/// when I - Phi H is numerically singular (reciprocal condition below 1e-12).
CMat effective_precoding(const CVec& phi, const CMat& H);

/// f(phi) = (1/K) sum_k || phi + diag(phi) H_k^H phi - psi_opt ||^2
double si_cost(const CVec& phi, const SiProblem& problem);
/// f(phi, phi') = (1/K) sum_k || phi + diag(phi') H_k^H phi - psi_opt ||^2
double si_cost(const CVec& phi, const CVec& phi_prime, const SiProblem& problem);
/// q = f(phi, phi') + zeta ||phi' - phi||^2
double si_penalized(const CVec& phi, const CVec& phi_prime, const SiProblem& problem, double zeta);

CVec update_phi(const CVec& phi_prime, const SiProblem& problem, double zeta);
CVec update_phi_prime(const CVec& phi, const SiProblem& problem, double zeta);

/// Penalty-continuation alternating minimization starting from psi_opt.
SiSolution suppress(const SiProblem& problem, const SiOptions& opts = {});

struct TauResult {
  double tau = 1.0;
  double power = 0.0;               // realized reflect power at tau
  bool self_excitation_limited = false;
  bool grid_fallback = false;
};

/// Reflect power with precoding (I - tau Phi H)^-1 tau Phi.
double si_reflect_power(double tau, const CVec& phi, const CMat& H, const CMat& G, const CVec& w, double sigma_v2);

/// Scale tau so that the realized reflect power equals cfg.p_a_max (1e-6 relative).
TauResult rescale_tau(const CVec& phi, const CMat& H, const CMat& G, const CVec& w, const SystemConfig& cfg);

}  // namespace ris
