#include "ris/si_suppression.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <tuple>

namespace ris {

namespace {

constexpr double kFloor = 1e-30;

// Each term is B_k phi - psi_opt with B_k = I + diag(phi') H_k^H.
CVec residual(const CVec& phi, const CVec& phi_prime, const CMat& h_k, const CVec& psi_opt) {
  return phi + phi_prime.cwiseProduct(h_k.adjoint() * phi) - psi_opt;
}

// Reflect power as a function of tau through one eigendecomposition
// Phi H = V diag(l) V^-1:  M(tau) = V diag(tau / (1 - tau l)) V^-1 Phi, so
// sigma_v2 ||M||_F^2 + ||M G W||_F^2 = d^H (C o S^T) d with C = V^H V and
// S = V^-1 Phi (sigma_v2 I + G W W^H G^H) Phi^H V^-H. O(N^2) per tau.
class SpectralPowerScan {
 public:
  SpectralPowerScan(const CVec& phi, const CMat& H, const CMat& G, const CVec& w, double sigma_v2) {
    const CMat phi_mat = phi.conjugate().asDiagonal();
    const Eigen::ComplexEigenSolver<CMat> eig(phi_mat * H);
    const CMat& v = eig.eigenvectors();
    const Eigen::PartialPivLU<CMat> lu(v);
    usable_ = eig.info() == Eigen::Success && lu.rcond() > 1e-10;
    if (!usable_) return;
    lambda_ = eig.eigenvalues();
    const CMat x = lu.solve(phi_mat);
    const Index m = G.cols();
    const CMat y = x * G * Eigen::Map<const CMat>(w.data(), m, w.size() / m);
    const CMat s = sigma_v2 * x * x.adjoint() + y * y.adjoint();
    q_ = (v.adjoint() * v).cwiseProduct(s.transpose());
  }

  bool usable() const { return usable_; }

  double power(double tau) const {
    CVec d(lambda_.size());
    for (Index i = 0; i < d.size(); ++i) {
      const cdouble den = 1.0 - tau * lambda_[i];
      if (std::abs(den) < 1e-12) return std::numeric_limits<double>::infinity();
      d[i] = tau / den;
    }
    return d.dot(q_ * d).real();
  }

 private:
  bool usable_ = false;
  CVec lambda_;
  CMat q_;
};

}  // namespace

SiProblem SiProblem::build(const CVec& psi_opt, const CMat& H, const std::vector<CVec>& f) {
  const Index n = psi_opt.size();
  require_dims(H.rows() == n && H.cols() == n, "SiProblem: H must be N x N");
  require_dims(!f.empty(), "SiProblem: need at least one user");
  SiProblem p;
  p.psi_opt = psi_opt;
  p.H = H;
  p.f = f;
  for (const CVec& fk : f) {
    require_dims(fk.size() == n, "SiProblem: f_k must have length N");
    CVec c = fk.conjugate();
    for (Index i = 0; i < n; ++i) {
      if (std::abs(c[i]) < kFloor) {
        c[i] = kFloor;
        p.f_floored = true;
      }
    }
    p.h_k.push_back(c.asDiagonal() * H * c.cwiseInverse().asDiagonal());
  }
  return p;
}

CMat effective_precoding(const CVec& phi, const CMat& H) {
  require_dims(H.rows() == phi.size() && H.cols() == phi.size(), "effective_precoding: H must be N x N");
  const Index n = phi.size();
  const CMat phi_mat = phi.conjugate().asDiagonal();
  if (H.isZero(0.0)) return phi_mat;
  const CMat loop = CMat::Identity(n, n) - phi_mat * H;
  const Eigen::PartialPivLU<CMat> lu(loop);
  if (!(lu.rcond() > 1e-12)) throw SelfExcitationError("I - Phi H is singular (self-excitation)");
  return lu.solve(phi_mat);
}

double si_cost(const CVec& phi, const CVec& phi_prime, const SiProblem& problem) {
  double total = 0.0;
  for (const CMat& hk : problem.h_k) total += residual(phi, phi_prime, hk, problem.psi_opt).squaredNorm();
  return total / static_cast<double>(problem.users());
}

double si_cost(const CVec& phi, const SiProblem& problem) { return si_cost(phi, phi, problem); }

double si_penalized(const CVec& phi, const CVec& phi_prime, const SiProblem& problem, double zeta) {
  return si_cost(phi, phi_prime, problem) + zeta * (phi_prime - phi).squaredNorm();
}

CVec update_phi(const CVec& phi_prime, const SiProblem& problem, double zeta) {
  const Index n = phi_prime.size();
  const double inv_k = 1.0 / static_cast<double>(problem.users());
  CMat lhs = zeta * CMat::Identity(n, n);
  CVec rhs = zeta * phi_prime;
  for (const CMat& hk : problem.h_k) {
    CMat b = phi_prime.asDiagonal() * hk.adjoint();
    b.diagonal().array() += 1.0;
    lhs.noalias() += inv_k * b.adjoint() * b;
    rhs.noalias() += inv_k * b.adjoint() * problem.psi_opt;
  }
  return lhs.llt().solve(rhs);
}

CVec update_phi_prime(const CVec& phi, const SiProblem& problem, double zeta) {
  const double inv_k = 1.0 / static_cast<double>(problem.users());
  // D_k is diagonal, so the normal equations are diagonal too.
  RVec lhs = RVec::Constant(phi.size(), zeta);
  CVec rhs = zeta * phi;
  const CVec target = problem.psi_opt - phi;
  for (const CMat& hk : problem.h_k) {
    const CVec d = hk.adjoint() * phi;
    lhs += inv_k * d.cwiseAbs2();
    rhs += inv_k * d.conjugate().cwiseProduct(target);
  }
  return rhs.cwiseQuotient(lhs.cast<cdouble>());
}

SiSolution suppress(const SiProblem& problem, const SiOptions& opts) {
  SiSolution sol;
  CVec phi = problem.psi_opt;
  CVec phi_prime = problem.psi_opt;
  double zeta = opts.zeta_init;

  CVec best = phi;
  double best_cost = si_cost(phi, problem);
  double q_prev = si_penalized(phi, phi_prime, problem, zeta);

  if (problem.H.isZero(0.0)) {
    sol.phi = phi;
    sol.phi_prime = phi_prime;
    sol.cost = best_cost;
    sol.penalty_final = zeta;
    sol.converged = true;
    return sol;
  }

  while (zeta <= opts.zeta_max) {
    SiStep step;
    step.zeta = zeta;
    step.q_before = si_penalized(phi, phi_prime, problem, zeta);
    phi = update_phi(phi_prime, problem, zeta);
    step.q_after_phi = si_penalized(phi, phi_prime, problem, zeta);
    phi_prime = update_phi_prime(phi, problem, zeta);
    step.q_after_phi_prime = si_penalized(phi, phi_prime, problem, zeta);
    step.gap = (phi - phi_prime).norm();
    step.cost = si_cost(phi, problem);
    sol.trace.push_back(step);

    if (step.cost < best_cost) {
      best_cost = step.cost;
      best = phi;
    }
    const double q = step.q_after_phi_prime;
    const bool q_settled = std::abs(q - q_prev) <= opts.tol_q * std::max(std::abs(q_prev), 1e-300);
    q_prev = q;
    if (q_settled && step.gap < opts.tol_gap) {
      sol.converged = true;
      break;
    }
    zeta *= 2.0;
  }

  sol.penalty_final = zeta;
  sol.phi_prime = phi_prime;
  if (sol.converged) {
    sol.phi = phi;
    sol.cost = si_cost(phi, problem);
  } else {
    sol.warning = true;
    sol.phi = best;
    sol.cost = best_cost;
  }
  return sol;
}

double si_reflect_power(double tau, const CVec& phi, const CMat& H, const CMat& G, const CVec& w, double sigma_v2) {
  return ris_power(Reflection::dense(effective_precoding(tau * phi, H)), G, w, sigma_v2);
}

TauResult rescale_tau(const CVec& phi, const CMat& H, const CMat& G, const CVec& w, const SystemConfig& cfg) {
  const double budget = cfg.p_a_max;
  const double rel_tol = 1e-6;
  TauResult out;

  const double unit_power = ris_power(phi, G, w, cfg.sigma_v2);
  if (!(unit_power > 0.0)) throw DomainError("rescale_tau: phi produces no reflect power");
  const double tau0 = std::sqrt(budget / unit_power);
  if (H.isZero(0.0)) {
    out.tau = tau0;
    out.power = tau0 * tau0 * unit_power;
    return out;
  }

  // power(t) or +inf past the self-excitation boundary
  auto power = [&](double t) {
    try {
      return si_reflect_power(t, phi, H, G, w, cfg.sigma_v2);
    } catch (const SelfExcitationError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  auto bisect = [&](double lo, double p_lo, double hi, double p_hi, bool& violated) {
    for (int it = 0; it < 200; ++it) {
      if (budget - p_lo <= rel_tol * budget) break;
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double p_mid = power(mid);
      if (p_mid < p_lo || (std::isfinite(p_hi) && p_mid > p_hi)) violated = true;
      if (p_mid > budget) {
        hi = mid;
        p_hi = p_mid;
      } else {
        lo = mid;
        p_lo = p_mid;
      }
    }
    return std::pair{lo, p_lo};
  };

  double lo = 0.0;
  double p_lo = 0.0;
  double hi = tau0;
  double p_hi = power(hi);
  for (int it = 0; it < 200 && p_hi <= budget; ++it) {
    if (p_hi < p_lo) break;
    lo = hi;
    p_lo = p_hi;
    hi *= 2.0;
    p_hi = power(hi);
  }

  bool violated = p_hi <= budget;
  auto [tau, p_tau] = bisect(lo, p_lo, hi, p_hi, violated);

  if (violated) {
    out.grid_fallback = true;
    const int points = 10000;
    const SpectralPowerScan scan(phi, H, G, w, cfg.sigma_v2);
    double prev = 0.0;
    double p_prev = 0.0;
    bool found = false;
    for (int i = 1; i <= points; ++i) {
      const double t = hi * i / points;
      const double p = scan.usable() ? scan.power(t) : power(t);
      if (p > budget) {
        bool ignored = false;
        std::tie(tau, p_tau) = bisect(prev, power(prev), t, power(t), ignored);
        found = true;
        break;
      }
      prev = t;
      p_prev = p;
    }
    if (!found) {
      tau = prev;
      p_tau = p_prev;
    }
  }

  out.tau = tau;
  out.power = p_tau;
  out.self_excitation_limited = budget - p_tau > rel_tol * budget;
  return out;
}

}  // namespace ris
