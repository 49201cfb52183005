#pragma once

#include "ris/types.hpp"

namespace ris::qcqp {

/// Hermitian PSD system S = U diag(e) U^H together with right-hand sides
/// projected onto its eigenbasis. Solving (S + mu I) X = B then costs O(size)
/// per multiplier value, which is what the power bisections need.
class SpectralSystem {
 public:
  SpectralSystem(const CMat& s, const CMat& rhs);

  /// sum_i |C_i|^2 / (e_i + mu)^2 over every right-hand side.
  /// Infinite when mu = 0 and some rhs energy sits in the null space of S.
  double power(double mu) const;

  /// (S + mu I)^-1 B, using the least-norm solution when mu = 0 and S is singular.
  CMat solve(double mu) const;

  double total_weight() const { return total_weight_; }

 private:
  bool is_null(Index i) const { return eigenvalues_[i] <= null_threshold_; }

  CMat basis_;
  RVec eigenvalues_;
  CMat coeffs_;   // U^H B
  RVec weight_;   // row-wise squared norms of coeffs_
  double total_weight_ = 0.0;
  double null_threshold_ = 0.0;
  bool null_energy_ = false;
};

/// Smallest mu >= 0 with power(mu) <= budget, found by bisection on
/// [0, sqrt(total/budget)] (the upper end is always feasible because e_i >= 0).
/// The returned multiplier is on the feasible side; iteration stops once the
/// relative power error is below rel_tol.
double bisect_multiplier(const SpectralSystem& sys, double budget, double rel_tol, int max_iter = 300);

}  // namespace ris::qcqp
