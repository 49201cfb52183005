#include "ris/qcqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ris::qcqp {

SpectralSystem::SpectralSystem(const CMat& s, const CMat& rhs) {
  require_dims(s.rows() == s.cols() && s.rows() == rhs.rows(), "SpectralSystem: shape mismatch");
  Eigen::SelfAdjointEigenSolver<CMat> eig(s);
  basis_ = eig.eigenvectors();
  eigenvalues_ = eig.eigenvalues().cwiseMax(0.0);
  coeffs_ = basis_.adjoint() * rhs;
  weight_ = coeffs_.rowwise().squaredNorm();
  total_weight_ = weight_.sum();

  const double e_max = eigenvalues_.size() > 0 ? eigenvalues_.maxCoeff() : 0.0;
  null_threshold_ = 1e-13 * e_max;
  double null_w = 0.0;
  for (Index i = 0; i < eigenvalues_.size(); ++i)
    if (is_null(i)) null_w += weight_[i];
  // Energy at round-off level in the null space is noise, not a direction to follow.
  null_energy_ = null_w > 1e-20 * total_weight_;
}

double SpectralSystem::power(double mu) const {
  if (mu <= 0.0 && null_energy_) return std::numeric_limits<double>::infinity();
  double p = 0.0;
  for (Index i = 0; i < eigenvalues_.size(); ++i) {
    if (weight_[i] == 0.0) continue;
    if (mu <= 0.0 && is_null(i)) continue;
    const double d = eigenvalues_[i] + mu;
    p += weight_[i] / (d * d);
  }
  return p;
}

CMat SpectralSystem::solve(double mu) const {
  CMat scaled = coeffs_;
  for (Index i = 0; i < eigenvalues_.size(); ++i) {
    if (mu <= 0.0 && is_null(i)) {
      scaled.row(i).setZero();
    } else {
      scaled.row(i) /= eigenvalues_[i] + mu;
    }
  }
  return basis_ * scaled;
}

double bisect_multiplier(const SpectralSystem& sys, double budget, double rel_tol, int max_iter) {
  if (sys.total_weight() == 0.0) return 0.0;
  if (sys.power(0.0) <= budget) return 0.0;
  double lo = 0.0;
  double hi = std::sqrt(sys.total_weight() / budget);
  for (int it = 0; it < max_iter; ++it) {
    if ((budget - sys.power(hi)) <= rel_tol * budget) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sys.power(mid) > budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace ris::qcqp
