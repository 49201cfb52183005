#include "ris/channel_model.hpp"

#include "ris/units.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

namespace ris {

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double path_loss_db(const PathLossModel& model, double d) {
  switch (model.kind) {
    case PathLossKind::Strong3GPP:
      if (!(d >= 1.0)) throw DomainError("3GPP path loss requires d >= 1 m, got " + std::to_string(d));
      return 37.3 + 22.0 * std::log10(d);
    case PathLossKind::Weak3GPP:
      if (!(d >= 1.0)) throw DomainError("3GPP path loss requires d >= 1 m, got " + std::to_string(d));
      return 41.2 + 28.7 * std::log10(d);
    case PathLossKind::ReferenceExponent:
      if (!(d > 0.0)) throw DomainError("path loss requires d > 0, got " + std::to_string(d));
      if (!(model.l0 > 0.0)) throw DomainError("reference gain must be positive");
      return -units::linear_to_db(model.l0) + 10.0 * model.exponent * std::log10(d);
  }
  throw DomainError("unknown path loss kind");
}

double path_loss_linear(const PathLossModel& model, double d) {
  return units::db_to_linear(-path_loss_db(model, d));
}

void Geometry::validate() const {
  auto check = [](const Point2& a, const Point2& b, const char* what) {
    if (!(distance(a, b) > 0.0)) throw DomainError(std::string("coincident positions: ") + what);
  };
  check(bs_position, ris_position, "BS/RIS");
  for (const auto& u : user_positions) {
    check(bs_position, u, "BS/user");
    check(ris_position, u, "RIS/user");
  }
}

void ChannelSet::validate(Index m, Index k, Index n) const {
  require_dims(G.rows() == n && G.cols() == m, "G must be N x M");
  require_dims(users() == k && static_cast<Index>(f.size()) == k, "h and f must hold K vectors");
  for (Index i = 0; i < k; ++i) {
    require_dims(h[i].size() == m, "h_k must have length M");
    require_dims(f[i].size() == n, "f_k must have length N");
  }
  if (H) require_dims(H->rows() == n && H->cols() == n, "H must be N x N");
}

namespace {

void fnv_mix(std::uint64_t& state, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    state ^= p[i];
    state *= 0x100000001B3ULL;
  }
}

template <typename Derived>
void fnv_mix_matrix(std::uint64_t& state, const Eigen::MatrixBase<Derived>& m) {
  const std::int64_t dims[2] = {static_cast<std::int64_t>(m.rows()), static_cast<std::int64_t>(m.cols())};
  fnv_mix(state, dims, sizeof dims);
  fnv_mix(state, m.derived().data(), sizeof(cdouble) * static_cast<std::size_t>(m.size()));
}

Point2 unit_direction(const Point2& from, const Point2& to) {
  const double d = distance(from, to);
  return {(to.x - from.x) / d, (to.y - from.y) / d};
}

}  // namespace

std::uint64_t ChannelSet::fingerprint() const {
  std::uint64_t state = 0xCBF29CE484222325ULL;
  fnv_mix_matrix(state, G);
  for (const auto& v : h) fnv_mix_matrix(state, v);
  for (const auto& v : f) fnv_mix_matrix(state, v);
  if (H) fnv_mix_matrix(state, *H);
  return state;
}

CVec ula_response(Index n, const Point2& axis, const Point2& direction, double wavelength) {
  const double spacing = wavelength / 2.0;
  const double cos_axis = axis.x * direction.x + axis.y * direction.y;
  const double step = 2.0 * kPi * spacing / wavelength * cos_axis;
  CVec a(n);
  for (Index i = 0; i < n; ++i) a[i] = std::polar(1.0, step * static_cast<double>(i));
  return a;
}

CMat los_component(const Geometry& geometry, const Link& link, Index m, Index n, double wavelength) {
  switch (link.kind) {
    case Link::Kind::BsRis: {
      const CVec arrive = ula_response(n, geometry.ris_axis,
                                       unit_direction(geometry.ris_position, geometry.bs_position), wavelength);
      const CVec depart = ula_response(m, geometry.bs_axis,
                                       unit_direction(geometry.bs_position, geometry.ris_position), wavelength);
      return arrive * depart.adjoint();
    }
    case Link::Kind::RisUser: {
      const auto& u = geometry.user_positions.at(link.user);
      return ula_response(n, geometry.ris_axis, unit_direction(geometry.ris_position, u), wavelength);
    }
    case Link::Kind::BsUser: {
      const auto& u = geometry.user_positions.at(link.user);
      return ula_response(m, geometry.bs_axis, unit_direction(geometry.bs_position, u), wavelength);
    }
  }
  throw DomainError("unknown link kind");
}

CMat ricean_channel(RandomStream& rng, Index rows, Index cols, double pl_linear, double kappa,
                    const CMat& los) {
  if (!(kappa >= 0.0)) throw DomainError("Ricean factor must be nonnegative");
  require_dims(los.rows() == rows && los.cols() == cols, "LoS component shape mismatch");
  const double amp = std::sqrt(pl_linear);
  if (std::isinf(kappa)) return amp * los;
  const double w_los = std::sqrt(kappa / (kappa + 1.0));
  const double w_nlos = std::sqrt(1.0 / (kappa + 1.0));
  CMat out(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) out(r, c) = amp * (w_los * los(r, c) + w_nlos * rng.complex_normal(1.0));
  return out;
}

CVec rayleigh_vector(RandomStream& rng, Index n, double variance) {
  CVec v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.complex_normal(variance);
  return v;
}

CMat self_interference_matrix(RandomStream& rng, Index n, double delta) {
  if (!(delta >= 0.0)) throw DomainError("self-interference factor must be nonnegative");
  CMat out = CMat::Zero(n, n);
  if (delta == 0.0) return out;
  const double var = delta * delta;
  for (Index c = 0; c < n; ++c)
    for (Index r = 0; r < n; ++r) out(r, c) = rng.complex_normal(var);
  return out;
}

ChannelSet generate_channels(RandomStream& rng, const Geometry& geometry, const PathLossAssignment& laws,
                             Index m, Index n, double kappa, double wavelength, double si_delta) {
  geometry.validate();
  ChannelSet ch;
  const double d_bs_ris = distance(geometry.bs_position, geometry.ris_position);
  ch.G = ricean_channel(rng, n, m, path_loss_linear(laws.bs_ris, d_bs_ris), kappa,
                        los_component(geometry, Link::bs_ris(), m, n, wavelength));
  const auto k_users = geometry.user_positions.size();
  ch.h.reserve(k_users);
  ch.f.reserve(k_users);
  for (std::size_t k = 0; k < k_users; ++k) {
    const auto& u = geometry.user_positions[k];
    ch.h.push_back(ricean_channel(rng, m, 1, path_loss_linear(laws.bs_user, distance(geometry.bs_position, u)),
                                  kappa, los_component(geometry, Link::bs_user(k), m, n, wavelength)));
    ch.f.push_back(ricean_channel(rng, n, 1, path_loss_linear(laws.ris_user, distance(geometry.ris_position, u)),
                                  kappa, los_component(geometry, Link::ris_user(k), m, n, wavelength)));
  }
  if (si_delta > 0.0) ch.H = self_interference_matrix(rng, n, si_delta);
  return ch;
}

}  // namespace ris
