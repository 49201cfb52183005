#pragma once

#include "ris/random.hpp"
#include "ris/types.hpp"

#include <optional>
#include <vector>

namespace ris {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point2& a, const Point2& b);

enum class PathLossKind { Strong3GPP, Weak3GPP, ReferenceExponent };

struct PathLossModel {
  PathLossKind kind = PathLossKind::Strong3GPP;
  double l0 = 1e-3;      // linear gain at 1 m (ReferenceExponent only)
  double exponent = 2.0;  // ReferenceExponent only, in [2, 4]

  static PathLossModel strong() { return {PathLossKind::Strong3GPP}; }
  static PathLossModel weak() { return {PathLossKind::Weak3GPP}; }
  static PathLossModel reference(double l0, double exponent) {
    return {PathLossKind::ReferenceExponent, l0, exponent};
  }
};

/// Path loss in dB (positive number = attenuation). Linear gain is 10^(-PL/10).
double path_loss_db(const PathLossModel& model, double d);
double path_loss_linear(const PathLossModel& model, double d);

/// Linear arrays lie along `*_axis` (unit vectors). Elevation is ignored.
struct Geometry {
  Point2 bs_position{0.0, -60.0};
  Point2 ris_position{300.0, 10.0};
  std::vector<Point2> user_positions;
  Point2 bs_axis{0.0, 1.0};
  Point2 ris_axis{1.0, 0.0};

  void validate() const;
};

/// One channel realization.
///   G : N x M, BS -> RIS
///   h : K vectors of length M; the direct row used in the SINR is h_k^H
///   f : K vectors of length N; the RIS -> user row is f_k^H
///   H : optional N x N RIS self-interference matrix
struct ChannelSet {
  CMat G;
  std::vector<CVec> h;
  std::vector<CVec> f;
  std::optional<CMat> H;

  Index antennas() const { return G.cols(); }
  Index elements() const { return G.rows(); }
  Index users() const { return static_cast<Index>(h.size()); }

  /// Throws DimensionError unless shapes agree with (M, K, N).
  void validate(Index m, Index k, Index n) const;

  /// FNV-1a over the raw bytes of every matrix; used to prove trial pairing.
  std::uint64_t fingerprint() const;
};

/// Uniform linear array response with half-wavelength spacing:
/// a_n = exp(j * 2*pi * (spacing/lambda) * n * cos(angle to axis)).
CVec ula_response(Index n, const Point2& axis, const Point2& direction, double wavelength);

struct Link {
  enum class Kind { BsRis, RisUser, BsUser };
  Kind kind = Kind::BsRis;
  std::size_t user = 0;

  static Link bs_ris() { return {Kind::BsRis, 0}; }
  static Link ris_user(std::size_t k) { return {Kind::RisUser, k}; }
  static Link bs_user(std::size_t k) { return {Kind::BsUser, k}; }
};

/// Deterministic rank-one LoS component with unit-modulus entries.
/// Shapes: BsRis -> N x M, RisUser -> N x 1, BsUser -> M x 1.
CMat los_component(const Geometry& geometry, const Link& link, Index m, Index n, double wavelength);

/// sqrt(pl) * ( sqrt(k/(k+1)) LoS + sqrt(1/(k+1)) NLoS ). kappa may be +inf (pure LoS).
CMat ricean_channel(RandomStream& rng, Index rows, Index cols, double pl_linear, double kappa,
                    const CMat& los);

CVec rayleigh_vector(RandomStream& rng, Index n, double variance);

/// i.i.d. CN(0, delta^2) entries.
CMat self_interference_matrix(RandomStream& rng, Index n, double delta);

struct PathLossAssignment {
  PathLossModel bs_ris = PathLossModel::strong();
  PathLossModel ris_user = PathLossModel::strong();
  PathLossModel bs_user = PathLossModel::weak();
};

/// Full Ricean realization for a geometry. The self-interference matrix is
/// drawn only when si_delta > 0.
ChannelSet generate_channels(RandomStream& rng, const Geometry& geometry, const PathLossAssignment& laws,
                             Index m, Index n, double kappa, double wavelength, double si_delta = 0.0);

}  // namespace ris
