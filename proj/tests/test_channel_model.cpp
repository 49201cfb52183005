#include "ris/channel_model.hpp"
#include "ris/random.hpp"
#include "ris/units.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace ris;

TEST(Units, DbmAndDbRoundTrip) {
  EXPECT_NEAR(units::dbm_to_watt(-100.0), 1e-13, 1e-25);
  EXPECT_NEAR(units::dbm_to_watt(30.0), 1.0, 1e-15);
  EXPECT_NEAR(units::watt_to_dbm(units::dbm_to_watt(7.5)), 7.5, 1e-12);
  EXPECT_NEAR(units::db_to_linear(-70.0), 1e-7, 1e-19);
  EXPECT_NEAR(units::linear_to_db(100.0), 20.0, 1e-12);
}

TEST(Random, DerivedStreamsAreReproducibleAndDistinct) {
  RandomStream a(derive_seed(7, {1, 2, 3}));
  RandomStream b(derive_seed(7, {1, 2, 3}));
  RandomStream c(derive_seed(7, {1, 2, 4}));
  const double va = a.uniform(0, 1);
  EXPECT_EQ(va, b.uniform(0, 1));
  EXPECT_NE(va, c.uniform(0, 1));
  EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
}

TEST(Random, ComplexNormalHasRequestedVariance) {
  RandomStream rng(11);
  double power = 0.0, mean_re = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    const cdouble z = rng.complex_normal(2.5);
    power += std::norm(z) / draws;
    mean_re += z.real() / draws;
  }
  EXPECT_NEAR(power, 2.5, 0.03);
  EXPECT_NEAR(mean_re, 0.0, 0.01);
  EXPECT_EQ(rng.complex_normal(0.0), cdouble(0.0));
}

TEST(PathLoss, ThreeGppLawsAtReferencePoints) {
  EXPECT_NEAR(path_loss_db(PathLossModel::strong(), 1.0), 37.3, 1e-12);
  EXPECT_NEAR(path_loss_db(PathLossModel::strong(), 100.0), 37.3 + 44.0, 1e-12);
  EXPECT_NEAR(path_loss_db(PathLossModel::weak(), 10.0), 41.2 + 28.7, 1e-12);
  EXPECT_NEAR(path_loss_linear(PathLossModel::strong(), 10.0), std::pow(10.0, -(37.3 + 22.0) / 10.0), 1e-18);
  // weak link is always lossier for d >= 1
  for (double d : {1.0, 5.0, 50.0, 500.0})
    EXPECT_GT(path_loss_db(PathLossModel::weak(), d), path_loss_db(PathLossModel::strong(), d));
}

TEST(PathLoss, ReferenceExponentLaw) {
  const auto m = PathLossModel::reference(1e-3, 2.0);
  EXPECT_NEAR(path_loss_db(m, 1.0), 30.0, 1e-12);
  EXPECT_NEAR(path_loss_linear(m, 20.0), 1e-3 / 400.0, 1e-18);
}

TEST(PathLoss, RejectsInvalidDistances) {
  EXPECT_THROW(path_loss_db(PathLossModel::strong(), 0.5), DomainError);
  EXPECT_THROW(path_loss_db(PathLossModel::weak(), -3.0), DomainError);
  EXPECT_THROW(path_loss_db(PathLossModel::reference(1e-3, 2.0), 0.0), DomainError);
}

TEST(Ula, UnitModulusAndBroadsidePhase) {
  const CVec a = ula_response(8, {1.0, 0.0}, {0.0, 1.0}, 0.06);
  for (Index i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(std::abs(a[i]), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(a[i] - cdouble(1.0)), 0.0, 1e-12);  // broadside: no progressive phase
  }
  const CVec e = ula_response(4, {1.0, 0.0}, {1.0, 0.0}, 0.06);  // endfire: pi per element
  EXPECT_NEAR(std::abs(e[1] - cdouble(-1.0)), 0.0, 1e-12);
}

TEST(Ricean, PureLosAtInfiniteKappaAndAveragePower) {
  RandomStream rng(5);
  const CMat los = CMat::Constant(3, 2, cdouble(0.0, 1.0));
  const CMat pure = ricean_channel(rng, 3, 2, 4.0, std::numeric_limits<double>::infinity(), los);
  EXPECT_NEAR((pure - 2.0 * los).norm(), 0.0, 1e-14);

  double power = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) power += ricean_channel(rng, 3, 2, 4.0, 1.0, los).squaredNorm() / (6.0 * draws);
  EXPECT_NEAR(power, 4.0, 0.05);
  EXPECT_THROW(ricean_channel(rng, 3, 2, 1.0, -1.0, los), DomainError);
}

TEST(SelfInterference, ZeroDeltaGivesZeroMatrix) {
  RandomStream rng(1);
  EXPECT_TRUE(self_interference_matrix(rng, 5, 0.0).isZero(0.0));
  EXPECT_THROW(self_interference_matrix(rng, 5, -1.0), DomainError);
  const CMat h = self_interference_matrix(rng, 200, 0.1);
  EXPECT_NEAR(h.squaredNorm() / (200.0 * 200.0), 0.01, 0.001);
}

TEST(GenerateChannels, ShapesDeterminismAndFingerprint) {
  Geometry geo;
  geo.user_positions = {{300, 0}, {310, 5}};
  PathLossAssignment laws;
  RandomStream a(99), b(99), c(100);
  const ChannelSet x = generate_channels(a, geo, laws, 4, 16, 1.0, 0.06);
  const ChannelSet y = generate_channels(b, geo, laws, 4, 16, 1.0, 0.06);
  const ChannelSet z = generate_channels(c, geo, laws, 4, 16, 1.0, 0.06, 1e-3);
  EXPECT_NO_THROW(x.validate(4, 2, 16));
  EXPECT_FALSE(x.H.has_value());
  ASSERT_TRUE(z.H.has_value());
  EXPECT_EQ(z.H->rows(), 16);
  EXPECT_EQ(x.fingerprint(), y.fingerprint());
  EXPECT_NE(x.fingerprint(), z.fingerprint());
  EXPECT_THROW(x.validate(4, 3, 16), DimensionError);
}

TEST(GenerateChannels, AveragePowerFollowsPathLoss) {
  Geometry geo;
  geo.user_positions = {{300, 0}};
  PathLossAssignment laws;
  const double pl_bs_user = path_loss_linear(laws.bs_user, distance(geo.bs_position, geo.user_positions[0]));
  const double pl_ris_user = path_loss_linear(laws.ris_user, distance(geo.ris_position, geo.user_positions[0]));
  double h_power = 0.0, f_power = 0.0;
  const int draws = 4000;
  RandomStream rng(3);
  for (int i = 0; i < draws; ++i) {
    const ChannelSet ch = generate_channels(rng, geo, laws, 4, 8, 1.0, 0.06);
    h_power += ch.h[0].squaredNorm() / (4.0 * draws);
    f_power += ch.f[0].squaredNorm() / (8.0 * draws);
  }
  EXPECT_NEAR(h_power / pl_bs_user, 1.0, 0.05);
  EXPECT_NEAR(f_power / pl_ris_user, 1.0, 0.05);
}

TEST(Geometry, RejectsCoincidentNodes) {
  Geometry geo;
  geo.user_positions = {geo.ris_position};
  EXPECT_THROW(geo.validate(), DomainError);
}
