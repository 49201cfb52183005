#include "ris/asymptotics.hpp"
#include "ris/fp_beamforming.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <Eigen/LU>

#include <cmath>

using namespace ris;

namespace {

struct Instance {
  ChannelSet ch;
  SystemConfig cfg;
  Precoder pc;
  AuxiliaryState aux;
};

Instance make_instance(std::uint64_t seed, Index m = 3, Index k = 2, Index n = 6,
                       RisMode mode = RisMode::ActiveRis) {
  RandomStream rng(seed);
  Instance in;
  in.ch = test::rayleigh_channels(rng, m, k, n);
  in.cfg = test::unit_config(m, k, n, mode);
  in.pc = initial_precoder(in.ch, in.cfg, rng);
  in.aux.rho = sinr_all(in.ch, in.pc, in.cfg);
  in.aux.varpi = update_varpi(in.ch, in.pc, in.aux.rho, in.cfg);
  return in;
}

double ln2_rate(const Instance& in, const Precoder& pc) { return std::log(2.0) * sum_rate(in.ch, pc, in.cfg); }

}  // namespace

TEST(FpAux, RhoUpdateIsStationaryPoint) {
  // d/drho [ln(1+rho) - rho + 2 sqrt(1+rho) xi] = 0 at the update
  for (double xi : {0.05, 0.7, 3.0, 25.0}) {
    RVec x(1);
    x[0] = xi;
    const double rho = update_rho(x)[0];
    auto g = [&](double r) { return std::log1p(r) - r + 2.0 * std::sqrt(1.0 + r) * xi; };
    const double h = 1e-6 * (1.0 + rho);
    EXPECT_NEAR((g(rho + h) - g(rho - h)) / (2 * h), 0.0, 1e-6);
    EXPECT_GE(g(rho), g(rho * 1.01));
    EXPECT_GE(g(rho), g(rho * 0.99));
  }
}

TEST(FpAux, VarpiMaximizesSurrogateForFixedRho) {
  Instance in = make_instance(1);
  in.aux.rho = in.aux.rho * 0.5;  // any rho
  in.aux.varpi = update_varpi(in.ch, in.pc, in.aux.rho, in.cfg);
  const double best = surrogate_rate(in.ch, in.pc, in.aux, in.cfg);
  RandomStream rng(9);
  for (int t = 0; t < 200; ++t) {
    AuxiliaryState probe = in.aux;
    probe.varpi += test::random_vector(rng, probe.varpi.size(), 1e-4 * probe.varpi.squaredNorm());
    EXPECT_LE(surrogate_rate(in.ch, in.pc, probe, in.cfg), best + 1e-12);
  }
}

TEST(FpAux, SurrogateIsTightAtRhoEqualSinr) {
  const Instance in = make_instance(2);
  const double lhs = surrogate_rate(in.ch, in.pc, in.aux, in.cfg);
  EXPECT_NEAR(lhs, ln2_rate(in, in.pc), 1e-10 * std::abs(lhs));
}

TEST(FpAux, SurrogateLowerBoundsRate) {
  Instance in = make_instance(3);
  RandomStream rng(4);
  for (int t = 0; t < 50; ++t) {
    AuxiliaryState a;
    a.rho = in.aux.rho.cwiseProduct(RVec::Random(in.aux.rho.size()).cwiseAbs() * 2.0);
    a.varpi = in.aux.varpi + test::random_vector(rng, in.aux.varpi.size(), 0.01 * in.aux.varpi.squaredNorm());
    EXPECT_LE(surrogate_rate(in.ch, in.pc, a, in.cfg), ln2_rate(in, in.pc) + 1e-12);
  }
}

TEST(FpBlocks, BeamformingObjectiveTracksSurrogateDifferences) {
  const Instance in = make_instance(5);
  FpWorkspace ws;
  fill_beamforming_terms(ws, in.ch, in.pc, in.aux, in.cfg);
  RandomStream rng(6);
  for (int t = 0; t < 10; ++t) {
    Precoder a = in.pc, b = in.pc;
    a.w = test::random_vector(rng, a.w.size());
    b.w = test::random_vector(rng, b.w.size());
    const double ds = surrogate_rate(in.ch, a, in.aux, in.cfg) - surrogate_rate(in.ch, b, in.aux, in.cfg);
    const double dq = beamforming_objective(ws, a.w) - beamforming_objective(ws, b.w);
    EXPECT_NEAR(ds, dq, 1e-9 * (1.0 + std::abs(ds)));
  }
}

TEST(FpBlocks, ReflectionObjectiveTracksSurrogateDifferences) {
  const Instance in = make_instance(7);
  FpWorkspace ws;
  fill_reflection_terms(ws, in.ch, in.pc, in.aux, in.cfg);
  RandomStream rng(8);
  for (int t = 0; t < 10; ++t) {
    Precoder a = in.pc, b = in.pc;
    a.psi = test::random_vector(rng, a.psi.size());
    b.psi = test::random_vector(rng, b.psi.size());
    const double ds = surrogate_rate(in.ch, a, in.aux, in.cfg) - surrogate_rate(in.ch, b, in.aux, in.cfg);
    const double dq = reflection_objective(ws, a.psi) - reflection_objective(ws, b.psi);
    EXPECT_NEAR(ds, dq, 1e-9 * (1.0 + std::abs(ds)));
  }
}

TEST(FpBlocks, ConstraintMatricesReproduceRisPower) {
  const Instance in = make_instance(9);
  const FpWorkspace ws = make_workspace(in.ch, in.pc, in.aux, in.cfg);
  const double p = ris_power(in.pc.psi, in.ch.G, in.pc.w, in.cfg.sigma_v2);
  const double via_xi = in.pc.w.dot(ws.Xi() * in.pc.w).real() + in.pc.psi.squaredNorm() * in.cfg.sigma_v2;
  const double via_pi = in.pc.psi.dot(ws.Pi() * in.pc.psi).real();
  EXPECT_NEAR(via_xi, p, 1e-10 * p);
  EXPECT_NEAR(via_pi, p, 1e-10 * p);
  EXPECT_NEAR(ws.p_m_max, in.cfg.p_a_max - in.pc.psi.squaredNorm() * in.cfg.sigma_v2, 1e-15);
}

TEST(FpUpdateW, SatisfiesKktConditions) {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const Instance in = make_instance(seed);
    FpWorkspace ws;
    fill_beamforming_terms(ws, in.ch, in.pc, in.aux, in.cfg);
    ws.p_m_max *= 0.3;  // make C2 bind more often
    const SolverOptions opts;
    const BeamformingUpdate u = update_w(ws, in.cfg, opts);
    const Index mk = u.w.size();
    const CMat lhs = ws.A() + u.lambda1 * CMat::Identity(mk, mk) + u.lambda2 * ws.Xi();
    const CVec direct = lhs.partialPivLu().solve(ws.b);
    EXPECT_NEAR((u.w - direct).norm(), 0.0, 1e-8 * direct.norm());

    const double c1 = u.w.squaredNorm();
    const double c2 = u.w.dot(ws.Xi() * u.w).real();
    EXPECT_LE(c1, in.cfg.p_bs_max * (1 + 1e-9));
    EXPECT_LE(c2, ws.p_m_max * (1 + 1e-9));
    if (u.lambda1 > 0) EXPECT_NEAR(c1, in.cfg.p_bs_max, 1e-6 * in.cfg.p_bs_max);
    if (u.lambda2 > 0) EXPECT_NEAR(c2, ws.p_m_max, 1e-6 * ws.p_m_max);
  }
}

TEST(FpUpdateW, BeatsRandomFeasiblePoints) {
  const Instance in = make_instance(21);
  FpWorkspace ws;
  fill_beamforming_terms(ws, in.ch, in.pc, in.aux, in.cfg);
  const BeamformingUpdate u = update_w(ws, in.cfg, SolverOptions{});
  const double best = beamforming_objective(ws, u.w);
  RandomStream rng(22);
  for (int t = 0; t < 2000; ++t) {
    CVec w = u.w + test::random_vector(rng, u.w.size(), 0.01);
    const double s1 = std::sqrt(in.cfg.p_bs_max / w.squaredNorm());
    const double s2 = std::sqrt(ws.p_m_max / w.dot(ws.Xi() * w).real());
    w *= std::min({1.0, s1, s2});
    EXPECT_LE(beamforming_objective(ws, w), best + 1e-9 * std::abs(best));
  }
}

TEST(FpUpdateW, NegativeRemainingBudgetIsInfeasible) {
  Instance in = make_instance(23);
  in.pc.psi *= 100.0;  // ||psi||^2 sigma_v2 > P_A
  FpWorkspace ws;
  fill_beamforming_terms(ws, in.ch, in.pc, in.aux, in.cfg);
  ASSERT_LT(ws.p_m_max, 0.0);
  EXPECT_THROW(update_w(ws, in.cfg, SolverOptions{}), InfeasibleError);
}

TEST(FpUpdatePsi, SatisfiesKktConditions) {
  for (std::uint64_t seed = 30; seed < 40; ++seed) {
    const Instance in = make_instance(seed);
    FpWorkspace ws;
    fill_reflection_terms(ws, in.ch, in.pc, in.aux, in.cfg);
    const ReflectionUpdate u = update_psi(ws, in.cfg, SolverOptions{});
    const Index n = u.psi.size();
    const CVec direct = (ws.omega + u.mu * ws.Pi()).partialPivLu().solve(ws.upsilon);
    EXPECT_NEAR((u.psi - direct).norm(), 0.0, 1e-8 * direct.norm());
    const double power = u.psi.dot(ws.Pi() * u.psi).real();
    EXPECT_LE(power, in.cfg.p_a_max * (1 + 1e-9));
    if (u.mu > 0) EXPECT_NEAR(power, in.cfg.p_a_max, 1e-6 * in.cfg.p_a_max);
    (void)n;
  }
}

TEST(FpJoint, MonotoneTightAndFeasible) {
  for (std::uint64_t seed = 40; seed < 45; ++seed) {
    const Instance in = make_instance(seed, 4, 3, 8);
    std::vector<FpEvent> events;
    const JointSolution sol = solve_joint(in.ch, in.cfg, SolverOptions{}, in.pc,
                                          [&](const FpEvent& e) { events.push_back(e); });
    for (std::size_t i = 1; i < sol.rate_history.size(); ++i)
      EXPECT_GE(sol.rate_history[i], sol.rate_history[i - 1] - 1e-9 * sol.rate_history[i - 1]);
    for (const FpEvent& e : events) {
      if (e.stage == FpStage::AfterAux)
        EXPECT_NEAR(e.surrogate, std::log(2.0) * e.sum_rate, 1e-8 * std::log(2.0) * e.sum_rate);
      EXPECT_LE(e.p_bs, in.cfg.p_bs_max * (1 + 1e-6));
      EXPECT_LE(e.p_a, in.cfg.p_a_max * (1 + 1e-6));
    }
    // surrogate never decreases across the blocks of one iteration
    for (std::size_t i = 1; i < events.size(); ++i)
      if (events[i].iteration == events[i - 1].iteration)
        EXPECT_GE(events[i].surrogate, events[i - 1].surrogate - 1e-9 * std::abs(events[i - 1].surrogate));
    EXPECT_GT(sol.result.sum_rate, sol.rate_history.front());
  }
}

TEST(FpJoint, NoRisKeepsPsiZero) {
  const Instance in = make_instance(50, 3, 2, 5, RisMode::NoRis);
  const JointSolution sol = solve_joint(in.ch, in.cfg, SolverOptions{}, in.pc);
  EXPECT_TRUE(sol.precoder.psi.isZero(0.0));
  EXPECT_EQ(sol.result.p_a_realized, 0.0);
}

TEST(FpJoint, InitialPrecoderUsesFullBudgets) {
  const Instance in = make_instance(51, 4, 3, 8);
  EXPECT_NEAR(in.pc.w.squaredNorm(), in.cfg.p_bs_max, 1e-12);
  EXPECT_NEAR(ris_power(in.pc.psi, in.ch.G, in.pc.w, in.cfg.sigma_v2), in.cfg.p_a_max, 1e-12);
  const Instance passive = make_instance(51, 4, 3, 8, RisMode::PassiveRis);
  for (Index i = 0; i < passive.pc.psi.size(); ++i) EXPECT_NEAR(std::abs(passive.pc.psi[i]), 1.0, 1e-14);
}

namespace {

JointSolution solve_single_user(const CVec& f, const CVec& g, const SystemConfig& cfg, RandomStream& rng) {
  ChannelSet ch;
  ch.G = g;
  ch.h = {CVec::Zero(1)};
  ch.f = {f};
  SolverOptions opts;
  opts.max_iters = 500;
  opts.tol_rate = 1e-10;
  return solve_joint(ch, cfg, opts, initial_precoder(ch, cfg, rng));
}

CVec unit_modulus(RandomStream& rng, Index n) {
  CVec v(n);
  for (Index i = 0; i < n; ++i) v[i] = std::polar(1.0, rng.uniform_phase());
  return v;
}

}  // namespace

TEST(FpJoint, SingleUserEqualGainsReachesClosedForm) {
  // M = K = 1, no direct link, equal |f_n| and |g_n|: a common amplification
  // factor is optimal, so the closed-form single-user SNR is the global optimum.
  RandomStream rng(60);
  const Index n = 8;
  const CVec g = unit_modulus(rng, n), f = unit_modulus(rng, n);
  const SystemConfig cfg = test::unit_config(1, 1, n);
  const JointSolution sol = solve_single_user(f, g, cfg, rng);
  const double exact = snr_active_exact(f, g, {cfg.p_bs_max, cfg.p_a_max, cfg.sigma2, cfg.sigma_v2});
  EXPECT_NEAR(sol.result.sinr[0] / exact, 1.0, 1e-4);
}

TEST(FpJoint, SingleUserNotWorseThanCommonAmplitude) {
  // unequal gains: per-element amplitudes can only improve on the common-amplitude optimum
  RandomStream rng(61);
  for (int t = 0; t < 5; ++t) {
    const Index n = 8;
    const CVec g = test::random_vector(rng, n), f = test::random_vector(rng, n);
    const SystemConfig cfg = test::unit_config(1, 1, n);
    const JointSolution sol = solve_single_user(f, g, cfg, rng);
    const double common = snr_active_exact(f, g, {cfg.p_bs_max, cfg.p_a_max, cfg.sigma2, cfg.sigma_v2});
    EXPECT_GE(sol.result.sinr[0], common * (1 - 1e-4));
    EXPECT_LE(sol.result.p_a_realized, cfg.p_a_max * (1 + 1e-6));
    EXPECT_LE(sol.result.p_bs_realized, cfg.p_bs_max * (1 + 1e-6));
  }
}
