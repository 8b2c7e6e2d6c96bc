#include "holopt/dynamics.hpp"
#include "holopt/systems.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace holopt {
namespace {

const Complex I{0.0, 1.0};

Complex3x3 random_density(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Complex3x3 a;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a(r, c) = Complex(n(rng), n(rng));
  }
  Complex3x3 rho = a * a.adjoint();
  return rho / rho.trace();
}

double max_abs(const Complex3x3& m) { return m.cwiseAbs().maxCoeff(); }

TEST(Lindblad, GeneratorIsTracelessAndHermitian) {
  std::mt19937_64 rng(1);
  const DecoherenceProfile p{0.3, 0.7, 0.2, Sigma2Variant::transmon_ladder};
  const auto h = hamiltonian({0.4, -1.1}, {0.8, 0.2}, 0.5);
  for (int k = 0; k < 10; ++k) {
    const auto d = lindblad_rhs(random_density(rng), h, p);
    EXPECT_LT(std::abs(d.trace()), 1e-14);
    EXPECT_LT(hermiticity_error(d), 1e-14);
  }
}

TEST(Lindblad, DecayChannelMovesExcitedPopulation) {
  // For rho = |e><e| only sigma1 acts: d rho00/dt = d rho11/dt = G, d rho_ee/dt = -2G.
  Complex3x3 rho = Complex3x3::Zero();
  rho(kLevelE, kLevelE) = 1.0;
  const auto d = lindblad_rhs(rho, Complex3x3::Zero(), {0.5, 0.0, 0.0, Sigma2Variant::lambda_rei});
  EXPECT_NEAR(d(kLevel0, kLevel0).real(), 0.5, 1e-15);
  EXPECT_NEAR(d(kLevel1, kLevel1).real(), 0.5, 1e-15);
  EXPECT_NEAR(d(kLevelE, kLevelE).real(), -1.0, 1e-15);
  EXPECT_NEAR(std::abs(d(kLevel0, kLevel1)), 0.5, 1e-15);
}

TEST(Lindblad, DephasingDampsGroundExcitedCoherence) {
  // sigma2 = diag(-1, w, -1): rho_0e decays at G (1 + w)^2 / 2.
  Complex3x3 rho = Complex3x3::Zero();
  rho(kLevel0, kLevel0) = rho(kLevelE, kLevelE) = 0.5;
  rho(kLevel0, kLevelE) = rho(kLevelE, kLevel0) = 0.5;
  for (auto [variant, w] : {std::pair{Sigma2Variant::lambda_rei, 1.0},
                            std::pair{Sigma2Variant::transmon_ladder, 2.0}}) {
    const auto d = lindblad_rhs(rho, Complex3x3::Zero(), {0.0, 1.0, 0.0, variant});
    EXPECT_NEAR(d(kLevel0, kLevelE).real(), -0.5 * (1 + w) * (1 + w) / 2, 1e-15);
    EXPECT_NEAR(std::abs(d(kLevel0, kLevel0)), 0.0, 1e-15);
  }
}

TEST(Lindblad, RejectsNonHermitianHamiltonian) {
  Complex3x3 h = Complex3x3::Zero();
  h(0, 1) = 1.0;
  EXPECT_THROW(lindblad_rhs(Complex3x3::Identity() / 3.0, h, {}), std::invalid_argument);
}

TEST(Lindblad, JumpOperatorLayout) {
  const auto ops = jump_operators(Sigma2Variant::transmon_ladder);
  EXPECT_EQ(ops[0](kLevel0, kLevelE), Complex(1.0));
  EXPECT_EQ(ops[0](kLevel1, kLevelE), Complex(1.0));
  EXPECT_EQ(ops[1](kLevelE, kLevelE), Complex(2.0));
  EXPECT_EQ(ops[1](kLevel0, kLevel0), Complex(-1.0));
  EXPECT_EQ(ops[2](kLevel0, kLevel1), Complex(1.0));
  EXPECT_EQ(jump_operators(Sigma2Variant::lambda_rei)[1](kLevelE, kLevelE), Complex(1.0));
}

TEST(Evolve, PreservesPhysicalityUnderDecoherence) {
  const auto sys = preset(SystemName::ensemble_rei);
  const auto gate = gate_catalog(GateName::hadamard);
  const auto sched = preset_schedule(sys, gate, table1_coefficients(sys.name));
  const auto rho0 = DensityMatrix::pure(PureState3::from_qubit({0.6, 0.8 * I}));
  const auto traj = evolve(rho0, sched, angular(170e3), sys.profile);
  ASSERT_GT(traj.states.size(), 20u);
  EXPECT_DOUBLE_EQ(traj.times.front(), 0.0);
  EXPECT_DOUBLE_EQ(traj.times.back(), 4 * sys.tau);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& rho = traj.states[k];
    EXPECT_NEAR(rho.trace(), 1.0, 1e-8);
    EXPECT_LT(hermiticity_error(rho.matrix()), 1e-10);
    EXPECT_GE(rho.min_eigenvalue(), -1e-8);
    const auto& p = traj.populations[k];
    EXPECT_NEAR(p.p0 + p.pe + p.p1, 1.0, 1e-8);
    if (k > 0) {
      EXPECT_GT(traj.times[k], traj.times[k - 1]);
    }
  }
}

TEST(Evolve, BoundaryOnlyRecording) {
  const auto sys = preset(SystemName::transmon);
  const auto sched = preset_schedule(sys, gate_catalog(GateName::not_gate), table1_coefficients(sys.name));
  IntegratorConfig cfg;
  cfg.record_steps = false;
  const auto traj = evolve(DensityMatrix::pure(PureState3::basis(kLevel1)), sched, 0.0, sys.profile, cfg);
  ASSERT_EQ(traj.times.size(), 5u);
  for (int k = 0; k <= 4; ++k) EXPECT_NEAR(traj.times[k], k * sys.tau, 1e-20);
  EXPECT_TRUE(traj.fidelity.empty());
}

TEST(Evolve, DarkStateClosedAndBrightStatePicksUpPhase) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.1, kTwoPi - 0.1);
  const auto coeffs = table1_coefficients(SystemName::ensemble_rei);
  for (int k = 0; k < 5; ++k) {
    const GateParams g{u(rng) / 2, u(rng), u(rng)};
    const auto sched = gate_schedule(g, coeffs, kPrintedTolerance);
    const auto bd = bright_dark_states(g.theta, -g.phi, 0.0);
    const Ket3& b = bd.bright.amplitudes();
    const Ket3& d = bd.dark.amplitudes();
    const Complex3x3 dd = d * d.adjoint();
    const Complex3x3 bd_op = b * d.adjoint();
    EXPECT_LT(max_abs(propagate(dd, sched, 0.0, {}) - dd), 1e-5);
    EXPECT_LT(max_abs(propagate(bd_op, sched, 0.0, {}) - std::exp(I * g.beta) * bd_op), 1e-5);
  }
}

TEST(Evolve, ReproducesTargetUnitaryForRandomGates) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  const auto coeffs = table1_coefficients(SystemName::transmon);
  for (int k = 0; k < 20; ++k) {
    const GateParams g{u(rng) / 2, u(rng), u(rng)};
    const QubitKet psi = QubitKet(Complex(std::cos(u(rng)), 0.0), std::exp(I * u(rng)) * std::sin(u(rng)))
                             .normalized();
    const auto sched = holonomic_schedule(g, coeffs, k % 2 == 0, nullptr, kPrintedTolerance);
    const auto traj = evolve(DensityMatrix::pure(PureState3::from_qubit(psi)), sched, 0.0, {}, {},
                             target_state(g, psi));
    EXPECT_GE(traj.fidelity.back(), 1.0 - 1e-6) << "gate " << k;
  }
}

TEST(Evolve, CompensationPairActsAsIdentityWhenIdeal) {
  const auto coeffs = table1_coefficients(SystemName::ensemble_rei);
  const GateParams g{kPi / 4, 0.3, kPi};
  const auto two = holonomic_schedule(g, coeffs, false, nullptr, kPrintedTolerance);
  const auto four = holonomic_schedule(g, coeffs, true, nullptr, kPrintedTolerance);
  for (int r : {kLevel0, kLevel1}) {
    for (int c : {kLevel0, kLevel1}) {
      Complex3x3 e = Complex3x3::Zero();
      e(r, c) = 1.0;
      EXPECT_LT(max_abs(propagate(e, two, 0.0, {}) - propagate(e, four, 0.0, {})), 1e-6);
    }
  }
}

struct OracleCase {
  SystemName system;
  GateName gate;
  double delta_hz;
};

class OracleAgreement : public ::testing::TestWithParam<OracleCase> {};

TEST_P(OracleAgreement, AdaptiveMatchesFixedStepRk4) {
  const auto c = GetParam();
  const auto sys = preset(c.system);
  const auto gate = gate_catalog(c.gate);
  const auto coeffs = table1_coefficients(c.system);
  const auto sched = preset_schedule(sys, gate, coeffs);
  const Complex3x3 rho0 = DensityMatrix::pure(PureState3::basis(kLevel1)).matrix();
  const auto ours = propagate(rho0, sched, angular(c.delta_hz), sys.profile);

  const std::vector<double> a(coeffs.alphas().begin(), coeffs.alphas().end());
  const auto segs = oracle::segments(gate.params.theta, gate.params.phi, gate.params.beta, a,
                                     sys.tau, sys.compensation);
  oracle::Model m;
  m.delta = angular(c.delta_hz);
  m.gamma1 = sys.profile.gamma1;
  m.gamma2 = sys.profile.gamma2;
  m.excited_weight = sys.profile.sigma2 == Sigma2Variant::transmon_ladder ? 2.0 : 1.0;
  const auto ref = oracle::evolve(rho0, segs, m, 10000);
  EXPECT_LT(max_abs(ours - ref), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Scenarios, OracleAgreement,
                         ::testing::Values(OracleCase{SystemName::ensemble_rei, GateName::not_gate, 170e3},
                                           OracleCase{SystemName::single_rei, GateName::hadamard, 0.0},
                                           OracleCase{SystemName::transmon, GateName::hadamard, 2e6}));

TEST(Evolve, StepBudgetExhaustionRaisesIntegrationError) {
  const auto sys = preset(SystemName::ensemble_rei);
  const auto sched = preset_schedule(sys, gate_catalog(GateName::not_gate), table1_coefficients(sys.name));
  IntegratorConfig cfg;
  cfg.max_steps_per_segment = 3;
  try {
    evolve(DensityMatrix::pure(PureState3::basis(kLevel1)), sched, 0.0, sys.profile, cfg);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_GE(e.time(), 0.0);
    EXPECT_LE(e.time(), sys.tau);
  }
}

TEST(Evolve, RejectsBadConfiguration) {
  const auto sys = preset(SystemName::transmon);
  const auto sched = preset_schedule(sys, gate_catalog(GateName::not_gate), table1_coefficients(sys.name));
  const auto rho0 = DensityMatrix::pure(PureState3::basis(kLevel1));
  IntegratorConfig cfg;
  cfg.rel_tol = 0.0;
  EXPECT_THROW(evolve(rho0, sched, 0.0, {}, cfg), std::invalid_argument);
  EXPECT_THROW(evolve(rho0, sched, 0.0, {-1.0, 0.0, 0.0, Sigma2Variant::lambda_rei}), std::invalid_argument);
  EXPECT_THROW(evolve(rho0, sched, std::nan(""), {}), std::invalid_argument);
}

TEST(Evolve, HalvingMaxStepChangesLittle) {
  const auto sys = preset(SystemName::ensemble_rei);
  const auto gate = gate_catalog(GateName::not_gate);
  const auto sched = preset_schedule(sys, gate, table1_coefficients(sys.name));
  const auto rho0 = DensityMatrix::pure(PureState3::basis(kLevel1));
  IntegratorConfig a, b;
  a.record_steps = b.record_steps = false;
  b.max_step_fraction = a.max_step_fraction / 2;
  const auto target = target_state(gate.params, {0.0, 1.0});
  const double fa = evolve(rho0, sched, angular(170e3), sys.profile, a, target).fidelity.back();
  const double fb = evolve(rho0, sched, angular(170e3), sys.profile, b, target).fidelity.back();
  EXPECT_LT(std::abs(fa - fb), 1e-7);
}

TEST(Fidelity, TargetAndOverlap) {
  const auto t = target_state(gate_catalog(GateName::not_gate).params, {0.0, 1.0});
  EXPECT_NEAR(std::abs(t[kLevel0]), 1.0, 1e-12);
  EXPECT_NEAR(state_fidelity(DensityMatrix::pure(PureState3::basis(kLevel0)), t), 1.0, 1e-12);
  EXPECT_NEAR(state_fidelity(DensityMatrix::pure(PureState3::basis(kLevel1)), t), 0.0, 1e-12);
  EXPECT_THROW(target_state({}, {1.0, 1.0}), std::invalid_argument);
}

TEST(TrajectoryCsv, HeaderAndRowCount) {
  const auto sys = preset(SystemName::transmon);
  const auto gate = gate_catalog(GateName::not_gate);
  const auto sched = preset_schedule(sys, gate, table1_coefficients(sys.name));
  IntegratorConfig cfg;
  cfg.record_steps = false;
  const auto traj = evolve(DensityMatrix::pure(PureState3::basis(kLevel1)), sched, 0.0, sys.profile,
                           cfg, target_state(gate.params, {0.0, 1.0}));
  std::ostringstream s;
  write_trajectory_csv(s, traj, sched, true);
  std::istringstream in(s.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("time_s,rabi0_hz,rabi1_hz,p0,pe,p1,fidelity,re_rho00,im_rho00", 0), 0u);
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 5);
}

}  // namespace
}  // namespace holopt
