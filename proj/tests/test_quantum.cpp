#include "holopt/quantum.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

namespace holopt {
namespace {

const Complex I{0.0, 1.0};

Complex2x2 pauli_x() { return (Complex2x2() << 0, 1, 1, 0).finished(); }
Complex2x2 pauli_y() { return (Complex2x2() << 0, -I, I, 0).finished(); }
Complex2x2 pauli_z() { return (Complex2x2() << 1, 0, 0, -1).finished(); }

TEST(PureState3, RejectsUnnormalizedAmplitudes) {
  EXPECT_THROW(PureState3(Ket3(1.0, 1.0, 0.0)), std::invalid_argument);
  EXPECT_NO_THROW(PureState3(Ket3(1.0, 0.0, 0.0)));
}

TEST(PureState3, NormalizesAndRejectsZero) {
  const auto s = PureState3::normalized(Ket3(3.0, 0.0, 4.0));
  EXPECT_NEAR(std::abs(s[kLevel0]), 0.6, 1e-15);
  EXPECT_NEAR(std::abs(s[kLevel1]), 0.8, 1e-15);
  EXPECT_THROW(PureState3::normalized(Ket3::Zero()), std::invalid_argument);
}

TEST(PureState3, QubitEmbeddingLeavesExcitedEmpty) {
  const auto s = PureState3::from_qubit(QubitKet(1.0, I) / std::sqrt(2.0));
  EXPECT_EQ(s[kLevelE], Complex(0.0));
  EXPECT_NEAR(std::abs(s[kLevel1] - I / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_EQ(PureState3::basis(kLevelE)[kLevelE], Complex(1.0));
}

TEST(DensityMatrix, ValidatesInvariants) {
  Complex3x3 m = Complex3x3::Zero();
  m(0, 0) = 1.0;
  EXPECT_NO_THROW(DensityMatrix{m});

  Complex3x3 trace_two = m;
  trace_two(2, 2) = 1.0;
  EXPECT_THROW(DensityMatrix{trace_two}, std::invalid_argument);

  Complex3x3 non_hermitian = m;
  non_hermitian(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix{non_hermitian}, std::invalid_argument);

  Complex3x3 negative = Complex3x3::Zero();
  negative(0, 0) = 1.5;
  negative(2, 2) = -0.5;
  EXPECT_THROW(DensityMatrix{negative}, std::invalid_argument);
}

TEST(DensityMatrix, PureStateProjector) {
  const auto psi = PureState3::from_qubit(QubitKet(0.6, 0.8 * I));
  const auto rho = DensityMatrix::pure(psi);
  EXPECT_NEAR(rho.trace(), 1.0, 1e-15);
  EXPECT_NEAR(rho.population(kLevel1), 0.64, 1e-15);
  EXPECT_NEAR(rho.min_eigenvalue(), 0.0, 1e-12);
}

TEST(GateUnitary, NamedGatesMatchUpToPhase) {
  const double s = 1.0 / std::sqrt(2.0);
  const Complex2x2 had = (Complex2x2() << s, s, s, -s).finished();
  EXPECT_TRUE(equal_up_to_phase(gate_unitary({kPi / 2, 0.0, kPi}).matrix(), pauli_x(), 1e-12));
  EXPECT_TRUE(equal_up_to_phase(gate_unitary({kPi / 4, 0.0, kPi}).matrix(), had, 1e-12));
  EXPECT_TRUE(equal_up_to_phase(gate_unitary({kPi / 2, kPi / 2, kPi}).matrix(), pauli_y(), 1e-12));
  EXPECT_TRUE(equal_up_to_phase(gate_unitary({0.0, 0.0, kPi}).matrix(), pauli_z(), 1e-12));
  EXPECT_FALSE(equal_up_to_phase(pauli_x(), pauli_z(), 1e-6));
}

TEST(GateUnitary, ClosedFormWithGlobalPhase) {
  // e^{i b/2} (cos(b/2) 1 - i sin(b/2) n.sigma), written out independently.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int k = 0; k < 20; ++k) {
    const double t = u(rng), p = u(rng), b = u(rng);
    const Complex2x2 ns = std::sin(t) * std::cos(p) * pauli_x() +
                          std::sin(t) * std::sin(p) * pauli_y() + std::cos(t) * pauli_z();
    const Complex2x2 expected = std::exp(I * b / 2.0) *
                                (std::cos(b / 2) * Complex2x2::Identity() - I * std::sin(b / 2) * ns);
    EXPECT_LT((gate_unitary({t, p, b}).matrix() - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GateUnitary, RejectsNonFiniteAngles) {
  EXPECT_THROW(gate_unitary({std::nan(""), 0.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(QubitUnitary(2.0 * Complex2x2::Identity()), std::invalid_argument);
}

TEST(BrightDark, DarkStateIsAnnihilatedByDrive) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int k = 0; k < 10; ++k) {
    const double theta = u(rng), phi0 = u(rng), phi1 = u(rng), w = 1.0 + u(rng);
    const Complex w0 = 2.0 * std::sin(theta / 2) * w * std::exp(I * phi0);
    const Complex w1 = -2.0 * std::cos(theta / 2) * w * std::exp(I * phi1);
    const auto bd = bright_dark_states(theta, phi0, phi1);
    const auto h = hamiltonian(w0, w1, 0.0);
    EXPECT_LT((h * bd.dark.amplitudes()).norm(), 1e-12);
    EXPECT_GT((h * bd.bright.amplitudes()).norm(), 0.1);
    EXPECT_NEAR(std::abs(bd.bright.amplitudes().dot(bd.dark.amplitudes())), 0.0, 1e-12);
  }
}

TEST(Hamiltonian, LayoutAndHermiticity) {
  const Complex w0{1.0, 2.0}, w1{-0.5, 0.25};
  const auto h = hamiltonian(w0, w1, 3.0);
  EXPECT_EQ(h(kLevel0, kLevelE), 0.5 * w0);
  EXPECT_EQ(h(kLevel1, kLevelE), 0.5 * w1);
  EXPECT_EQ(h(kLevelE, kLevelE), Complex(3.0));
  EXPECT_EQ(h(kLevel0, kLevel1), Complex(0.0));
  EXPECT_LT(hermiticity_error(h), 1e-15);
}

TEST(Units, AngularRoundTrip) {
  EXPECT_DOUBLE_EQ(angular(1.0), kTwoPi);
  EXPECT_DOUBLE_EQ(hertz(angular(170e3)), 170e3);
}

}  // namespace
}  // namespace holopt
