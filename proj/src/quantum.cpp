#include "holopt/quantum.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace holopt {

namespace {

bool all_finite(const Ket3& v) {
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(v(i).real()) || !std::isfinite(v(i).imag())) return false;
  }
  return true;
}

}  // namespace

PureState3::PureState3(const Ket3& amplitudes) : amps_(amplitudes) {
  if (!all_finite(amps_)) throw std::invalid_argument("PureState3: non-finite amplitude");
  const double norm2 = amps_.squaredNorm();
  if (std::abs(norm2 - 1.0) > 1e-12) {
    throw std::invalid_argument("PureState3: squared norm " + std::to_string(norm2) + " != 1");
  }
}

PureState3 PureState3::normalized(const Ket3& amplitudes) {
  const double n = amplitudes.norm();
  if (!std::isfinite(n) || n == 0.0) throw std::invalid_argument("PureState3: cannot normalize");
  return PureState3(amplitudes / n);
}

PureState3 PureState3::basis(Level level) {
  Ket3 v = Ket3::Zero();
  v(level) = 1.0;
  return PureState3(v);
}

PureState3 PureState3::from_qubit(const QubitKet& qubit) {
  return PureState3::normalized(Ket3(qubit(0), 0.0, qubit(1)));
}

DensityMatrix::DensityMatrix(const Complex3x3& m) : m_(m) {
  if (!m_.allFinite()) throw std::invalid_argument("DensityMatrix: non-finite entry");
  if (hermiticity_error(m_) > kHermitianTol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  }
  const Complex tr = m_.trace();
  if (std::abs(tr.real() - 1.0) > kTraceTol || std::abs(tr.imag()) > kTraceTol) {
    throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr.real()) + " != 1");
  }
  if (min_eigenvalue() < -kEigenTol) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::pure(const PureState3& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

double DensityMatrix::min_eigenvalue() const {
  // Symmetrize so the solver sees an exactly Hermitian input.
  const Complex3x3 h = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<Complex3x3> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void GateParams::validate() const {
  if (!std::isfinite(theta) || !std::isfinite(phi) || !std::isfinite(beta)) {
    throw std::invalid_argument("GateParams: angles must be finite");
  }
}

QubitUnitary::QubitUnitary(const Complex2x2& m) : m_(m) {
  const double err = (m_.adjoint() * m_ - Complex2x2::Identity()).cwiseAbs().maxCoeff();
  if (!(err <= 1e-10)) throw std::invalid_argument("QubitUnitary: U^dagger U != I");
}

QubitUnitary gate_unitary(const GateParams& params) {
  params.validate();
  const double c = std::cos(params.beta / 2.0);
  const double s = std::sin(params.beta / 2.0);
  const double ct = std::cos(params.theta);
  const double st = std::sin(params.theta);
  const Complex i{0.0, 1.0};
  Complex2x2 u;
  u(0, 0) = c - i * s * ct;
  u(0, 1) = -i * s * st * std::exp(-i * params.phi);
  u(1, 0) = -i * s * st * std::exp(i * params.phi);
  u(1, 1) = c + i * s * ct;
  return QubitUnitary(std::exp(i * (params.beta / 2.0)) * u);
}

BrightDark bright_dark_states(double theta, double phi0, double phi1) {
  if (!std::isfinite(theta) || !std::isfinite(phi0) || !std::isfinite(phi1)) {
    throw std::invalid_argument("bright_dark_states: angles must be finite");
  }
  const Complex i{0.0, 1.0};
  const double s = std::sin(theta / 2.0);
  const double c = std::cos(theta / 2.0);
  const Ket3 b(s * std::exp(i * phi0), 0.0, -c * std::exp(i * phi1));
  const Ket3 d(c * std::exp(-i * phi1), 0.0, s * std::exp(-i * phi0));
  return {PureState3::normalized(b), PureState3::normalized(d)};
}

Complex3x3 hamiltonian(Complex omega0, Complex omega1, double delta) {
  Complex3x3 h = Complex3x3::Zero();
  h(kLevel0, kLevelE) = 0.5 * omega0;
  h(kLevelE, kLevel0) = 0.5 * std::conj(omega0);
  h(kLevelE, kLevelE) = delta;
  h(kLevelE, kLevel1) = 0.5 * std::conj(omega1);
  h(kLevel1, kLevelE) = 0.5 * omega1;
  return h;
}

double hermiticity_error(const Complex3x3& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool equal_up_to_phase(const Complex2x2& a, const Complex2x2& b, double tol) {
  // Phase from the largest entry of b, then compare entry-wise.
  Eigen::Index r = 0, c = 0;
  b.cwiseAbs().maxCoeff(&r, &c);
  if (std::abs(b(r, c)) == 0.0) return a.cwiseAbs().maxCoeff() <= tol;
  const Complex ratio = a(r, c) / b(r, c);
  if (std::abs(std::abs(ratio) - 1.0) > tol) return false;
  const Complex phase = ratio / std::abs(ratio);
  return (a - phase * b).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace holopt
